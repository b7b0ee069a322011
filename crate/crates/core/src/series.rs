//! Time series of observables shared by all solver tiers.

use crate::error::{Error, Result};
use crate::fit::FitResult;

/// Observables at one instant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sample {
    pub time: f64,
    pub density: Vec<f64>,
    /// One entry per bond, in [`crate::ModelParams::bonds`] order.
    pub current: Vec<f64>,
    pub doublons: f64,
    /// One entry per requested cut; empty for mixed-state tiers.
    pub entropy: Vec<f64>,
    /// n_k on the momentum grid; empty when not computed.
    pub momentum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub density: Vec<Vec<f64>>,
    pub current: Vec<Vec<f64>>,
    pub doublons: Vec<f64>,
    pub cuts: Vec<usize>,
    pub entropy: Vec<Vec<f64>>,
    pub momenta: Vec<f64>,
    pub momentum: Vec<Vec<f64>>,
    /// Standard errors of the mean, present for ensemble averages.
    pub errors: Option<StandardErrors>,
    pub fits: Vec<FitResult>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StandardErrors {
    pub density: Vec<Vec<f64>>,
    pub current: Vec<Vec<f64>>,
    pub doublons: Vec<f64>,
    pub entropy: Vec<Vec<f64>>,
}

impl ObservableSeries {
    pub fn new(cuts: Vec<usize>, momenta: Vec<f64>) -> Self {
        ObservableSeries {
            cuts,
            momenta,
            ..Default::default()
        }
    }

    pub fn push(&mut self, s: Sample) {
        self.times.push(s.time);
        self.density.push(s.density);
        self.current.push(s.current);
        self.doublons.push(s.doublons);
        self.entropy.push(s.entropy);
        self.momentum.push(s.momentum);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.density.first().map_or(0, Vec::len)
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            time: self.times[i],
            density: self.density[i].clone(),
            current: self.current[i].clone(),
            doublons: self.doublons[i],
            entropy: self.entropy[i].clone(),
            momentum: self.momentum[i].clone(),
        }
    }

    /// Total particle number at each time.
    pub fn particle_number(&self) -> Vec<f64> {
        self.density.iter().map(|d| d.iter().sum()).collect()
    }

    /// (1/L) Σ_j (−1)^j n_j at each time.
    pub fn staggered_amplitude(&self) -> Vec<f64> {
        self.density
            .iter()
            .map(|d| {
                let s: f64 = d
                    .iter()
                    .enumerate()
                    .map(|(j, n)| if j % 2 == 0 { *n } else { -*n })
                    .sum();
                s / d.len() as f64
            })
            .collect()
    }

    /// Checks that every per-time array has the same length as the time grid
    /// and a consistent inner length.
    pub fn check_shapes(&self) -> Result<()> {
        let n = self.times.len();
        let bad = |what: &str| Err(Error::GridMismatch(format!("{what} does not match the time grid")));
        if self.density.len() != n
            || self.current.len() != n
            || self.doublons.len() != n
            || self.entropy.len() != n
            || self.momentum.len() != n
        {
            return bad("series length");
        }
        let l = self.sites();
        if self.density.iter().any(|d| d.len() != l) {
            return bad("density profile");
        }
        if self.entropy.iter().any(|e| !e.is_empty() && e.len() != self.cuts.len()) {
            return bad("entropy cuts");
        }
        if self
            .momentum
            .iter()
            .any(|m| !m.is_empty() && m.len() != self.momenta.len())
        {
            return bad("momentum grid");
        }
        if let Some(e) = &self.errors {
            if e.density.len() != n || e.current.len() != n || e.doublons.len() != n {
                return bad("standard errors");
            }
        }
        Ok(())
    }
}
