use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::InitialState;

/// Sign (−1)^{number of occupied sites below `site`}.
#[inline]
pub(crate) fn jw_sign(state: usize, site: usize) -> f64 {
    if (state & ((1usize << site) - 1)).count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Amplitudes over occupation bitstrings; bit j is the occupation of site j.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    sites: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn product(occ: &[bool]) -> Self {
        let sites = occ.len();
        let idx = occ
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0usize, |acc, (j, _)| acc | (1 << j));
        let mut amps = vec![C64::new(0.0, 0.0); 1 << sites];
        amps[idx] = C64::new(1.0, 0.0);
        StateVector { sites, amps }
    }

    pub fn from_initial(state: &InitialState, sites: usize) -> Result<Self> {
        Ok(Self::product(&state.occupations(sites)?))
    }

    pub fn from_amplitudes(sites: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << sites {
            return Err(Error::InvalidParams(format!(
                "{} amplitudes for {} sites",
                amps.len(),
                sites
            )));
        }
        Ok(StateVector { sites, amps })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let s = 1.0 / n;
            for a in &mut self.amps {
                *a *= s;
            }
        }
    }

    pub fn scale(&mut self, z: C64) {
        for a in &mut self.amps {
            *a *= z;
        }
    }

    pub fn density(&self) -> Vec<f64> {
        let mut n = vec![0.0; self.sites];
        for (s, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w == 0.0 {
                continue;
            }
            let mut bits = s;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                n[j] += w;
                bits &= bits - 1;
            }
        }
        n
    }

    /// ⟨c†_l c_j⟩ for j ≠ l.
    pub fn hopping_expectation(&self, j: usize, l: usize) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let (bj, bl) = (1usize << j, 1usize << l);
        for (s, a) in self.amps.iter().enumerate() {
            if s & bj == 0 || s & bl != 0 {
                continue;
            }
            let s1 = s ^ bj;
            let sign = jw_sign(s, j) * jw_sign(s1, l);
            let m = s1 | bl;
            acc += self.amps[m].conj() * a * sign;
        }
        acc
    }

    /// Σ over the listed bonds of ⟨n_j n_l⟩.
    pub fn doublons(&self, bonds: &[(usize, usize)]) -> f64 {
        let mut d = 0.0;
        for (s, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w == 0.0 {
                continue;
            }
            let pairs = bonds
                .iter()
                .filter(|(j, l)| s >> j & 1 == 1 && s >> l & 1 == 1)
                .count();
            d += w * pairs as f64;
        }
        d
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}
