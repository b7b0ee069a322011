//! Waiting-time quantum-jump unraveling.
//!
//! Between jumps the state evolves under e^{−iH_nH t}, whose squared norm
//! decays. A jump occurs when the squared norm (relative to the last jump)
//! reaches a uniform random threshold; the crossing time is located by a
//! safeguarded Newton iteration on the norm, the channel is drawn with weight
//! ‖L_m ψ‖², and the state is renormalized.

use log::warn;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::entanglement::entanglement_entropy;
use super::faber::{faber_bounds, FaberConfig, FaberWorkspace};
use super::operators::{build_operators, FockOperators};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::series::{ObservableSeries, Sample};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOptions {
    /// Propagation step; defaults to 0.05/(Γ+κ+J).
    pub micro_step: Option<f64>,
    /// Entanglement cuts; defaults to {L/2}.
    pub cuts: Option<Vec<usize>>,
    pub faber_tolerance: f64,
    pub faber_max_order: usize,
    /// Relative accuracy of jump times (relative to the propagation step).
    pub jump_time_tolerance: f64,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            micro_step: None,
            cuts: None,
            faber_tolerance: 1e-12,
            faber_max_order: 512,
            jump_time_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    /// Index into [`FockOperators::jumps`].
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub stream: u64,
    pub jumps: Vec<JumpEvent>,
    pub series: ObservableSeries,
    /// Jump events skipped because every channel annihilated the state.
    pub dark_events: usize,
}

/// Operators, propagation settings and observables shared by all
/// trajectories of one parameter point.
#[derive(Debug, Clone)]
pub struct TrajectoryEngine {
    pub ops: FockOperators,
    pub faber: FaberConfig,
    pub micro_step: f64,
    pub cuts: Vec<usize>,
    jump_tol: f64,
    bonds: Vec<(usize, usize)>,
}

impl TrajectoryEngine {
    pub fn new(p: &ModelParams, opts: &TrajectoryOptions) -> Result<Self> {
        let ops = build_operators(p)?;
        let p = ops.params;
        let mut faber = faber_bounds(&ops.effective);
        faber.tolerance = opts.faber_tolerance;
        faber.max_order = opts.faber_max_order;
        let micro_step = opts
            .micro_step
            .unwrap_or(0.05 / (p.gain + p.loss + p.hopping));
        if !(micro_step > 0.0 && micro_step.is_finite()) {
            return Err(Error::InvalidParams(format!("bad micro step {micro_step}")));
        }
        let cuts = opts.cuts.clone().unwrap_or_else(|| vec![p.sites / 2]);
        if cuts.iter().any(|&c| c == 0 || c >= p.sites) {
            return Err(Error::InvalidParams(format!(
                "entanglement cuts must lie in 1..{}",
                p.sites
            )));
        }
        Ok(TrajectoryEngine {
            bonds: p.bonds(),
            ops,
            faber,
            micro_step,
            cuts,
            jump_tol: opts.jump_time_tolerance,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.ops.params
    }

    /// Observables of a normalized state.
    pub fn sample(&self, psi: &StateVector, time: f64) -> Sample {
        let p = &self.ops.params;
        let rot = C64::from_polar(1.0, -p.peierls);
        Sample {
            time,
            density: psi.density(),
            current: self
                .bonds
                .iter()
                .map(|&(j, l)| p.hopping * (rot * psi.hopping_expectation(j, l)).im)
                .collect(),
            doublons: psi.doublons(&self.bonds),
            entropy: self.cuts.iter().map(|&c| entanglement_entropy(psi, c)).collect(),
            momentum: vec![],
        }
    }

    /// One trajectory. The random stream is ChaCha8 seeded with `seed` and
    /// positioned on stream `stream`, so (seed, stream) fully determine it.
    pub fn run(&self, psi0: &StateVector, times: &[f64], seed: u64, stream: u64) -> Result<TrajectoryRecord> {
        if psi0.sites() != self.ops.params.sites {
            return Err(Error::InvalidParams("initial state has the wrong size".into()));
        }
        if (psi0.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition("initial state must be normalized".into()));
        }
        if times.first().is_some_and(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::GridMismatch("time grid must be non-negative and ascending".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut draw = move || loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                return u;
            }
        };

        let mut ws = FaberWorkspace::new();
        let mut psi = psi0.clone();
        let mut trial = psi.clone();
        let mut series = ObservableSeries::new(self.cuts.clone(), vec![]);
        let mut jumps = Vec::new();
        let mut dark_events = 0;
        let mut threshold = draw();
        let mut t = 0.0;
        for &target in times {
            while t < target {
                let h = (target - t).min(self.micro_step);
                trial.amplitudes_mut().copy_from_slice(psi.amplitudes());
                ws.propagate(&self.ops.effective, &self.faber, trial.amplitudes_mut(), h)?;
                let n2 = trial.norm_sqr();
                if n2 > threshold {
                    threshold /= n2;
                    std::mem::swap(&mut psi, &mut trial);
                    psi.normalize();
                    t = if target - t <= self.micro_step { target } else { t + h };
                    continue;
                }
                let tau = self.locate_jump(&mut ws, &psi, &mut trial, threshold, h)?;
                t += tau;
                let weights: Vec<f64> = self
                    .ops
                    .jumps
                    .iter()
                    .map(|j| j.matrix.image_norm_sqr(trial.amplitudes()))
                    .collect();
                let total: f64 = weights.iter().sum();
                if total <= 1e-300 {
                    warn!("dark state at t = {t}: no channel can act, continuing without a jump");
                    dark_events += 1;
                    std::mem::swap(&mut psi, &mut trial);
                    psi.normalize();
                } else {
                    let mut r = draw() * total;
                    let mut channel = weights.len() - 1;
                    for (m, w) in weights.iter().enumerate() {
                        if r < *w {
                            channel = m;
                            break;
                        }
                        r -= w;
                    }
                    self.ops.jumps[channel]
                        .matrix
                        .matvec(trial.amplitudes(), psi.amplitudes_mut());
                    psi.normalize();
                    jumps.push(JumpEvent { time: t, channel });
                }
                threshold = draw();
            }
            series.push(self.sample(&psi, target));
        }
        Ok(TrajectoryRecord {
            seed,
            stream,
            jumps,
            series,
            dark_events,
        })
    }

    /// Finds τ ∈ (0, h] with ‖e^{−iH_nH τ}ψ‖² = threshold; leaves the
    /// propagated state in `out`.
    fn locate_jump(
        &self,
        ws: &mut FaberWorkspace,
        psi: &StateVector,
        out: &mut StateVector,
        threshold: f64,
        h: f64,
    ) -> Result<f64> {
        let (mut lo, mut hi) = (0.0, h);
        // Start from the linear interpolation of the norm over the step.
        let n_end = out.norm_sqr();
        let mut tau = h * (1.0 - threshold) / (1.0 - n_end).max(1e-300);
        tau = tau.clamp(0.0, h);
        for _ in 0..200 {
            out.amplitudes_mut().copy_from_slice(psi.amplitudes());
            ws.propagate(&self.ops.effective, &self.faber, out.amplitudes_mut(), tau)?;
            let f = out.norm_sqr() - threshold;
            if f > 0.0 {
                lo = tau;
            } else {
                hi = tau;
            }
            if f.abs() < 1e-15 || hi - lo < self.jump_tol * h {
                return Ok(tau);
            }
            let slope = -self.ops.decay.expectation(out.amplitudes()).re;
            let newton = tau - f / slope;
            tau = if slope < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(Error::NotConverged("jump time search".into()))
    }
}

/// Convenience wrapper building the engine with default options.
pub fn run_trajectory(p: &ModelParams, psi0: &StateVector, times: &[f64], seed: u64) -> Result<TrajectoryRecord> {
    TrajectoryEngine::new(p, &TrajectoryOptions::default())?.run(psi0, times, seed, 0)
}
