//! Closed-form results for the translation-invariant (periodic, infinite) chain.
//!
//! Conventions: momentum occupations are n_k = (1/L) Σ_{jl} e^{ik(j−l)} ⟨c†_j c_l⟩,
//! and a positive bond current means particles flowing toward lower site index.
//! With these, Γ_k = 2Γ(1+cos(k−θ)), κ_k = 2κ(1+cos(k+φ)) and the steady
//! current is −J ∫dk/2π sin k n_k.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::bessel;
use crate::error::{Error, Result};
use crate::model::{wrap_phase, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFunctions {
    pub momentum: f64,
    pub dispersion: f64,
    pub gain_rate: f64,
    pub loss_rate: f64,
    pub decay_rate: f64,
}

pub fn mode_functions(p: &ModelParams, k: f64) -> ModeFunctions {
    // 2(1 + cos x) = 4cos²(x/2) keeps full relative precision near the zeros.
    let gain_rate = 4.0 * p.gain * (0.5 * (k - p.gain_phase)).cos().powi(2);
    let loss_rate = 4.0 * p.loss * (0.5 * (k + p.loss_phase)).cos().powi(2);
    ModeFunctions {
        momentum: k,
        dispersion: -p.hopping * k.cos(),
        gain_rate,
        loss_rate,
        decay_rate: gain_rate + loss_rate,
    }
}

/// Allowed momenta 2πm/L, wrapped into (−π, π] and sorted.
pub fn momentum_grid(sites: usize) -> Vec<f64> {
    let mut ks: Vec<f64> = (0..sites)
        .map(|m| wrap_phase(2.0 * PI * m as f64 / sites as f64))
        .collect();
    ks.sort_by(|a, b| a.total_cmp(b));
    ks
}

/// Effective right and left hopping amplitudes J₊ and J₋ of the damped
/// single-particle dynamics.
pub fn hopping_amplitudes(p: &ModelParams) -> (C64, C64) {
    let re = p.gain * p.gain_phase.cos() + p.loss * p.loss_phase.cos();
    let asym = p.gain * p.gain_phase.sin() - p.loss * p.loss_phase.sin();
    (
        C64::new(p.hopping + asym, re),
        C64::new(p.hopping - asym, re),
    )
}

/// Smallest decay rate, min_k λ_k.
pub fn dissipative_gap(p: &ModelParams) -> f64 {
    let (g, k) = (p.gain, p.loss);
    let r = g * g + k * k + 2.0 * g * k * (p.gain_phase + p.loss_phase).cos();
    (2.0 * (g + k) - 2.0 * r.max(0.0).sqrt()).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowestMode {
    pub momentum: f64,
    /// λ_k is flat, so the minimizer is not unique and `momentum` is a grid pick.
    pub degenerate: bool,
}

/// Momentum of the slowest decaying mode.
pub fn k_star(p: &ModelParams) -> Result<SlowestMode> {
    if p.gain == 0.0 && p.loss == 0.0 {
        return Err(Error::Precondition(
            "decay spectrum is flat for a closed chain".into(),
        ));
    }
    let y = p.gain * p.gain_phase.sin() - p.loss * p.loss_phase.sin();
    let x = p.gain * p.gain_phase.cos() + p.loss * p.loss_phase.cos();
    let scale = p.gain + p.loss;
    if x.abs() < 1e-14 * scale && y.abs() < 1e-14 * scale {
        let n = 4096;
        let (mut best, mut best_k) = (f64::INFINITY, 0.0);
        for m in 0..n {
            let k = -PI + 2.0 * PI * m as f64 / n as f64;
            let l = mode_functions(p, k).decay_rate;
            if l < best - 1e-15 {
                best = l;
                best_k = k;
            }
        }
        return Ok(SlowestMode {
            momentum: best_k,
            degenerate: true,
        });
    }
    Ok(SlowestMode {
        momentum: (-y).atan2(-x),
        degenerate: false,
    })
}

fn degenerate_rate(p: &ModelParams, decay: f64) -> bool {
    decay <= 1e-13 * (p.gain + p.loss).max(f64::MIN_POSITIVE)
}

/// Steady occupation Γ_k/λ_k; the 0/0 point takes the critical-line limit.
pub fn nk_ss(p: &ModelParams, k: f64) -> f64 {
    let m = mode_functions(p, k);
    if degenerate_rate(p, m.decay_rate) {
        p.critical_filling()
    } else {
        m.gain_rate / m.decay_rate
    }
}

pub fn nk_t(p: &ModelParams, k: f64, t: f64, n0: f64) -> f64 {
    let ss = nk_ss(p, k);
    let lam = mode_functions(p, k).decay_rate;
    ss + (-lam * t).exp() * (n0 - ss)
}

/// Trapezoid sum of `f` over `n` equally spaced periodic points.
fn periodic_mean(n: usize, f: &impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for m in 0..n {
        let k = -PI + 2.0 * PI * (m as f64 + 0.5) / n as f64;
        let (x, y) = f(k);
        a += x;
        b += y;
    }
    (a / n as f64, b / n as f64)
}

/// Doubles the grid until both averages change by less than 1e-10.
fn converged_mean(start: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<(f64, f64, usize)> {
    let mut n = start.max(64);
    let mut prev = periodic_mean(n, &f);
    while n < (1 << 24) {
        n *= 2;
        let cur = periodic_mean(n, &f);
        if (cur.0 - prev.0).abs() < 1e-10 && (cur.1 - prev.1).abs() < 1e-10 {
            return Ok((cur.0, cur.1, n));
        }
        prev = cur;
    }
    Err(Error::NotConverged(format!(
        "momentum quadrature did not settle with {n} points"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    pub density: f64,
    pub current: f64,
}

/// Density ∫n_k dk/2π and current −J∫sin k n_k dk/2π of the steady state.
pub fn steady_observables(p: &ModelParams, quadrature_n: usize) -> Result<Uniform> {
    if quadrature_n < 64 {
        return Err(Error::Precondition("quadrature needs at least 64 points".into()));
    }
    let (density, s, _) = converged_mean(quadrature_n, |k| {
        let n = nk_ss(p, k);
        (n, k.sin() * n)
    })?;
    Ok(Uniform {
        density,
        current: -p.hopping * s,
    })
}

/// Steady current for equal rates and equal phases,
/// J sinθ(|sinθ|−1)/(2cos²θ), written in the form −J sinθ/(2(1+|sinθ|))
/// which has no removable singularity at θ = ±π/2.
pub fn current_closed_form(p: &ModelParams) -> Result<f64> {
    if (p.gain - p.loss).abs() > 1e-12 * (p.gain + p.loss).max(1.0)
        || wrap_phase(p.gain_phase - p.loss_phase).abs() > 1e-12
    {
        return Err(Error::Precondition(
            "closed-form current needs equal rates and equal phases".into(),
        ));
    }
    let s = p.gain_phase.sin();
    Ok(-p.hopping * s / (2.0 * (1.0 + s.abs())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationLength {
    /// ξ⁻¹ in inverse sites; may be +∞ (correlations vanish beyond one site).
    Inverse(f64),
    /// Flat steady distribution: C(r) = δ_{r,0}.
    DeltaCorrelated,
}

pub fn correlation_length(p: &ModelParams) -> CorrelationLength {
    if p.on_critical_line() {
        return CorrelationLength::DeltaCorrelated;
    }
    let s = (0.5 * (p.gain_phase + p.loss_phase)).sin().abs();
    let sum = p.gain + p.loss;
    let cross = 2.0 * (p.gain * p.loss).sqrt() * s;
    let den = sum - cross;
    if den <= 1e-15 * sum.max(f64::MIN_POSITIVE) {
        return CorrelationLength::Inverse(f64::INFINITY);
    }
    CorrelationLength::Inverse(0.5 * ((sum + cross) / den).ln())
}

/// Value of a density and a bond current at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transient {
    pub density: f64,
    pub current: f64,
}

fn require_critical(p: &ModelParams) -> Result<()> {
    if !p.on_critical_line() {
        return Err(Error::Precondition(
            "transient closed forms need gain_phase = −loss_phase".into(),
        ));
    }
    if p.gain + p.loss == 0.0 {
        return Err(Error::Precondition("transient closed forms need Γ+κ > 0".into()));
    }
    Ok(())
}

/// Uniform density and current after starting from the empty chain.
pub fn vacuum_transient(p: &ModelParams, t: f64) -> Result<Transient> {
    require_critical(p)?;
    let nss = p.critical_filling();
    let a = 2.0 * (p.gain + p.loss) * t;
    Ok(Transient {
        density: nss * (1.0 - bessel::i0_scaled(a)),
        current: p.hopping * nss * bessel::i1_scaled(a) * p.loss_phase.sin(),
    })
}

/// Leading large-time behaviour of [`vacuum_transient`].
pub fn vacuum_asymptotics(p: &ModelParams, t: f64) -> Result<Transient> {
    require_critical(p)?;
    let r = p.gain + p.loss;
    let nss = p.critical_filling();
    let sq = (PI * r * t).sqrt();
    Ok(Transient {
        density: nss * (1.0 - 1.0 / (2.0 * sq)),
        current: p.hopping * p.gain * p.loss_phase.sin() / (2.0 * PI.sqrt() * r.powf(1.5) * t.sqrt()),
    })
}

/// Site-resolved density and current (bond site→site+1) from the
/// charge-density wave with even sites occupied.
pub fn cdw_transient(p: &ModelParams, site: usize, t: f64) -> Result<Transient> {
    require_critical(p)?;
    let r = p.gain + p.loss;
    let nss = p.critical_filling();
    let a = 2.0 * r * t;
    let sign = if site % 2 == 0 { 1.0 } else { -1.0 };
    let envelope = (-a).exp();
    let x = 2.0 * p.hopping * t;
    Ok(Transient {
        density: nss + (0.5 - nss) * bessel::i0_scaled(a) + 0.5 * sign * envelope * bessel::j0(x),
        current: -p.hopping * (0.5 - nss) * bessel::i1_scaled(a) * p.loss_phase.sin()
            - 0.5 * p.hopping * sign * envelope * bessel::j1(x),
    })
}

/// Leading 1/√t corrections to the uniform part after a CDW start.
pub fn cdw_asymptotics(p: &ModelParams, t: f64) -> Result<Transient> {
    require_critical(p)?;
    let r = p.gain + p.loss;
    let nss = p.critical_filling();
    let den = 4.0 * PI.sqrt() * r.powf(1.5) * t.sqrt();
    Ok(Transient {
        density: nss + (p.loss - p.gain) / den,
        current: p.hopping * (p.gain - p.loss) * p.loss_phase.sin() / den,
    })
}

/// Deviations of the uniform density and current from their steady values,
/// by momentum quadrature, for a translation-invariant product start with
/// filling `n0` (0 for the vacuum, 1 for the full chain). Works off the
/// critical line too.
pub fn uniform_relaxation(p: &ModelParams, t: f64, n0: f64) -> Result<Transient> {
    let (d, s, _) = converged_mean(256, |k| {
        let m = mode_functions(p, k);
        let dev = (n0 - nk_ss(p, k)) * (-m.decay_rate * t).exp();
        (dev, k.sin() * dev)
    })?;
    Ok(Transient {
        density: d,
        current: -p.hopping * s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectral {
    Lorentzian(f64),
    /// Undamped mode: a delta peak at ω = ε_k.
    Delta { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectiveTemperature {
    Finite(f64),
    /// Distribution is empty (f = 0): T → ±∞.
    Infinite { sign: f64 },
    /// Distribution saturated (|f| → 1) or ω = 0: T → ±0.
    Zero { sign: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeldyshFunctions {
    pub retarded: C64,
    pub advanced: C64,
    pub keldysh: C64,
    pub spectral: Spectral,
    pub distribution: f64,
    pub temperature: EffectiveTemperature,
}

pub fn keldysh(p: &ModelParams, k: f64, omega: f64) -> KeldyshFunctions {
    let m = mode_functions(p, k);
    let w = omega - m.dispersion;
    let half = 0.5 * m.decay_rate;
    let den = w * w + half * half;
    let undamped = degenerate_rate(p, m.decay_rate);
    let distribution = if undamped {
        1.0 - 2.0 * p.critical_filling()
    } else {
        (m.loss_rate - m.gain_rate) / m.decay_rate
    };
    KeldyshFunctions {
        retarded: C64::new(1.0, 0.0) / C64::new(w, half),
        advanced: C64::new(1.0, 0.0) / C64::new(w, -half),
        keldysh: C64::new(0.0, (m.gain_rate - m.loss_rate) / den),
        spectral: if undamped {
            Spectral::Delta { at: m.dispersion }
        } else {
            Spectral::Lorentzian(m.decay_rate / (2.0 * PI * den))
        },
        distribution,
        temperature: effective_temperature(omega, distribution, p.hopping),
    }
}

/// Solves f = tanh(ω / 2T) for T by bisection in log T over [1e-8, 1e8]·J.
pub fn effective_temperature(omega: f64, f: f64, scale: f64) -> EffectiveTemperature {
    let sign = if omega * f < 0.0 { -1.0 } else { 1.0 };
    let af = f.abs();
    if af == 0.0 {
        return EffectiveTemperature::Infinite { sign: 1.0 };
    }
    if af >= 1.0 - 1e-12 || omega == 0.0 {
        return EffectiveTemperature::Zero { sign };
    }
    let aw = omega.abs();
    let g = |ln_t: f64| (aw / (2.0 * ln_t.exp())).tanh() - af;
    let (mut lo, mut hi) = ((1e-8 * scale).ln(), (1e8 * scale).ln());
    if g(hi) > 0.0 {
        return EffectiveTemperature::Infinite { sign };
    }
    if g(lo) < 0.0 {
        return EffectiveTemperature::Zero { sign };
    }
    // g decreases in T; relative width 1e-10 in T is 1e-10 in log T.
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    EffectiveTemperature::Finite(sign * (0.5 * (lo + hi)).exp())
}
