//! Least-squares fits for relaxation laws and correlation lengths.

use crate::error::{Error, Result};
use crate::gaussian::CorrelationMatrix;
use crate::model::{Boundary, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// |v − v∞| ≈ A t^{−α}; `value` is α.
    PowerLaw,
    /// |v − v∞| ≈ A e^{−r t}; `value` is r.
    Exponential,
    /// |C(r)| ≈ A e^{−r/ξ}; `value` is ξ⁻¹.
    CorrelationLength,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub value: f64,
    pub amplitude: f64,
    /// RMS of the log residuals of the chosen model.
    pub residual: f64,
    /// RMS of the log residuals of the competing model.
    pub alternative_residual: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Slope, intercept and RMS residual of y against x.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).powi(2))
        .sum();
    (slope, icpt, (rss / n).sqrt())
}

/// Fits the approach of `values` to `target` over times in `window`.
///
/// Both a power law and an exponential are fitted; the one with the smaller
/// log residual is reported. The window must span at least one decade and the
/// deviation must shrink monotonically across it.
pub fn fit_power_law(times: &[f64], values: &[f64], target: f64, window: (f64, f64)) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(Error::GridMismatch("times and values differ in length".into()));
    }
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 >= 10.0 * t0 * (1.0 - 1e-12)) {
        return Err(Error::Fit(format!(
            "window [{t0}, {t1}] is shorter than one decade"
        )));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t0 && **t <= t1)
        .map(|(t, v)| (*t, (v - target).abs()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!("only {} samples in the window", pts.len())));
    }
    let first = pts[0].1;
    let last = pts[pts.len() - 1].1;
    if !(last < first * (1.0 - 1e-9)) || last <= 0.0 {
        return Err(Error::Fit("series does not approach the target".into()));
    }
    if pts.windows(2).any(|w| w[1].1 > w[0].1 * (1.0 + 1e-9)) {
        return Err(Error::Fit("deviation is not monotone in the window".into()));
    }
    let lt: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (sp, ip, rp) = linear_fit(&lt, &ly);
    let (se, ie, re) = linear_fit(&t, &ly);
    let window = (pts[0].0, pts[pts.len() - 1].0);
    Ok(if rp <= re {
        FitResult {
            model: FitModel::PowerLaw,
            value: -sp,
            amplitude: ip.exp(),
            residual: rp,
            alternative_residual: re,
            window,
            points: pts.len(),
        }
    } else {
        FitResult {
            model: FitModel::Exponential,
            value: -se,
            amplitude: ie.exp(),
            residual: re,
            alternative_residual: rp,
            window,
            points: pts.len(),
        }
    })
}

/// Exponential fit of the translation-averaged |⟨c†_j c_{j+r}⟩| over
/// r ∈ [2, L/4], stopping where the correlations reach the 1e-13 noise floor.
pub fn fit_correlation_length(c: &CorrelationMatrix, p: &ModelParams) -> Result<FitResult> {
    if p.boundary != Boundary::Periodic {
        return Err(Error::Precondition("correlation-length fit needs a periodic chain".into()));
    }
    let n = c.sites();
    let r_max = n / 4;
    if r_max < 4 {
        return Err(Error::Fit(format!("chain of {n} sites is too short")));
    }
    let mean_abs = |r: usize| -> f64 {
        (0..n).map(|j| c.get(j, (j + r) % n).norm()).sum::<f64>() / n as f64
    };
    if mean_abs(2) < 1e-14 {
        return Err(Error::Fit("correlations vanish beyond one site (delta-correlated)".into()));
    }
    let mut rs = Vec::new();
    let mut ly = Vec::new();
    for r in 2..=r_max {
        let m = mean_abs(r);
        if m < 1e-13 {
            break;
        }
        rs.push(r as f64);
        ly.push(m.ln());
    }
    if rs.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} distances above the noise floor",
            rs.len()
        )));
    }
    let (s, i, res) = linear_fit(&rs, &ly);
    let lr: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let (_, _, res_pl) = linear_fit(&lr, &ly);
    if res_pl < res {
        return Err(Error::Fit("correlations decay as a power law".into()));
    }
    if res > 0.1 {
        return Err(Error::Fit(format!("exponential fit residual {res:.3} too large")));
    }
    Ok(FitResult {
        model: FitModel::CorrelationLength,
        value: -s,
        amplitude: i.exp(),
        residual: res,
        alternative_residual: res_pl,
        window: (rs[0], rs[rs.len() - 1]),
        points: rs.len(),
    })
}
