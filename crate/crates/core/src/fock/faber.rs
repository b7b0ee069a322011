//! Faber-series evaluation of e^{−iHτ}ψ for non-Hermitian H.
//!
//! With the map z = λ(γ₀ + w + γ₁/w), the unit circle goes to an ellipse
//! centred at λγ₀ with semi-axes λ(1 ± γ₁). The expansion reads
//!
//!   e^{−iHτ} = Σ_n c_n F_n(H/λ),  c_n = e^{−iλγ₀τ} (−i/√γ₁)^n J_n(2√γ₁ λτ),
//!
//! with F_0 = 1, F_1 = z − γ₀, F_2 = (z − γ₀)F_1 − 2γ₁ and
//! F_{n+1} = (z − γ₀)F_n − γ₁F_{n−1} beyond.

use num_complex::Complex64 as C64;

use super::sparse::CsrMatrix;
use crate::bessel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaberConfig {
    /// λ: half the sum of the ellipse semi-axes.
    pub scale: f64,
    /// γ₀: ellipse centre divided by λ.
    pub center: C64,
    /// γ₁ ∈ [1/16, 1]; 1 is the Chebyshev limit of a flat (Hermitian) range.
    pub eccentricity: f64,
    pub tolerance: f64,
    pub max_order: usize,
}

const MARGIN: f64 = 1.1;

/// Ellipse from Gershgorin bounds on the Hermitian and anti-Hermitian parts,
/// which enclose the numerical range of H and therefore its spectrum.
pub fn faber_bounds(h: &CsrMatrix) -> FaberConfig {
    let adj = h.adjoint();
    let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..h.dim() {
        // Row i of H ± H†; the real range uses (H + H†)/2, the imaginary (H − H†)/2i.
        let mut sum: Vec<(usize, C64, C64)> = Vec::new();
        for (j, v) in h.row(i) {
            sum.push((j, v, v));
        }
        for (j, v) in adj.row(i) {
            match sum.iter_mut().find(|e| e.0 == j) {
                Some(e) => {
                    e.1 += v;
                    e.2 -= v;
                }
                None => sum.push((j, v, -v)),
            }
        }
        let mut rx = 0.0;
        let mut ry = 0.0;
        let (mut cx, mut cy) = (0.0, 0.0);
        for (j, plus, minus) in sum {
            let hp = 0.5 * plus;
            let hm = minus / C64::new(0.0, 2.0);
            if j == i {
                cx = hp.re;
                cy = hm.re;
            } else {
                rx += hp.norm();
                ry += hm.norm();
            }
        }
        xlo = xlo.min(cx - rx);
        xhi = xhi.max(cx + rx);
        ylo = ylo.min(cy - ry);
        yhi = yhi.max(cy + ry);
    }
    if h.dim() == 0 {
        (xlo, xhi, ylo, yhi) = (0.0, 0.0, 0.0, 0.0);
    }
    let center = C64::new(0.5 * (xlo + xhi), 0.5 * (ylo + yhi));
    let floor = 1e-8 * center.norm().max(1.0);
    let a = (MARGIN * 0.5 * (xhi - xlo)).max(floor);
    let b = MARGIN * 0.5 * (yhi - ylo);
    // Smallest ellipse through the corner (a, b) with the aspect ratio that
    // minimizes A + B: tan t = (b/a)^{1/3}.
    let (mut big, small) = if b > 0.0 {
        let t = (b / a).cbrt().atan();
        (a / t.cos(), b / t.sin())
    } else {
        (a, 0.0)
    };
    // Keep γ₁ ≥ 1/16; the coefficients carry powers of 1/√γ₁.
    big = big.max(17.0 / 15.0 * small);
    let scale = 0.5 * (big + small);
    FaberConfig {
        scale,
        center: center / scale,
        eccentricity: (big - small) / (big + small),
        tolerance: 1e-12,
        max_order: 512,
    }
}

/// Scratch buffers for repeated propagation with one operator.
#[derive(Debug, Clone, Default)]
pub struct FaberWorkspace {
    prev: Vec<C64>,
    cur: Vec<C64>,
    next: Vec<C64>,
    acc: Vec<C64>,
    bessel_arg: f64,
    bessel: Vec<f64>,
}

impl FaberWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Overwrites `psi` with e^{−iHτ}psi; returns the highest order used.
    pub fn propagate(&mut self, h: &CsrMatrix, cfg: &FaberConfig, psi: &mut [C64], tau: f64) -> Result<usize> {
        if tau == 0.0 {
            return Ok(0);
        }
        let d = psi.len();
        for v in [&mut self.prev, &mut self.cur, &mut self.next, &mut self.acc] {
            v.resize(d, C64::new(0.0, 0.0));
        }
        let lam = cfg.scale;
        let g1 = cfg.eccentricity;
        let sq = g1.sqrt();
        let x = 2.0 * sq * lam * tau.abs();
        if self.bessel_arg != x || self.bessel.len() < cfg.max_order + 1 {
            self.bessel = bessel::jn_sequence(cfg.max_order, x);
            self.bessel_arg = x;
        }
        let shift = cfg.center * lam;
        let inv = 1.0 / lam;
        let psi_norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi_norm == 0.0 {
            return Ok(0);
        }
        let thresh = cfg.tolerance * psi_norm;
        let phase = C64::new(0.0, -lam * tau) * cfg.center;
        let prefactor = phase.exp();
        // (−i/√γ₁)^n, with the sign of τ folded in for backward steps.
        let step = C64::new(0.0, -tau.signum()) / sq;
        let mut power = C64::new(1.0, 0.0);

        // n = 0
        let c0 = prefactor * self.bessel[0];
        for (a, p) in self.acc.iter_mut().zip(psi.iter()) {
            *a = c0 * p;
        }
        self.prev.copy_from_slice(psi);
        // n = 1
        h.matvec_shifted(&self.prev, &mut self.cur, shift, inv);
        let mut last_small = false;
        let mut n = 1;
        loop {
            power *= step;
            let cn = prefactor * power * self.bessel[n];
            let norm_n = self.cur.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for (a, v) in self.acc.iter_mut().zip(&self.cur) {
                *a += cn * v;
            }
            let small = cn.norm() * norm_n < thresh;
            if small && last_small && (n as f64) > x {
                break;
            }
            last_small = small;
            if n >= cfg.max_order {
                return Err(Error::NotConverged(format!(
                    "Faber series not converged at order {n} (argument {x:.3}); reduce the step"
                )));
            }
            // F_{n+1} = (z − γ₀)F_n − γ₁F_{n−1}, with 2γ₁ for n = 1.
            let w = if n == 1 { 2.0 * g1 } else { g1 };
            h.matvec_shifted(&self.cur, &mut self.next, shift, inv);
            for (nx, pv) in self.next.iter_mut().zip(&self.prev) {
                *nx -= w * pv;
            }
            std::mem::swap(&mut self.prev, &mut self.cur);
            std::mem::swap(&mut self.cur, &mut self.next);
            n += 1;
        }
        psi.copy_from_slice(&self.acc);
        Ok(n)
    }
}

/// e^{−iHτ}ψ as a new vector.
pub fn faber_step(psi: &[C64], h: &CsrMatrix, cfg: &FaberConfig, tau: f64) -> Result<Vec<C64>> {
    let mut out = psi.to_vec();
    FaberWorkspace::new().propagate(h, cfg, &mut out, tau)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_sparse(dim: usize, seed: u64, hermitian: bool) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            for _ in 0..4 {
                let j = rng.random_range(0..dim);
                let v = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                m[(i, j)] += v;
            }
        }
        if hermitian {
            m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        } else {
            // Dissipative: subtract a positive part so the evolution decays.
            let k = &m * m.adjoint();
            let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            m = h - k * C64::new(0.0, 0.25);
        }
        CsrMatrix::from_dense(&m)
    }

    fn random_state(dim: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / n).collect()
    }

    fn error_vs_dense(h: &CsrMatrix, psi: &[C64], tau: f64) -> f64 {
        let cfg = faber_bounds(h);
        let got = faber_step(psi, h, &cfg, tau).unwrap();
        let u = (h.to_dense() * C64::new(0.0, -tau)).exp();
        let want = u * nalgebra::DVector::from_column_slice(psi);
        got.iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_step_is_identity() {
        let h = random_sparse(16, 1, false);
        let psi = random_state(16, 1);
        assert_eq!(faber_step(&psi, &h, &faber_bounds(&h), 0.0).unwrap(), psi);
    }

    #[test]
    fn hermitian_bounds_are_chebyshev_like() {
        let h = random_sparse(32, 2, true);
        let cfg = faber_bounds(&h);
        assert!((cfg.eccentricity - 1.0).abs() < 1e-6);
        assert!(cfg.center.im.abs() < 1e-12);
    }

    #[test]
    fn bounds_scale_linearly() {
        let h = random_sparse(32, 3, false);
        let a = faber_bounds(&h);
        let b = faber_bounds(&h.scaled(C64::new(2.0, 0.0)));
        assert!((b.scale / a.scale - 2.0).abs() < 1e-12);
        assert!((b.center - a.center).norm() < 1e-12);
        assert!((b.eccentricity - a.eccentricity).abs() < 1e-12);
    }

    #[test]
    fn spectrum_inside_ellipse() {
        for seed in 0..5 {
            let h = random_sparse(48, seed, false);
            let cfg = faber_bounds(&h);
            let ev = h.to_dense().schur().unpack().1.diagonal();
            let a = cfg.scale * (1.0 + cfg.eccentricity);
            let b = cfg.scale * (1.0 - cfg.eccentricity);
            for z in ev.iter() {
                let w = z - cfg.center * cfg.scale;
                assert!((w.re / a).powi(2) + (w.im / b).powi(2) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn matches_dense_exponential() {
        for (dim, seed) in [(16, 4), (64, 5), (256, 6)] {
            for tau in [0.05, 0.4, 1.5] {
                let h = random_sparse(dim, seed, false);
                let psi = random_state(dim, seed);
                let e = error_vs_dense(&h, &psi, tau);
                assert!(e < 1e-10, "dim {dim} tau {tau}: {e:e}");
            }
        }
    }

    #[test]
    fn unitary_norm_preserved() {
        let h = random_sparse(128, 7, true);
        let cfg = faber_bounds(&h);
        let mut ws = FaberWorkspace::new();
        let mut psi = random_state(128, 7);
        for _ in 0..10 {
            ws.propagate(&h, &cfg, &mut psi, 0.1).unwrap();
        }
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_large_step_reports() {
        let h = random_sparse(16, 8, true);
        let mut cfg = faber_bounds(&h);
        cfg.max_order = 8;
        assert!(faber_step(&random_state(16, 8), &h, &cfg, 50.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn random_operators_match(seed in 0u64..10_000, dim in 16usize..96, tau in 0.01f64..1.0) {
            let h = random_sparse(dim, seed, false);
            let psi = random_state(dim, seed);
            prop_assert!(error_vs_dense(&h, &psi, tau) < 1e-10);
        }
    }
}
