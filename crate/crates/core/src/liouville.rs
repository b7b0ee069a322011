//! Brute-force integration of the master equation
//! ∂tρ = −i[H, ρ] + Σ (LρL† − ½{L†L, ρ}) on the full 2^L × 2^L density
//! matrix, for chains of at most six sites.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{build_operators_limited, CsrMatrix, FockOperators, StateVector};
use crate::model::{InitialState, ModelParams};
use crate::series::{ObservableSeries, Sample};

/// Largest chain the oracle accepts.
pub const MAX_SITES: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    sites: usize,
    rho: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn pure(psi: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        DensityMatrix {
            sites: psi.sites(),
            rho: &v * v.adjoint(),
        }
    }

    pub fn from_initial(state: &InitialState, sites: usize) -> Result<Self> {
        Ok(Self::pure(&StateVector::from_initial(state, sites)?))
    }

    pub fn maximally_mixed(sites: usize) -> Self {
        let d = 1 << sites;
        DensityMatrix {
            sites,
            rho: DMatrix::identity(d, d) / C64::new(d as f64, 0.0),
        }
    }

    /// Wraps a matrix without normalizing; the dimension must be 2^sites.
    pub fn from_matrix(sites: usize, rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != 1 << sites || rho.ncols() != 1 << sites {
            return Err(Error::InvalidParams("density matrix has the wrong dimension".into()));
        }
        Ok(DensityMatrix { sites, rho })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho.symmetric_eigenvalues().min()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (&self.rho - &other.rho).norm()
    }

    fn enforce(&mut self) {
        self.rho = (&self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        let tr = self.trace();
        self.rho /= C64::new(tr, 0.0);
    }

    pub fn density(&self) -> Vec<f64> {
        (0..self.sites)
            .map(|j| {
                (0..self.rho.nrows())
                    .filter(|s| s >> j & 1 == 1)
                    .map(|s| self.rho[(s, s)].re)
                    .sum()
            })
            .collect()
    }

    /// Tr(ρ c†_l c_j) for j ≠ l.
    pub fn hopping_expectation(&self, j: usize, l: usize) -> C64 {
        let (bj, bl) = (1usize << j, 1usize << l);
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..self.rho.nrows() {
            if s & bj == 0 || s & bl != 0 {
                continue;
            }
            let s1 = s ^ bj;
            let sign = jw_parity(s, j) * jw_parity(s1, l);
            acc += self.rho[(s, s1 | bl)] * sign;
        }
        acc
    }

    pub fn doublons(&self, bonds: &[(usize, usize)]) -> f64 {
        (0..self.rho.nrows())
            .map(|s| {
                let pairs = bonds.iter().filter(|(j, l)| s >> j & 1 == 1 && s >> l & 1 == 1).count();
                pairs as f64 * self.rho[(s, s)].re
            })
            .sum()
    }
}

fn jw_parity(state: usize, site: usize) -> f64 {
    if (state & ((1 << site) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Master-equation generator for one parameter point.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    ops: FockOperators,
    bonds: Vec<(usize, usize)>,
}

/// out = A·m for sparse A and column-major dense m.
fn sparse_times_dense(a: &CsrMatrix, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
    let d = m.nrows();
    let src = m.as_slice();
    let dst = out.as_mut_slice();
    for c in 0..m.ncols() {
        a.matvec(&src[c * d..(c + 1) * d], &mut dst[c * d..(c + 1) * d]);
    }
}

impl Liouvillian {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let ops = build_operators_limited(p, MAX_SITES)?;
        Ok(Liouvillian {
            bonds: ops.params.bonds(),
            ops,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.ops.params
    }

    /// dρ/dt.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = rho.nrows();
        let mut x = DMatrix::zeros(d, d);
        sparse_times_dense(&self.ops.effective, rho, &mut x);
        // −i H_nH ρ + i ρ H_nH† with ρ Hermitian.
        let mut out = (&x - x.adjoint()) * C64::new(0.0, -1.0);
        let mut y = DMatrix::zeros(d, d);
        for jump in &self.ops.jumps {
            sparse_times_dense(&jump.matrix, rho, &mut y);
            let ya = y.adjoint();
            sparse_times_dense(&jump.matrix, &ya, &mut x);
            out += &x;
        }
        out
    }

    /// Largest step allowed by the integrator.
    pub fn max_step(&self) -> f64 {
        let p = &self.ops.params;
        0.005 / p.hopping.max(p.interaction.abs()).max(p.gain + p.loss).max(1e-12)
    }

    fn rk4(&self, rho: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
        let hc = C64::new(h, 0.0);
        let half = C64::new(0.5 * h, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * hc));
        rho + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (hc / 6.0)
    }

    pub fn sample(&self, rho: &DensityMatrix, time: f64) -> Sample {
        let p = &self.ops.params;
        let rot = C64::from_polar(1.0, -p.peierls);
        Sample {
            time,
            density: rho.density(),
            current: self
                .bonds
                .iter()
                .map(|&(j, l)| p.hopping * (rot * rho.hopping_expectation(j, l)).im)
                .collect(),
            doublons: rho.doublons(&self.bonds),
            entropy: vec![],
            momentum: vec![],
        }
    }

    /// Density matrices on the ascending grid `times`. The first step of
    /// every sampling interval is compared against two half steps.
    pub fn evolve(&self, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        if rho0.sites != self.ops.params.sites {
            return Err(Error::InvalidParams("initial state has the wrong size".into()));
        }
        if times.first().is_some_and(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::GridMismatch("time grid must be non-negative and ascending".into()));
        }
        let mut rho = rho0.clone();
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        let h_max = self.max_step();
        for &target in times {
            let span = target - t;
            if span > 0.0 {
                let n = (span / h_max).ceil() as usize;
                let h = span / n as f64;
                for i in 0..n {
                    let next = self.rk4(&rho.rho, h);
                    rho.rho = if i == 0 {
                        let mid = self.rk4(&rho.rho, 0.5 * h);
                        let fine = self.rk4(&mid, 0.5 * h);
                        let dev = (&fine - &next).iter().map(|z| z.norm()).fold(0.0, f64::max);
                        if dev > 1e-9 {
                            return Err(Error::StepCheck {
                                time: t,
                                deviation: dev,
                                tolerance: 1e-9,
                            });
                        }
                        fine
                    } else {
                        next
                    };
                    rho.enforce();
                }
                t = target;
            }
            out.push(rho.clone());
        }
        Ok(out)
    }

    pub fn evolve_series(&self, rho0: &DensityMatrix, times: &[f64]) -> Result<ObservableSeries> {
        let states = self.evolve(rho0, times)?;
        let mut series = ObservableSeries::new(vec![], vec![]);
        for (rho, &t) in states.iter().zip(times) {
            series.push(self.sample(rho, t));
        }
        Ok(series)
    }

    /// Long-time limit, reached by evolving from `start` (maximally mixed
    /// by default) until ‖dρ/dt‖_F < tolerance or the time budget runs out.
    pub fn steady(&self, start: Option<&DensityMatrix>, tolerance: f64, budget: f64) -> Result<DensityMatrix> {
        let mut rho = start
            .cloned()
            .unwrap_or_else(|| DensityMatrix::maximally_mixed(self.ops.params.sites));
        let h = self.max_step();
        let check_every = (1.0 / h).ceil() as usize;
        let mut t = 0.0;
        loop {
            let rate = self.apply(&rho.rho).norm();
            if rate < tolerance {
                return Ok(rho);
            }
            if t >= budget {
                let hint = if self.ops.params.on_critical_line() {
                    " (parameters sit on the gapless line)"
                } else {
                    ""
                };
                return Err(Error::NotConverged(format!(
                    "steady state: ‖dρ/dt‖ = {rate:e} after t = {t}{hint}"
                )));
            }
            for _ in 0..check_every {
                rho.rho = self.rk4(&rho.rho, h);
                rho.enforce();
            }
            t += check_every as f64 * h;
        }
    }
}

pub fn evolve_rho(p: &ModelParams, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    Liouvillian::new(p)?.evolve(rho0, times)
}

/// Steady state with the default criterion ‖dρ/dt‖_F < 1e-10 and a budget of
/// 4000/(Γ+κ) time units.
pub fn steady_rho(p: &ModelParams) -> Result<DensityMatrix> {
    let l = Liouvillian::new(p)?;
    let rate = (l.params().gain + l.params().loss).max(1e-3);
    l.steady(None, 1e-10, 4000.0 / rate)
}

/// Acceptance rule for [`compare`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// k·√(σ_a² + σ_b²) from the attached standard errors, plus a 1e-8 floor
    /// for deterministic points where both errors vanish.
    StandardErrors(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub observable: String,
    pub max_deviation: f64,
    /// Time at which the deviation relative to its threshold is largest.
    pub worst_time: f64,
    /// Largest deviation divided by the threshold; below 1 passes.
    pub worst_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub deviations: Vec<Deviation>,
    pub pass: bool,
}

const SE_FLOOR: f64 = 1e-8;

type Field = fn(&ObservableSeries) -> Option<&Vec<Vec<f64>>>;

/// Pointwise comparison of two series on a common grid. Density, current and
/// doublons are always compared; entropy when both series carry it.
pub fn compare(a: &ObservableSeries, b: &ObservableSeries, tol: Tolerance) -> Result<ComparisonReport> {
    a.check_shapes()?;
    b.check_shapes()?;
    if a.len() != b.len() || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-9 * (1.0 + x.abs())) {
        return Err(Error::GridMismatch("series are sampled on different times".into()));
    }
    if a.sites() != b.sites() {
        return Err(Error::GridMismatch("series describe different chains".into()));
    }
    if let Tolerance::StandardErrors(_) = tol {
        if a.errors.is_none() && b.errors.is_none() {
            return Err(Error::Precondition("neither series carries standard errors".into()));
        }
    }
    let doublons = |s: &ObservableSeries| s.doublons.iter().map(|d| vec![*d]).collect::<Vec<_>>();
    let fields: [(&str, Field, Field); 3] = [
        ("density", |s| Some(&s.density), |s| s.errors.as_ref().map(|e| &e.density)),
        ("current", |s| Some(&s.current), |s| s.errors.as_ref().map(|e| &e.current)),
        ("entropy", |s| Some(&s.entropy), |s| s.errors.as_ref().map(|e| &e.entropy)),
    ];
    let mut deviations = Vec::new();
    let mut push = |name: &str, va: &[Vec<f64>], vb: &[Vec<f64>], ea: Option<&[Vec<f64>]>, eb: Option<&[Vec<f64>]>| {
        let mut dev = Deviation {
            observable: name.to_string(),
            max_deviation: 0.0,
            worst_time: a.times.first().copied().unwrap_or(0.0),
            worst_ratio: 0.0,
            pass: true,
        };
        for i in 0..va.len() {
            for k in 0..va[i].len() {
                let d = (va[i][k] - vb[i][k]).abs();
                let threshold = match tol {
                    Tolerance::Absolute(x) => x,
                    Tolerance::StandardErrors(kk) => {
                        let se = |e: Option<&[Vec<f64>]>| e.and_then(|e| e[i].get(k)).copied().unwrap_or(0.0);
                        kk * (se(ea).powi(2) + se(eb).powi(2)).sqrt() + SE_FLOOR
                    }
                };
                dev.max_deviation = dev.max_deviation.max(d);
                let ratio = d / threshold;
                if ratio > dev.worst_ratio {
                    dev.worst_ratio = ratio;
                    dev.worst_time = a.times[i];
                }
            }
        }
        dev.pass = dev.worst_ratio <= 1.0;
        deviations.push(dev);
    };
    for (name, value, error) in fields {
        let (va, vb) = (value(a).unwrap(), value(b).unwrap());
        if name == "entropy" && (va.iter().any(Vec::is_empty) || vb.iter().any(Vec::is_empty)) {
            continue;
        }
        if va.iter().zip(vb).any(|(x, y)| x.len() != y.len()) {
            return Err(Error::GridMismatch(format!("{name} profiles differ in length")));
        }
        push(name, va, vb, error(a).map(Vec::as_slice), error(b).map(Vec::as_slice));
    }
    let (da, db) = (doublons(a), doublons(b));
    let se_d = |s: &ObservableSeries| s.errors.as_ref().map(|e| e.doublons.iter().map(|d| vec![*d]).collect::<Vec<_>>());
    let (ea, eb) = (se_d(a), se_d(b));
    push("doublons", &da, &db, ea.as_deref(), eb.as_deref());
    let pass = deviations.iter().all(|d| d.pass);
    Ok(ComparisonReport { deviations, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian;
    use crate::model::Boundary;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..=n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn pure_state_observables_match_fock_tier() {
        let p = ModelParams::open(4).with_rates(0.0, 0.0);
        let ops = crate::fock::build_operators(&p).unwrap();
        let mut psi = StateVector::from_initial(&InitialState::ChargeDensityWave, 4).unwrap();
        let cfg = crate::fock::faber_bounds(&ops.effective);
        crate::fock::FaberWorkspace::new()
            .propagate(&ops.effective, &cfg, psi.amplitudes_mut(), 0.7)
            .unwrap();
        let rho = DensityMatrix::pure(&psi);
        for (a, b) in rho.density().iter().zip(psi.density()) {
            assert!((a - b).abs() < 1e-14);
        }
        for (j, l) in p.bonds() {
            assert!((rho.hopping_expectation(j, l) - psi.hopping_expectation(j, l)).norm() < 1e-14);
        }
        assert!((rho.doublons(&p.bonds()) - psi.doublons(&p.bonds())).abs() < 1e-14);
    }

    #[test]
    fn unitary_purity_conserved() {
        let p = ModelParams::periodic(4).with_rates(0.0, 0.0).with_interaction(1.5);
        let rho0 = DensityMatrix::from_initial(&InitialState::ChargeDensityWave, 4).unwrap();
        let states = evolve_rho(&p, &rho0, &grid(5, 1.0)).unwrap();
        for r in &states {
            assert!((r.purity() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_hermiticity_and_positivity() {
        let p = ModelParams::open(4).with_rates(0.3, 0.1).with_phases(0.3, 2.0).with_interaction(2.0);
        let rho0 = DensityMatrix::from_initial(&InitialState::DomainWall, 4).unwrap();
        for r in evolve_rho(&p, &rho0, &grid(10, 1.0)).unwrap() {
            assert!((r.trace() - 1.0).abs() < 1e-10);
            assert!(r.hermiticity_error() < 1e-14);
            assert!(r.min_eigenvalue() > -1e-8);
        }
    }

    #[test]
    fn evolution_is_linear() {
        let p = ModelParams::open(3).with_rates(0.2, 0.3).with_phases(1.0, -0.5).with_interaction(0.7);
        let a = DensityMatrix::from_initial(&InitialState::Bitstring(vec![true, false, true]), 3).unwrap();
        let b = DensityMatrix::from_initial(&InitialState::Full, 3).unwrap();
        let w = 0.3;
        let mix = DensityMatrix::from_matrix(3, a.matrix() * C64::new(w, 0.0) + b.matrix() * C64::new(1.0 - w, 0.0)).unwrap();
        let times = grid(4, 0.5);
        let l = Liouvillian::new(&p).unwrap();
        let (ea, eb, em) = (l.evolve(&a, &times).unwrap(), l.evolve(&b, &times).unwrap(), l.evolve(&mix, &times).unwrap());
        for i in 0..times.len() {
            let want = ea[i].matrix() * C64::new(w, 0.0) + eb[i].matrix() * C64::new(1.0 - w, 0.0);
            assert!((em[i].matrix() - want).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_gaussian_tier() {
        for bc in [Boundary::Periodic, Boundary::Open] {
            let p = ModelParams {
                boundary: bc,
                ..ModelParams::periodic(4).with_rates(0.15, 0.25).with_phases(0.9, -2.1)
            };
            let times = grid(8, 1.0);
            let rho0 = DensityMatrix::from_initial(&InitialState::ChargeDensityWave, 4).unwrap();
            let a = Liouvillian::new(&p).unwrap().evolve_series(&rho0, &times).unwrap();
            let gen = gaussian::build_generator(&p).unwrap();
            let c0 = gaussian::CorrelationMatrix::from_initial(&InitialState::ChargeDensityWave, 4).unwrap();
            let b = gaussian::evolve_series(&gen, &c0, &times, None).unwrap();
            let report = compare(&a, &b, Tolerance::Absolute(1e-7)).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn one_sided_rates_pin_the_steady_state() {
        for bc in [Boundary::Periodic, Boundary::Open] {
            let base = ModelParams { boundary: bc, ..ModelParams::periodic(3) };
            let vac = steady_rho(&base.clone().with_rates(0.0, 0.5)).unwrap();
            let want = DensityMatrix::from_initial(&InitialState::Vacuum, 3).unwrap();
            assert!(vac.distance(&want) < 1e-8, "{bc:?}");
            let full = steady_rho(&base.with_rates(0.5, 0.0)).unwrap();
            let want = DensityMatrix::from_initial(&InitialState::Full, 3).unwrap();
            assert!(full.distance(&want) < 1e-8, "{bc:?}");
        }
    }

    #[test]
    fn edge_charges_have_opposite_signs() {
        let p = ModelParams::open(4).with_rates(0.1, 0.1).with_phases(PI / 2.0, PI / 2.0);
        let n = steady_rho(&p).unwrap().density();
        assert!((n[0] - 0.5) * (n[3] - 0.5) < 0.0, "{n:?}");
        assert!((n[0] - 0.5).abs() > 1e-3);
    }

    #[test]
    fn balanced_periodic_chain_is_half_filled() {
        // Half filling everywhere, but the uniform current keeps ρ away from
        // the identity; the bond correlations follow the Gaussian tier.
        let p = ModelParams::periodic(4).with_rates(0.1, 0.1).with_phases(PI / 2.0, PI / 2.0);
        let l = Liouvillian::new(&p).unwrap();
        let rho = steady_rho(&p).unwrap();
        let s = l.sample(&rho, 0.0);
        assert!(s.density.iter().all(|n| (n - 0.5).abs() < 1e-8));
        let c = gaussian::steady_state(&gaussian::build_generator(&p).unwrap()).unwrap();
        let o = gaussian::observables(&c, &p);
        for (a, b) in s.current.iter().zip(&o.current) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(s.current[0].abs() > 0.1);
    }

    #[test]
    fn size_and_grid_errors() {
        assert!(matches!(Liouvillian::new(&ModelParams::open(7)), Err(Error::TooLarge { .. })));
        let p = ModelParams::open(3);
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(evolve_rho(&p, &rho, &[1.0, 0.5]).is_err());
        assert!(evolve_rho(&p, &DensityMatrix::maximally_mixed(2), &[1.0]).is_err());
    }

    fn short_series(theta: f64) -> ObservableSeries {
        let p = ModelParams::open(3).with_rates(0.3, 0.3).with_phases(theta, 0.4);
        let rho0 = DensityMatrix::from_initial(&InitialState::Bitstring(vec![true, false, false]), 3).unwrap();
        Liouvillian::new(&p).unwrap().evolve_series(&rho0, &grid(6, 1.0)).unwrap()
    }

    #[test]
    fn compare_identical_and_discriminating() {
        let a = short_series(1.0);
        let r = compare(&a, &a, Tolerance::Absolute(0.0)).unwrap();
        assert!(r.pass);
        assert!(r.deviations.iter().all(|d| d.max_deviation == 0.0));
        let b = short_series(-1.0);
        let r = compare(&a, &b, Tolerance::Absolute(1e-4)).unwrap();
        assert!(!r.pass);
        assert!(compare(&a, &a, Tolerance::StandardErrors(3.0)).is_err());
        let mut c = a.clone();
        c.times[2] += 0.1;
        assert!(matches!(compare(&a, &c, Tolerance::Absolute(1.0)), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn standard_error_threshold() {
        let a = short_series(1.0);
        let mut b = a.clone();
        b.density[3][1] += 0.03;
        let mut errs = crate::series::StandardErrors {
            density: a.density.iter().map(|d| vec![0.01; d.len()]).collect(),
            current: a.current.iter().map(|d| vec![0.01; d.len()]).collect(),
            doublons: vec![0.01; a.len()],
            entropy: vec![vec![]; a.len()],
        };
        b.errors = Some(errs.clone());
        assert!(!compare(&a, &b, Tolerance::StandardErrors(2.0)).unwrap().pass);
        assert!(compare(&a, &b, Tolerance::StandardErrors(3.5)).unwrap().pass);
        errs.density[3][1] = 0.0;
        b.errors = Some(errs);
        assert!(!compare(&a, &b, Tolerance::StandardErrors(3.5)).unwrap().pass);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn generator_preserves_trace_and_hermiticity(
            gain in 0.0f64..0.5, loss in 0.0f64..0.5,
            theta in -PI..PI, phi in -PI..PI, delta in -2.0f64..2.0, seed in 0u64..1000,
        ) {
            let p = ModelParams::open(3).with_rates(gain, loss).with_phases(theta, phi).with_interaction(delta);
            let l = Liouvillian::new(&p).unwrap();
            // Random Hermitian input, not necessarily positive.
            let m = DMatrix::<C64>::from_fn(8, 8, |i, j| {
                let x = ((i * 31 + j * 17) as u64 ^ seed) as f64;
                C64::new((x * 0.37).sin(), (x * 0.91).cos())
            });
            let rho = &m + m.adjoint();
            let d = l.apply(&rho);
            prop_assert!(d.trace().norm() < 1e-12);
            prop_assert!((&d - d.adjoint()).norm() < 1e-12);
        }
    }
}
