//! Exact dynamics of the non-interacting chain through the two-point function
//! C_ij = ⟨c†_i c_j⟩, which obeys the closed linear equation
//!
//!   dC/dt = A C + C A† + G.
//!
//! The drift A collects the hopping and the damping from both dissipators, the
//! noise G is fed by the gain channel only. Both are sparse (banded plus the
//! periodic corner), so one evaluation of the right-hand side costs O(L²).

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{enumerate_jumps, Boundary, InitialState, ModelParams};
use crate::series::{ObservableSeries, Sample};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CorrelationMatrix {
    pub fn zeros(n: usize) -> Self {
        CorrelationMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn diagonal(occ: &[f64]) -> Self {
        let mut c = Self::zeros(occ.len());
        for (j, &v) in occ.iter().enumerate() {
            c.set(j, j, C64::new(v, 0.0));
        }
        c
    }

    pub fn from_initial(state: &InitialState, sites: usize) -> Result<Self> {
        let occ: Vec<f64> = state
            .occupations(sites)?
            .into_iter()
            .map(|b| if b { 1.0 } else { 0.0 })
            .collect();
        Ok(Self::diagonal(&occ))
    }

    pub fn from_dmatrix(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let mut c = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                c.data[i * n + j] = m[(i, j)];
            }
        }
        c
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn density(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.get(j, j).re).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|j| self.get(j, j).re).sum()
    }

    /// Replaces C by (C + C†)/2.
    pub fn hermitize(&mut self) {
        hermitize(&mut self.data, self.n);
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.n;
        let mut e: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                e = e.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        e
    }

    /// Smallest and largest eigenvalue (occupations of the natural orbitals).
    pub fn eigenvalue_range(&self) -> (f64, f64) {
        let ev = self.to_dmatrix().symmetric_eigenvalues();
        (ev.min(), ev.max())
    }

    /// Largest entry modulus of C − other.
    pub fn max_abs_diff(&self, other: &CorrelationMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// n_k = (1/L) Σ_{jl} e^{ik(j−l)} C_jl for each k, via the diagonal sums of C.
    pub fn momentum_occupations(&self, ks: &[f64]) -> Vec<f64> {
        let n = self.n;
        // s[d + n − 1] = Σ_{j−l=d} C_jl.
        let mut s = vec![C64::new(0.0, 0.0); 2 * n - 1];
        for j in 0..n {
            for l in 0..n {
                s[j + n - 1 - l] += self.get(j, l);
            }
        }
        ks.iter()
            .map(|&k| {
                let mut acc = C64::new(0.0, 0.0);
                for (idx, v) in s.iter().enumerate() {
                    let d = idx as f64 - (n as f64 - 1.0);
                    acc += v * C64::from_polar(1.0, k * d);
                }
                acc.re / n as f64
            })
            .collect()
    }
}

fn hermitize(c: &mut [C64], n: usize) {
    for i in 0..n {
        c[i * n + i].im = 0.0;
        for j in i + 1..n {
            let a = 0.5 * (c[i * n + j] + c[j * n + i].conj());
            c[i * n + j] = a;
            c[j * n + i] = a.conj();
        }
    }
}

/// Drift and noise of the two-point equation of motion.
#[derive(Debug, Clone)]
pub struct QuadraticGenerator {
    pub params: ModelParams,
    drift: Vec<Vec<(usize, C64)>>,
    noise: Vec<C64>,
    norm: f64,
}

fn sparse_rows(dense: &[C64], n: usize) -> Vec<Vec<(usize, C64)>> {
    (0..n)
        .map(|i| {
            (0..n)
                .filter_map(|j| {
                    let v = dense[i * n + j];
                    (v != C64::new(0.0, 0.0)).then_some((j, v))
                })
                .collect()
        })
        .collect()
}

/// Builds A = i hᵀ − ½(M + P) and G = P where h is the hopping matrix,
/// M_ab = Σ u_a ū_b over loss operators Σ u_a c_a and
/// P_ab = Σ v̄_a v_b over gain operators Σ v_a c†_a.
pub fn build_generator(p: &ModelParams) -> Result<QuadraticGenerator> {
    let p = p.validate()?;
    if p.interaction != 0.0 {
        return Err(Error::Interacting(p.interaction));
    }
    let n = p.sites;
    let zero = C64::new(0.0, 0.0);
    let mut a = vec![zero; n * n];
    let mut g = vec![zero; n * n];
    let hop = C64::from_polar(-0.5 * p.hopping, p.peierls);
    for (j, l) in p.bonds() {
        // h_jl = hop, h_lj = conj(hop); A gets i hᵀ.
        a[l * n + j] += I * hop;
        a[j * n + l] += I * hop.conj();
    }
    for jump in enumerate_jumps(&p) {
        let gain = jump.kind.is_gain();
        for &(x, ux) in &jump.modes {
            for &(y, uy) in &jump.modes {
                let w = if gain { ux.conj() * uy } else { ux * uy.conj() };
                a[x * n + y] -= 0.5 * w;
                if gain {
                    g[x * n + y] += w;
                }
            }
        }
    }
    let drift = sparse_rows(&a, n);
    let norm = drift
        .iter()
        .map(|r| r.iter().map(|(_, v)| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(QuadraticGenerator {
        params: p,
        drift,
        noise: g,
        norm,
    })
}

impl QuadraticGenerator {
    pub fn sites(&self) -> usize {
        self.params.sites
    }

    pub fn drift_matrix(&self) -> DMatrix<C64> {
        let n = self.sites();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.drift.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn noise_matrix(&self) -> DMatrix<C64> {
        let n = self.sites();
        DMatrix::from_fn(n, n, |i, j| self.noise[i * n + j])
    }

    /// Single-particle non-Hermitian Hamiltonian H_eff = i·conj(A); the
    /// equation of motion reads dC/dt = i H̄ C − i C Hᵀ + G and its
    /// periodic spectrum is ε_k − iλ_k/2.
    pub fn effective_hamiltonian(&self) -> DMatrix<C64> {
        self.drift_matrix().map(|v| I * v.conj())
    }

    /// Maximum absolute row sum of A.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// out = A C + (A C)† + G, using X as scratch.
    ///
    /// C Hermitian implies C A† = (A C)†.
    pub fn rhs(&self, c: &[C64], x: &mut [C64], out: &mut [C64]) {
        let n = self.sites();
        for (i, row) in self.drift.iter().enumerate() {
            let xi = &mut x[i * n..(i + 1) * n];
            xi.fill(C64::new(0.0, 0.0));
            for &(k, aik) in row {
                let ck = &c[k * n..(k + 1) * n];
                for (xv, cv) in xi.iter_mut().zip(ck) {
                    *xv += aik * cv;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = x[i * n + j] + x[j * n + i].conj() + self.noise[i * n + j];
            }
        }
    }

    /// dC/dt at C.
    pub fn derivative(&self, c: &CorrelationMatrix) -> CorrelationMatrix {
        let n = self.sites();
        let mut x = vec![C64::new(0.0, 0.0); n * n];
        let mut out = CorrelationMatrix::zeros(n);
        self.rhs(&c.data, &mut x, &mut out.data);
        out
    }

    /// Largest entry of |A C + C A† + G| without assuming C Hermitian.
    pub fn residual(&self, c: &CorrelationMatrix) -> f64 {
        let a = self.drift_matrix();
        let cm = c.to_dmatrix();
        let r = &a * &cm + &cm * a.adjoint() + self.noise_matrix();
        r.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Upper bound on the RK4 step; the default is 0.01/max(J, Γ+κ, ‖A‖).
    pub max_step: Option<f64>,
    /// Tolerance of the half-step comparison run at the start of every
    /// sampling interval.
    pub check_tolerance: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            max_step: None,
            check_tolerance: 1e-8,
        }
    }
}

struct Rk4 {
    n: usize,
    x: Vec<C64>,
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n * n];
        Rk4 {
            n,
            x: z.clone(),
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    fn step(&mut self, gen: &QuadraticGenerator, c: &mut [C64], dt: f64) {
        gen.rhs(c, &mut self.x, &mut self.k1);
        for ((t, cv), k) in self.tmp.iter_mut().zip(c.iter()).zip(&self.k1) {
            *t = cv + 0.5 * dt * k;
        }
        gen.rhs(&self.tmp, &mut self.x, &mut self.k2);
        for ((t, cv), k) in self.tmp.iter_mut().zip(c.iter()).zip(&self.k2) {
            *t = cv + 0.5 * dt * k;
        }
        gen.rhs(&self.tmp, &mut self.x, &mut self.k3);
        for ((t, cv), k) in self.tmp.iter_mut().zip(c.iter()).zip(&self.k3) {
            *t = cv + dt * k;
        }
        gen.rhs(&self.tmp, &mut self.x, &mut self.k4);
        let w = dt / 6.0;
        for i in 0..c.len() {
            c[i] += w * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        hermitize(c, self.n);
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.first().is_some_and(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::GridMismatch(
            "time grid must be non-negative and ascending".into(),
        ));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::GridMismatch("time grid must be finite".into()));
    }
    Ok(())
}

/// Default step bound 0.01/max(J, Γ+κ, ‖A‖).
pub fn default_step(gen: &QuadraticGenerator) -> f64 {
    let p = &gen.params;
    0.01 / p.hopping.max(p.total_rate()).max(gen.norm())
}

/// Integrates from C0 at t = 0 and calls `visit(index, time, C)` at each grid time.
pub fn evolve_with(
    gen: &QuadraticGenerator,
    c0: &CorrelationMatrix,
    times: &[f64],
    opts: EvolveOptions,
    mut visit: impl FnMut(usize, f64, &CorrelationMatrix),
) -> Result<()> {
    check_grid(times)?;
    let n = gen.sites();
    if c0.sites() != n {
        return Err(Error::InvalidParams(format!(
            "initial matrix is {}x{}, generator has {} sites",
            c0.sites(),
            c0.sites(),
            n
        )));
    }
    let h_max = opts.max_step.unwrap_or_else(|| default_step(gen));
    let mut rk = Rk4::new(n);
    let mut c = c0.clone();
    c.hermitize();
    let mut full = vec![C64::new(0.0, 0.0); n * n];
    let mut t = 0.0;
    for (idx, &target) in times.iter().enumerate() {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            // Half-step comparison on the first step of the interval.
            full.copy_from_slice(&c.data);
            rk.step(gen, &mut full, dt);
            rk.step(gen, &mut c.data, 0.5 * dt);
            rk.step(gen, &mut c.data, 0.5 * dt);
            let dev = full
                .iter()
                .zip(&c.data)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if dev > opts.check_tolerance {
                return Err(Error::StepCheck {
                    time: t,
                    deviation: dev,
                    tolerance: opts.check_tolerance,
                });
            }
            for _ in 1..steps {
                rk.step(gen, &mut c.data, dt);
            }
            t = target;
        }
        visit(idx, target, &c);
    }
    Ok(())
}

pub fn evolve(
    gen: &QuadraticGenerator,
    c0: &CorrelationMatrix,
    times: &[f64],
) -> Result<Vec<CorrelationMatrix>> {
    let mut out = Vec::with_capacity(times.len());
    evolve_with(gen, c0, times, EvolveOptions::default(), |_, _, c| out.push(c.clone()))?;
    Ok(out)
}

/// Evolves and records observables at every grid time.
pub fn evolve_series(
    gen: &QuadraticGenerator,
    c0: &CorrelationMatrix,
    times: &[f64],
    momenta: Option<&[f64]>,
) -> Result<ObservableSeries> {
    let ks = momenta.map(<[f64]>::to_vec).unwrap_or_default();
    let mut series = ObservableSeries::new(vec![], ks.clone());
    let p = gen.params;
    evolve_with(gen, c0, times, EvolveOptions::default(), |_, t, c| {
        series.push(sample(c, &p, t, &ks));
    })?;
    Ok(series)
}

/// Observables of a Gaussian state packaged as a [`Sample`].
pub fn sample(c: &CorrelationMatrix, p: &ModelParams, time: f64, momenta: &[f64]) -> Sample {
    let o = observables(c, p);
    Sample {
        time,
        density: o.density,
        current: o.current,
        doublons: o.doublons,
        entropy: vec![],
        momentum: if momenta.is_empty() {
            vec![]
        } else {
            c.momentum_occupations(momenta)
        },
    }
}

/// Local observables of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianObservables {
    pub density: Vec<f64>,
    /// J·Im(e^{−iα} C_{l,j}) on each bond (j, l); positive toward lower index.
    pub current: Vec<f64>,
    /// 2 Re C_{l,j} on each bond.
    pub kinetic: Vec<f64>,
    /// Σ_bonds ⟨n_j n_l⟩ by Wick's theorem.
    pub doublons: f64,
}

pub fn observables(c: &CorrelationMatrix, p: &ModelParams) -> GaussianObservables {
    let bonds = p.bonds();
    let rot = C64::from_polar(1.0, -p.peierls);
    let mut current = Vec::with_capacity(bonds.len());
    let mut kinetic = Vec::with_capacity(bonds.len());
    let mut doublons = 0.0;
    for &(j, l) in &bonds {
        let x = c.get(l, j);
        current.push(p.hopping * (rot * x).im);
        kinetic.push(2.0 * x.re);
        doublons += c.get(j, j).re * c.get(l, l).re - x.norm_sqr();
    }
    GaussianObservables {
        density: c.density(),
        current,
        kinetic,
        doublons,
    }
}

/// Pointwise residual of the lattice continuity equation
///
///   ∂t n_j − v₊ I_j + v₋ I_{j−1} + (c/2)(h_j + h_{j−1}) = 2Γ − 2(Γ+κ) n_j
///
/// with v± = 1 ± (Γ sinθ − κ sinφ)/J and c = κ cosφ + Γ cosθ. I_j and h_j are
/// the current and kinetic term of the bond to the right of j (zero where an
/// open chain has no bond). ∂t n_j is taken from the equation of motion.
/// Valid without a Peierls phase.
pub fn continuity_residual(gen: &QuadraticGenerator, c: &CorrelationMatrix) -> Vec<f64> {
    let p = &gen.params;
    let n = p.sites;
    let dn = gen.derivative(c).density();
    let o = observables(c, p);
    let s = p.gain * p.gain_phase.sin() - p.loss * p.loss_phase.sin();
    let vp = 1.0 + s / p.hopping;
    let vm = 1.0 - s / p.hopping;
    let cc = p.loss * p.loss_phase.cos() + p.gain * p.gain_phase.cos();
    let bond_right = |j: usize| -> Option<usize> {
        match p.boundary {
            Boundary::Periodic => Some(j),
            Boundary::Open => (j + 1 < n).then_some(j),
        }
    };
    let bond_left = |j: usize| -> Option<usize> {
        match p.boundary {
            Boundary::Periodic => Some((j + n - 1) % n),
            Boundary::Open => j.checked_sub(1),
        }
    };
    (0..n)
        .map(|j| {
            let (ir, hr) = bond_right(j).map_or((0.0, 0.0), |b| (o.current[b], o.kinetic[b]));
            let (il, hl) = bond_left(j).map_or((0.0, 0.0), |b| (o.current[b], o.kinetic[b]));
            let source = 2.0 * p.gain - 2.0 * p.total_rate() * o.density[j];
            (dn[j] - vp * ir + vm * il + 0.5 * cc * (hr + hl) - source).abs()
        })
        .collect()
}

/// Stationary C solving A C + C A† + G = 0.
///
/// On the periodic critical line the steady distribution is flat and C is a
/// multiple of the identity. Elsewhere the Lyapunov equation is solved through
/// the complex Schur form of A; if A has a (numerically) vanishing decay rate
/// the routine falls back to long-time integration.
pub fn steady_state(gen: &QuadraticGenerator) -> Result<CorrelationMatrix> {
    let p = &gen.params;
    let n = p.sites;
    if p.total_rate() == 0.0 {
        return Err(Error::Singular("closed chain has no unique steady state".into()));
    }
    if p.boundary == Boundary::Periodic && p.on_critical_line() {
        return Ok(CorrelationMatrix::diagonal(&vec![p.critical_filling(); n]));
    }
    match lyapunov_schur(gen) {
        Ok(c) if gen.residual(&c) < 1e-10 => Ok(c),
        Ok(_) | Err(Error::Singular(_)) => relax_to_steady(gen, 1e-10, 1e5 / p.total_rate()),
        Err(e) => Err(e),
    }
}

fn lyapunov_schur(gen: &QuadraticGenerator) -> Result<CorrelationMatrix> {
    let n = gen.sites();
    let a = gen.drift_matrix();
    let (q, t) = Schur::try_new(a, f64::EPSILON, 0)
        .ok_or_else(|| Error::NotConverged("Schur decomposition".into()))?
        .unpack();
    let g = q.adjoint() * gen.noise_matrix() * &q;
    let scale = gen.norm().max(1e-300);
    // T Y + Y T† = −G̃ column by column from the last; T† is lower triangular.
    let mut y = DMatrix::<C64>::zeros(n, n);
    for j in (0..n).rev() {
        let mut rhs: Vec<C64> = (0..n).map(|i| -g[(i, j)]).collect();
        for k in j + 1..n {
            let w = t[(j, k)].conj();
            if w != C64::new(0.0, 0.0) {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= w * y[(i, k)];
                }
            }
        }
        let shift = t[(j, j)].conj();
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for k in i + 1..n {
                acc -= t[(i, k)] * y[(k, j)];
            }
            let d = t[(i, i)] + shift;
            if d.norm() < 1e-13 * scale {
                return Err(Error::Singular(format!(
                    "decay rates at Schur positions {i} and {j} cancel"
                )));
            }
            y[(i, j)] = acc / d;
        }
    }
    let c = &q * y * q.adjoint();
    let mut out = CorrelationMatrix::from_dmatrix(&c);
    out.hermitize();
    Ok(out)
}

/// Integrates from the half-filled maximally mixed state until the largest
/// entry of dC/dt drops below `tol` or the time budget is exhausted.
pub fn relax_to_steady(gen: &QuadraticGenerator, tol: f64, budget: f64) -> Result<CorrelationMatrix> {
    let n = gen.sites();
    let mut c = CorrelationMatrix::diagonal(&vec![0.5; n]);
    let dt = default_step(gen);
    let chunk = (1.0 / dt).ceil() as usize;
    let mut rk = Rk4::new(n);
    let mut t = 0.0;
    while t < budget {
        for _ in 0..chunk {
            rk.step(gen, &mut c.data, dt);
        }
        t += chunk as f64 * dt;
        let d = gen.derivative(&c);
        let m = d.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if m < tol {
            return Ok(c);
        }
    }
    Err(Error::NotConverged(format!(
        "dC/dt still above {tol:e} after t = {budget}"
    )))
}

/// Direct solve of the vectorized Lyapunov equation, (I⊗A + Ā⊗I) vec C = −vec G.
/// Cost grows as L⁶, so this is kept for small chains and cross-checks.
pub fn steady_state_vectorized(gen: &QuadraticGenerator) -> Result<CorrelationMatrix> {
    let n = gen.sites();
    if n > 32 {
        return Err(Error::TooLarge { sites: n, limit: 32 });
    }
    let a = gen.drift_matrix();
    let g = gen.noise_matrix();
    let m = n * n;
    // Unknown C_ij at index i*n + j.
    let mut big = DMatrix::<C64>::zeros(m, m);
    let mut rhs = nalgebra::DVector::<C64>::zeros(m);
    for i in 0..n {
        for j in 0..n {
            let r = i * n + j;
            for k in 0..n {
                big[(r, k * n + j)] += a[(i, k)];
                big[(r, i * n + k)] += a[(j, k)].conj();
            }
            rhs[r] = -g[(i, j)];
        }
    }
    let sol = big
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("vectorized Lyapunov system".into()))?;
    let mut c = CorrelationMatrix::zeros(n);
    c.data.copy_from_slice(sol.as_slice());
    c.hermitize();
    Ok(c)
}
