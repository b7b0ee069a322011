use num_complex::Complex64 as C64;

use super::sparse::CsrMatrix;
use super::state::jw_sign;
use crate::error::{Error, Result};
use crate::model::{enumerate_jumps, JumpSpec, ModelParams};

/// Default size limit of the many-body tier.
pub const MAX_SITES: usize = 20;

#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub spec: JumpSpec,
    pub matrix: CsrMatrix,
}

/// Sparse many-body operators of one parameter point.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub params: ModelParams,
    pub hamiltonian: CsrMatrix,
    pub jumps: Vec<JumpOperator>,
    /// H_nH = H − (i/2) Σ L†L.
    pub effective: CsrMatrix,
    /// Σ L†L, so that d‖ψ‖²/dt = −⟨ψ|decay|ψ⟩ between jumps.
    pub decay: CsrMatrix,
}

/// Σ_ab h_ab c†_a c_b + diag(state), number conserving.
fn number_conserving(
    sites: usize,
    terms: &[(usize, usize, C64)],
    diag: impl Fn(usize) -> C64,
) -> CsrMatrix {
    CsrMatrix::from_rows(1 << sites, |r, buf| {
        buf.push((r as u32, diag(r)));
        for &(a, b, h) in terms {
            if r >> a & 1 == 0 {
                continue;
            }
            if a == b {
                buf.push((r as u32, h));
                continue;
            }
            // ⟨r|c†_a c_b|c⟩ with c = c†_b c_a r.
            let r1 = r ^ (1 << a);
            if r1 >> b & 1 == 1 {
                continue;
            }
            let c = r1 | (1 << b);
            buf.push((c as u32, h * (jw_sign(r, a) * jw_sign(r1, b))));
        }
    })
}

fn jump_matrix(sites: usize, spec: &JumpSpec) -> CsrMatrix {
    let gain = spec.kind.is_gain();
    CsrMatrix::from_rows(1 << sites, |r, buf| {
        for &(a, amp) in &spec.modes {
            let occupied = r >> a & 1 == 1;
            // Loss Σu c_a connects r to r + a; gain Σv c†_a connects r to r − a.
            if gain == occupied {
                let c = r ^ (1 << a);
                buf.push((c as u32, amp * jw_sign(r, a)));
            }
        }
    })
}

/// Quadratic form of L†L: c†_a c_b coefficients and a constant.
fn jump_quadratic(spec: &JumpSpec, out: &mut Vec<(usize, usize, C64)>) -> f64 {
    let mut constant = 0.0;
    for &(a, ua) in &spec.modes {
        for &(b, ub) in &spec.modes {
            if spec.kind.is_gain() {
                // ū_a u_b c_a c†_b = ū_a u_b (δ_ab − c†_b c_a)
                out.push((b, a, -ua.conj() * ub));
                if a == b {
                    constant += ua.norm_sqr();
                }
            } else {
                out.push((a, b, ua.conj() * ub));
            }
        }
    }
    constant
}

pub fn build_operators(p: &ModelParams) -> Result<FockOperators> {
    build_operators_limited(p, MAX_SITES)
}

pub fn build_operators_limited(p: &ModelParams, limit: usize) -> Result<FockOperators> {
    let p = p.validate()?;
    let l = p.sites;
    if l > limit || l > 30 {
        return Err(Error::TooLarge {
            sites: l,
            limit: limit.min(30),
        });
    }
    let bonds = p.bonds();
    let hop = C64::from_polar(-0.5 * p.hopping, p.peierls);
    let mut hopping = Vec::new();
    for &(j, k) in &bonds {
        hopping.push((j, k, hop));
        hopping.push((k, j, hop.conj()));
    }
    let delta = p.interaction;
    let interaction = |s: usize| -> C64 {
        let pairs = bonds.iter().filter(|(j, k)| s >> j & 1 == 1 && s >> k & 1 == 1).count();
        C64::new(delta * pairs as f64, 0.0)
    };
    let hamiltonian = number_conserving(l, &hopping, interaction);

    let specs = enumerate_jumps(&p);
    let mut quad = Vec::new();
    let mut constant = 0.0;
    for s in &specs {
        constant += jump_quadratic(s, &mut quad);
    }
    let decay = number_conserving(l, &quad, |_| C64::new(constant, 0.0));
    let effective = hamiltonian.combine(C64::new(1.0, 0.0), &decay, C64::new(0.0, -0.5));
    let jumps = specs
        .into_iter()
        .map(|spec| JumpOperator {
            matrix: jump_matrix(l, &spec),
            spec,
        })
        .collect();
    Ok(FockOperators {
        params: p,
        hamiltonian,
        jumps,
        effective,
        decay,
    })
}
