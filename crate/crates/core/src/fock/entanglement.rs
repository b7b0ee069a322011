use nalgebra::DMatrix;

use super::state::StateVector;

/// Von Neumann entropy (nats) of sites 0..cut, from the Schmidt values of the
/// amplitude matrix ψ[a + 2^cut·b]. Weights below 1e-14 are dropped.
pub fn entanglement_entropy(psi: &StateVector, cut: usize) -> f64 {
    let l = psi.sites();
    assert!(cut >= 1 && cut < l, "cut must lie strictly inside the chain");
    let rows = 1usize << cut;
    let cols = 1usize << (l - cut);
    let amps = psi.amplitudes();
    let m = DMatrix::from_fn(rows, cols, |a, b| amps[a + (b << cut)]);
    m.singular_values()
        .iter()
        .map(|s| s * s)
        .filter(|&p| p >= 1e-14)
        .map(|p| -p * p.ln())
        .sum()
}
