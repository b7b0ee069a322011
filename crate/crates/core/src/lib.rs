//! Simulation of a fermionic chain with non-reciprocal, phase-correlated gain
//! and loss on nearest-neighbour bonds.
//!
//! Three solver tiers share [`ModelParams`]:
//! - [`analytic`]: closed forms for the infinite periodic chain,
//! - [`gaussian`]: exact two-point-function dynamics without interactions,
//! - [`fock`]: quantum-jump trajectories on the full occupation basis,
//!
//! and [`liouville`] integrates the density matrix directly for tiny chains.

pub mod analytic;
pub mod bessel;
pub mod error;
pub mod fit;
pub mod fock;
pub mod gaussian;
pub mod liouville;
pub mod model;
pub mod series;

pub use error::{Error, Result};
pub use model::{Boundary, InitialState, ModelParams};
pub use series::{ObservableSeries, Sample};
