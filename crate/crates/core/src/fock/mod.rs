//! Many-body tier on the full 2^L occupation basis: sparse operators,
//! Faber-series propagation of the no-jump evolution, quantum-jump
//! trajectories and their ensemble statistics.

mod entanglement;
mod ensemble;
mod faber;
mod operators;
mod sparse;
mod state;
mod trajectory;

pub use entanglement::entanglement_entropy;
pub use ensemble::{ensemble_average, run_ensemble};
pub use faber::{faber_bounds, faber_step, FaberConfig, FaberWorkspace};
pub use operators::{build_operators, build_operators_limited, FockOperators, JumpOperator, MAX_SITES};
pub use sparse::CsrMatrix;
pub use state::StateVector;
pub use trajectory::{run_trajectory, JumpEvent, TrajectoryEngine, TrajectoryOptions, TrajectoryRecord};
