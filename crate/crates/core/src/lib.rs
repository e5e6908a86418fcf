//! Consensus (gossip averaging) on random k-regular graphs.
//!
//! The crate simulates first-order consensus methods matrix-free, evaluates
//! their residual polynomials through stable forward recurrences, and checks
//! closed-form expected-error rates against quadrature over the Kesten-McKay
//! spectral law of the gossip operator `L = I - A/k`.

pub mod analysis;
pub mod csvio;
pub mod error;
pub mod graph;
pub mod poly;
pub mod solvers;
pub mod spectrum;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{GossipOperator, RegularGraph};
pub use poly::{MethodKind, ResidualEvaluator};
pub use solvers::{ConvergenceTrace, MethodConfig};
pub use spectrum::SpectralMeasure;
pub use state::StateBlock;
