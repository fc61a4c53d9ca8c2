//! Five down-converted Hermite-Gaussian modes from an optical parametric
//! oscillator with a spatially structured pump, and the quantum-correlation
//! measures defined on the resulting Gaussian state.
//!
//! The pump is a weighted sum of the third-order modes HG30, HG03, HG21 and
//! HG12 with weights (b cosθ, √(1−b²) cosθ, c sinθ, √(1−c²) sinθ). Six
//! down-conversion processes couple the signal modes a1 = HG10, a2 = HG01 to
//! the idler modes a3 = HG20, a4 = HG02, a5 = HG11. Everything downstream is
//! Gaussian: the vacuum is propagated through the quadratic Hamiltonian and
//! all quantifiers (logarithmic negativity, directional steerabilities, the
//! six-type steering classifier, genuine pentapartite steering) are read off
//! the 10×10 covariance matrix.
//!
//! Conventions: quadrature ordering ξ = (X₁..X₅, Y₁..Y₅), vacuum covariance
//! I/2, mode indices are 1-based throughout the public API.

pub mod coupling;
pub mod error;
pub mod gaussian;
pub mod hg;
pub mod io;
pub mod scan;
pub mod steering;

pub use coupling::{coupling_matrix, pump_weights, CouplingMatrix, PumpSetting};
pub use error::{Error, Result};
pub use gaussian::{covariance, propagate, Bipartition, CovarianceMatrix, Propagator};
pub use hg::{calibrated_overlap_table, OverlapTable, WaistConfig};
pub use steering::{
    classify_pair, genuine_pentapartite, log_negativity, steer_1p1, steer_multi, Direction,
    GenuineResult, QuadScale, SteeringClass, SteeringReport,
};
