//! Desingularization of point-vortex equilibria of the generalized SQG
//! equations (`α ∈ [1, 2)`) into rotating, traveling and stationary
//! vortex-patch equilibria.
//!
//! - [`specialfn`]: kernel constants and spectral coefficients.
//! - [`pointvortex`]: the point-vortex system, its equilibria and Jacobians.
//! - [`contour`]: patch boundaries and the contour functional.
//! - [`linop`]: the linearized operator at the point-vortex state.
//! - [`solver`]: ε-continuation with a Gauss-Newton corrector.

pub mod contour;
pub mod linop;
pub mod pointvortex;
pub mod quadrature;
pub mod solver;
pub mod specialfn;

pub use specialfn::Alpha;
