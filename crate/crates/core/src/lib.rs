//! Single-copy local purity distillation under Gibbs-preserving LOCC with
//! fully degenerate Hamiltonians, and geometric-entanglement bounds derived
//! from purity-entanglement complementarity.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense Hermitian operators with multipartite indexing.
//! - [`states`]: state families, Haar sampling and purification.
//! - [`sdp`]: a primal-dual interior-point solver for Hermitian SDPs with
//!   partial-transpose cones.
//! - [`bounds`]: SDP bounds on `F_max`, `F→`, the two-way fidelity and the
//!   geometric entanglement.
//! - [`variational`]: see-saw lower bounds and a convex-roof upper bound.
//! - [`protocols`]: separable channels, the purity-swap protocol and
//!   ensemble steering.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod protocols;
pub mod sdp;
pub mod states;
pub mod variational;

pub use error::{Error, Result};
pub use faer::c64;
pub use linalg::{DimList, HermitianOp, PureState};
