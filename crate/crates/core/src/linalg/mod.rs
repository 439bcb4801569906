//! Dense Hermitian linear algebra with multipartite tensor indexing.

pub(crate) mod dense;
mod dims;
mod hermitian;
mod pure;

use faer::Mat;

pub use dims::DimList;
pub use hermitian::{fidelity, Eigh, HermitianOp, HERMITICITY_TOL};
pub(crate) use hermitian::{sub_offsets, PartialTransposeMap};
pub use pure::{PureState, Schmidt, NORM_TOL};

use crate::error::Result;

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &HermitianOp, b: &HermitianOp) -> HermitianOp {
    a.tensor(b)
}

pub fn partial_trace(m: &HermitianOp, keep: &[usize]) -> Result<HermitianOp> {
    m.partial_trace(keep)
}

pub fn partial_transpose(m: &HermitianOp, subs: &[usize]) -> Result<HermitianOp> {
    m.partial_transpose(subs)
}

pub fn eigh(m: &HermitianOp) -> Eigh {
    m.eigh()
}

pub fn schmidt(v: &PureState, left: &[usize]) -> Result<Schmidt> {
    v.schmidt(left)
}

pub fn real_embed(m: &HermitianOp) -> Mat<f64> {
    m.real_embed()
}
