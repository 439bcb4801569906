use faer::{c64, Mat};

use super::dense::{self, ZERO};
use super::dims::DimList;
use super::hermitian::{strides, HermitianOp};
use crate::error::{Error, Result};

/// Tolerance on the norm of user-supplied state vectors.
pub const NORM_TOL: f64 = 1e-9;

/// Normalized state vector on a multipartite space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<c64>,
    dims: DimList,
}

/// Schmidt decomposition across a bipartition.
#[derive(Clone, Debug)]
pub struct Schmidt {
    /// Squared Schmidt coefficients, descending; they sum to one.
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<c64>>,
    pub right: Vec<Vec<c64>>,
    pub left_dims: DimList,
    pub right_dims: DimList,
}

impl PureState {
    /// Validates `|v| = 1` within 1e-9 and renormalizes exactly.
    pub fn new(amps: Vec<c64>, dims: DimList) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {}",
                amps.len(),
                dims
            )));
        }
        let norm = l2(&amps);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self::normalize_unchecked(amps, dims))
    }

    /// Normalizes any nonzero vector.
    pub fn from_unnormalized(amps: Vec<c64>, dims: DimList) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {}",
                amps.len(),
                dims
            )));
        }
        let norm = l2(&amps);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self::normalize_unchecked(amps, dims))
    }

    pub(crate) fn normalize_unchecked(mut amps: Vec<c64>, dims: DimList) -> Self {
        let norm = l2(&amps);
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Self { amps, dims }
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: DimList, index: usize) -> Result<Self> {
        let n = dims.total();
        if index >= n {
            return Err(Error::OutOfRange(format!("basis index {index} >= {n}")));
        }
        let mut amps = vec![ZERO; n];
        amps[index] = dense::ONE;
        Ok(Self { amps, dims })
    }

    /// Tensor product of single-party states.
    pub fn product(parts: &[PureState]) -> Self {
        let mut out = Self {
            amps: vec![dense::ONE],
            dims: DimList::new(Vec::new()).unwrap(),
        };
        for p in parts {
            out = out.tensor(p);
        }
        out
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        PureState {
            amps,
            dims: self.dims.concat(&other.dims),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> c64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(ZERO, |x, y| x + y)
    }

    pub fn projector(&self) -> HermitianOp {
        HermitianOp::outer(self.dims.clone(), &self.amps).expect("length matches dims")
    }

    /// Reduced density matrix on `keep`.
    pub fn reduced(&self, keep: &[usize]) -> Result<HermitianOp> {
        let keep = self.dims.check_subsystems(keep)?;
        let m = self.bipartite_matrix(&keep);
        let rho = &m * m.adjoint();
        HermitianOp::new(rho, self.dims.select(&keep))
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<PureState> {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.dims.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidDims(format!(
                "{order:?} is not a permutation"
            )));
        }
        let new_dims = self.dims.select(order);
        let st = strides(&self.dims);
        let amps = (0..new_dims.total())
            .map(|i| {
                let d = new_dims.digits(i);
                let old: usize = d.iter().zip(order).map(|(&x, &o)| x * st[o]).sum();
                self.amps[old]
            })
            .collect();
        Ok(PureState {
            amps,
            dims: new_dims,
        })
    }

    /// Amplitudes reshaped to a `d_left x d_right` matrix, `left` subsystems
    /// indexing rows (sorted subsystem lists).
    fn bipartite_matrix(&self, left: &[usize]) -> Mat<c64> {
        let right = self.dims.complement(left);
        let st = strides(&self.dims);
        let offsets = |subs: &[usize]| -> Vec<usize> {
            let sd = self.dims.select(subs);
            (0..sd.total())
                .map(|i| {
                    sd.digits(i)
                        .iter()
                        .zip(subs)
                        .map(|(&x, &s)| x * st[s])
                        .sum()
                })
                .collect()
        };
        let lo = offsets(left);
        let ro = offsets(&right);
        Mat::from_fn(lo.len(), ro.len(), |i, j| self.amps[lo[i] + ro[j]])
    }

    /// Schmidt decomposition across `left | rest`: `v = sum_i sqrt(p_i) |a_i>|b_i>`.
    pub fn schmidt(&self, left: &[usize]) -> Result<Schmidt> {
        let left = self.dims.check_subsystems(left)?;
        let right = self.dims.complement(&left);
        let m = self.bipartite_matrix(&left);
        let (u, s, v) = dense::svd_complex(m.as_ref());
        let coefficients: Vec<f64> = s.iter().map(|x| x * x).collect();
        let k = coefficients.len();
        let left_vecs = (0..k)
            .map(|i| (0..u.nrows()).map(|r| u[(r, i)]).collect())
            .collect();
        let right_vecs = (0..k)
            .map(|i| (0..v.nrows()).map(|r| v[(r, i)].conj()).collect())
            .collect();
        Ok(Schmidt {
            coefficients,
            left: left_vecs,
            right: right_vecs,
            left_dims: self.dims.select(&left),
            right_dims: self.dims.select(&right),
        })
    }
}

pub(crate) fn l2(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dl(v: &[usize]) -> DimList {
        DimList::new(v.to_vec()).unwrap()
    }

    fn bell() -> PureState {
        let s = 0.5f64.sqrt();
        PureState::new(
            vec![c64::new(s, 0.0), ZERO, ZERO, c64::new(s, 0.0)],
            dl(&[2, 2]),
        )
        .unwrap()
    }

    #[test]
    fn rejects_unnormalized() {
        let v = vec![c64::new(1.0, 0.0), c64::new(1.0, 0.0)];
        assert!(matches!(
            PureState::new(v.clone(), dl(&[2])),
            Err(Error::NotNormalized { .. })
        ));
        assert!(PureState::from_unnormalized(v, dl(&[2])).is_ok());
    }

    #[test]
    fn schmidt_of_product_and_bell() {
        let z = PureState::basis(dl(&[2, 2]), 0).unwrap();
        let s = z.schmidt(&[0]).unwrap();
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14);
        assert!(s.coefficients[1].abs() < 1e-14);

        let s = bell().schmidt(&[0]).unwrap();
        assert!((s.coefficients[0] - 0.5).abs() < 1e-14);
        assert!((s.coefficients[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn schmidt_reconstructs_state() {
        let amps: Vec<c64> = (0..6)
            .map(|i| c64::new(i as f64 + 1.0, (i as f64) * 0.3 - 0.5))
            .collect();
        let psi = PureState::from_unnormalized(amps, dl(&[2, 3])).unwrap();
        let s = psi.schmidt(&[0]).unwrap();
        for a in 0..2 {
            for b in 0..3 {
                let mut acc = ZERO;
                for i in 0..s.coefficients.len() {
                    acc += s.left[i][a] * s.right[i][b] * s.coefficients[i].sqrt();
                }
                assert!((acc - psi.amplitudes()[a * 3 + b]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn permute_swaps_factors() {
        let a = PureState::basis(dl(&[2]), 1).unwrap();
        let b = PureState::basis(dl(&[3]), 2).unwrap();
        let ab = a.tensor(&b);
        let ba = ab.permute(&[1, 0]).unwrap();
        assert_eq!(ba, b.tensor(&a));
    }

    #[test]
    fn reduced_state_matches_partial_trace() {
        let amps: Vec<c64> = (0..12)
            .map(|i| c64::new((i as f64).sin(), (i as f64).cos()))
            .collect();
        let psi = PureState::from_unnormalized(amps, dl(&[2, 3, 2])).unwrap();
        for keep in [vec![0], vec![1], vec![0, 2], vec![1, 2]] {
            let a = psi.reduced(&keep).unwrap();
            let b = psi.projector().partial_trace(&keep).unwrap();
            assert!(a.sub(&b).unwrap().max_abs() < 1e-14);
        }
    }
}
