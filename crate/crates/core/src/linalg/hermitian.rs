use faer::{c64, Mat, MatRef};

use super::dense::{self, ZERO};
use super::dims::DimList;
use crate::error::{Error, Result};

/// Relative Hermiticity deviation tolerated by the constructor before the
/// input is symmetrized.
pub const HERMITICITY_TOL: f64 = 1e-9;

/// Dense complex Hermitian operator on a multipartite space.
#[derive(Clone, Debug)]
pub struct HermitianOp {
    mat: Mat<c64>,
    dims: DimList,
}

/// Spectral decomposition with eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<c64>>,
}

pub(crate) fn strides(dims: &DimList) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims.dim(k + 1);
    }
    s
}

/// Flat offsets of every multi-index over `subs`, embedded in `dims`.
pub(crate) fn sub_offsets(dims: &DimList, subs: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let sd = dims.select(subs);
    (0..sd.total())
        .map(|i| {
            sd.digits(i)
                .iter()
                .zip(subs)
                .map(|(&x, &s)| x * st[s])
                .sum()
        })
        .collect()
}

impl HermitianOp {
    /// Wraps a square matrix, symmetrizing it to `(M + M^H) / 2`.
    ///
    /// Fails when the side length does not match `dims` or when
    /// `max|M - M^H| > 1e-9 * max(1, max|M|)`.
    pub fn new(mat: Mat<c64>, dims: DimList) -> Result<Self> {
        let n = dims.total();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, dims {} require side {}",
                mat.nrows(),
                mat.ncols(),
                dims,
                n
            )));
        }
        let scale = dense::max_abs_c(mat.as_ref()).max(1.0);
        let mut deviation = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                deviation = deviation.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
            }
        }
        if !deviation.is_finite() || deviation > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::from_mat_unchecked(mat, dims))
    }

    /// Symmetrizes without the deviation check. Side length must match.
    pub(crate) fn from_mat_unchecked(mat: Mat<c64>, dims: DimList) -> Self {
        let n = mat.nrows();
        debug_assert_eq!(n, dims.total());
        let sym = Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(mat[(i, i)].re, 0.0)
            } else {
                (mat[(i, j)] + mat[(j, i)].conj()) * 0.5
            }
        });
        Self { mat: sym, dims }
    }

    pub fn from_fn(dims: DimList, f: impl Fn(usize, usize) -> c64) -> Result<Self> {
        let n = dims.total();
        Self::new(Mat::from_fn(n, n, f), dims)
    }

    /// Builds an operator from separate real and imaginary row arrays.
    pub fn from_parts(dims: DimList, re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = dims.total();
        let shape_ok = |rows: &[Vec<f64>]| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !shape_ok(re) || !shape_ok(im) {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{n} real and imaginary parts for dims {dims}"
            )));
        }
        Self::from_fn(dims, |i, j| c64::new(re[i][j], im[i][j]))
    }

    pub fn from_real_rows(dims: DimList, rows: &[Vec<f64>]) -> Result<Self> {
        let zeros: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
        Self::from_parts(dims, rows, &zeros)
    }

    pub fn zeros(dims: DimList) -> Self {
        let n = dims.total();
        Self {
            mat: Mat::zeros(n, n),
            dims,
        }
    }

    pub fn identity(dims: DimList) -> Self {
        let n = dims.total();
        Self {
            mat: Mat::from_fn(n, n, |i, j| if i == j { dense::ONE } else { ZERO }),
            dims,
        }
    }

    /// `1/d` times the identity.
    pub fn maximally_mixed(dims: DimList) -> Self {
        let d = dims.total() as f64;
        Self::identity(dims).scaled(1.0 / d)
    }

    pub fn diagonal(dims: DimList, values: &[f64]) -> Result<Self> {
        let n = dims.total();
        if values.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal entries for side {n}",
                values.len()
            )));
        }
        Ok(Self {
            mat: Mat::from_fn(n, n, |i, j| {
                if i == j {
                    c64::new(values[i], 0.0)
                } else {
                    ZERO
                }
            }),
            dims,
        })
    }

    /// Rank-one projector `|v><v|` (no normalization applied).
    pub fn outer(dims: DimList, v: &[c64]) -> Result<Self> {
        let n = dims.total();
        if v.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} for side {n}",
                v.len()
            )));
        }
        Ok(Self {
            mat: Mat::from_fn(n, n, |i, j| v[i] * v[j].conj()),
            dims,
        })
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn entry(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.mat
    }

    /// Same entries, different tensor structure.
    pub fn with_dims(&self, dims: DimList) -> Result<Self> {
        if dims.total() != self.side() {
            return Err(Error::DimensionMismatch(format!(
                "cannot view side {} as {}",
                self.side(),
                dims
            )));
        }
        Ok(Self {
            mat: self.mat.clone(),
            dims,
        })
    }

    pub fn trace(&self) -> f64 {
        (0..self.side()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        dense::max_abs_c(self.mat.as_ref())
    }

    /// Operator (spectral) norm.
    pub fn spectral_norm(&self) -> f64 {
        let v = self.eigenvalues();
        v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// True when every imaginary part is zero up to 1e-15 relative.
    pub fn is_real(&self) -> bool {
        let tol = 1e-15 * self.max_abs().max(1.0);
        let n = self.side();
        (0..n).all(|j| (0..n).all(|i| self.mat[(i, j)].im.abs() <= tol))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let n = self.side();
        Self {
            mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] * factor),
            dims: self.dims.clone(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(c64, c64) -> c64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dims, other.dims
            )));
        }
        let n = self.side();
        Ok(Self {
            mat: Mat::from_fn(n, n, |i, j| f(self.mat[(i, j)], other.mat[(i, j)])),
            dims: self.dims.clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `Re Tr[self * other]`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.side() != other.side() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dims, other.dims
            )));
        }
        let n = self.side();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.mat[(i, j)] * other.mat[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    /// `<v|self|v>`.
    pub fn expectation(&self, v: &[c64]) -> f64 {
        let n = self.side();
        let mut acc = ZERO;
        for i in 0..n {
            let mut row = ZERO;
            for j in 0..n {
                row += self.mat[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc.re
    }

    /// `U self U^H` for a square `U` of matching side.
    pub fn conjugated_by(&self, u: MatRef<'_, c64>) -> Result<Self> {
        if u.nrows() != self.side() || u.ncols() != self.side() {
            return Err(Error::DimensionMismatch(
                "conjugating matrix has the wrong side".into(),
            ));
        }
        let m = u * self.mat.as_ref() * u.adjoint();
        Ok(Self::from_mat_unchecked(m, self.dims.clone()))
    }

    /// Kronecker product with concatenated dims.
    pub fn tensor(&self, other: &Self) -> Self {
        let (n, m) = (self.side(), other.side());
        let mat = Mat::from_fn(n * m, n * m, |r, c| {
            self.mat[(r / m, c / m)] * other.mat[(r % m, c % m)]
        });
        Self {
            mat,
            dims: self.dims.concat(&other.dims),
        }
    }

    /// Reduced operator on the subsystems in `keep` (taken in ascending order).
    /// An empty `keep` yields the trace as a 1x1 operator.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let keep = self.dims.check_subsystems(keep)?;
        let traced = self.dims.complement(&keep);
        let kept_off = sub_offsets(&self.dims, &keep);
        let traced_off = sub_offsets(&self.dims, &traced);
        let k = kept_off.len();
        let mat = Mat::from_fn(k, k, |i, j| {
            traced_off
                .iter()
                .map(|&t| self.mat[(kept_off[i] + t, kept_off[j] + t)])
                .fold(ZERO, |a, b| a + b)
        });
        Ok(Self {
            mat,
            dims: self.dims.select(&keep),
        })
    }

    /// Transpose on the factors listed in `subs`.
    pub fn partial_transpose(&self, subs: &[usize]) -> Result<Self> {
        let subs = self.dims.check_subsystems(subs)?;
        let perm = PartialTransposeMap::new(&self.dims, &subs);
        let n = self.side();
        let mut mat = Mat::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                let (r2, c2) = perm.map(r, c);
                mat[(r2, c2)] = self.mat[(r, c)];
            }
        }
        Ok(Self {
            mat,
            dims: self.dims.clone(),
        })
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = if self.is_real() {
            dense::eigh_real(self.real_part().as_ref()).0
        } else {
            dense::eigh_complex(self.mat.as_ref()).0
        };
        v.reverse();
        v
    }

    /// Spectral decomposition with deterministic ordering: eigenvalues
    /// descending, each eigenvector's first non-negligible amplitude made real
    /// and positive, and near-degenerate eigenvalues ordered by the
    /// lexicographically greatest real parts.
    pub fn eigh(&self) -> Eigh {
        let n = self.side();
        let (values, vecs): (Vec<f64>, Vec<Vec<c64>>) = if self.is_real() {
            let (v, u) = dense::eigh_real(self.real_part().as_ref());
            let cols = (0..n)
                .map(|k| (0..n).map(|i| c64::new(u[(i, k)], 0.0)).collect())
                .collect();
            (v, cols)
        } else {
            let (v, u) = dense::eigh_complex(self.mat.as_ref());
            let cols = (0..n)
                .map(|k| (0..n).map(|i| u[(i, k)]).collect())
                .collect();
            (v, cols)
        };
        let mut pairs: Vec<(f64, Vec<c64>)> = values
            .into_iter()
            .zip(vecs)
            .map(|(l, v)| (l, fix_phase(v)))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        // Runs of eigenvalues closer than `tie` are ordered by their vectors.
        let scale = pairs.iter().fold(1.0f64, |a, p| a.max(p.0.abs()));
        let tie = 1e-12 * scale;
        let mut start = 0;
        for k in 1..=pairs.len() {
            if k == pairs.len() || pairs[k - 1].0 - pairs[k].0 > tie {
                pairs[start..k].sort_by(|a, b| lex_real_desc(&a.1, &b.1));
                start = k;
            }
        }
        let (values, vectors) = pairs.into_iter().unzip();
        Eigh { values, vectors }
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues().last().expect("operator has side >= 1")
    }

    /// Applies `f` to the spectrum.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = self.eigh();
        let n = self.side();
        let mut mat = Mat::zeros(n, n);
        for (l, v) in e.values.iter().zip(&e.vectors) {
            let fl = f(*l);
            if fl == 0.0 {
                continue;
            }
            for j in 0..n {
                let vj = v[j].conj() * fl;
                for i in 0..n {
                    mat[(i, j)] += v[i] * vj;
                }
            }
        }
        Self::from_mat_unchecked(mat, self.dims.clone())
    }

    pub(crate) fn real_part(&self) -> Mat<f64> {
        let n = self.side();
        Mat::from_fn(n, n, |i, j| self.mat[(i, j)].re)
    }

    /// Real symmetric image `[[Re, -Im], [Im, Re]]` of doubled side.
    pub fn real_embed(&self) -> Mat<f64> {
        let n = self.side();
        Mat::from_fn(2 * n, 2 * n, |i, j| {
            let z = self.mat[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        })
    }

    /// Checks unit trace and positivity, as required of density matrices.
    pub fn check_state(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::NotAState(format!("trace {tr} differs from 1")));
        }
        let lmin = self.lambda_min();
        if lmin < -tol {
            return Err(Error::NotAState(format!("negative eigenvalue {lmin:.3e}")));
        }
        Ok(())
    }
}

/// Index permutation realizing a partial transpose.
pub(crate) struct PartialTransposeMap {
    swapped: Vec<usize>,
    rest: Vec<usize>,
}

impl PartialTransposeMap {
    pub(crate) fn new(dims: &DimList, subs: &[usize]) -> Self {
        let st = strides(dims);
        let table = dims.digit_table();
        let swapped = table
            .iter()
            .map(|d| subs.iter().map(|&s| d[s] * st[s]).sum())
            .collect::<Vec<usize>>();
        let rest = (0..table.len()).map(|i| i - swapped[i]).collect();
        Self { swapped, rest }
    }

    /// Destination of entry `(r, c)`.
    pub(crate) fn map(&self, r: usize, c: usize) -> (usize, usize) {
        (
            self.swapped[c] + self.rest[r],
            self.swapped[r] + self.rest[c],
        )
    }
}

fn fix_phase(mut v: Vec<c64>) -> Vec<c64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = 1e-10 * norm.max(1e-300);
    if let Some(z) = v.iter().find(|z| z.norm() > tol).copied() {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
    v
}

fn lex_real_desc(a: &[c64], b: &[c64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| y.re.total_cmp(&x.re))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(r) s sqrt(r)))^2`.
///
/// Both arguments must be unit-trace and PSD within 1e-9; eigenvalues in
/// `[-1e-9, 0)` are clipped to zero.
pub fn fidelity(r: &HermitianOp, s: &HermitianOp) -> Result<f64> {
    if r.side() != s.side() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            r.dims(),
            s.dims()
        )));
    }
    r.check_state(1e-9)?;
    s.check_state(1e-9)?;
    let sqrt_r = r.spectral_map(|x| x.max(0.0).sqrt());
    let inner = sqrt_r.matrix() * s.matrix() * sqrt_r.matrix();
    let inner = HermitianOp::from_mat_unchecked(inner, r.dims().clone());
    let root_sum: f64 = inner.eigenvalues().iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}
