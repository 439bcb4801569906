//! Separable channels in Kraus form, the two-way purity-swap protocol and
//! ensemble steering on a purification.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::linalg::dense::{ONE, ZERO};
use crate::linalg::{DimList, HermitianOp, PureState};
use crate::states::{Ensemble, Member};

/// Trace-preservation tolerance for channel construction.
pub const TP_TOL: f64 = 1e-9;

/// Channel on `A ⊗ B` with product Kraus operators `A_i ⊗ B_i`.
#[derive(Clone, Debug)]
pub struct SeparableChannel {
    pairs: Vec<(Mat<c64>, Mat<c64>)>,
    da: usize,
    db: usize,
}

fn identity(d: usize) -> Mat<c64> {
    Mat::from_fn(d, d, |i, j| if i == j { ONE } else { ZERO })
}

fn kron(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

fn deviation_from_identity(m: &Mat<c64>) -> f64 {
    let mut dev = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let want = if i == j { ONE } else { ZERO };
            dev = dev.max((m[(i, j)] - want).norm());
        }
    }
    dev
}

impl SeparableChannel {
    /// Validates square, consistently sized factors and
    /// `sum_i K_i^H K_i = 1` within [`TP_TOL`].
    pub fn new(pairs: Vec<(Mat<c64>, Mat<c64>)>) -> Result<Self> {
        let Some((a0, b0)) = pairs.first() else {
            return Err(Error::InvalidDecomposition(
                "channel without Kraus operators".into(),
            ));
        };
        let (da, db) = (a0.nrows(), b0.nrows());
        for (a, b) in &pairs {
            if a.nrows() != da || a.ncols() != da || b.nrows() != db || b.ncols() != db {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus factors must be {da}x{da} and {db}x{db}"
                )));
            }
        }
        let ch = Self { pairs, da, db };
        let dev = deviation_from_identity(&ch.sum(|k| k.adjoint() * k));
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving { deviation: dev });
        }
        Ok(ch)
    }

    pub fn identity(da: usize, db: usize) -> Result<Self> {
        Self::new(vec![(identity(da), identity(db))])
    }

    pub fn local_unitary(u: Mat<c64>, v: Mat<c64>) -> Result<Self> {
        Self::new(vec![(u, v)])
    }

    pub fn kraus_pairs(&self) -> &[(Mat<c64>, Mat<c64>)] {
        &self.pairs
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    fn sum(&self, f: impl Fn(&Mat<c64>) -> Mat<c64>) -> Mat<c64> {
        let n = self.da * self.db;
        let mut acc = Mat::<c64>::zeros(n, n);
        for (a, b) in &self.pairs {
            acc += f(&kron(a, b));
        }
        acc
    }

    /// `sum_i K_i rho K_i^H`.
    pub fn apply(&self, rho: &HermitianOp) -> Result<HermitianOp> {
        if rho.dims().as_slice() != [self.da, self.db] {
            return Err(Error::DimensionMismatch(format!(
                "channel on [{}, {}] applied to {}",
                self.da,
                self.db,
                rho.dims()
            )));
        }
        let m = rho.matrix();
        let out = self.sum(|k| k * m * k.adjoint());
        HermitianOp::new(out, rho.dims().clone())
    }

    /// Whether `sum_i K_i K_i^H = 1` within `tol`.
    pub fn is_unital(&self, tol: f64) -> bool {
        deviation_from_identity(&self.sum(|k| k * k.adjoint())) <= tol
    }

    /// Channel with Kraus operators `K_i^H`; trace preserving only for
    /// unital inputs.
    pub fn adjoint(&self) -> Result<Self> {
        if !self.is_unital(TP_TOL) {
            return Err(Error::NotUnital);
        }
        let pairs = self
            .pairs
            .iter()
            .map(|(a, b)| (a.adjoint().to_owned(), b.adjoint().to_owned()))
            .collect();
        Self::new(pairs)
    }
}

/// Two-way protocol moving the purity of Bob's diagonal state to Alice:
/// Kraus pairs `(|i><j|, |j><i|)` map `1/d ⊗ σ` to `σ ⊗ 1/d`.
pub fn swap_purity_protocol(d: usize, sigma: &HermitianOp) -> Result<SeparableChannel> {
    if d == 0 || sigma.side() != d {
        return Err(Error::DimensionMismatch(format!(
            "σ of side {} for d = {d}",
            sigma.side()
        )));
    }
    for i in 0..d {
        for j in 0..d {
            if i != j && sigma.entry(i, j).norm() > 1e-12 {
                return Err(Error::Precondition(
                    "σ must be diagonal in the computational basis".into(),
                ));
            }
        }
    }
    let unit =
        |i: usize, j: usize| Mat::from_fn(d, d, |r, c| if r == i && c == j { ONE } else { ZERO });
    let mut pairs = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            pairs.push((unit(i, j), unit(j, i)));
        }
    }
    SeparableChannel::new(pairs)
}

/// Measurement on subsystem 0 of `psi` that steers the remaining systems
/// into the members of `target`: `Tr_A[(M_i ⊗ 1) ψ] = q_i φ_i`.
///
/// The returned POVM has one element per target member, followed by the
/// projector onto the kernel of `ψ^A` when that kernel is nontrivial.
pub fn steer_ensemble(psi: &PureState, target: &Ensemble) -> Result<Vec<HermitianOp>> {
    if psi.dims().len() < 2 {
        return Err(Error::InvalidDims(
            "steering needs at least two subsystems".into(),
        ));
    }
    let rest: Vec<usize> = (1..psi.dims().len()).collect();
    let rest_dims = psi.dims().select(&rest);
    if target.dims().total() != rest_dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "target {} vs {}",
            target.dims(),
            rest_dims
        )));
    }
    let marginal = psi.reduced(&rest)?.with_dims(target.dims().clone())?;
    let dev = target.average_deviation(&marginal)?;
    if dev > 1e-8 {
        return Err(Error::InvalidDecomposition(format!(
            "ensemble average deviates from the marginal by {dev:.3e}"
        )));
    }
    let s = psi.schmidt(&[0])?;
    let kept: Vec<usize> = (0..s.coefficients.len())
        .filter(|&k| s.coefficients[k] > 1e-14)
        .collect();
    let da = psi.dims().dim(0);
    let adims = DimList::single(da)?;

    let mut povm = Vec::with_capacity(target.len() + 1);
    for (q, member) in target.members() {
        let Member::Pure(phi) = member else {
            return Err(Error::InvalidDecomposition(
                "steering targets must be pure".into(),
            ));
        };
        let w = q.sqrt();
        let mut m = vec![ZERO; da];
        for &k in &kept {
            let c: c64 = s.right[k]
                .iter()
                .zip(phi.amplitudes())
                .fold(ZERO, |acc, (e, x)| acc + e.conj() * x * w);
            let coef = (c / s.coefficients[k].sqrt()).conj();
            for (mi, a) in m.iter_mut().zip(&s.left[k]) {
                *mi += coef * a;
            }
        }
        povm.push(HermitianOp::outer(adims.clone(), &m)?);
    }
    let mut support = HermitianOp::zeros(adims.clone());
    for &k in &kept {
        support = support.add(&HermitianOp::outer(adims.clone(), &s.left[k])?)?;
    }
    let kernel = HermitianOp::identity(adims).sub(&support)?;
    if kernel.max_abs() > 1e-12 {
        povm.push(kernel);
    }
    Ok(povm)
}

/// Unnormalized conditional states `Tr_A[(M_i ⊗ 1) ψ]` on the systems after
/// subsystem 0.
pub fn conditional_states(psi: &PureState, povm: &[HermitianOp]) -> Result<Vec<HermitianOp>> {
    let rho = psi.projector();
    let rest: Vec<usize> = (1..psi.dims().len()).collect();
    let rest_dims = psi.dims().select(&rest);
    povm.iter()
        .map(|m| {
            let proj = m.tensor(&HermitianOp::identity(rest_dims.clone()));
            let prod = proj.matrix() * rho.matrix();
            let half = HermitianOp::from_fn(rho.dims().clone(), |i, j| {
                (prod[(i, j)] + prod[(j, i)].conj()) * 0.5
            })?;
            half.partial_trace(&rest)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{haar_unitary, random_mixed_state, rng_for};

    fn dl(v: &[usize]) -> DimList {
        DimList::new(v.to_vec()).unwrap()
    }

    fn c(x: f64) -> c64 {
        c64::new(x, 0.0)
    }

    #[test]
    fn identity_and_local_unitary() {
        let mut rng = rng_for(1, 0);
        let rho = random_mixed_state(dl(&[2, 3]), 2, &mut rng);
        let id = SeparableChannel::identity(2, 3).unwrap();
        assert!(id.apply(&rho).unwrap().sub(&rho).unwrap().max_abs() < 1e-15);
        let u = haar_unitary(2, &mut rng);
        let v = haar_unitary(3, &mut rng);
        let ch = SeparableChannel::local_unitary(u.clone(), v.clone()).unwrap();
        let direct = rho.conjugated_by(kron(&u, &v).as_ref()).unwrap();
        assert!(ch.apply(&rho).unwrap().sub(&direct).unwrap().max_abs() < 1e-12);
        assert!(ch.is_unital(1e-9));
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let half = Mat::from_fn(2, 2, |i, j| if i == j { c(0.5) } else { ZERO });
        assert!(matches!(
            SeparableChannel::new(vec![(half, identity(2))]),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn amplitude_damping_is_not_unital() {
        let g: f64 = 0.3;
        let k0 = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(1.0),
            (1, 1) => c((1.0 - g).sqrt()),
            _ => ZERO,
        });
        let k1 = Mat::from_fn(
            2,
            2,
            |i, j| if (i, j) == (0, 1) { c(g.sqrt()) } else { ZERO },
        );
        let ch = SeparableChannel::new(vec![(k0, identity(2)), (k1, identity(2))]).unwrap();
        assert!(!ch.is_unital(1e-9));
        assert!(matches!(ch.adjoint(), Err(Error::NotUnital)));
    }

    #[test]
    fn swap_protocol_moves_purity() {
        let sigma = HermitianOp::diagonal(dl(&[2]), &[0.7, 0.3]).unwrap();
        let ch = swap_purity_protocol(2, &sigma).unwrap();
        let input = HermitianOp::maximally_mixed(dl(&[2])).tensor(&sigma);
        let want = sigma.tensor(&HermitianOp::maximally_mixed(dl(&[2])));
        assert!(ch.apply(&input).unwrap().sub(&want).unwrap().max_abs() < 1e-12);
        assert!(ch.is_unital(1e-9));
        let mixed = HermitianOp::maximally_mixed(dl(&[2, 2]));
        assert!(ch.apply(&mixed).unwrap().sub(&mixed).unwrap().max_abs() < 1e-12);
        let off = HermitianOp::from_real_rows(dl(&[2]), &[vec![0.5, 0.1], vec![0.1, 0.5]]).unwrap();
        assert!(swap_purity_protocol(2, &off).is_err());
    }

    #[test]
    fn projective_channel_is_self_adjoint() {
        let p = |i: usize| Mat::from_fn(2, 2, |r, c| if r == i && c == i { ONE } else { ZERO });
        let pairs = (0..2)
            .flat_map(|i| (0..2).map(move |j| (p(i), p(j))))
            .collect();
        let ch = SeparableChannel::new(pairs).unwrap();
        let adj = ch.adjoint().unwrap();
        for ((a, b), (x, y)) in ch.kraus_pairs().iter().zip(adj.kraus_pairs()) {
            assert_eq!(a, x);
            assert_eq!(b, y);
        }
    }

    #[test]
    fn steering_bell_to_plus_minus() {
        let s = 0.5f64.sqrt();
        let bell = PureState::new(vec![c(s), ZERO, ZERO, c(s)], dl(&[2, 2])).unwrap();
        let plus = PureState::new(vec![c(s), c(s)], dl(&[2])).unwrap();
        let minus = PureState::new(vec![c(s), c(-s)], dl(&[2])).unwrap();
        let target = Ensemble::pure(vec![(0.5, plus.clone()), (0.5, minus.clone())]).unwrap();
        let povm = steer_ensemble(&bell, &target).unwrap();
        assert_eq!(povm.len(), 2);
        let cond = conditional_states(&bell, &povm).unwrap();
        for (st, phi) in cond.iter().zip([plus, minus]) {
            assert!(st.sub(&phi.projector().scaled(0.5)).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn steering_product_state() {
        let psi = PureState::basis(dl(&[2, 3]), 1).unwrap();
        let b = PureState::basis(dl(&[3]), 1).unwrap();
        let target = Ensemble::pure(vec![(1.0, b)]).unwrap();
        let povm = steer_ensemble(&psi, &target).unwrap();
        let mut sum = HermitianOp::zeros(dl(&[2]));
        for m in &povm {
            sum = sum.add(m).unwrap();
        }
        assert!(sum.sub(&HermitianOp::identity(dl(&[2]))).unwrap().max_abs() < 1e-12);
        let cond = conditional_states(&psi, &povm).unwrap();
        assert!((cond[0].trace() - 1.0).abs() < 1e-12);
        assert!(cond[1].max_abs() < 1e-12);
    }

    #[test]
    fn steering_rejects_wrong_marginal() {
        let s = 0.5f64.sqrt();
        let bell = PureState::new(vec![c(s), ZERO, ZERO, c(s)], dl(&[2, 2])).unwrap();
        let zero = PureState::basis(dl(&[2]), 0).unwrap();
        let target = Ensemble::pure(vec![(1.0, zero)]).unwrap();
        assert!(matches!(
            steer_ensemble(&bell, &target),
            Err(Error::InvalidDecomposition(_))
        ));
    }
}
