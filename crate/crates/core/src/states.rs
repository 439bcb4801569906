//! State families, Haar sampling and purification.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{DimList, HermitianOp, PureState};

/// Default relative rank threshold used by [`purify`].
pub const RANK_TOL: f64 = 1e-12;

/// One member of an ensemble decomposition.
#[derive(Clone, Debug)]
pub enum Member {
    Pure(PureState),
    Mixed(HermitianOp),
}

impl Member {
    pub fn density(&self) -> HermitianOp {
        match self {
            Member::Pure(p) => p.projector(),
            Member::Mixed(m) => m.clone(),
        }
    }

    pub fn dims(&self) -> &DimList {
        match self {
            Member::Pure(p) => p.dims(),
            Member::Mixed(m) => m.dims(),
        }
    }
}

/// Probability-weighted collection of states `{p_i, s_i}`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    members: Vec<(f64, Member)>,
}

impl Ensemble {
    /// Probabilities must be non-negative and sum to one within 1e-10;
    /// all members must share dims.
    pub fn new(members: Vec<(f64, Member)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidDecomposition("empty ensemble".into()));
        }
        let dims = members[0].1.dims().clone();
        let mut total = 0.0;
        for (p, m) in &members {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::InvalidDecomposition(format!("probability {p}")));
            }
            if *m.dims() != dims {
                return Err(Error::DimensionMismatch(format!(
                    "{} vs {}",
                    m.dims(),
                    dims
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDecomposition(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { members })
    }

    pub fn pure(members: Vec<(f64, PureState)>) -> Result<Self> {
        Self::new(
            members
                .into_iter()
                .map(|(p, s)| (p, Member::Pure(s)))
                .collect(),
        )
    }

    pub fn members(&self) -> &[(f64, Member)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dims(&self) -> &DimList {
        self.members[0].1.dims()
    }

    /// `sum_i p_i s_i`.
    pub fn average(&self) -> HermitianOp {
        let mut acc = HermitianOp::zeros(self.dims().clone());
        for (p, m) in &self.members {
            acc = acc
                .add(&m.density().scaled(*p))
                .expect("members share dims");
        }
        acc
    }

    /// Largest entry deviation between the ensemble average and `rho`.
    pub fn average_deviation(&self, rho: &HermitianOp) -> Result<f64> {
        Ok(self.average().sub(rho)?.max_abs())
    }
}

/// The 2x4 PPT entangled family `rho_a`, dims `[2, 4]`, `0 <= a <= 1`.
pub fn horodecki_state(a: f64) -> Result<HermitianOp> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::OutOfRange(format!("a = {a} outside [0, 1]")));
    }
    let b = (1.0 + a) / 2.0;
    let s = (1.0 - a * a).max(0.0).sqrt() / 2.0;
    let mut m = [[0.0f64; 8]; 8];
    for i in 0..4 {
        m[i][i] = a;
    }
    for i in 5..7 {
        m[i][i] = a;
    }
    for k in 0..3 {
        m[k][k + 5] = a;
        m[k + 5][k] = a;
    }
    m[4][4] = b;
    m[7][7] = b;
    m[4][7] = s;
    m[7][4] = s;
    let norm = 7.0 * a + 1.0;
    let rows: Vec<Vec<f64>> = m
        .iter()
        .map(|r| r.iter().map(|x| x / norm).collect())
        .collect();
    HermitianOp::from_real_rows(DimList::new(vec![2, 4])?, &rows)
}

/// Deterministic generator for sample `stream` of a seeded experiment.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_c64(rng: &mut impl Rng) -> c64 {
    c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector drawn from `rng`.
pub fn haar_pure_from(dims: DimList, rng: &mut impl Rng) -> PureState {
    loop {
        let v: Vec<c64> = (0..dims.total()).map(|_| gaussian_c64(rng)).collect();
        if let Ok(p) = PureState::from_unnormalized(v, dims.clone()) {
            return p;
        }
    }
}

/// Haar-random pure state, deterministic per seed.
pub fn haar_random_pure(dims: DimList, seed: u64) -> PureState {
    haar_pure_from(dims, &mut rng_for(seed, 0))
}

/// Haar-random `d x d` unitary (Gram-Schmidt on a Ginibre matrix).
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> Mat<c64> {
    let g = Mat::from_fn(d, d, |_, _| gaussian_c64(rng));
    orthonormalize_columns(g)
}

/// `m x r` matrix with orthonormal columns, Haar-distributed (`m >= r`).
pub fn haar_isometry(m: usize, r: usize, rng: &mut impl Rng) -> Mat<c64> {
    let g = Mat::from_fn(m, r, |_, _| gaussian_c64(rng));
    orthonormalize_columns(g)
}

fn orthonormalize_columns(mut g: Mat<c64>) -> Mat<c64> {
    let (rows, cols) = (g.nrows(), g.ncols());
    for k in 0..cols {
        for _ in 0..2 {
            for j in 0..k {
                let mut dot = c64::new(0.0, 0.0);
                for i in 0..rows {
                    dot += g[(i, j)].conj() * g[(i, k)];
                }
                for i in 0..rows {
                    let gij = g[(i, j)];
                    g[(i, k)] -= gij * dot;
                }
            }
        }
        let norm = (0..rows).map(|i| g[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            g[(i, k)] /= norm;
        }
    }
    g
}

/// Random mixed state of the given rank: partial trace of a Haar-random
/// purification with a `rank`-dimensional environment.
pub fn random_mixed_state(dims: DimList, rank: usize, rng: &mut impl Rng) -> HermitianOp {
    let rank = rank.max(1);
    let total = dims.concat(&DimList::single(rank).expect("rank >= 1"));
    let psi = haar_pure_from(total, rng);
    let keep: Vec<usize> = (0..dims.len()).collect();
    psi.reduced(&keep).expect("valid subsystems")
}

/// Purification `sum_k sqrt(l_k) |k> ⊗ |e_k>` with the purifier as
/// subsystem 0; its dimension is the number of eigenvalues above
/// `rank_tol * lambda_max`.
pub fn purify(r: &HermitianOp, rank_tol: f64) -> Result<PureState> {
    r.check_state(1e-9)?;
    let e = r.eigh();
    let lmax = e.values[0];
    let kept: Vec<usize> = (0..e.values.len())
        .filter(|&k| e.values[k] > rank_tol * lmax)
        .collect();
    let rank = kept.len();
    let n = r.side();
    let mut amps = vec![c64::new(0.0, 0.0); rank * n];
    for (slot, &k) in kept.iter().enumerate() {
        let w = e.values[k].sqrt();
        for i in 0..n {
            amps[slot * n + i] = e.vectors[k][i] * w;
        }
    }
    let dims = DimList::single(rank)?.concat(r.dims());
    PureState::from_unnormalized(amps, dims)
}

/// Numerical rank with the same threshold as [`purify`].
pub fn numerical_rank(r: &HermitianOp, rank_tol: f64) -> usize {
    let v = r.eigenvalues();
    let lmax = v[0];
    v.iter().filter(|&&x| x > rank_tol * lmax).count()
}
