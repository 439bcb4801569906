//! See-saw lower bounds and a convex-roof upper bound.
//!
//! Restart `k` of a seeded run draws its random initialization from stream
//! `k` of the seed, so results do not depend on how restarts are scheduled.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::linalg::dense::{self, ZERO};
use crate::linalg::{sub_offsets, DimList, HermitianOp, PureState};
use crate::sdp::{solve_multi, MultiProblem, SolverOptions};
use crate::states::{haar_isometry, haar_pure_from, numerical_rank, rng_for, Ensemble, RANK_TOL};

/// Iteration limits of the product-state see-saw.
pub const PRODUCT_MAX_SWEEPS: usize = 500;
pub const PRODUCT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ProductSeesaw {
    /// `<φ_1 ⊗ ... ⊗ φ_n| rho |φ_1 ⊗ ... ⊗ φ_n>`.
    pub value: f64,
    pub states: Vec<PureState>,
    /// Objective after each sweep of the best restart.
    pub history: Vec<f64>,
}

fn regroup(rho: &HermitianOp, parties: &DimList) -> Result<HermitianOp> {
    if parties.total() != rho.side() {
        return Err(Error::DimensionMismatch(format!(
            "parties {} do not match side {}",
            parties,
            rho.side()
        )));
    }
    rho.with_dims(parties.clone())
}

/// Reduces `rho` to an operator on party `k` by contracting every other
/// party with its fixed state.
fn contract(rho: &HermitianOp, states: &[PureState], k: usize) -> HermitianOp {
    let dims = rho.dims();
    let rest = dims.complement(&[k]);
    let lo = sub_offsets(dims, &[k]);
    let ro = sub_offsets(dims, &rest);
    let rest_dims = dims.select(&rest);
    let weights: Vec<c64> = (0..rest_dims.total())
        .map(|r| {
            rest_dims
                .digits(r)
                .iter()
                .zip(&rest)
                .fold(dense::ONE, |acc, (&x, &l)| acc * states[l].amplitudes()[x])
        })
        .collect();
    let m = rho.matrix();
    let d = lo.len();
    let mut half = Mat::<c64>::zeros(d * ro.len(), d);
    // half[(a, r), b] = sum_s rho[(a,r),(b,s)] w[s]
    for a in 0..d {
        for (r, &or) in ro.iter().enumerate() {
            for b in 0..d {
                let mut acc = ZERO;
                for (s, &os) in ro.iter().enumerate() {
                    acc += m[(lo[a] + or, lo[b] + os)] * weights[s];
                }
                half[(a * ro.len() + r, b)] = acc;
            }
        }
    }
    let out = Mat::from_fn(d, d, |a, b| {
        let mut acc = ZERO;
        for (r, w) in weights.iter().enumerate() {
            acc += w.conj() * half[(a * ro.len() + r, b)];
        }
        acc
    });
    HermitianOp::from_mat_unchecked(out, DimList::single(d).expect("d >= 1"))
}

fn product_value(rho: &HermitianOp, states: &[PureState]) -> f64 {
    let amps = PureState::product(states);
    rho.expectation(amps.amplitudes())
}

/// Product see-saw from the given initial local states.
pub fn fmax_product_seesaw_from(
    rho: &HermitianOp,
    parties: &DimList,
    init: Vec<PureState>,
) -> Result<ProductSeesaw> {
    let rho = regroup(rho, parties)?;
    if parties.len() < 2 {
        return Err(Error::InvalidDims("need at least two parties".into()));
    }
    if init.len() != parties.len()
        || init
            .iter()
            .zip(parties.as_slice())
            .any(|(s, &d)| s.dims().total() != d)
    {
        return Err(Error::DimensionMismatch(
            "initial states do not match parties".into(),
        ));
    }
    let mut states: Vec<PureState> = init
        .into_iter()
        .zip(parties.as_slice())
        .map(|(s, &d)| {
            PureState::normalize_unchecked(
                s.amplitudes().to_vec(),
                DimList::single(d).expect("d >= 1"),
            )
        })
        .collect();
    let mut value = product_value(&rho, &states);
    let mut history = vec![value];
    for _ in 0..PRODUCT_MAX_SWEEPS {
        for k in 0..parties.len() {
            let op = contract(&rho, &states, k);
            let e = op.eigh();
            let candidate = PureState::normalize_unchecked(e.vectors[0].clone(), op.dims().clone());
            if e.values[0] >= op.expectation(states[k].amplitudes()) {
                states[k] = candidate;
            }
        }
        let next = product_value(&rho, &states).max(value);
        history.push(next);
        let gain = next - value;
        value = next;
        if gain < PRODUCT_TOL {
            break;
        }
    }
    Ok(ProductSeesaw {
        value,
        states,
        history,
    })
}

/// Best product-state overlap found over `restarts` Haar-random starts.
pub fn fmax_product_seesaw(
    rho: &HermitianOp,
    parties: &DimList,
    restarts: usize,
    seed: u64,
) -> Result<ProductSeesaw> {
    let mut best: Option<ProductSeesaw> = None;
    for k in 0..restarts.max(1) {
        let mut rng = rng_for(seed, k as u64);
        let init = parties
            .as_slice()
            .iter()
            .map(|&d| haar_pure_from(DimList::single(d).expect("d >= 1"), &mut rng))
            .collect();
        let run = fmax_product_seesaw_from(rho, parties, init)?;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub const ARROW_TOL: f64 = 1e-10;
pub const ARROW_MAX_ITER: usize = 200;

#[derive(Clone, Debug)]
pub struct ArrowSeesaw {
    /// `sum_i Tr[(M_i ⊗ |μ_i><μ_i|) rho]`.
    pub value: f64,
    pub povm: Vec<HermitianOp>,
    pub targets: Vec<PureState>,
    pub history: Vec<f64>,
}

/// `<μ|_B rho |μ>_B` on A.
fn conditional_a(rho: &HermitianOp, mu: &PureState) -> HermitianOp {
    let da = rho.dims().dim(0);
    let db = rho.dims().dim(1);
    let m = rho.matrix();
    let v = mu.amplitudes();
    let out = Mat::from_fn(da, da, |a, b| {
        let mut acc = ZERO;
        for r in 0..db {
            for s in 0..db {
                acc += v[r].conj() * m[(a * db + r, b * db + s)] * v[s];
            }
        }
        acc
    });
    HermitianOp::from_mat_unchecked(out, DimList::single(da).expect("da >= 1"))
}

/// `Tr_A[(M ⊗ 1) rho]` on B.
fn conditional_b(rho: &HermitianOp, m_a: &HermitianOp) -> HermitianOp {
    let da = rho.dims().dim(0);
    let db = rho.dims().dim(1);
    let m = rho.matrix();
    let out = Mat::from_fn(db, db, |r, s| {
        let mut acc = ZERO;
        for a in 0..da {
            for b in 0..da {
                acc += m_a.entry(b, a) * m[(a * db + r, b * db + s)];
            }
        }
        acc
    });
    HermitianOp::from_mat_unchecked(out, DimList::single(db).expect("db >= 1"))
}

/// Clips negative eigenvalues and rescales so that the elements sum to the
/// identity exactly: `M_i -> S^{-1/2} M_i S^{-1/2}`, `S = sum_i M_i`.
fn project_povm(povm: &[HermitianOp]) -> Vec<HermitianOp> {
    let clipped: Vec<HermitianOp> = povm
        .iter()
        .map(|m| m.spectral_map(|x| x.max(0.0)))
        .collect();
    let dims = povm[0].dims().clone();
    let mut sum = HermitianOp::zeros(dims);
    for m in &clipped {
        sum = sum.add(m).expect("equal dims");
    }
    let inv_sqrt = sum.spectral_map(|x| if x > 1e-300 { 1.0 / x.sqrt() } else { 0.0 });
    clipped
        .iter()
        .map(|m| m.conjugated_by(inv_sqrt.matrix()).expect("equal dims"))
        .collect()
}

fn arrow_from_povm(rho: &HermitianOp, povm: Vec<HermitianOp>) -> ArrowSeesaw {
    let mut targets = Vec::with_capacity(povm.len());
    let mut value = 0.0;
    for m in &povm {
        let sigma = conditional_b(rho, m);
        let e = sigma.eigh();
        value += e.values[0];
        targets.push(PureState::normalize_unchecked(
            e.vectors[0].clone(),
            sigma.dims().clone(),
        ));
    }
    ArrowSeesaw {
        value,
        povm,
        targets,
        history: vec![value],
    }
}

fn arrow_run(
    rho: &HermitianOp,
    targets: Vec<PureState>,
    opts: &SolverOptions,
) -> Result<ArrowSeesaw> {
    let da = rho.dims().dim(0);
    let id = HermitianOp::identity(DimList::single(da)?);
    let mut current: Option<ArrowSeesaw> = None;
    let mut targets = targets;
    let mut history = Vec::new();
    for _ in 0..ARROW_MAX_ITER {
        let objectives: Vec<HermitianOp> =
            targets.iter().map(|mu| conditional_a(rho, mu)).collect();
        let (povm, _) = solve_multi(
            &MultiProblem {
                objectives,
                total: id.clone(),
            },
            opts,
        )?;
        let next = arrow_from_povm(rho, project_povm(&povm));
        let prev = current.as_ref().map_or(f64::NEG_INFINITY, |c| c.value);
        if next.value <= prev {
            break;
        }
        history.push(next.value);
        targets = next.targets.clone();
        current = Some(next);
        if current.as_ref().unwrap().value - prev < ARROW_TOL {
            break;
        }
    }
    let mut out =
        current.ok_or_else(|| Error::Solver("POVM see-saw produced no iterate".into()))?;
    out.history = history;
    Ok(out)
}

/// One-way see-saw: alternate between optimal targets for a fixed POVM and
/// the optimal POVM (an SDP) for fixed targets. `m` defaults to `d_A^2`.
pub fn f_arrow_seesaw(
    rho: &HermitianOp,
    m: Option<usize>,
    restarts: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<ArrowSeesaw> {
    if rho.dims().len() != 2 {
        return Err(Error::InvalidDims(format!(
            "expected bipartite dims, got {}",
            rho.dims()
        )));
    }
    rho.check_state(1e-9)?;
    let da = rho.dims().dim(0);
    let db = rho.dims().dim(1);
    let m = m.unwrap_or(da * da).max(1);
    let bdims = DimList::single(db)?;
    let mut best: Option<ArrowSeesaw> = None;
    for k in 0..restarts.max(1) {
        let targets = if k == 0 {
            // Eigenbasis measurement on A followed by optimal targets.
            let ra = rho.partial_trace(&[0])?;
            let e = ra.eigh();
            let mut povm: Vec<HermitianOp> = e
                .vectors
                .iter()
                .map(|v| HermitianOp::outer(ra.dims().clone(), v).expect("dims"))
                .collect();
            povm.truncate(m);
            while povm.len() < m {
                povm.push(HermitianOp::zeros(ra.dims().clone()));
            }
            let rest: HermitianOp = povm
                .iter()
                .fold(HermitianOp::identity(ra.dims().clone()), |acc, p| {
                    acc.sub(p).unwrap()
                });
            povm[0] = povm[0].add(&rest)?;
            arrow_from_povm(rho, povm).targets
        } else {
            let mut rng = rng_for(seed, k as u64);
            (0..m)
                .map(|_| haar_pure_from(bdims.clone(), &mut rng))
                .collect()
        };
        let run = arrow_run(rho, targets, opts)?;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub const ROOF_TOL: f64 = 1e-12;
pub const ROOF_MAX_ITER: usize = 3000;

#[derive(Clone, Debug)]
pub struct ConvexRoof {
    /// `sum_i q_i (1 - λ_max(φ_i^B))` for the returned ensemble.
    pub value: f64,
    pub ensemble: Ensemble,
    /// Objective after each iteration of the best restart.
    pub history: Vec<f64>,
}

/// Default ensemble width: `rank^2` capped at 16, never below the rank.
pub fn default_width(rank: usize) -> usize {
    rank.max((rank * rank).min(16))
}

struct RoofState {
    /// Columns `sqrt(λ_k) e_k`.
    basis: Vec<Vec<c64>>,
    db: usize,
    dc: usize,
}

impl RoofState {
    fn members(&self, u: &Mat<c64>) -> Vec<Vec<c64>> {
        let n = self.db * self.dc;
        (0..u.nrows())
            .map(|i| {
                let mut v = vec![ZERO; n];
                for (k, bk) in self.basis.iter().enumerate() {
                    let c = u[(i, k)];
                    for (x, b) in v.iter_mut().zip(bk) {
                        *x += c * b;
                    }
                }
                v
            })
            .collect()
    }

    /// Top Schmidt pair `(a, b)` and squared singular value of a member.
    fn top_pair(&self, v: &[c64]) -> (Vec<c64>, Vec<c64>, f64) {
        let m = Mat::from_fn(self.db, self.dc, |i, j| v[i * self.dc + j]);
        let (u, s, w) = dense::svd_complex(m.as_ref());
        let a = (0..self.db).map(|i| u[(i, 0)]).collect();
        let b = (0..self.dc).map(|j| w[(j, 0)].conj()).collect();
        (a, b, s[0] * s[0])
    }

    /// `sum_i σ_max(φ̃_i)^2` at `u`, and the isometry after one
    /// minorize-maximize step from `u`.
    fn step(&self, u: &Mat<c64>) -> (f64, Mat<c64>) {
        let members = self.members(u);
        let r = self.basis.len();
        let mut g = 0.0;
        let mut b = Mat::<c64>::zeros(u.nrows(), r);
        for (i, v) in members.iter().enumerate() {
            let (a, bb, s2) = self.top_pair(v);
            g += s2;
            let overlap = |x: &[c64]| {
                let mut acc = ZERO;
                for p in 0..self.db {
                    for q in 0..self.dc {
                        acc += (a[p] * bb[q]).conj() * x[p * self.dc + q];
                    }
                }
                acc
            };
            let c = overlap(v);
            for (k, bk) in self.basis.iter().enumerate() {
                b[(i, k)] = c.conj() * overlap(bk);
            }
        }
        let target = Mat::from_fn(b.nrows(), b.ncols(), |i, k| b[(i, k)].conj());
        (g, dense::polar_isometry(target.as_ref()))
    }
}

/// Upper bound on the geometric entanglement of `rho` (dims `[dB, dC]`)
/// from explicit pure-state decompositions `φ̃_i = sum_k U_ik sqrt(λ_k) e_k`
/// over `m x rank` isometries `U`, improved by minorize-maximize steps.
pub fn eg_upper_convex_roof(
    rho: &HermitianOp,
    m: Option<usize>,
    restarts: usize,
    seed: u64,
) -> Result<ConvexRoof> {
    if rho.dims().len() != 2 {
        return Err(Error::InvalidDims(format!(
            "expected bipartite dims, got {}",
            rho.dims()
        )));
    }
    rho.check_state(1e-9)?;
    let rank = numerical_rank(rho, RANK_TOL);
    let m = m.unwrap_or_else(|| default_width(rank));
    if m < rank {
        return Err(Error::Precondition(format!(
            "ensemble width {m} below rank {rank}"
        )));
    }
    let e = rho.eigh();
    let basis: Vec<Vec<c64>> = (0..rank)
        .map(|k| {
            let w = e.values[k].sqrt();
            e.vectors[k].iter().map(|x| x * w).collect()
        })
        .collect();
    let state = RoofState {
        basis,
        db: rho.dims().dim(0),
        dc: rho.dims().dim(1),
    };

    let mut best: Option<(f64, Mat<c64>, Vec<f64>)> = None;
    for k in 0..restarts.max(1) {
        let mut u = if k == 0 {
            Mat::from_fn(m, rank, |i, j| if i == j { dense::ONE } else { ZERO })
        } else {
            haar_isometry(m, rank, &mut rng_for(seed, k as u64))
        };
        let (mut g, mut next) = state.step(&u);
        let mut history = vec![1.0 - g];
        for _ in 0..ROOF_MAX_ITER {
            let (gn, after) = state.step(&next);
            if gn <= g {
                break;
            }
            let gain = gn - g;
            u = next;
            next = after;
            g = gn;
            history.push(1.0 - g);
            if gain < ROOF_TOL {
                break;
            }
        }
        if best.as_ref().is_none_or(|(bg, _, _)| g > *bg) {
            best = Some((g, u, history));
        }
    }
    let (g, u, history) = best.expect("at least one restart");
    let mut members = Vec::new();
    for v in state.members(&u) {
        let q: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if q > 1e-300 {
            members.push((q, PureState::normalize_unchecked(v, rho.dims().clone())));
        }
    }
    let total: f64 = members.iter().map(|(q, _)| q).sum();
    let members = members.into_iter().map(|(q, s)| (q / total, s)).collect();
    let ensemble = Ensemble::pure(members)?;
    Ok(ConvexRoof {
        value: (1.0 - g).max(0.0),
        ensemble,
        history,
    })
}
