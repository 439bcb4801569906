//! SDP bounds on the distillable ground-state fidelity and on the geometric
//! entanglement.
//!
//! Every bound is returned as a [`BoundReport`] bracketing the quantity.
//! Upper brackets add the solver precision `δ` to the SDP objective; lower
//! brackets come from explicit protocols or product states unless the
//! relaxation is known to be exact.

use crate::error::{Error, Result};
use crate::linalg::{DimList, HermitianOp, PureState};
use crate::sdp::{self, ConeMap, SdpProblem, SdpSolution, SdpStatus, SolverOptions};
use crate::states::{purify, RANK_TOL};
use crate::variational::fmax_product_seesaw_from;

/// Largest `δ` accepted from a run that stopped before meeting tolerances.
pub const MAX_UNCONVERGED_DELTA: f64 = 1e-4;

#[derive(Clone, Debug, Default)]
pub struct BoundOptions {
    pub solver: SolverOptions,
    /// Use `Tr X = 2` in the two-way program instead of `Tr X = d_A`.
    pub literal_trace_2: bool,
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub lower: f64,
    pub upper: f64,
    /// Raw SDP objective (or the exact value when no SDP is involved).
    pub objective: f64,
    /// `1 - λ_max` of the normalized maximizer.
    pub epsilon: f64,
    pub delta: f64,
    pub maximizer: HermitianOp,
    pub exact: bool,
    pub method: String,
    pub status: SdpStatus,
}

fn checked(sol: SdpSolution) -> Result<SdpSolution> {
    match sol.status {
        SdpStatus::Optimal => Ok(sol),
        SdpStatus::Infeasible => Err(Error::Solver("program reported infeasible".into())),
        _ if sol.delta.is_finite() && sol.delta <= MAX_UNCONVERGED_DELTA => Ok(sol),
        s => Err(Error::Solver(format!("{s:?} with delta {:.3e}", sol.delta))),
    }
}

fn as_state(rho: &HermitianOp, parties: &DimList) -> Result<HermitianOp> {
    if parties.total() != rho.side() {
        return Err(Error::DimensionMismatch(format!(
            "parties {} for side {}",
            parties,
            rho.side()
        )));
    }
    let r = rho.with_dims(parties.clone())?;
    r.check_state(1e-9)?;
    Ok(r)
}

fn bipartite(rho: &HermitianOp) -> Result<(usize, usize)> {
    if rho.dims().len() != 2 {
        return Err(Error::InvalidDims(format!(
            "expected bipartite dims, got {}",
            rho.dims()
        )));
    }
    rho.check_state(1e-9)?;
    Ok((rho.dims().dim(0), rho.dims().dim(1)))
}

fn epsilon_of(x: &HermitianOp, norm: f64) -> f64 {
    if norm <= 0.0 {
        return 1.0;
    }
    (1.0 - x.lambda_max() / norm).clamp(0.0, 1.0)
}

/// Maximize `Tr[rho σ]` over unit-trace states that are PPT across every
/// bipartition of `parties`.
pub fn fmax_ppt_upper(
    rho: &HermitianOp,
    parties: &DimList,
    opts: &BoundOptions,
) -> Result<SdpSolution> {
    let rho = as_state(rho, parties)?;
    let n = parties.len();
    if n < 2 {
        return Err(Error::InvalidDims("need at least two parties".into()));
    }
    let mut p = SdpProblem::maximize(rho)
        .trace(1.0)?
        .cone(ConeMap::Identity)?;
    // Transposing S or its complement gives the same cone; fix party 0 outside.
    for mask in 1u32..(1 << (n - 1)) {
        let subs: Vec<usize> = (1..n).filter(|k| mask & (1 << (k - 1)) != 0).collect();
        p = p.cone(ConeMap::PartialTranspose(subs))?;
    }
    checked(sdp::solve(&p, &opts.solver)?)
}

/// Two-sided bracket on `F_max` for two or three parties.
pub fn fmax_sandwich(
    rho: &HermitianOp,
    parties: &DimList,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let n = parties.len();
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!(
            "sandwich bound for {n} parties"
        )));
    }
    let sol = fmax_ppt_upper(rho, parties, opts)?;
    let rho = as_state(rho, parties)?;
    let obj = sol.objective_value;
    let epsilon = epsilon_of(&sol.maximizer, 1.0);
    let c = if n == 2 { 4.0 } else { 8.0 };

    let top = sol.maximizer.eigh().vectors.swap_remove(0);
    let top = PureState::normalize_unchecked(top, parties.clone());
    let init: Vec<PureState> = (0..n)
        .map(|k| {
            let red = top.reduced(&[k]).expect("valid party");
            let v = red.eigh().vectors.swap_remove(0);
            PureState::normalize_unchecked(v, red.dims().clone())
        })
        .collect();
    let rounding = fmax_product_seesaw_from(&rho, parties, init)?.value;

    let exact = n == 2 && parties.total() <= 6;
    let mut lower = (obj - c * epsilon.sqrt()).max(rounding);
    if exact {
        lower = lower.max(obj - sol.delta);
    }
    Ok(BoundReport {
        lower,
        upper: obj + sol.delta,
        objective: obj,
        epsilon,
        delta: sol.delta,
        maximizer: sol.maximizer,
        exact,
        method: format!("ppt-sandwich-{n}"),
        status: sol.status,
    })
}

/// Value of the protocol in which Alice measures in the eigenbasis of her
/// marginal (or does nothing) and Bob rotates to his best pure state.
pub fn trivial_protocol_value(rho: &HermitianOp) -> Result<f64> {
    let (_, db) = bipartite(rho)?;
    let no_measure = rho.partial_trace(&[1])?.lambda_max();
    let ra = rho.partial_trace(&[0])?;
    let mut measured = 0.0;
    for v in ra.eigh().vectors {
        let p = HermitianOp::outer(ra.dims().clone(), &v)?;
        let proj = p.tensor(&HermitianOp::identity(DimList::single(db)?));
        measured += rho
            .conjugated_by(proj.matrix())?
            .partial_trace(&[1])?
            .lambda_max();
    }
    Ok(no_measure.max(measured))
}

/// One-way fidelity upper bound: maximize `Tr[X rho]` with `X ⪰ 0`,
/// `X^{T_B} ⪰ 0`, `Tr_B X = 1_A`. Exact when `d_A d_B <= 6`.
pub fn f_arrow_upper(rho: &HermitianOp, opts: &BoundOptions) -> Result<BoundReport> {
    let (da, db) = bipartite(rho)?;
    let p = SdpProblem::maximize(rho.clone())
        .partial_trace(&[0], HermitianOp::identity(DimList::single(da)?))?
        .cone(ConeMap::Identity)?
        .cone(ConeMap::PartialTranspose(vec![1]))?;
    let sol = checked(sdp::solve(&p, &opts.solver)?)?;
    let obj = sol.objective_value;
    let exact = da * db <= 6;
    let protocol = trivial_protocol_value(rho)?;
    let lower = if exact {
        (obj - sol.delta).max(protocol)
    } else {
        protocol
    };
    Ok(BoundReport {
        lower,
        upper: obj + sol.delta,
        objective: obj,
        epsilon: epsilon_of(&sol.maximizer, da as f64),
        delta: sol.delta,
        maximizer: sol.maximizer,
        exact,
        method: "f-arrow-ppt".into(),
        status: sol.status,
    })
}

/// Two-way fidelity upper bound: maximize `Tr[X rho]` with `0 ⪯ X ⪯ 1`,
/// `X^{T_B} ⪰ 0` and `Tr X = d_A` (or 2 in literal mode).
pub fn f_twoway_upper(rho: &HermitianOp, opts: &BoundOptions) -> Result<BoundReport> {
    let (da, _) = bipartite(rho)?;
    let t = if opts.literal_trace_2 { 2.0 } else { da as f64 };
    let p = SdpProblem::maximize(rho.clone())
        .trace(t)?
        .cone(ConeMap::Identity)?
        .cone(ConeMap::ComplementIdentity)?
        .cone(ConeMap::PartialTranspose(vec![1]))?;
    let sol = checked(sdp::solve(&p, &opts.solver)?)?;
    let obj = sol.objective_value;
    let upper = obj + sol.delta;
    let mut lower = trivial_protocol_value(rho)?;
    if opts.literal_trace_2 {
        lower = lower.min(upper);
    }
    Ok(BoundReport {
        lower,
        upper,
        objective: obj,
        epsilon: epsilon_of(&sol.maximizer, t),
        delta: sol.delta,
        maximizer: sol.maximizer,
        exact: false,
        method: if opts.literal_trace_2 {
            "f-twoway-ppt-trace2"
        } else {
            "f-twoway-ppt"
        }
        .into(),
        status: sol.status,
    })
}

/// Purification of `rho_BC` with the purifier first, plus the index (1 or
/// 2) of the smaller of B and C; ties pick B.
fn purified(rho_bc: &HermitianOp) -> Result<(PureState, usize)> {
    let (db, dc) = bipartite(rho_bc)?;
    let psi = purify(rho_bc, RANK_TOL)?;
    Ok((psi, if dc < db { 2 } else { 1 }))
}

/// Geometric-entanglement bracket from the one-way fidelity of the
/// purifier and the smaller subsystem.
pub fn eg_lower_two_sys(rho_bc: &HermitianOp, opts: &BoundOptions) -> Result<BoundReport> {
    let (psi, keep) = purified(rho_bc)?;
    let rho_ab = psi.reduced(&[0, keep])?;
    let fa = f_arrow_upper(&rho_ab, opts)?;
    Ok(BoundReport {
        lower: (1.0 - fa.upper).max(0.0),
        upper: 1.0 - fa.lower,
        objective: 1.0 - fa.objective,
        epsilon: fa.epsilon,
        delta: fa.delta,
        maximizer: fa.maximizer,
        exact: fa.exact,
        method: "eg-two-system".into(),
        status: fa.status,
    })
}

/// Geometric-entanglement lower bound from a three-system PPT program on the
/// purification: maximize `<ψ|X|ψ>` with `X`, `X^{T_A}`, `X^{T_B}`,
/// `X^{T_C}` all PSD and `Tr_{BC} X = 1_A`.
pub fn eg_lower_three_sys(rho_bc: &HermitianOp, opts: &BoundOptions) -> Result<BoundReport> {
    let (psi, keep) = purified(rho_bc)?;
    let r = psi.dims().dim(0);
    let p = SdpProblem::maximize(psi.projector())
        .partial_trace(&[0], HermitianOp::identity(DimList::single(r)?))?
        .cone(ConeMap::Identity)?
        .cone(ConeMap::PartialTranspose(vec![0]))?
        .cone(ConeMap::PartialTranspose(vec![1]))?
        .cone(ConeMap::PartialTranspose(vec![2]))?;
    let sol = checked(sdp::solve(&p, &opts.solver)?)?;
    let obj = sol.objective_value;
    let protocol = trivial_protocol_value(&psi.reduced(&[0, keep])?)?;
    Ok(BoundReport {
        lower: (1.0 - obj - sol.delta).max(0.0),
        upper: 1.0 - protocol,
        objective: 1.0 - obj,
        epsilon: epsilon_of(&sol.maximizer, r as f64),
        delta: sol.delta,
        maximizer: sol.maximizer,
        exact: false,
        method: "eg-three-system".into(),
        status: sol.status,
    })
}

/// Geometric entanglement of a pure state of two, three or four parties.
pub fn eg_pure_exact(
    psi: &PureState,
    parties: &DimList,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    if parties.total() != psi.dims().total() {
        return Err(Error::DimensionMismatch(format!(
            "parties {} for {}",
            parties,
            psi.dims()
        )));
    }
    let psi = PureState::normalize_unchecked(psi.amplitudes().to_vec(), parties.clone());
    let n = parties.len();
    match n {
        2 => {
            let s = psi.schmidt(&[0])?;
            let value = 1.0 - s.coefficients[0];
            let a = PureState::normalize_unchecked(s.left[0].clone(), s.left_dims.clone());
            let b = PureState::normalize_unchecked(s.right[0].clone(), s.right_dims.clone());
            Ok(BoundReport {
                lower: value,
                upper: value,
                objective: value,
                epsilon: 0.0,
                delta: 0.0,
                maximizer: a.tensor(&b).projector(),
                exact: true,
                method: "schmidt".into(),
                status: SdpStatus::Optimal,
            })
        }
        3 | 4 => {
            // Drop the party whose removal leaves the smallest reduction.
            let drop = (0..n)
                .max_by_key(|&k| (parties.dim(k), std::cmp::Reverse(k)))
                .expect("n > 0");
            let keep: Vec<usize> = (0..n).filter(|&k| k != drop).collect();
            let red = psi.reduced(&keep)?;
            let fs = fmax_sandwich(&red, red.dims(), opts)?;
            Ok(BoundReport {
                lower: (1.0 - fs.upper).max(0.0),
                upper: 1.0 - fs.lower,
                objective: 1.0 - fs.objective,
                epsilon: fs.epsilon,
                delta: fs.delta,
                maximizer: fs.maximizer,
                exact: fs.exact,
                method: format!("pure-reduction-{n}"),
                status: fs.status,
            })
        }
        _ => Err(Error::Unsupported(format!(
            "pure-state geometric entanglement for {n} parties"
        ))),
    }
}
