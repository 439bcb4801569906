//! Semidefinite programs over one Hermitian matrix variable.
//!
//! A problem maximizes `Re Tr[C X]` subject to scalar equalities
//! `Re Tr[A_k X] = b_k`, partial-trace equalities and cone constraints
//! `L_j(X) ⪰ 0` where each `L_j` is the identity, a partial transpose or
//! `X -> 1 - X`. Problems are compiled to a real block SDP (see [`kernel`])
//! and handed to an [`SdpBackend`].

mod compile;
pub mod kernel;

use crate::error::{Error, Result};
use crate::linalg::{DimList, HermitianOp};

pub use compile::{solve_multi, MultiProblem};
pub use kernel::{BlockSdp, BlockSolution, Entry};

/// Linear map whose image is constrained to be positive semidefinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConeMap {
    Identity,
    /// Partial transpose on the listed subsystems.
    PartialTranspose(Vec<usize>),
    /// `X -> 1 - X`.
    ComplementIdentity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_gap: 1e-8,
            tol_feas: 1e-8,
            max_iter: 200,
        }
    }
}

/// Solves real block SDPs. The built-in [`InteriorPoint`] is the default;
/// other conic solvers can be plugged in through this trait.
pub trait SdpBackend: Sync {
    fn solve_block(&self, problem: &BlockSdp, options: &SolverOptions) -> BlockSolution;
}

/// Dense primal-dual interior-point method with Nesterov-Todd scaling and
/// Mehrotra predictor-corrector steps.
#[derive(Clone, Copy, Debug, Default)]
pub struct InteriorPoint;

impl SdpBackend for InteriorPoint {
    fn solve_block(&self, problem: &BlockSdp, options: &SolverOptions) -> BlockSolution {
        kernel::interior_point(problem, options)
    }
}

/// A partial-trace equality `Tr_{not keep} X = target`.
#[derive(Clone, Debug)]
pub struct PartialTraceEq {
    pub keep: Vec<usize>,
    pub target: HermitianOp,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    dims: DimList,
    objective: HermitianOp,
    equalities: Vec<(HermitianOp, f64)>,
    partial_traces: Vec<PartialTraceEq>,
    cones: Vec<ConeMap>,
    force_complex: bool,
}

impl SdpProblem {
    /// Maximize `Re Tr[objective X]` with no constraints yet.
    pub fn maximize(objective: HermitianOp) -> Self {
        Self {
            dims: objective.dims().clone(),
            objective,
            equalities: Vec::new(),
            partial_traces: Vec::new(),
            cones: Vec::new(),
            force_complex: false,
        }
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn objective(&self) -> &HermitianOp {
        &self.objective
    }

    pub fn cones(&self) -> &[ConeMap] {
        &self.cones
    }

    /// `Re Tr[a X] = b`.
    pub fn equality(mut self, a: HermitianOp, b: f64) -> Result<Self> {
        if a.dims() != &self.dims {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                a.dims(),
                self.dims
            )));
        }
        if !b.is_finite() {
            return Err(Error::OutOfRange(format!("equality right-hand side {b}")));
        }
        self.equalities.push((a, b));
        Ok(self)
    }

    /// `Tr X = t`.
    pub fn trace(self, t: f64) -> Result<Self> {
        let id = HermitianOp::identity(self.dims.clone());
        self.equality(id, t)
    }

    /// `Tr_{not keep} X = target`, compiled to one scalar row per real
    /// degree of freedom of the target.
    pub fn partial_trace(mut self, keep: &[usize], target: HermitianOp) -> Result<Self> {
        let keep = self.dims.check_subsystems(keep)?;
        if target.dims() != &self.dims.select(&keep) {
            return Err(Error::DimensionMismatch(format!(
                "target dims {} vs kept {}",
                target.dims(),
                self.dims.select(&keep)
            )));
        }
        self.partial_traces.push(PartialTraceEq { keep, target });
        Ok(self)
    }

    pub fn cone(mut self, map: ConeMap) -> Result<Self> {
        if let ConeMap::PartialTranspose(subs) = &map {
            let subs = self.dims.check_subsystems(subs)?;
            self.cones.push(ConeMap::PartialTranspose(subs));
        } else {
            self.cones.push(map);
        }
        Ok(self)
    }

    /// Compile with complex parametrization even when all data is real.
    pub fn force_complex(mut self, on: bool) -> Self {
        self.force_complex = on;
        self
    }

    /// Whether the program is solved over real symmetric matrices.
    pub fn is_real(&self) -> bool {
        !self.force_complex
            && self.objective.is_real()
            && self.equalities.iter().all(|(a, _)| a.is_real())
            && self.partial_traces.iter().all(|p| p.target.is_real())
    }
}

/// Solution of an [`SdpProblem`].
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub maximizer: HermitianOp,
    pub objective_value: f64,
    pub dual_value: f64,
    pub duality_gap: f64,
    pub feasibility_residual: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// `duality_gap + feasibility_residual * ‖C‖_∞`.
    pub delta: f64,
}

pub fn solve(problem: &SdpProblem, options: &SolverOptions) -> Result<SdpSolution> {
    solve_with(problem, options, &InteriorPoint)
}

pub fn solve_with(
    problem: &SdpProblem,
    options: &SolverOptions,
    backend: &dyn SdpBackend,
) -> Result<SdpSolution> {
    if !(options.tol_gap > 0.0 && options.tol_feas > 0.0) {
        return Err(Error::OutOfRange(
            "solver tolerances must be positive".into(),
        ));
    }
    let compiled = compile::compile_single(problem)?;
    let sol = backend.solve_block(&compiled.block, options);
    let maximizer = compiled.layout.assemble(0, &sol.y, problem.dims.clone());
    let cost_norm = problem.objective.spectral_norm();
    Ok(finish(sol, maximizer, cost_norm))
}

fn finish(sol: BlockSolution, maximizer: HermitianOp, cost_norm: f64) -> SdpSolution {
    let duality_gap = if sol.dual_value.is_finite() {
        (sol.dual_value - sol.primal_value).abs()
    } else {
        f64::INFINITY
    };
    SdpSolution {
        maximizer,
        objective_value: sol.primal_value,
        dual_value: sol.dual_value,
        duality_gap,
        feasibility_residual: sol.feasibility_residual,
        status: sol.status,
        iterations: sol.iterations,
        delta: duality_gap + sol.feasibility_residual * cost_norm,
    }
}
