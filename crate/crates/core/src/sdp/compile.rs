//! Hermitian variables to real block SDPs.
//!
//! A Hermitian `N x N` variable is parametrized by its real diagonal, the
//! real parts of its upper triangle and (complex mode) the imaginary parts of
//! its upper triangle. In real mode only the symmetric part is kept. Cone
//! images are written through `[[Re, -Im], [Im, Re]]` in complex mode.

use faer::{c64, Mat};

use super::kernel::{BlockSdp, Entry};
use super::{
    finish, ConeMap, InteriorPoint, SdpBackend, SdpProblem, SdpSolution, SdpStatus, SolverOptions,
};
use crate::error::{Error, Result};
use crate::linalg::{sub_offsets, DimList, HermitianOp, PartialTransposeMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Diag,
    Re,
    Im,
}

pub(crate) struct Layout {
    complex: bool,
    sides: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl Layout {
    fn new(sides: Vec<usize>, complex: bool) -> Self {
        let mut offsets = Vec::with_capacity(sides.len());
        let mut total = 0;
        for &n in &sides {
            offsets.push(total);
            total += if complex { n * n } else { n * (n + 1) / 2 };
        }
        Self {
            complex,
            sides,
            offsets,
            total,
        }
    }

    fn re_index(&self, v: usize, p: usize, q: usize) -> usize {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        let n = self.sides[v];
        self.offsets[v] + p * n - p * p.saturating_sub(1) / 2 + (q - p)
    }

    fn im_index(&self, v: usize, p: usize, q: usize) -> usize {
        debug_assert!(self.complex && p < q);
        let n = self.sides[v];
        self.offsets[v] + n * (n + 1) / 2 + p * (n - 1) - p * p.saturating_sub(1) / 2 + (q - p - 1)
    }

    /// Every parameter of variable `v` as `(index, p, q, kind)`.
    fn params(&self, v: usize) -> Vec<(usize, usize, usize, Kind)> {
        let n = self.sides[v];
        let mut out = Vec::with_capacity(if self.complex { n * n } else { n * (n + 1) / 2 });
        for p in 0..n {
            for q in p..n {
                let kind = if p == q { Kind::Diag } else { Kind::Re };
                out.push((self.re_index(v, p, q), p, q, kind));
            }
        }
        if self.complex {
            for p in 0..n {
                for q in p + 1..n {
                    out.push((self.im_index(v, p, q), p, q, Kind::Im));
                }
            }
        }
        out
    }

    /// Coefficients of `Re Tr[a X_v]` in the parameters.
    fn functional(&self, v: usize, a: &HermitianOp) -> Vec<(usize, f64)> {
        self.params(v)
            .into_iter()
            .filter_map(|(i, p, q, kind)| {
                let z = a.entry(p, q);
                let c = match kind {
                    Kind::Diag => z.re,
                    Kind::Re => 2.0 * z.re,
                    Kind::Im => 2.0 * z.im,
                };
                (c != 0.0).then_some((i, c))
            })
            .collect()
    }

    /// Coefficient row for `Re X_v[p, q]` or `Im X_v[p, q]`.
    fn entry_part(&self, v: usize, p: usize, q: usize, imag: bool) -> Option<(usize, f64)> {
        if !imag {
            return Some((self.re_index(v, p, q), 1.0));
        }
        match p.cmp(&q) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Less => Some((self.im_index(v, p, q), 1.0)),
            std::cmp::Ordering::Greater => Some((self.im_index(v, q, p), -1.0)),
        }
    }

    pub(crate) fn assemble(&self, v: usize, y: &[f64], dims: DimList) -> HermitianOp {
        let n = self.sides[v];
        let mut m = Mat::<c64>::zeros(n, n);
        for (i, p, q, kind) in self.params(v) {
            match kind {
                Kind::Diag => m[(p, p)].re = y[i],
                Kind::Re => {
                    m[(p, q)].re = y[i];
                    m[(q, p)].re = y[i];
                }
                Kind::Im => {
                    m[(p, q)].im = y[i];
                    m[(q, p)].im = -y[i];
                }
            }
        }
        HermitianOp::from_mat_unchecked(m, dims)
    }
}

/// Builder for block SDPs over several Hermitian variables.
struct Builder {
    layout: Layout,
    block_sizes: Vec<usize>,
    constant: Vec<Mat<f64>>,
    coefficients: Vec<Vec<Entry>>,
    cost: Vec<f64>,
    eq_rows: Vec<Vec<(usize, f64)>>,
    eq_rhs: Vec<f64>,
}

impl Builder {
    fn new(layout: Layout) -> Self {
        let n = layout.total;
        Self {
            layout,
            block_sizes: Vec::new(),
            constant: Vec::new(),
            coefficients: vec![Vec::new(); n],
            cost: vec![0.0; n],
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
        }
    }

    fn objective(&mut self, v: usize, c: &HermitianOp) {
        for (i, x) in self.layout.functional(v, c) {
            self.cost[i] += x;
        }
    }

    fn equality(&mut self, v: usize, a: &HermitianOp, b: f64) {
        self.eq_rows.push(self.layout.functional(v, a));
        self.eq_rhs.push(b);
    }

    /// `sum_{v in vars} Tr_{not keep} X_v = target` entrywise.
    fn partial_trace(
        &mut self,
        vars: &[usize],
        dims: &DimList,
        keep: &[usize],
        target: &HermitianOp,
    ) {
        let rest = dims.complement(keep);
        let lo = sub_offsets(dims, keep);
        let ro = sub_offsets(dims, &rest);
        let parts: &[bool] = if self.layout.complex {
            &[false, true]
        } else {
            &[false]
        };
        for a in 0..lo.len() {
            for b in a..lo.len() {
                for &imag in parts {
                    if imag && a == b {
                        continue;
                    }
                    let mut row: Vec<(usize, f64)> = Vec::new();
                    for &v in vars {
                        for &r in &ro {
                            if let Some(e) = self.layout.entry_part(v, lo[a] + r, lo[b] + r, imag) {
                                row.push(e);
                            }
                        }
                    }
                    let t = target.entry(a, b);
                    self.eq_rows.push(row);
                    self.eq_rhs.push(if imag { t.im } else { t.re });
                }
            }
        }
    }

    fn cone(&mut self, v: usize, dims: &DimList, map: &ConeMap) {
        let n = self.layout.sides[v];
        let complex = self.layout.complex;
        let side = if complex { 2 * n } else { n };
        let block = self.block_sizes.len();
        self.block_sizes.push(side);
        let (pt, sign) = match map {
            ConeMap::Identity => (None, 1.0),
            ConeMap::PartialTranspose(subs) => (Some(PartialTransposeMap::new(dims, subs)), 1.0),
            ConeMap::ComplementIdentity => (None, -1.0),
        };
        let constant = if matches!(map, ConeMap::ComplementIdentity) {
            Mat::from_fn(side, side, |i, j| if i == j { 1.0 } else { 0.0 })
        } else {
            Mat::zeros(side, side)
        };
        self.constant.push(constant);
        let at = |r: usize, c: usize| match &pt {
            Some(m) => m.map(r, c),
            None => (r, c),
        };
        for (i, p, q, kind) in self.layout.params(v) {
            let (r, c) = at(p, q);
            let e = |row, col, val| Entry {
                block,
                row,
                col,
                val,
            };
            let list = &mut self.coefficients[i];
            match kind {
                Kind::Diag => {
                    list.push(e(r, c, sign));
                    if complex {
                        list.push(e(r + n, c + n, sign));
                    }
                }
                Kind::Re => {
                    list.push(e(r, c, sign));
                    list.push(e(c, r, sign));
                    if complex {
                        list.push(e(r + n, c + n, sign));
                        list.push(e(c + n, r + n, sign));
                    }
                }
                Kind::Im => {
                    list.push(e(r + n, c, sign));
                    list.push(e(c, r + n, sign));
                    list.push(e(r, c + n, -sign));
                    list.push(e(c + n, r, -sign));
                }
            }
        }
    }

    fn finish(self) -> (Layout, BlockSdp) {
        let block = BlockSdp {
            block_sizes: self.block_sizes,
            constant: self.constant,
            coefficients: self.coefficients,
            cost: self.cost,
            eq_rows: self.eq_rows,
            eq_rhs: self.eq_rhs,
        };
        (self.layout, block)
    }
}

pub(crate) struct Compiled {
    pub(crate) layout: Layout,
    pub(crate) block: BlockSdp,
}

pub(crate) fn compile_single(p: &SdpProblem) -> Result<Compiled> {
    if p.cones.is_empty() {
        return Err(Error::Precondition(
            "at least one cone constraint is required".into(),
        ));
    }
    let layout = Layout::new(vec![p.dims.total()], !p.is_real());
    let mut b = Builder::new(layout);
    b.objective(0, &p.objective);
    for (a, rhs) in &p.equalities {
        b.equality(0, a, *rhs);
    }
    for pt in &p.partial_traces {
        b.partial_trace(&[0], &p.dims, &pt.keep, &pt.target);
    }
    for c in &p.cones {
        b.cone(0, &p.dims, c);
    }
    let (layout, block) = b.finish();
    Ok(Compiled { layout, block })
}

/// Several Hermitian variables `X_v ⪰ 0` of equal dims, maximizing
/// `sum_v Re Tr[C_v X_v]` subject to `sum_v X_v = total`.
#[derive(Clone, Debug)]
pub struct MultiProblem {
    pub objectives: Vec<HermitianOp>,
    pub total: HermitianOp,
}

/// Solution of a [`MultiProblem`]; `maximizer` of the returned
/// [`SdpSolution`] is the first variable.
pub fn solve_multi(
    p: &MultiProblem,
    options: &SolverOptions,
) -> Result<(Vec<HermitianOp>, SdpSolution)> {
    solve_multi_with(p, options, &InteriorPoint)
}

pub fn solve_multi_with(
    p: &MultiProblem,
    options: &SolverOptions,
    backend: &dyn SdpBackend,
) -> Result<(Vec<HermitianOp>, SdpSolution)> {
    let dims = p.total.dims().clone();
    if p.objectives.is_empty() {
        return Err(Error::Precondition("no variables".into()));
    }
    if let Some(bad) = p.objectives.iter().find(|c| c.dims() != &dims) {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            bad.dims(),
            dims
        )));
    }
    let real = p.total.is_real() && p.objectives.iter().all(|c| c.is_real());
    let m = p.objectives.len();
    let layout = Layout::new(vec![dims.total(); m], !real);
    let mut b = Builder::new(layout);
    let all: Vec<usize> = (0..dims.len()).collect();
    for (v, c) in p.objectives.iter().enumerate() {
        b.objective(v, c);
        b.cone(v, &dims, &ConeMap::Identity);
    }
    let vars: Vec<usize> = (0..m).collect();
    b.partial_trace(&vars, &dims, &all, &p.total);
    let (layout, block) = b.finish();
    let sol = backend.solve_block(&block, options);
    let vars: Vec<HermitianOp> = (0..m)
        .map(|v| layout.assemble(v, &sol.y, dims.clone()))
        .collect();
    let cost_norm = p
        .objectives
        .iter()
        .map(|c| c.spectral_norm())
        .fold(0.0, f64::max);
    let out = finish(sol, vars[0].clone(), cost_norm);
    if out.status == SdpStatus::Infeasible {
        return Err(Error::Solver("POVM program reported infeasible".into()));
    }
    Ok((vars, out))
}
