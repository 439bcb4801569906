//! Real block-diagonal SDP in inequality form and its interior-point solver.
//!
//! Primal: maximize `b'y` subject to `S_j = C_j + sum_i y_i F_ij ⪰ 0` for
//! every block `j` and `E y = f`.
//! Dual: minimize `sum_j <Z_j, C_j> + f'w` subject to
//! `b + sum_j F_j^*(Z_j) - E'w = 0`, `Z_j ⪰ 0`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::{SdpStatus, SolverOptions};

/// One nonzero of a constraint matrix `F_ij`. Symmetric matrices list both
/// `(row, col)` and `(col, row)` when off-diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub val: f64,
}

/// Real block SDP handed to a backend.
#[derive(Clone, Debug)]
pub struct BlockSdp {
    pub block_sizes: Vec<usize>,
    /// Constant term of each block (symmetric).
    pub constant: Vec<Mat<f64>>,
    /// Per variable, its entries sorted by block.
    pub coefficients: Vec<Vec<Entry>>,
    pub cost: Vec<f64>,
    /// Sparse equality rows `(variable, coefficient)`.
    pub eq_rows: Vec<Vec<(usize, f64)>>,
    pub eq_rhs: Vec<f64>,
}

/// Result of a backend run.
#[derive(Clone, Debug)]
pub struct BlockSolution {
    pub y: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub feasibility_residual: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl BlockSdp {
    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    /// `C_j + F_j(y)` for every block.
    pub fn slack(&self, y: &[f64]) -> Vec<Mat<f64>> {
        let mut s = self.constant.clone();
        for (i, entries) in self.coefficients.iter().enumerate() {
            if y[i] == 0.0 {
                continue;
            }
            for e in entries {
                s[e.block][(e.row, e.col)] += y[i] * e.val;
            }
        }
        s
    }

    fn adjoint(&self, z: &[Mat<f64>]) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|entries| {
                entries
                    .iter()
                    .map(|e| e.val * z[e.block][(e.row, e.col)])
                    .sum()
            })
            .collect()
    }

    fn eq_apply(&self, y: &[f64]) -> Vec<f64> {
        self.eq_rows
            .iter()
            .map(|row| row.iter().map(|&(i, v)| v * y[i]).sum())
            .collect()
    }

    fn eq_adjoint(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vars()];
        for (row, &wk) in self.eq_rows.iter().zip(w) {
            for &(i, v) in row {
                out[i] += v * wk;
            }
        }
        out
    }

    /// Orthonormalizes equality rows by modified Gram-Schmidt, dropping
    /// dependent ones. Returns `None` if a dropped row is inconsistent.
    fn orthonormalized(&self) -> Option<BlockSdp> {
        let n = self.num_vars();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for (row, &f) in self.eq_rows.iter().zip(&self.eq_rhs) {
            let mut v = vec![0.0; n];
            for &(i, c) in row {
                v[i] += c;
            }
            let norm0 = l2(&v);
            let mut g = f;
            for _ in 0..2 {
                for (q, &fq) in rows.iter().zip(&rhs) {
                    let d = dot(q, &v);
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= d * qi;
                    }
                    g -= d * fq;
                }
            }
            let norm = l2(&v);
            if norm <= 1e-10 * norm0.max(1.0) {
                if g.abs() > 1e-8 * (1.0 + f.abs()) {
                    return None;
                }
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            rows.push(v);
            rhs.push(g / norm);
        }
        let eq_rows = rows
            .into_iter()
            .map(|v| {
                v.into_iter()
                    .enumerate()
                    .filter(|(_, x)| *x != 0.0)
                    .collect()
            })
            .collect();
        Some(BlockSdp {
            eq_rows,
            eq_rhs: rhs,
            ..self.clone()
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn frob_inner(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(i, j)];
        }
    }
    acc
}

fn symmetrize(m: &mut Mat<f64>) {
    for j in 0..m.ncols() {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn scaled_identity(n: usize, v: f64) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| if i == j { v } else { 0.0 })
}

/// Nesterov-Todd scaling of one block: `G' S G = G^{-1} Z G^{-T} = diag(d)`.
struct Scaling {
    g: Mat<f64>,
    g_inv: Mat<f64>,
    d: Vec<f64>,
    w: Mat<f64>,
}

fn cholesky_lower(m: &Mat<f64>) -> Option<Mat<f64>> {
    m.llt(Side::Lower).ok().map(|c| c.L().to_owned())
}

fn nt_scaling(z: &Mat<f64>, s: &Mat<f64>) -> Option<Scaling> {
    let l = cholesky_lower(z)?;
    let r = cholesky_lower(s)?;
    let lr = l.transpose() * &r;
    let svd = lr.thin_svd().ok()?;
    let sv = svd.S().column_vector();
    let n = z.nrows();
    let d: Vec<f64> = (0..n).map(|i| sv[i]).collect();
    if d.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return None;
    }
    let u = svd.U();
    let g = Mat::from_fn(n, n, |i, j| {
        let mut acc = 0.0;
        for k in 0..n {
            acc += l[(i, k)] * u[(k, j)];
        }
        acc / d[j].sqrt()
    });
    let gts = g.transpose() * s;
    let g_inv = Mat::from_fn(n, n, |i, j| gts[(i, j)] / d[i]);
    let mut w = &g * g.transpose();
    symmetrize(&mut w);
    Some(Scaling { g, g_inv, d, w })
}

/// Largest step in `[0, inf)` keeping `diag(d) + a * dm ⪰ 0` (scaled space).
fn max_step(d: &[f64], dm: &Mat<f64>) -> f64 {
    let n = d.len();
    let mut m = Mat::from_fn(n, n, |i, j| dm[(i, j)] / (d[i] * d[j]).sqrt());
    symmetrize(&mut m);
    let lmin = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NEG_INFINITY);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

struct Iterate {
    y: Vec<f64>,
    s: Vec<Mat<f64>>,
    z: Vec<Mat<f64>>,
    w: Vec<f64>,
}

struct Measures {
    pobj: f64,
    dobj: f64,
    compl: f64,
    primal_res: f64,
    dual_res: f64,
}

impl Measures {
    fn gap(&self) -> f64 {
        (self.dobj - self.pobj).abs().max(self.compl)
    }
}

struct Residuals {
    block: Vec<Mat<f64>>,
    dual: Vec<f64>,
    eq: Vec<f64>,
}

/// Dense primal-dual interior-point method with NT scaling and Mehrotra
/// predictor-corrector steps.
pub(crate) fn interior_point(problem: &BlockSdp, opts: &SolverOptions) -> BlockSolution {
    let n = problem.num_vars();
    let Some(p) = problem.orthonormalized() else {
        return BlockSolution {
            y: vec![0.0; n],
            primal_value: f64::NAN,
            dual_value: f64::NAN,
            feasibility_residual: f64::INFINITY,
            status: SdpStatus::Infeasible,
            iterations: 0,
        };
    };
    let total_side: usize = p.block_sizes.iter().sum();
    let scale = p
        .constant
        .iter()
        .map(|c| c.norm_max())
        .chain(p.cost.iter().map(|x| x.abs()))
        .fold(1.0f64, f64::max);
    let xi = 10.0 * scale;
    let mut it = Iterate {
        y: vec![0.0; n],
        s: p.block_sizes
            .iter()
            .map(|&k| scaled_identity(k, xi))
            .collect(),
        z: p.block_sizes
            .iter()
            .map(|&k| scaled_identity(k, xi))
            .collect(),
        w: vec![0.0; p.eq_rows.len()],
    };

    let mut best: Option<(f64, Vec<f64>, Measures)> = None;
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let res = residuals(&p, &it);
        let m = measures(&p, &it, &res);
        let merit = (m.gap() / opts.tol_gap).max(m.primal_res.max(m.dual_res) / opts.tol_feas);
        if best.as_ref().is_none_or(|(bm, _, _)| merit < *bm) {
            best = Some((merit, it.y.clone(), m));
        }
        if merit <= 1.0 {
            status = SdpStatus::Optimal;
            break;
        }
        if iter == opts.max_iter {
            break;
        }
        let ynorm = it.y.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let znorm = it.z.iter().map(|z| z.norm_max()).fold(0.0f64, f64::max);
        if ynorm > 1e12 * scale || znorm > 1e12 * scale {
            status = SdpStatus::Infeasible;
            break;
        }
        match step(&p, &mut it, &res, total_side, iter) {
            Ok(()) => {}
            Err(()) => {
                status = SdpStatus::NumericalFailure;
                break;
            }
        }
    }

    let (_, y, m) = best.expect("at least one iterate");
    if status != SdpStatus::Optimal && status != SdpStatus::Infeasible {
        let merit = (m.gap() / opts.tol_gap).max(m.primal_res.max(m.dual_res) / opts.tol_feas);
        if merit <= 1.0 {
            status = SdpStatus::Optimal;
        }
    }
    let y_final = y;
    let primal_value = dot(&problem.cost, &y_final);
    let eq_res = problem
        .eq_apply(&y_final)
        .iter()
        .zip(&problem.eq_rhs)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    BlockSolution {
        primal_value,
        dual_value: m.dobj,
        feasibility_residual: m.primal_res.max(m.dual_res).max(eq_res),
        y: y_final,
        status,
        iterations,
    }
}

fn residuals(p: &BlockSdp, it: &Iterate) -> Residuals {
    let slack = p.slack(&it.y);
    let block = slack.into_iter().zip(&it.s).map(|(a, s)| a - s).collect();
    let fz = p.adjoint(&it.z);
    let ew = p.eq_adjoint(&it.w);
    let dual = (0..p.num_vars())
        .map(|i| p.cost[i] + fz[i] - ew[i])
        .collect();
    let ey = p.eq_apply(&it.y);
    let eq = p.eq_rhs.iter().zip(ey).map(|(f, e)| f - e).collect();
    Residuals { block, dual, eq }
}

fn measures(p: &BlockSdp, it: &Iterate, res: &Residuals) -> Measures {
    let pobj = dot(&p.cost, &it.y);
    let dobj =
        it.z.iter()
            .zip(&p.constant)
            .map(|(z, c)| frob_inner(z, c))
            .sum::<f64>()
            + dot(&p.eq_rhs, &it.w);
    let compl = it.z.iter().zip(&it.s).map(|(z, s)| frob_inner(z, s)).sum();
    let block_res = res.block.iter().map(|r| r.norm_l2()).fold(0.0f64, f64::max);
    Measures {
        pobj,
        dobj,
        compl,
        primal_res: block_res.max(l2(&res.eq)),
        dual_res: l2(&res.dual),
    }
}

/// Schur complement `M_ik = sum_j <F_ij, W_j F_kj W_j>`.
fn schur_matrix(p: &BlockSdp, scalings: &[Scaling]) -> Mat<f64> {
    let n = p.num_vars();
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let fi = &p.coefficients[i];
        for k in i..n {
            let fk = &p.coefficients[k];
            let mut acc = 0.0;
            for a in fi {
                let w = &scalings[a.block].w;
                for b in fk {
                    if b.block == a.block {
                        acc += a.val * b.val * w[(a.row, b.row)] * w[(b.col, a.col)];
                    }
                }
            }
            m[(i, k)] = acc;
            m[(k, i)] = acc;
        }
    }
    m
}

struct Newton<'a> {
    p: &'a BlockSdp,
    scalings: Vec<Scaling>,
    m_chol: faer::linalg::solvers::Llt<f64>,
    /// `M^{-1} E'` columns and the Cholesky factor of `E M^{-1} E'`.
    minv_et: Mat<f64>,
    k_chol: Option<faer::linalg::solvers::Llt<f64>>,
}

struct Direction {
    dy: Vec<f64>,
    dw: Vec<f64>,
    ds: Vec<Mat<f64>>,
    dz: Vec<Mat<f64>>,
}

impl<'a> Newton<'a> {
    fn new(p: &'a BlockSdp, scalings: Vec<Scaling>) -> Result<Self, ()> {
        let mut m = schur_matrix(p, &scalings);
        let n = p.num_vars();
        let diag_max = (0..n).map(|i| m[(i, i)]).fold(0.0f64, f64::max);
        let mut m_chol = m.llt(Side::Lower);
        let mut reg = 1e-14 * diag_max.max(1e-300);
        while m_chol.is_err() {
            if reg > 1e-6 * diag_max.max(1e-300) {
                return Err(());
            }
            for i in 0..n {
                m[(i, i)] += reg;
            }
            m_chol = m.llt(Side::Lower);
            reg *= 100.0;
        }
        let m_chol = m_chol.map_err(|_| ())?;
        let q = p.eq_rows.len();
        let mut minv_et = Mat::<f64>::zeros(n, q);
        for (k, row) in p.eq_rows.iter().enumerate() {
            for &(i, v) in row {
                minv_et[(i, k)] = v;
            }
        }
        m_chol.solve_in_place(minv_et.as_mut());
        let k_chol = if q > 0 {
            let mut k = Mat::<f64>::zeros(q, q);
            for (a, row) in p.eq_rows.iter().enumerate() {
                for b in 0..q {
                    k[(a, b)] = row.iter().map(|&(i, v)| v * minv_et[(i, b)]).sum();
                }
            }
            symmetrize(&mut k);
            Some(k.llt(Side::Lower).map_err(|_| ())?)
        } else {
            None
        };
        Ok(Self {
            p,
            scalings,
            m_chol,
            minv_et,
            k_chol,
        })
    }

    /// Solves `M dy + E'dw = h`, `E dy = r` through the Schur complement.
    fn kkt(&self, h: &[f64], r: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = self.p;
        let n = p.num_vars();
        let q = p.eq_rows.len();
        let mut x = Mat::from_fn(n, 1, |i, _| h[i]);
        self.m_chol.solve_in_place(x.as_mut());
        let dw: Vec<f64> = if let Some(kc) = &self.k_chol {
            let mut rhs = Mat::from_fn(q, 1, |k, _| {
                p.eq_rows[k]
                    .iter()
                    .map(|&(i, v)| v * x[(i, 0)])
                    .sum::<f64>()
                    - r[k]
            });
            kc.solve_in_place(rhs.as_mut());
            (0..q).map(|k| rhs[(k, 0)]).collect()
        } else {
            Vec::new()
        };
        let dy = (0..n)
            .map(|i| x[(i, 0)] - (0..q).map(|k| self.minv_et[(i, k)] * dw[k]).sum::<f64>())
            .collect();
        (dy, dw)
    }

    /// `(ΔS, ΔZ)` for a given `dy`.
    fn blocks(
        &self,
        res: &Residuals,
        rc: &[Mat<f64>],
        dy: &[f64],
    ) -> (Vec<Mat<f64>>, Vec<Mat<f64>>) {
        let p = self.p;
        let mut ds: Vec<Mat<f64>> = res.block.clone();
        for (i, entries) in p.coefficients.iter().enumerate() {
            for e in entries {
                ds[e.block][(e.row, e.col)] += dy[i] * e.val;
            }
        }
        let mut dz = Vec::with_capacity(ds.len());
        for (j, dsj) in ds.iter_mut().enumerate() {
            symmetrize(dsj);
            let w = &self.scalings[j].w;
            let mut dzj = &rc[j] - w * &*dsj * w;
            symmetrize(&mut dzj);
            dz.push(dzj);
        }
        (ds, dz)
    }

    /// Direction for centering right-hand sides `rc` (one per block), with
    /// two rounds of iterative refinement against the dual and equality
    /// residuals.
    fn solve(&self, res: &Residuals, rc: Vec<Mat<f64>>) -> Direction {
        let p = self.p;
        let mut t = Vec::with_capacity(rc.len());
        for (j, sc) in self.scalings.iter().enumerate() {
            let wrw = &sc.w * &res.block[j] * &sc.w;
            t.push(&rc[j] - wrw);
        }
        let ft = p.adjoint(&t);
        let h: Vec<f64> = (0..p.num_vars()).map(|i| res.dual[i] + ft[i]).collect();
        let (mut dy, mut dw) = self.kkt(&h, &res.eq);
        let (mut ds, mut dz) = self.blocks(res, &rc, &dy);
        for _ in 0..2 {
            let fz = p.adjoint(&dz);
            let ew = p.eq_adjoint(&dw);
            let rd: Vec<f64> = (0..p.num_vars())
                .map(|i| res.dual[i] + fz[i] - ew[i])
                .collect();
            let edy = p.eq_apply(&dy);
            let re: Vec<f64> = res.eq.iter().zip(&edy).map(|(a, b)| a - b).collect();
            let (cy, cw) = self.kkt(&rd, &re);
            dy.iter_mut().zip(&cy).for_each(|(a, b)| *a += b);
            dw.iter_mut().zip(&cw).for_each(|(a, b)| *a += b);
            (ds, dz) = self.blocks(res, &rc, &dy);
        }
        Direction { dy, dw, ds, dz }
    }

    fn step_lengths(&self, dir: &Direction) -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for (j, sc) in self.scalings.iter().enumerate() {
            let ds_t = sc.g.transpose() * &dir.ds[j] * &sc.g;
            let dz_t = &sc.g_inv * &dir.dz[j] * sc.g_inv.transpose();
            ap = ap.min(max_step(&sc.d, &ds_t));
            ad = ad.min(max_step(&sc.d, &dz_t));
        }
        (ap, ad)
    }
}

fn step(
    p: &BlockSdp,
    it: &mut Iterate,
    res: &Residuals,
    total_side: usize,
    iter: usize,
) -> Result<(), ()> {
    let mut scalings = Vec::with_capacity(it.z.len());
    for (z, s) in it.z.iter().zip(&it.s) {
        scalings.push(nt_scaling(z, s).ok_or(())?);
    }
    let newton = Newton::new(p, scalings)?;
    let compl: f64 = it.z.iter().zip(&it.s).map(|(z, s)| frob_inner(z, s)).sum();
    let mu = compl / total_side as f64;

    // Predictor.
    let rc_aff: Vec<Mat<f64>> = it.z.iter().map(|z| -z).collect();
    let aff = newton.solve(res, rc_aff);
    let (ap, ad) = newton.step_lengths(&aff);
    let (ap, ad) = (ap.min(1.0), ad.min(1.0));
    let mut compl_aff = 0.0;
    for j in 0..it.z.len() {
        let z = &it.z[j] + &aff.dz[j] * ad;
        let s = &it.s[j] + &aff.ds[j] * ap;
        compl_aff += frob_inner(&z, &s);
    }
    let ratio = (compl_aff / compl).clamp(0.0, 1.0);
    let sigma = ratio.powi(3).max(if iter < 2 { 0.1 } else { 0.0 });

    // Corrector with second-order term.
    let mut rc = Vec::with_capacity(it.z.len());
    for (j, sc) in newton.scalings.iter().enumerate() {
        let ds_t = sc.g.transpose() * &aff.ds[j] * &sc.g;
        let dz_t = &sc.g_inv * &aff.dz[j] * sc.g_inv.transpose();
        let prod = &dz_t * &ds_t;
        let k = sc.d.len();
        let mut t = Mat::<f64>::zeros(k, k);
        for c in 0..k {
            for r in 0..k {
                let mut v = -0.5 * (prod[(r, c)] + prod[(c, r)]);
                if r == c {
                    v += sigma * mu - sc.d[r] * sc.d[r];
                }
                t[(r, c)] = v * 2.0 / (sc.d[r] + sc.d[c]);
            }
        }
        let mut rcj = &sc.g * t * sc.g.transpose();
        symmetrize(&mut rcj);
        rc.push(rcj);
    }
    let dir = newton.solve(res, rc);
    let (ap, ad) = newton.step_lengths(&dir);
    let gamma = if iter < 5 { 0.9 } else { 0.98 };
    let ap = (gamma * ap).min(1.0);
    let ad = (gamma * ad).min(1.0);
    if !(ap > 0.0 && ad > 0.0) {
        return Err(());
    }
    for (y, d) in it.y.iter_mut().zip(&dir.dy) {
        *y += ap * d;
    }
    for (w, d) in it.w.iter_mut().zip(&dir.dw) {
        *w += ad * d;
    }
    for j in 0..it.s.len() {
        it.s[j] = &it.s[j] + &dir.ds[j] * ap;
        it.z[j] = &it.z[j] + &dir.dz[j] * ad;
        symmetrize(&mut it.s[j]);
        symmetrize(&mut it.z[j]);
    }
    Ok(())
}
