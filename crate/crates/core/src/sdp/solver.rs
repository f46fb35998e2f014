//! Infeasible-start primal-dual path-following method with
//! Nesterov–Todd scaling and Mehrotra's predictor-corrector.

use log::debug;
use nalgebra::{Cholesky, DMatrix, DVector};

use super::{BlockKind, BlockMatrix, SdpProblem, SdpSolution, SolveStatus, StandardSdp};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
    /// Iterates with `‖y‖∞` or `‖X‖∞` beyond this are declared infeasible.
    pub divergence_bound: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { gap_tol: 1e-8, feas_tol: 1e-9, max_iter: 200, step_fraction: 0.98, divergence_bound: 1e12 }
    }
}

impl SolverOptions {
    pub fn with_tolerances(gap_tol: f64, feas_tol: f64) -> Self {
        SolverOptions { gap_tol, feas_tol, ..Default::default() }
    }
}

pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    solve_standard(&p.standard_form(), opts)
}

enum BlockData {
    Dense {
        n: usize,
        c: DMatrix<f64>,
        rows: Vec<(usize, DMatrix<f64>)>,
    },
    Diag {
        n: usize,
        c: DVector<f64>,
        // per element: (row, coefficient)
        by_elem: Vec<Vec<(usize, f64)>>,
    },
}

struct Scaling {
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    w: DMatrix<f64>,
    d: DVector<f64>,
    lx: DMatrix<f64>,
    lz: DMatrix<f64>,
}

enum BlockScaling {
    Dense(Scaling),
    Diag { w: DVector<f64>, d: DVector<f64> },
}

struct Model {
    blocks: Vec<BlockData>,
    b: DVector<f64>,
    row_scale: Vec<f64>,
    active: Vec<usize>,
}

impl Model {
    fn m(&self) -> usize {
        self.b.len()
    }

    fn apply_a(&self, x: &[BlockMatrix]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for (blk, xb) in self.blocks.iter().zip(x) {
            match (blk, xb) {
                (BlockData::Dense { rows, .. }, BlockMatrix::Dense(xm)) => {
                    for (p, a) in rows {
                        out[*p] += a.dot(xm);
                    }
                }
                (BlockData::Diag { by_elem, .. }, BlockMatrix::Diagonal(xv)) => {
                    for (e, list) in by_elem.iter().enumerate() {
                        for (p, a) in list {
                            out[*p] += a * xv[e];
                        }
                    }
                }
                _ => unreachable!("block kinds are fixed at construction"),
            }
        }
        out
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<BlockMatrix> {
        self.blocks
            .iter()
            .map(|blk| match blk {
                BlockData::Dense { n, rows, .. } => {
                    let mut acc = DMatrix::zeros(*n, *n);
                    for (p, a) in rows {
                        if y[*p] != 0.0 {
                            acc += a * y[*p];
                        }
                    }
                    BlockMatrix::Dense(acc)
                }
                BlockData::Diag { n, by_elem, .. } => {
                    let mut acc = DVector::zeros(*n);
                    for (e, list) in by_elem.iter().enumerate() {
                        for (p, a) in list {
                            acc[e] += a * y[*p];
                        }
                    }
                    BlockMatrix::Diagonal(acc)
                }
            })
            .collect()
    }

    fn c_blocks(&self) -> Vec<BlockMatrix> {
        self.blocks
            .iter()
            .map(|blk| match blk {
                BlockData::Dense { c, .. } => BlockMatrix::Dense(c.clone()),
                BlockData::Diag { c, .. } => BlockMatrix::Diagonal(c.clone()),
            })
            .collect()
    }
}

fn build_model(p: &StandardSdp) -> Result<(Model, Vec<usize>)> {
    p.check_entries()?;
    let norms: Vec<f64> = p.rows.iter().map(|r| r.norm()).collect();
    let mut zero_rows = Vec::new();
    let mut active = Vec::new();
    for (i, n) in norms.iter().enumerate() {
        if *n > 0.0 {
            active.push(i);
        } else {
            zero_rows.push(i);
        }
    }
    let m = active.len();
    let row_scale: Vec<f64> = active.iter().map(|&i| 1.0 / norms[i]).collect();
    let b = DVector::from_iterator(m, active.iter().zip(&row_scale).map(|(&i, s)| p.rhs[i] * s));

    let mut blocks: Vec<BlockData> = p
        .blocks
        .iter()
        .map(|blk| match blk.kind {
            BlockKind::Psd => BlockData::Dense { n: blk.dim, c: DMatrix::zeros(blk.dim, blk.dim), rows: Vec::new() },
            BlockKind::Diagonal => {
                BlockData::Diag { n: blk.dim, c: DVector::zeros(blk.dim), by_elem: vec![Vec::new(); blk.dim] }
            }
        })
        .collect();

    for (&(b_idx, i, j), v) in &p.objective.entries {
        match &mut blocks[b_idx] {
            BlockData::Dense { c, .. } => {
                c[(i, j)] += v;
                if i != j {
                    c[(j, i)] += v;
                }
            }
            BlockData::Diag { c, .. } => c[i] += v,
        }
    }

    for (row, (&orig, scale)) in active.iter().zip(&row_scale).enumerate() {
        let mut dense_parts: Vec<Option<DMatrix<f64>>> = vec![None; blocks.len()];
        for (&(b_idx, i, j), v) in &p.rows[orig].entries {
            let v = v * scale;
            match &mut blocks[b_idx] {
                BlockData::Dense { n, .. } => {
                    let a = dense_parts[b_idx].get_or_insert_with(|| DMatrix::zeros(*n, *n));
                    a[(i, j)] += v;
                    if i != j {
                        a[(j, i)] += v;
                    }
                }
                BlockData::Diag { by_elem, .. } => by_elem[i].push((row, v)),
            }
        }
        for (b_idx, part) in dense_parts.into_iter().enumerate() {
            if let (Some(a), BlockData::Dense { rows, .. }) = (part, &mut blocks[b_idx]) {
                rows.push((row, a));
            }
        }
    }
    Ok((Model { blocks, b, row_scale, active }, zero_rows))
}

fn lower_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    l.clone().solve_lower_triangular(&DMatrix::identity(n, n)).expect("nonsingular Cholesky factor")
}

fn nt_scaling(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Scaling> {
    let lx = Cholesky::new(x.clone())?.unpack();
    let lz = Cholesky::new(z.clone())?.unpack();
    let svd = (lz.transpose() * &lx).svd(true, true);
    let v = svd.v_t?.transpose();
    let d = svd.singular_values;
    if d.iter().any(|s| !(*s > 0.0)) {
        return None;
    }
    let inv_sqrt = DMatrix::from_diagonal(&d.map(|s| 1.0 / s.sqrt()));
    let sqrt = DMatrix::from_diagonal(&d.map(f64::sqrt));
    let g = &lx * &v * inv_sqrt;
    let ginv = sqrt * v.transpose() * lower_inverse(&lx);
    let w = &g * g.transpose();
    Some(Scaling { g, ginv, w, d, lx, lz })
}

/// Largest step `t` with `L L^T + t Δ ⪰ 0` given the Cholesky factor `L`.
fn max_step_dense(l: &DMatrix<f64>, delta: &DMatrix<f64>) -> f64 {
    let li = lower_inverse(l);
    let s = &li * delta * li.transpose();
    let s = (&s + s.transpose()) * 0.5;
    let lmin = s.symmetric_eigenvalues().min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn max_step_diag(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter().zip(dx.iter()).filter(|(_, d)| **d < 0.0).map(|(v, d)| -v / d).fold(f64::INFINITY, f64::min)
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

struct Direction {
    dx: Vec<BlockMatrix>,
    dy: DVector<f64>,
    dz: Vec<BlockMatrix>,
}

fn inner(a: &[BlockMatrix], b: &[BlockMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.frobenius_dot(y)).sum()
}

fn max_abs(a: &[BlockMatrix]) -> f64 {
    a.iter()
        .map(|b| match b {
            BlockMatrix::Dense(m) => m.amax(),
            BlockMatrix::Diagonal(v) => v.amax(),
        })
        .fold(0.0, f64::max)
}

fn frob(a: &[BlockMatrix]) -> f64 {
    inner(a, a).sqrt()
}

pub(crate) fn solve_standard(p: &StandardSdp, opts: &SolverOptions) -> Result<SdpSolution> {
    let (model, zero_rows) = build_model(p)?;
    let mut result = SdpSolution::zero(p);
    for &i in &zero_rows {
        if p.rhs[i].abs() > opts.feas_tol {
            debug!("row {i} is identically zero with rhs {}", p.rhs[i]);
            result.status = SolveStatus::Infeasible;
            return Ok(result);
        }
    }
    let m = model.m();
    let n_total: usize = p.blocks.iter().map(|b| b.dim).sum();
    let c_blocks = model.c_blocks();
    let c_norm = frob(&c_blocks);
    let b_unscaled_norm = model.active.iter().map(|&i| p.rhs[i] * p.rhs[i]).sum::<f64>().sqrt();

    // starting point
    let mut x: Vec<BlockMatrix> = Vec::with_capacity(p.blocks.len());
    let mut z: Vec<BlockMatrix> = Vec::with_capacity(p.blocks.len());
    for (blk, data) in p.blocks.iter().zip(&model.blocks) {
        let n = blk.dim as f64;
        let (a_max, c_f) = match data {
            BlockData::Dense { rows, c, .. } => (rows.iter().map(|(_, a)| a.norm()).fold(0.0, f64::max), c.norm()),
            BlockData::Diag { by_elem, c, .. } => {
                let mut per_row = std::collections::BTreeMap::<usize, f64>::new();
                for list in by_elem {
                    for (r, a) in list {
                        *per_row.entry(*r).or_insert(0.0) += a * a;
                    }
                }
                (per_row.values().fold(0.0f64, |m, v| m.max(v.sqrt())), c.norm())
            }
        };
        let b_max = model.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let xi = 10f64.max(n.sqrt()).max(n * (1.0 + b_max) / (1.0 + a_max));
        let eta = 10f64.max(n.sqrt()).max(c_f).max(a_max);
        let mut xb = BlockMatrix::identity(blk);
        let mut zb = BlockMatrix::identity(blk);
        scale_block(&mut xb, xi);
        scale_block(&mut zb, eta);
        x.push(xb);
        z.push(zb);
    }
    let mut y = DVector::zeros(m);

    let mut status = SolveStatus::NumericalFailure;
    let mut iterations = 0;
    let mut last_gap = f64::INFINITY;
    let mut stalls = 0;
    let mut best: Option<(f64, Vec<BlockMatrix>, DVector<f64>, Vec<BlockMatrix>)> = None;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let ax = model.apply_a(&x);
        let rp = &model.b - &ax;
        let aty = model.apply_at(&y);
        let rd: Vec<BlockMatrix> = c_blocks
            .iter()
            .zip(&z)
            .zip(&aty)
            .map(|((c, zb), ab)| sub3(c, zb, ab))
            .collect();
        let pobj = inner(&c_blocks, &x);
        let dobj = model.b.dot(&y);
        let xz = inner(&x, &z);
        let mu = xz / n_total as f64;
        let pinf = rp.iter().zip(&model.row_scale).map(|(r, s)| (r / s).abs()).fold(0.0, f64::max);
        let dinf = frob(&rd) / (1.0 + c_norm);
        let relgap = (pobj - dobj).abs().max(xz) / (1.0 + pobj.abs() + dobj.abs());
        debug!(
            "iter {iter:3}  pobj {pobj:+.10e}  dobj {dobj:+.10e}  gap {relgap:.2e}  pinf {pinf:.2e}  dinf {dinf:.2e}  mu {mu:.2e}"
        );
        if relgap > last_gap {
            debug!("gap increased from {last_gap:.3e} to {relgap:.3e}");
        }
        last_gap = relgap;

        let merit = relgap.max(pinf / (1.0 + b_unscaled_norm)).max(dinf);
        if best.as_ref().map_or(true, |(bm, ..)| merit < *bm) {
            best = Some((merit, x.clone(), y.clone(), z.clone()));
        }
        if relgap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            status = SolveStatus::Optimal;
            break;
        }
        if y.amax() > opts.divergence_bound || max_abs(&x) > opts.divergence_bound {
            status = SolveStatus::Infeasible;
            break;
        }
        if iter == opts.max_iter {
            break;
        }

        // scaling
        let mut scal = Vec::with_capacity(x.len());
        let mut ok = true;
        for (xb, zb) in x.iter().zip(&z) {
            match (xb, zb) {
                (BlockMatrix::Dense(xm), BlockMatrix::Dense(zm)) => match nt_scaling(xm, zm) {
                    Some(s) => scal.push(BlockScaling::Dense(s)),
                    None => {
                        ok = false;
                        break;
                    }
                },
                (BlockMatrix::Diagonal(xv), BlockMatrix::Diagonal(zv)) => {
                    let w = xv.zip_map(zv, |a, b| (a / b).sqrt());
                    let d = xv.zip_map(zv, |a, b| (a * b).sqrt());
                    scal.push(BlockScaling::Diag { w, d });
                }
                _ => unreachable!(),
            }
        }
        if !ok {
            debug!("lost positive definiteness at iteration {iter}");
            break;
        }

        // Schur complement
        let mut schur = DMatrix::zeros(m, m);
        for (blk, sc) in model.blocks.iter().zip(&scal) {
            match (blk, sc) {
                (BlockData::Dense { rows, .. }, BlockScaling::Dense(s)) => {
                    let scaled: Vec<DMatrix<f64>> = rows.iter().map(|(_, a)| &s.w * a * &s.w).collect();
                    for (qi, (q, _)) in rows.iter().enumerate() {
                        for (pi, (pr, a)) in rows.iter().enumerate().take(qi + 1) {
                            let v = a.dot(&scaled[qi]);
                            schur[(*pr, *q)] += v;
                            if pi != qi {
                                schur[(*q, *pr)] += v;
                            }
                        }
                    }
                }
                (BlockData::Diag { by_elem, .. }, BlockScaling::Diag { w, .. }) => {
                    for (e, list) in by_elem.iter().enumerate() {
                        let w2 = w[e] * w[e];
                        for (pr, a) in list {
                            for (q, b) in list {
                                schur[(*pr, *q)] += a * b * w2;
                            }
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        let schur_full = schur.clone();
        let chol = match factor(schur) {
            Some(c) => c,
            None => {
                debug!("Schur complement not positive definite at iteration {iter}");
                break;
            }
        };

        // W Rd W is shared by predictor and corrector
        let wrdw: Vec<BlockMatrix> = rd
            .iter()
            .zip(&scal)
            .map(|(r, sc)| match (r, sc) {
                (BlockMatrix::Dense(rm), BlockScaling::Dense(s)) => BlockMatrix::Dense(&s.w * rm * &s.w),
                (BlockMatrix::Diagonal(rv), BlockScaling::Diag { w, .. }) => {
                    BlockMatrix::Diagonal(rv.zip_map(w, |r, w| r * w * w))
                }
                _ => unreachable!(),
            })
            .collect();
        let a_wrdw = model.apply_a(&wrdw);

        let direction = |rhs_tilde: &[BlockMatrix]| -> Direction {
            let rc: Vec<BlockMatrix> = rhs_tilde
                .iter()
                .zip(&scal)
                .map(|(r, sc)| match (r, sc) {
                    (BlockMatrix::Dense(rm), BlockScaling::Dense(s)) => {
                        let n = s.d.len();
                        let tilde = DMatrix::from_fn(n, n, |i, j| 2.0 * rm[(i, j)] / (s.d[i] + s.d[j]));
                        BlockMatrix::Dense(&s.g * tilde * s.g.transpose())
                    }
                    (BlockMatrix::Diagonal(rv), BlockScaling::Diag { w, d }) => {
                        BlockMatrix::Diagonal(DVector::from_fn(rv.len(), |e, _| w[e] * rv[e] / d[e]))
                    }
                    _ => unreachable!(),
                })
                .collect();
            let h = &rp - model.apply_a(&rc) + &a_wrdw;
            let dy = if m == 0 { DVector::zeros(0) } else { refine(&schur_full, &chol, &h) };
            let atdy = model.apply_at(&dy);
            let dz: Vec<BlockMatrix> = rd.iter().zip(&atdy).map(|(r, a)| sub2(r, a)).collect();
            let dx: Vec<BlockMatrix> = rc
                .iter()
                .zip(&dz)
                .zip(&scal)
                .map(|((r, dzb), sc)| match (r, dzb, sc) {
                    (BlockMatrix::Dense(rm), BlockMatrix::Dense(dzm), BlockScaling::Dense(s)) => {
                        BlockMatrix::Dense(sym(rm - &s.w * dzm * &s.w))
                    }
                    (BlockMatrix::Diagonal(rv), BlockMatrix::Diagonal(dzv), BlockScaling::Diag { w, .. }) => {
                        BlockMatrix::Diagonal(DVector::from_fn(rv.len(), |e, _| rv[e] - w[e] * w[e] * dzv[e]))
                    }
                    _ => unreachable!(),
                })
                .collect();
            Direction { dx, dy, dz }
        };

        let step_lengths = |dir: &Direction| -> (f64, f64) {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for (((xb, zb), sc), (dxb, dzb)) in x.iter().zip(&z).zip(&scal).zip(dir.dx.iter().zip(&dir.dz)) {
                match (sc, dxb, dzb, xb, zb) {
                    (BlockScaling::Dense(s), BlockMatrix::Dense(dxm), BlockMatrix::Dense(dzm), _, _) => {
                        ap = ap.min(max_step_dense(&s.lx, dxm));
                        ad = ad.min(max_step_dense(&s.lz, dzm));
                    }
                    (
                        BlockScaling::Diag { .. },
                        BlockMatrix::Diagonal(dxv),
                        BlockMatrix::Diagonal(dzv),
                        BlockMatrix::Diagonal(xv),
                        BlockMatrix::Diagonal(zv),
                    ) => {
                        ap = ap.min(max_step_diag(xv, dxv));
                        ad = ad.min(max_step_diag(zv, dzv));
                    }
                    _ => unreachable!(),
                }
            }
            ((opts.step_fraction * ap).min(1.0), (opts.step_fraction * ad).min(1.0))
        };

        // predictor
        let pred_rhs: Vec<BlockMatrix> = scal
            .iter()
            .map(|sc| match sc {
                BlockScaling::Dense(s) => BlockMatrix::Dense(DMatrix::from_diagonal(&s.d.map(|v| -v * v))),
                BlockScaling::Diag { d, .. } => BlockMatrix::Diagonal(d.map(|v| -v * v)),
            })
            .collect();
        let pred = direction(&pred_rhs);
        let (ap, ad) = step_lengths(&pred);
        let x_aff: Vec<BlockMatrix> = x.iter().zip(&pred.dx).map(|(a, d)| axpy(a, ap, d)).collect();
        let z_aff: Vec<BlockMatrix> = z.iter().zip(&pred.dz).map(|(a, d)| axpy(a, ad, d)).collect();
        let mu_aff = inner(&x_aff, &z_aff) / n_total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let corr_rhs: Vec<BlockMatrix> = scal
            .iter()
            .zip(pred.dx.iter().zip(&pred.dz))
            .map(|(sc, (dxb, dzb))| match (sc, dxb, dzb) {
                (BlockScaling::Dense(s), BlockMatrix::Dense(dxm), BlockMatrix::Dense(dzm)) => {
                    let xt = &s.ginv * dxm * s.ginv.transpose();
                    let zt = s.g.transpose() * dzm * &s.g;
                    let mut r = -sym(&xt * &zt);
                    for i in 0..s.d.len() {
                        r[(i, i)] += sigma * mu - s.d[i] * s.d[i];
                    }
                    BlockMatrix::Dense(r)
                }
                (BlockScaling::Diag { d, .. }, BlockMatrix::Diagonal(dxv), BlockMatrix::Diagonal(dzv)) => {
                    BlockMatrix::Diagonal(DVector::from_fn(d.len(), |e, _| sigma * mu - d[e] * d[e] - dxv[e] * dzv[e]))
                }
                _ => unreachable!(),
            })
            .collect();
        let dir = direction(&corr_rhs);
        let (ap, ad) = step_lengths(&dir);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                debug!("step lengths collapsed at iteration {iter}");
                break;
            }
        } else {
            stalls = 0;
        }
        x = x.iter().zip(&dir.dx).map(|(a, d)| axpy(a, ap, d)).collect();
        z = z.iter().zip(&dir.dz).map(|(a, d)| axpy(a, ad, d)).collect();
        y += &dir.dy * ad;
        for b in x.iter_mut().chain(z.iter_mut()) {
            b.symmetrize();
        }
    }

    if status == SolveStatus::NumericalFailure {
        if let Some((merit, bx, by, bz)) = best {
            x = bx;
            y = by;
            z = bz;
            if merit <= 1e3 * opts.gap_tol.max(opts.feas_tol) {
                status = SolveStatus::NearOptimal;
            }
        }
    }

    let mut y_full = DVector::zeros(p.rows.len());
    for (row, (&orig, s)) in model.active.iter().zip(&model.row_scale).enumerate() {
        y_full[orig] = y[row] * s;
    }
    let primal_objective = inner(&c_blocks, &x);
    let dual_objective = p.rhs.iter().zip(y_full.iter()).map(|(b, v)| b * v).sum();
    Ok(SdpSolution { x, z, y: y_full, primal_objective, dual_objective, status, iterations })
}

enum SchurFactor {
    Cholesky(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn solve(&self, h: &DVector<f64>) -> DVector<f64> {
        match self {
            SchurFactor::Cholesky(c) => c.solve(h),
            SchurFactor::Lu(l) => l.solve(h).unwrap_or_else(|| DVector::from_element(h.len(), f64::NAN)),
        }
    }
}

/// Solves `M x = h` with a few steps of iterative refinement.
fn refine(m: &DMatrix<f64>, f: &SchurFactor, h: &DVector<f64>) -> DVector<f64> {
    let mut x = f.solve(h);
    let mut res_norm = (h - m * &x).norm();
    for _ in 0..3 {
        let r = h - m * &x;
        let cand = &x + f.solve(&r);
        let cand_norm = (h - m * &cand).norm();
        if !(cand_norm < res_norm) {
            break;
        }
        x = cand;
        res_norm = cand_norm;
    }
    x
}

/// Cholesky when the Schur complement is numerically definite, pivoted LU
/// once degeneracy near the optimum breaks it.
fn factor(m: DMatrix<f64>) -> Option<SchurFactor> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(SchurFactor::Cholesky(c));
    }
    debug!("Schur complement not numerically definite; using LU");
    let lu = m.lu();
    lu.is_invertible().then_some(SchurFactor::Lu(lu))
}

fn scale_block(b: &mut BlockMatrix, s: f64) {
    match b {
        BlockMatrix::Dense(m) => *m *= s,
        BlockMatrix::Diagonal(v) => *v *= s,
    }
}

fn axpy(a: &BlockMatrix, t: f64, d: &BlockMatrix) -> BlockMatrix {
    match (a, d) {
        (BlockMatrix::Dense(x), BlockMatrix::Dense(y)) => BlockMatrix::Dense(x + y * t),
        (BlockMatrix::Diagonal(x), BlockMatrix::Diagonal(y)) => BlockMatrix::Diagonal(x + y * t),
        _ => unreachable!(),
    }
}

fn sub2(a: &BlockMatrix, b: &BlockMatrix) -> BlockMatrix {
    match (a, b) {
        (BlockMatrix::Dense(x), BlockMatrix::Dense(y)) => BlockMatrix::Dense(x - y),
        (BlockMatrix::Diagonal(x), BlockMatrix::Diagonal(y)) => BlockMatrix::Diagonal(x - y),
        _ => unreachable!(),
    }
}

fn sub3(a: &BlockMatrix, b: &BlockMatrix, c: &BlockMatrix) -> BlockMatrix {
    sub2(&sub2(a, b), c)
}
