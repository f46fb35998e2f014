//! From a numerical solution to a checked bound.
//!
//! The projected solution is checked in extended precision: block
//! eigenvalues against the equality residual, and the sign of `f` on a
//! fine grid of the forbidden region with a Lipschitz bound covering the
//! gaps between grid points.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use log::{debug, info};
use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{evaluate_f, lambda_of, CoefficientTensor, RadialExpansion, INVERSION_SCALE};
use crate::geometry::{pentagon_area, verification_sample, SamplePoint, VerificationSample};
use crate::hp::{HpFloat, PrecisionGuard};
use crate::motion::MotionPoint;
use crate::real::Real;
use crate::sdp::{BlockMatrix, Relation, SdpProblem, SdpSolution};
use crate::sos::{equality_rows, AssembledProblem, GenericForm};

pub const DEFAULT_SAFETY_FACTOR: f64 = 1e3;

/// Equality rows `⟨A_p, X⟩ = b_p` in extended precision.
pub struct HpRows {
    pub rows: Vec<(GenericForm<HpFloat>, HpFloat)>,
}

impl HpRows {
    /// The equality rows of an assembled problem, rebuilt at the current
    /// working precision.
    pub fn from_assembled(a: &AssembledProblem) -> Result<Self> {
        let rows = equality_rows::<HpFloat>(&a.layout)?;
        let eqs: Vec<_> = a.problem.constraints.iter().filter(|c| c.relation == Relation::Eq).collect();
        if rows.len() != eqs.len() || rows.iter().zip(&eqs).any(|(r, c)| r.tag != c.tag) {
            return Err(Error::DimensionMismatch(format!(
                "extended precision assembly produced {} equality rows, problem has {}",
                rows.len(),
                eqs.len()
            )));
        }
        Ok(HpRows { rows: rows.into_iter().map(|r| (r.form, r.rhs)).collect() })
    }

    /// The equality rows of `p` with their double coefficients taken as exact.
    pub fn from_problem(p: &SdpProblem) -> Self {
        let rows = p
            .constraints
            .iter()
            .filter(|c| c.relation == Relation::Eq)
            .map(|c| {
                let form = c.form.entries.iter().map(|(k, v)| (*k, HpFloat::from_f64(*v))).collect();
                (form, HpFloat::from_f64(c.rhs))
            })
            .collect();
        HpRows { rows }
    }

    fn residuals(&self, x: &[BlockMatrix]) -> Vec<f64> {
        let two = HpFloat::from_f64(2.0);
        self.rows
            .iter()
            .map(|(form, rhs)| {
                let mut acc = HpFloat::zero();
                for (&(b, i, j), v) in form {
                    let xv = HpFloat::from_f64(x[b].get(i, j));
                    let term = v.clone() * &xv;
                    acc = acc + if i == j { term } else { term * &two };
                }
                (acc - rhs).to_f64()
            })
            .collect()
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub solution: SdpSolution,
    pub displacement: f64,
    pub residual_before: f64,
    pub residual_after: f64,
}

/// Variables touched by the rows, in `svec` coordinates (`√2` scaling off
/// the diagonal so Euclidean distance is Frobenius distance).
fn variables(rows: &HpRows) -> Vec<(usize, usize, usize)> {
    let mut vars: Vec<(usize, usize, usize)> = rows.rows.iter().flat_map(|(f, _)| f.keys().copied()).collect();
    vars.sort_unstable();
    vars.dedup();
    vars
}

/// Least-squares projection of the blocks onto the affine space of the
/// equality rows. Residuals are evaluated in extended precision; the
/// correction is solved in double precision and repeated until the
/// residual stops improving.
pub fn project_affine(sol: &SdpSolution, rows: &HpRows) -> Result<Projection> {
    let vars = variables(rows);
    let col: std::collections::BTreeMap<(usize, usize, usize), usize> =
        vars.iter().enumerate().map(|(k, v)| (*v, k)).collect();
    let m = rows.rows.len();
    let n = vars.len();
    let mut a = DMatrix::<f64>::zeros(m, n);
    for (p, (form, _)) in rows.rows.iter().enumerate() {
        for (key, v) in form {
            let scale = if key.1 == key.2 { 1.0 } else { SQRT_2 };
            a[(p, col[key])] = v.to_f64() * scale;
        }
    }
    let gram = &a * a.transpose();
    let chol = Cholesky::new(gram.clone()).ok_or_else(|| Error::RankDeficient("equality rows are linearly dependent".into()))?;
    let l = chol.l();
    let diag: Vec<f64> = (0..m).map(|i| l[(i, i)]).collect();
    let (dmin, dmax) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(*d), hi.max(*d)));
    if m > 0 && dmin <= 1e-10 * dmax {
        return Err(Error::RankDeficient(format!("equality rows nearly dependent: pivot ratio {:e}", dmin / dmax)));
    }

    let mut x = sol.x.clone();
    let residual_before = max_abs(&rows.residuals(&x));
    let mut residual = residual_before;
    let mut moved = DVector::<f64>::zeros(n);
    for round in 0..6 {
        if residual == 0.0 {
            break;
        }
        let r = DVector::from_vec(rows.residuals(&x));
        let lambda = chol.solve(&r);
        let delta = a.transpose() * lambda;
        let mut trial = x.clone();
        for (k, &(b, i, j)) in vars.iter().enumerate() {
            let d = if i == j { delta[k] } else { delta[k] / SQRT_2 };
            let v = trial[b].get(i, j) - d;
            trial[b].set_sym(i, j, v);
        }
        let next = max_abs(&rows.residuals(&trial));
        debug!("projection round {round}: residual {residual:e} -> {next:e}");
        if next >= residual {
            break;
        }
        moved -= &delta;
        x = trial;
        residual = next;
    }
    let displacement = moved.norm();
    info!("projection: residual {residual_before:e} -> {residual:e}, displacement {displacement:e}");
    let mut solution = sol.clone();
    solution.x = x;
    Ok(Projection { solution, displacement, residual_before, residual_after: residual })
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations at the
/// working precision.
pub fn hp_eigenvalues(m: &DMatrix<f64>) -> Vec<HpFloat> {
    let n = m.nrows();
    let mut a: Vec<Vec<HpFloat>> = (0..n).map(|i| (0..n).map(|j| HpFloat::from_f64(m[(i, j)])).collect()).collect();
    let bits = crate::hp::precision() as i32;
    let eps = HpFloat::from_f64(2f64.powi(-(bits - 8).min(1000)));
    let frob: HpFloat = a.iter().flatten().fold(HpFloat::zero(), |s, v| s + v.clone() * v);
    let tol = eps.clone() * &eps * &frob;
    let one = HpFloat::one();
    let two = HpFloat::from_f64(2.0);
    for _sweep in 0..100 {
        let mut off = HpFloat::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + a[i][j].clone() * &a[i][j];
            }
        }
        if off <= tol || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].is_zero() {
                    continue;
                }
                let theta = (a[q][q].clone() - &a[p][p]) / (two.clone() * &a[p][q]);
                let root = (theta.clone() * &theta + &one).sqrt();
                let mut t = one.clone() / (theta.abs() + root);
                if theta.is_negative() {
                    t = -t;
                }
                let c = one.clone() / (t.clone() * &t + &one).sqrt();
                let s = t.clone() * &c;
                for k in 0..n {
                    let akp = a[k][p].clone();
                    let akq = a[k][q].clone();
                    a[k][p] = c.clone() * &akp - s.clone() * &akq;
                    a[k][q] = s.clone() * &akp + c.clone() * &akq;
                }
                for k in 0..n {
                    let apk = a[p][k].clone();
                    let aqk = a[q][k].clone();
                    a[p][k] = c.clone() * &apk - s.clone() * &aqk;
                    a[q][k] = s.clone() * &apk + c.clone() * &aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityMargin {
    pub min_eigenvalue: f64,
    pub max_residual: f64,
    pub block_min_eigenvalues: Vec<f64>,
}

/// Smallest eigenvalue over the first `blocks` blocks and largest equality
/// residual, both in `bits`-bit arithmetic.
pub fn feasibility_margin(x: &[BlockMatrix], blocks: usize, rows: &HpRows, bits: usize) -> FeasibilityMargin {
    let _guard = PrecisionGuard::set(bits);
    let block_min_eigenvalues: Vec<f64> = x[..blocks]
        .iter()
        .map(|b| match b {
            BlockMatrix::Dense(m) if m.nrows() == 0 => f64::INFINITY,
            BlockMatrix::Dense(m) => hp_eigenvalues(m)
                .into_iter()
                .min_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"))
                .map(|v| v.to_f64())
                .unwrap_or(f64::INFINITY),
            BlockMatrix::Diagonal(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        })
        .collect();
    let min_eigenvalue = block_min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max_residual = max_abs(&rows.residuals(x));
    FeasibilityMargin { min_eigenvalue, max_residual, block_min_eigenvalues }
}

/// Margin of a plain problem: every block of `sol`, all equality rows of `p`.
pub fn problem_margin(sol: &SdpSolution, p: &SdpProblem, bits: usize) -> FeasibilityMargin {
    let _guard = PrecisionGuard::set(bits);
    let rows = HpRows::from_problem(p);
    feasibility_margin(&sol.x, p.blocks.len().min(sol.x.len()), &rows, bits)
}

/// Termwise bound on `|∇f|` over `ρ ≤ rho_max` in the Euclidean metric of
/// `(x₁, x₂, α)`, for `f` as evaluated by [`evaluate_f`].
pub fn lipschitz_estimate(t: &CoefficientTensor, rho_max: f64) -> Result<f64> {
    let exp = RadialExpansion::<f64>::new(t)?;
    let pi = std::f64::consts::PI;
    let (mut lx, mut la) = (0.0, 0.0);
    for g in &exp.groups {
        let m = g.m as i32;
        // |q(u)| and |q'(u) − π q(u)| on u ≤ rho_max²
        let q_abs: f64 = g.q.iter().enumerate().map(|(j, c)| c.abs() * rho_max.powi(2 * j as i32)).sum();
        let dq_abs: f64 = (0..g.q.len())
            .map(|j| {
                let deriv = if j + 1 < g.q.len() { (j + 1) as f64 * g.q[j + 1] } else { 0.0 };
                (deriv - pi * g.q[j]).abs() * rho_max.powi(2 * j as i32)
            })
            .sum();
        la += g.s.unsigned_abs() as f64 * q_abs * rho_max.powi(m);
        lx += 2.0 * dq_abs * rho_max.powi(m + 1);
        if m > 0 {
            lx += m as f64 * q_abs * rho_max.powi(m - 1);
        }
    }
    Ok(lx.hypot(la))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub alpha_count: usize,
    pub grid_n: usize,
}

impl SampleSpec {
    /// About 6.5 million points.
    pub fn paper_scale() -> Self {
        SampleSpec { alpha_count: 41, grid_n: 601 }
    }

    /// About 10⁵ points.
    pub fn desk_scale() -> Self {
        SampleSpec { alpha_count: 64, grid_n: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub sign_margin: f64,
    pub location: [f64; 3],
    pub points: usize,
    pub lipschitz_bound: f64,
    pub lipschitz_method: String,
    pub covering_radius: f64,
    pub precision_bits: usize,
    pub certified: bool,
}

/// Grid of the sign check with its covering radius and the widening that
/// makes every point of the true region lie within that radius of a grid
/// point.
pub fn verification_grid(spec: SampleSpec, enlargement: f64) -> (VerificationSample, f64) {
    let base = verification_sample(spec.alpha_count, spec.grid_n, enlargement);
    let h = base.grid_step();
    let ha = base.alpha_step();
    let radius = (2.0 * (h / 2.0).powi(2) + (ha / 2.0).powi(2)).sqrt();
    // x moves by at most h/√2 and the vertices of the difference body move
    // by at most (enlargement / 2) · |Δα|
    let margin = h / SQRT_2 + 0.25 * enlargement * ha;
    (base.with_margin(margin), radius)
}

pub fn verify_nonpositivity(t: &CoefficientTensor, enlargement: f64, spec: SampleSpec, precision_bits: usize) -> Result<SignCheck> {
    if !(enlargement >= 1.0) {
        return Err(Error::InvalidParameter(format!("enlargement {enlargement} must be at least 1")));
    }
    let (sample, radius) = verification_grid(spec, enlargement);
    let rho_max = 1.0 + sample.margin;
    let bound = std::f64::consts::PI / 5.0 + 1e-12;
    let slices = sample.slices();
    let results: Vec<Result<(f64, [f64; 3], usize)>> = slices
        .par_iter()
        .map(|slice| {
            let _guard = PrecisionGuard::set(precision_bits);
            let exp = RadialExpansion::<HpFloat>::new(t)?;
            let phases = exp.phases(&HpFloat::from_f64(slice.alpha));
            let mut best = (f64::NEG_INFINITY, [0.0; 3], 0usize);
            for p in slice.points() {
                check_point(&p, rho_max, bound)?;
                let v = exp.eval_with_phases(&HpFloat::from_f64(p.x[0]), &HpFloat::from_f64(p.x[1]), &phases).to_f64();
                best.2 += 1;
                if v > best.0 {
                    best.0 = v;
                    best.1 = [p.x[0], p.x[1], p.alpha];
                }
            }
            Ok(best)
        })
        .collect();
    let mut sign_margin = f64::NEG_INFINITY;
    let mut location = [0.0; 3];
    let mut points = 0;
    for r in results {
        let (v, loc, n) = r?;
        points += n;
        if v > sign_margin {
            sign_margin = v;
            location = loc;
        }
    }
    let lipschitz_bound = lipschitz_estimate(t, rho_max)?;
    let certified = points > 0 && sign_margin + lipschitz_bound * radius <= 0.0;
    info!(
        "sign check: {points} points, max f = {sign_margin:e} at {location:?}, L = {lipschitz_bound:e}, h = {radius:e}"
    );
    Ok(SignCheck {
        sign_margin,
        location,
        points,
        lipschitz_bound,
        lipschitz_method: "termwise".into(),
        covering_radius: radius,
        precision_bits,
        certified,
    })
}

fn check_point(p: &SamplePoint, rho_max: f64, alpha_bound: f64) -> Result<()> {
    if p.rho > rho_max + 1e-12 || p.alpha.abs() > alpha_bound {
        return Err(Error::RegionViolation { x1: p.x[0], x2: p.x[1], alpha: p.alpha });
    }
    Ok(())
}

/// `f(0) / λ · area(enlargement · K)` with the physical normalisation of `f`.
pub fn final_bound(t: &CoefficientTensor, enlargement: f64) -> Result<f64> {
    let lambda = lambda_of(t);
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let f0 = INVERSION_SCALE * evaluate_f(t, &MotionPoint::origin())?;
    Ok(f0 / lambda * pentagon_area(enlargement))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tensor_hash: String,
    pub min_block_eigenvalue: f64,
    pub max_constraint_residual: f64,
    pub safety_factor: f64,
    pub sign_margin: f64,
    pub sign_margin_location: [f64; 3],
    pub lipschitz_bound: f64,
    pub lipschitz_method: String,
    pub covering_radius: f64,
    pub sample: SampleSpec,
    pub sample_points: usize,
    pub precision_bits: usize,
    pub enlargement: f64,
    pub lambda: f64,
    pub certified: bool,
    pub bound: f64,
}

impl VerificationReport {
    pub fn new(t: &CoefficientTensor, margin: &FeasibilityMargin, sign: &SignCheck, enlargement: f64, safety_factor: f64, sample: SampleSpec) -> Result<Self> {
        let lambda = lambda_of(t);
        let bound = if lambda > 0.0 { final_bound(t, enlargement)? } else { f64::NAN };
        let eig_ok = margin.min_eigenvalue > safety_factor * margin.max_residual;
        let sign_ok = sign.sign_margin + sign.lipschitz_bound * sign.covering_radius <= 0.0;
        Ok(VerificationReport {
            tensor_hash: t.hash(),
            min_block_eigenvalue: margin.min_eigenvalue,
            max_constraint_residual: margin.max_residual,
            safety_factor,
            sign_margin: sign.sign_margin,
            sign_margin_location: sign.location,
            lipschitz_bound: sign.lipschitz_bound,
            lipschitz_method: sign.lipschitz_method.clone(),
            covering_radius: sign.covering_radius,
            sample,
            sample_points: sign.points,
            precision_bits: sign.precision_bits,
            enlargement,
            lambda,
            certified: eig_ok && sign_ok && lambda > 0.0 && sign.points > 0,
            bound,
        })
    }

    /// Recomputes the certification invariant from the stored fields.
    pub fn holds(&self) -> bool {
        self.certified && self.eigenvalue_condition() && self.sign_condition() && self.lambda > 0.0 && self.sample_points > 0
    }

    pub fn eigenvalue_condition(&self) -> bool {
        self.min_block_eigenvalue > self.safety_factor * self.max_constraint_residual
    }

    pub fn sign_condition(&self) -> bool {
        self.sign_margin + self.lipschitz_bound * self.covering_radius <= 0.0
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k}: {v}").unwrap();
        kv("format", "pentabound verification report v1".into());
        kv("tensor_hash", self.tensor_hash.clone());
        kv("min_block_eigenvalue", format!("{:e}", self.min_block_eigenvalue));
        kv("max_constraint_residual", format!("{:e}", self.max_constraint_residual));
        kv("safety_factor", format!("{:e}", self.safety_factor));
        kv("eigenvalue_condition", pass_fail(self.eigenvalue_condition()));
        kv("sign_margin", format!("{:e}", self.sign_margin));
        kv(
            "sign_margin_location",
            format!("x1={:e} x2={:e} alpha={:e}", self.sign_margin_location[0], self.sign_margin_location[1], self.sign_margin_location[2]),
        );
        kv("lipschitz_bound", format!("{:e}", self.lipschitz_bound));
        kv("lipschitz_method", self.lipschitz_method.clone());
        kv("covering_radius", format!("{:e}", self.covering_radius));
        kv("sign_condition", pass_fail(self.sign_condition()));
        kv("sample", format!("alpha_count={} grid_n={} points={}", self.sample.alpha_count, self.sample.grid_n, self.sample_points));
        kv("precision_bits", self.precision_bits.to_string());
        kv("enlargement", format!("{}", self.enlargement));
        kv("lambda", format!("{:e}", self.lambda));
        if self.holds() {
            kv("bound", format!("{}", self.bound));
            kv("status", "certified".into());
        } else {
            kv("unverified_bound", format!("{}", self.bound));
            kv("status", "NOT VERIFIED".into());
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn pass_fail(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.into()
}
