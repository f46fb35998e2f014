//! The sums-of-squares program for the pentagon bound.
//!
//! The unknown function is parametrised by PSD blocks `Q^{ij}` through
//! `f_{r,s;k} = Σ_i ⟨F^i_{r,s;k}, Q^{ij}⟩`. Nonpositivity outside the unit
//! disk is enforced by a polynomial identity against the blocks `R` and
//! `S`, and nonpositivity on the sampled part of the forbidden region by
//! one inequality per sample point.
//!
//! Rows are built generically over [`Real`] so the equality system can be
//! reassembled in extended precision for projection.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::info;
use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::fourier::{tau, tau_radial_poly, CoefficientTensor, EvenPolynomial, ModelParams, MODULUS};
use crate::geometry::SamplePoint;
use crate::motion::MotionPoint;
use crate::real::{horner, Real};
use crate::sdp::{BlockKind, BlockMatrix, Constraint, LinearForm, Relation, SdpProblem, SdpSolution};
use crate::specfun::{binomial_u128, factorial_u128, real_from_u128};

pub const TAG_COEFF_ZERO: &str = "coeff-zero";
pub const TAG_COEFF_REAL: &str = "coeff-real";
pub const TAG_IDENTITY: &str = "identity";
pub const TAG_NORMALIZATION: &str = "normalization";
pub const TAG_SAMPLE: &str = "sample";
pub const TAG_CAP: &str = "cap";

/// Slack on the objective cap of the feasibility re-solve.
pub const FEASIBILITY_MARGIN: f64 = 1e-5;

/// `P_k(x) = μ_k⁻¹ L_k⁰(2πx²)` for `k = 0..=⌊d/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPolynomials {
    pub d: usize,
    pub polys: Vec<EvenPolynomial>,
    pub mu: Vec<f64>,
}

/// Coefficients of `L_k⁰(2πt)` in `t`, lowest first.
fn laguerre_scaled<T: Real>(k: usize, factor: &T) -> Vec<T> {
    let mut pow = T::one();
    (0..=k)
        .map(|j| {
            let num: T = real_from_u128(binomial_u128(k as u32, j as u32));
            let den: T = real_from_u128(factorial_u128(j as u32));
            let mut c = num / den * &pow;
            if j % 2 == 1 {
                c = -c;
            }
            pow = pow.clone() * factor;
            c
        })
        .collect()
}

fn largest_abs<T: Real>(v: &[T]) -> T {
    v.iter().map(|c| c.abs()).fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Basis coefficients in `t = x²` and the normalisers, in any precision.
fn basis_generic<T: Real>(d: usize) -> (Vec<Vec<T>>, Vec<T>) {
    let two_pi = T::pi() * T::from_f64(2.0);
    let mut polys = Vec::new();
    let mut mus = Vec::new();
    for k in 0..=d / 2 {
        let raw = laguerre_scaled(k, &two_pi);
        let mu = largest_abs(&raw);
        polys.push(raw.into_iter().map(|c| c / &mu).collect());
        mus.push(mu);
    }
    (polys, mus)
}

pub fn basis(d: usize) -> Result<BasisPolynomials> {
    if d % 2 == 0 {
        return Err(Error::InvalidParameter(format!("degree parameter d = {d} must be odd")));
    }
    let (polys, mu) = basis_generic::<f64>(d);
    Ok(BasisPolynomials { d, polys: polys.into_iter().map(EvenPolynomial::new).collect(), mu })
}

/// `I_j` and `P_j` for `j = 0..MODULUS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    pub n: usize,
    pub freqs: Vec<Vec<i32>>,
    pub pairs: Vec<Vec<(i32, i32)>>,
}

impl IndexSets {
    pub fn new(n: usize) -> Self {
        let n_i = n as i32;
        let class = |v: i32| v.rem_euclid(MODULUS) as usize;
        let mut freqs = vec![Vec::new(); MODULUS as usize];
        for r in -n_i..=n_i {
            freqs[class(r)].push(r);
        }
        let mut pairs = vec![Vec::new(); MODULUS as usize];
        for r in 0..=n_i {
            for s in 0..=n_i {
                pairs[class(r - s)].push((r, s));
            }
        }
        IndexSets { n, freqs, pairs }
    }
}

/// `t^i P_l(t) P_{l'}(t)`, computed for `l ≤ l'` and mirrored so it is
/// exactly symmetric.
struct Products<T> {
    table: Vec<Vec<Vec<Vec<T>>>>,
}

impl<T: Real> Products<T> {
    fn new(d: usize) -> Self {
        let (polys, _) = basis_generic::<T>(d);
        let h = polys.len();
        let mut table = vec![vec![vec![Vec::new(); h]; h]; 2];
        for i in 0..2 {
            for l in 0..h {
                for lp in l..h {
                    let mut c = vec![T::zero(); polys[l].len() + polys[lp].len() - 1 + i];
                    for (a, x) in polys[l].iter().enumerate() {
                        for (b, y) in polys[lp].iter().enumerate() {
                            c[a + b + i] = c[a + b + i].clone() + x.clone() * y;
                        }
                    }
                    table[i][lp][l] = c.clone();
                    table[i][l][lp] = c;
                }
            }
        }
        Products { table }
    }

    fn get(&self, i: usize, l: usize, lp: usize) -> &[T] {
        &self.table[i][l][lp]
    }
}

/// `coeff(a^{2k}, a^{2i} P_l(a) P_{l'}(a))` over `{0..⌊d/2⌋} × I_j`.
pub fn build_f(i: usize, r: i32, s: i32, k: usize, b: &BasisPolynomials) -> Result<DMatrix<f64>> {
    if i > 1 {
        return Err(Error::InvalidParameter(format!("block index i = {i} must be 0 or 1")));
    }
    if (r - s).rem_euclid(MODULUS) != 0 {
        return Err(Error::Precondition(format!("r = {r} and s = {s} lie in different classes mod {MODULUS}")));
    }
    let n = r.abs().max(s.abs()) as usize;
    let sets = IndexSets::new(n);
    let class = &sets.freqs[r.rem_euclid(MODULUS) as usize];
    let prods = Products::<f64>::new(b.d);
    let h = b.polys.len();
    let index: Vec<(usize, i32)> = (0..h).flat_map(|l| class.iter().map(move |&f| (l, f))).collect();
    Ok(DMatrix::from_fn(index.len(), index.len(), |a, c| {
        let (l, ra) = index[a];
        let (lp, sc) = index[c];
        if ra == r && sc == s {
            prods.get(i, l, lp).get(k).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }))
}

fn even_product(i: usize, l: usize, lp: usize, b: &BasisPolynomials) -> EvenPolynomial {
    let mut p = b.polys[l].mul(&b.polys[lp]);
    if i == 1 {
        p.coeffs.insert(0, 0.0);
    }
    p
}

/// `τ_{r,s}(a^{2i} P_l P_{l'})` at `p` over `{0..⌊d/2⌋} × I_j` for band limit `n`.
pub fn build_calf(i: usize, j: usize, n: usize, p: &MotionPoint, b: &BasisPolynomials) -> Result<DMatrix<Complex<f64>>> {
    let sets = IndexSets::new(n);
    let class = sets.freqs.get(j).ok_or_else(|| Error::InvalidParameter(format!("class {j} out of range")))?;
    let h = b.polys.len();
    let index: Vec<(usize, i32)> = (0..h).flat_map(|l| class.iter().map(move |&f| (l, f))).collect();
    let mut out = DMatrix::from_element(index.len(), index.len(), Complex::new(0.0, 0.0));
    for (a, &(l, r)) in index.iter().enumerate() {
        for (c, &(lp, s)) in index.iter().enumerate() {
            out[(a, c)] = tau(r, s, &even_product(i, l, lp, b), p)?;
        }
    }
    Ok(out)
}

/// One Laurent monomial `(Σ_t c_t u^t) z₁^{e₁} z₂^{e₂}` with `u = ρ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentTerm {
    pub coeffs: Vec<f64>,
    pub z1: i32,
    pub z2: i32,
}

impl LaurentTerm {
    /// Value at `z₁ = e^{iθ}`, `z₂ = e^{i(α−θ)}`.
    pub fn eval(&self, p: &MotionPoint) -> Complex<f64> {
        let angle = self.z1 as f64 * p.theta + self.z2 as f64 * (p.alpha - p.theta);
        Complex::new(angle.cos(), angle.sin()) * horner(&self.coeffs, &(p.rho * p.rho))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMatrix {
    pub index: Vec<(usize, (i32, i32))>,
    pub entries: DMatrix<LaurentTerm>,
}

impl LaurentMatrix {
    pub fn eval(&self, p: &MotionPoint) -> DMatrix<Complex<f64>> {
        self.entries.map(|t| t.eval(p))
    }

    /// Entrywise product with `ρ² − 1`.
    pub fn times_u_minus_one(&self) -> LaurentMatrix {
        let entries = self.entries.map(|t| {
            let mut c = vec![0.0; t.coeffs.len() + 1];
            for (k, v) in t.coeffs.iter().enumerate() {
                c[k] -= v;
                c[k + 1] += v;
            }
            LaurentTerm { coeffs: c, z1: t.z1, z2: t.z2 }
        });
        LaurentMatrix { index: self.index.clone(), entries }
    }
}

/// `(ρ^i P_l(ρ) z₁^{−u} z₂^{−v})(ρ^i P_{l'}(ρ) z₁^{u'} z₂^{v'})` over
/// `{0..⌊d/2⌋} × P_j`.
pub fn build_w(i: usize, j: usize, n: usize, b: &BasisPolynomials) -> Result<LaurentMatrix> {
    if i > 1 {
        return Err(Error::InvalidParameter(format!("block index i = {i} must be 0 or 1")));
    }
    let sets = IndexSets::new(n);
    let pairs = sets.pairs.get(j).ok_or_else(|| Error::InvalidParameter(format!("class {j} out of range")))?;
    let h = b.polys.len();
    let index: Vec<(usize, (i32, i32))> = (0..h).flat_map(|l| pairs.iter().map(move |&p| (l, p))).collect();
    let entries = DMatrix::from_fn(index.len(), index.len(), |a, c| {
        let (l, (u, v)) = index[a];
        let (lp, (u2, v2)) = index[c];
        let mut coeffs = b.polys[l].mul(&b.polys[lp]).coeffs;
        for _ in 0..i {
            coeffs.insert(0, 0.0);
        }
        LaurentTerm { coeffs, z1: u2 - u, z2: v2 - v }
    });
    Ok(LaurentMatrix { index, entries })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockRole {
    Q { i: usize, j: usize, index: Vec<(usize, i32)> },
    R { i: usize, j: usize, index: Vec<(usize, (i32, i32))> },
    S { j: usize, index: Vec<(usize, (i32, i32))> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    pub label: String,
    pub role: BlockRole,
}

impl BlockSpec {
    pub fn dim(&self) -> usize {
        match &self.role {
            BlockRole::Q { index, .. } => index.len(),
            BlockRole::R { index, .. } | BlockRole::S { index, .. } => index.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    pub params: ModelParams,
    pub blocks: Vec<BlockSpec>,
}

impl BlockLayout {
    fn q(params: ModelParams, sets: &IndexSets, i: usize, j: usize) -> BlockSpec {
        let h = params.half_degree() + 1;
        let index = (0..h).flat_map(|l| sets.freqs[j].iter().map(move |&r| (l, r))).collect();
        BlockSpec { label: format!("Q{i}{j}"), role: BlockRole::Q { i, j, index } }
    }

    fn pair_index(params: ModelParams, sets: &IndexSets, j: usize) -> Vec<(usize, (i32, i32))> {
        let h = params.half_degree() + 1;
        (0..h).flat_map(|l| sets.pairs[j].iter().map(move |&p| (l, p))).collect()
    }

    /// `Q^{00}, Q^{05}, Q^{10}, Q^{15}, R^{00}, R^{05}, S^0, S^5`.
    pub fn retained(params: ModelParams) -> Self {
        let sets = IndexSets::new(params.n);
        let mut blocks = Vec::new();
        for (i, j) in [(0, 0), (0, 5), (1, 0), (1, 5)] {
            blocks.push(Self::q(params, &sets, i, j));
        }
        for j in [0, 5] {
            blocks.push(BlockSpec {
                label: format!("R0{j}"),
                role: BlockRole::R { i: 0, j, index: Self::pair_index(params, &sets, j) },
            });
        }
        for j in [0, 5] {
            blocks.push(BlockSpec { label: format!("S{j}"), role: BlockRole::S { j, index: Self::pair_index(params, &sets, j) } });
        }
        Self::drop_empty(params, blocks)
    }

    /// Every block of the unrestricted program.
    pub fn full(params: ModelParams) -> Self {
        let sets = IndexSets::new(params.n);
        let mut blocks = Vec::new();
        for i in 0..2 {
            for j in 0..MODULUS as usize {
                blocks.push(Self::q(params, &sets, i, j));
            }
        }
        for i in 0..2 {
            for j in 0..MODULUS as usize {
                blocks.push(BlockSpec {
                    label: format!("R{i}{j}"),
                    role: BlockRole::R { i, j, index: Self::pair_index(params, &sets, j) },
                });
            }
        }
        for j in 0..MODULUS as usize {
            blocks.push(BlockSpec { label: format!("S{j}"), role: BlockRole::S { j, index: Self::pair_index(params, &sets, j) } });
        }
        Self::drop_empty(params, blocks)
    }

    fn drop_empty(params: ModelParams, blocks: Vec<BlockSpec>) -> Self {
        BlockLayout { params, blocks: blocks.into_iter().filter(|b| b.dim() > 0).collect() }
    }

    pub fn block_index(&self, label: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.label == label)
    }
}

/// Linear functional in a chosen precision: `(block, i, j) ↦` coefficient,
/// with the off-diagonal convention of [`LinearForm`].
pub type GenericForm<T> = BTreeMap<(usize, usize, usize), T>;

fn add_functional<T: Real>(form: &mut GenericForm<T>, block: usize, i: usize, j: usize, v: T) {
    let (key, v) = if i == j { ((block, i, i), v) } else { ((block, i.min(j), i.max(j)), v * T::from_f64(0.5)) };
    let e = form.entry(key).or_insert_with(T::zero);
    *e = e.clone() + v;
}

fn add_scaled<T: Real>(dst: &mut GenericForm<T>, src: &GenericForm<T>, c: &T) {
    for (k, v) in src {
        let e = dst.entry(*k).or_insert_with(T::zero);
        *e = e.clone() + v.clone() * c;
    }
}

fn prune_generic<T: Real>(form: &mut GenericForm<T>) {
    form.retain(|_, v| !v.is_zero());
}

pub fn to_linear_form<T: Real>(form: &GenericForm<T>) -> LinearForm {
    let mut out = LinearForm::new();
    for (k, v) in form {
        let x = v.to_f64();
        if x != 0.0 {
            out.entries.insert(*k, x);
        }
    }
    out
}

/// `f_{r,s;k}` as linear functionals on the `Q` blocks.
fn coefficient_forms<T: Real>(layout: &BlockLayout, prods: &Products<T>) -> BTreeMap<(i32, i32, usize), GenericForm<T>> {
    let mut out: BTreeMap<(i32, i32, usize), GenericForm<T>> = BTreeMap::new();
    for (b, spec) in layout.blocks.iter().enumerate() {
        if let BlockRole::Q { i, index, .. } = &spec.role {
            for (a, &(l, r)) in index.iter().enumerate() {
                for (c, &(lp, s)) in index.iter().enumerate() {
                    for (k, v) in prods.get(*i, l, lp).iter().enumerate() {
                        if !v.is_zero() {
                            add_functional(out.entry((r, s, k)).or_default(), b, a, c, v.clone());
                        }
                    }
                }
            }
        }
    }
    out
}

fn tau_table<T: Real>(d: usize, max_m: usize) -> Result<BTreeMap<(usize, usize), Vec<T>>> {
    let mut out = BTreeMap::new();
    for m in (0..=max_m).step_by(2) {
        for k in 0..=d {
            out.insert((m, k), tau_radial_poly::<T>(m as i32, 0, k)?);
        }
    }
    Ok(out)
}

fn canonical(key: (i32, i32)) -> bool {
    key >= (-key.0, -key.1)
}

/// A row in any precision, prior to conversion into a solver constraint.
#[derive(Debug, Clone)]
pub struct GenericRow<T> {
    pub form: GenericForm<T>,
    pub rhs: T,
    pub tag: &'static str,
    pub detail: String,
}

/// Equality rows in assembly order: coefficient zeros, real-valuedness,
/// identity coefficients, normalisation. Rows that vanish identically are
/// dropped.
pub fn equality_rows<T: Real>(layout: &BlockLayout) -> Result<Vec<GenericRow<T>>> {
    let params = layout.params;
    let d = params.d;
    let prods = Products::<T>::new(d);
    let fmap = coefficient_forms(layout, &prods);
    let max_m = 2 * params.n;
    let taus = tau_table::<T>(d, max_m)?;
    let mut rows = Vec::new();
    let mut dropped: BTreeMap<&str, usize> = BTreeMap::new();
    let mut push = |rows: &mut Vec<GenericRow<T>>, mut form: GenericForm<T>, rhs: T, tag: &'static str, detail: String| {
        prune_generic(&mut form);
        if form.is_empty() && rhs.is_zero() {
            *dropped.entry(tag).or_default() += 1;
        } else {
            rows.push(GenericRow { form, rhs, tag, detail });
        }
    };

    let pairs: Vec<(i32, i32)> = {
        let mut v: Vec<(i32, i32)> = fmap.keys().map(|&(r, s, _)| (r, s)).collect();
        v.dedup();
        v
    };

    for &(r, s) in &pairs {
        let m = (r - s).unsigned_abs() as usize;
        if m == 0 || !canonical((r, s)) || r < s {
            continue;
        }
        for k in 0..m / 2 {
            let form = fmap.get(&(r, s, k)).cloned().unwrap_or_default();
            push(&mut rows, form, T::zero(), TAG_COEFF_ZERO, format!("r={r} s={s} k={k}"));
        }
    }

    for &(r, s) in &pairs {
        if (r, s) <= (-r, -s) || r < s {
            continue;
        }
        for k in 0..=d {
            let mut form = fmap.get(&(r, s, k)).cloned().unwrap_or_default();
            if let Some(other) = fmap.get(&(-r, -s, k)) {
                add_scaled(&mut form, other, &T::from_f64(-1.0));
            }
            push(&mut rows, form, T::zero(), TAG_COEFF_REAL, format!("r={r} s={s} k={k}"));
        }
    }

    // identity: monomial coefficients of every canonical angular key
    let mut identity: BTreeMap<(i32, i32), Vec<GenericForm<T>>> = BTreeMap::new();
    for (&(r, s, k), form) in &fmap {
        if !canonical((r, s)) {
            continue;
        }
        let m = (r - s).unsigned_abs() as usize;
        let poly = &taus[&(m, k)];
        let coeffs = identity.entry((r, s)).or_insert_with(|| vec![GenericForm::new(); d + 1]);
        for (t, c) in poly.iter().enumerate() {
            if !c.is_zero() {
                add_scaled(&mut coeffs[t], form, c);
            }
        }
    }
    for (b, spec) in layout.blocks.iter().enumerate() {
        let (index, shift, with_s) = match &spec.role {
            BlockRole::Q { .. } => continue,
            BlockRole::R { i, index, .. } => (index, *i, false),
            BlockRole::S { index, .. } => (index, 0, true),
        };
        for (a, &(l, (u, v))) in index.iter().enumerate() {
            for (c, &(lp, (u2, v2))) in index.iter().enumerate() {
                let key = (u - u2, v - v2);
                if !canonical(key) {
                    continue;
                }
                let base = prods.get(0, l, lp);
                let mut poly = vec![T::zero(); base.len() + shift + usize::from(with_s)];
                for (t, x) in base.iter().enumerate() {
                    if with_s {
                        poly[t] = poly[t].clone() - x;
                        poly[t + 1] = poly[t + 1].clone() + x;
                    } else {
                        poly[t + shift] = poly[t + shift].clone() + x;
                    }
                }
                let coeffs = identity.entry(key).or_insert_with(|| vec![GenericForm::new(); d + 1]);
                for (t, x) in poly.into_iter().enumerate() {
                    if !x.is_zero() {
                        if t > d {
                            return Err(Error::Precondition(format!("identity term of degree {t} exceeds d = {d}")));
                        }
                        add_functional(&mut coeffs[t], b, a, c, x);
                    }
                }
            }
        }
    }
    // change to the basis B_k(u) = μ_k⁻¹ L_k⁰(2πu), k = 0..=d
    let two_pi = T::pi() * T::from_f64(2.0);
    let bpolys: Vec<Vec<T>> = (0..=d)
        .map(|k| {
            let raw = laguerre_scaled(k, &two_pi);
            let mu = largest_abs(&raw);
            raw.into_iter().map(|c| c / &mu).collect()
        })
        .collect();
    for (key, mut coeffs) in identity {
        let mut in_basis = vec![GenericForm::new(); d + 1];
        for k in (0..=d).rev() {
            let lead = bpolys[k][k].clone();
            let mut e = std::mem::take(&mut coeffs[k]);
            for v in e.values_mut() {
                *v = v.clone() / &lead;
            }
            for t in 0..k {
                let c = -bpolys[k][t].clone();
                add_scaled(&mut coeffs[t], &e, &c);
            }
            in_basis[k] = e;
        }
        for (k, form) in in_basis.into_iter().enumerate() {
            push(&mut rows, form, T::zero(), TAG_IDENTITY, format!("key=({},{}) basis={k}", key.0, key.1));
        }
    }

    let norm = fmap.get(&(0, 0, 0)).cloned().unwrap_or_default();
    push(&mut rows, norm, T::one(), TAG_NORMALIZATION, "f000=1".into());

    for (tag, n) in &dropped {
        info!("dropped {n} vacuous {tag} rows");
    }
    Ok(rows)
}

/// `f` at the origin, `Σ_{r,k} f_{r,r;k} k!/(2π^{k+1})`, as a functional.
fn objective_form(layout: &BlockLayout) -> Result<GenericForm<f64>> {
    let prods = Products::<f64>::new(layout.params.d);
    let fmap = coefficient_forms(layout, &prods);
    let mut out = GenericForm::new();
    for (&(r, s, k), form) in &fmap {
        if r == s {
            let c = tau_radial_poly::<f64>(0, 0, k)?[0];
            add_scaled(&mut out, form, &c);
        }
    }
    prune_generic(&mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub tag: String,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct AssembledProblem {
    pub layout: BlockLayout,
    pub problem: SdpProblem,
    pub manifest: Vec<ManifestEntry>,
}

impl AssembledProblem {
    pub fn params(&self) -> ModelParams {
        self.layout.params
    }

    pub fn equality_count(&self) -> usize {
        self.problem.constraints.iter().filter(|c| c.relation == Relation::Eq).count()
    }

    /// Human-readable map from blocks and constraint rows to their meaning.
    pub fn manifest_text(&self) -> String {
        let mut out = String::new();
        let p = self.params();
        writeln!(out, "# pentabound problem manifest v1").unwrap();
        writeln!(out, "# N={} d={}", p.n, p.d).unwrap();
        writeln!(out, "# inequalities enter through one diagonal block '{}', one slack per row", crate::sdp::SLACK_LABEL)
            .unwrap();
        for (k, b) in self.layout.blocks.iter().enumerate() {
            writeln!(out, "block {} {} dim={}", k + 1, b.label, b.dim()).unwrap();
        }
        if self.problem.inequality_count() > 0 {
            writeln!(
                out,
                "block {} {} dim={}",
                self.layout.blocks.len() + 1,
                crate::sdp::SLACK_LABEL,
                self.problem.inequality_count()
            )
            .unwrap();
        }
        for (k, (c, m)) in self.problem.constraints.iter().zip(&self.manifest).enumerate() {
            let rel = match c.relation {
                Relation::Eq => "=",
                Relation::Le => "<=",
            };
            writeln!(out, "row {} {} {} {:e} {}", k + 1, m.tag, rel, c.rhs, m.detail).unwrap();
        }
        out
    }
}

fn empty_problem(layout: &BlockLayout) -> SdpProblem {
    let mut p = SdpProblem::default();
    for b in &layout.blocks {
        p.add_block(b.label.clone(), b.dim(), BlockKind::Psd);
    }
    p
}

pub fn assemble_problem_a(params: ModelParams, sample: &[SamplePoint]) -> Result<AssembledProblem> {
    assemble_with_layout(BlockLayout::retained(params), sample)
}

pub fn assemble_with_layout(layout: BlockLayout, sample: &[SamplePoint]) -> Result<AssembledProblem> {
    let params = layout.params;
    for (k, pt) in sample.iter().enumerate() {
        let ok = pt.rho.is_finite()
            && pt.rho >= 0.0
            && pt.theta.is_finite()
            && pt.alpha.is_finite()
            && ((pt.x[0].hypot(pt.x[1])) - pt.rho).abs() <= 1e-12 * pt.rho.max(1.0);
        if !ok {
            return Err(Error::InvalidParameter(format!("sample point {k} is malformed: {pt:?}")));
        }
    }
    let mut problem = empty_problem(&layout);
    let mut manifest = Vec::new();
    for row in equality_rows::<f64>(&layout)? {
        problem.constraints.push(Constraint {
            form: to_linear_form(&row.form),
            relation: Relation::Eq,
            rhs: row.rhs,
            tag: row.tag.into(),
        });
        manifest.push(ManifestEntry { tag: row.tag.into(), detail: row.detail });
    }

    let prods = Products::<f64>::new(params.d);
    let fmap = coefficient_forms(&layout, &prods);
    let taus = tau_table::<f64>(params.d, 2 * params.n)?;
    for pt in sample {
        let u = pt.rho * pt.rho;
        let mut form = GenericForm::new();
        for (&(r, s, k), f) in &fmap {
            let m = (r - s).unsigned_abs() as usize;
            let radial = horner(&taus[&(m, k)], &u);
            let angular = (s as f64 * pt.alpha + (r - s) as f64 * pt.theta).cos();
            let c = radial * angular;
            if c != 0.0 {
                add_scaled(&mut form, f, &c);
            }
        }
        problem.constraints.push(Constraint {
            form: to_linear_form(&form),
            relation: Relation::Le,
            rhs: 0.0,
            tag: TAG_SAMPLE.into(),
        });
        manifest.push(ManifestEntry {
            tag: TAG_SAMPLE.into(),
            detail: format!("rho={:e} theta={:e} alpha={:e}", pt.rho, pt.theta, pt.alpha),
        });
    }
    problem.objective = to_linear_form(&objective_form(&layout)?);
    let counts = manifest.iter().fold(BTreeMap::<&str, usize>::new(), |mut m, e| {
        *m.entry(e.tag.as_str()).or_default() += 1;
        m
    });
    info!("assembled N={} d={}: {:?}", params.n, params.d, counts);
    Ok(AssembledProblem { layout, problem, manifest })
}

/// Drops the objective and caps it at `z_star + 1e-5` instead. A
/// non-finite `z_star` adds no cap.
pub fn assemble_feasibility_variant(base: &AssembledProblem, z_star: f64) -> AssembledProblem {
    let mut out = base.clone();
    let objective = std::mem::take(&mut out.problem.objective);
    if z_star.is_finite() {
        out.problem.constraints.push(Constraint {
            form: objective,
            relation: Relation::Le,
            rhs: z_star + FEASIBILITY_MARGIN,
            tag: TAG_CAP.into(),
        });
        out.manifest.push(ManifestEntry { tag: TAG_CAP.into(), detail: format!("objective <= {:e}", z_star + FEASIBILITY_MARGIN) });
    }
    out
}

/// `f_{r,s;k} = Σ_i ⟨F^i_{r,s;k}, Q^{ij}⟩`, symmetrised over the orbit
/// `(r,s), (s,r), (−r,−s), (−s,−r)` and with the structural zeros imposed.
pub fn recover_tensor(sol: &SdpSolution, layout: &BlockLayout) -> Result<CoefficientTensor> {
    recover_from_blocks(&sol.x, layout)
}

pub fn recover_from_blocks(x: &[BlockMatrix], layout: &BlockLayout) -> Result<CoefficientTensor> {
    if x.len() < layout.blocks.len() {
        return Err(Error::DimensionMismatch(format!(
            "solution has {} blocks, layout needs {}",
            x.len(),
            layout.blocks.len()
        )));
    }
    let params = layout.params;
    let prods = Products::<f64>::new(params.d);
    let mut raw = CoefficientTensor::zeros(params);
    for (spec, xb) in layout.blocks.iter().zip(x) {
        if xb.dim() != spec.dim() {
            return Err(Error::DimensionMismatch(format!(
                "block {} has dimension {}, expected {}",
                spec.label,
                xb.dim(),
                spec.dim()
            )));
        }
        if let BlockRole::Q { i, index, .. } = &spec.role {
            for (a, &(l, r)) in index.iter().enumerate() {
                for (c, &(lp, s)) in index.iter().enumerate() {
                    let v = xb.get(a, c);
                    if v == 0.0 {
                        continue;
                    }
                    for (k, p) in prods.get(*i, l, lp).iter().enumerate() {
                        raw.set(r, s, k, raw.get(r, s, k) + v * p)?;
                    }
                }
            }
        }
    }
    let mut out = CoefficientTensor::zeros(params);
    for r in params.freqs() {
        for s in params.freqs() {
            let m = (r - s).unsigned_abs() as usize;
            if (r - s).rem_euclid(MODULUS) != 0 || (r, s) != orbit_rep(r, s) {
                continue;
            }
            for k in m / 2..=params.d {
                let avg = 0.25 * (raw.get(r, s, k) + raw.get(s, r, k) + raw.get(-r, -s, k) + raw.get(-s, -r, k));
                out.set_symmetric(r, s, k, avg)?;
            }
        }
    }
    Ok(out)
}

fn orbit_rep(r: i32, s: i32) -> (i32, i32) {
    [(r, s), (s, r), (-r, -s), (-s, -r)].into_iter().max().expect("orbit is nonempty")
}

/// Largest violation of any constraint of `p` by blocks `x`, in the
/// problem's own (non-slack) variables: equalities by `|Ax − b|`,
/// inequalities by `max(Ax − b, 0)`.
pub fn constraint_violation(p: &SdpProblem, x: &[BlockMatrix]) -> f64 {
    p.constraints
        .iter()
        .map(|c| {
            let v = c.form.apply(x) - c.rhs;
            match c.relation {
                Relation::Eq => v.abs(),
                Relation::Le => v.max(0.0),
            }
        })
        .fold(0.0, f64::max)
}
