//! Functions on M(2) given through their operator Fourier transform
//! `f̂(a) = φ(a) e^{−πa²}` with `φ(a)_{r,s} = Σ_k f_{r,s;k} a^{2k}`.
//!
//! Production evaluation uses the closed Laguerre form; the inversion
//! integral over `a` is kept as a test oracle.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::motion::MotionPoint;
use crate::quadrature::{integrate, QuadratureOptions};
use crate::real::{horner, Real};
use crate::specfun::{bessel_j, coeff_d_real, laguerre_coefficients};

/// Frequencies `r, s` interact only when `r − s` is a multiple of this.
pub const MODULUS: i32 = 10;

/// The closed-form series omits the factor 2π of the inversion formula;
/// the function on the group is `INVERSION_SCALE · evaluate_f`.
pub const INVERSION_SCALE: f64 = 2.0 * PI;

/// Truncation point of the inversion integral; `e^{−36π} < 1e-49`.
pub const A_MAX: f64 = 6.0;

const TENSOR_HEADER: &str = "# pentabound coefficient tensor v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub d: usize,
}

impl ModelParams {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("band limit N must be positive".into()));
        }
        if d % 2 == 0 {
            return Err(Error::InvalidParameter(format!("degree parameter d = {d} must be odd")));
        }
        Ok(ModelParams { n, d })
    }

    pub fn freqs(&self) -> std::ops::RangeInclusive<i32> {
        -(self.n as i32)..=self.n as i32
    }

    /// Largest basis index `⌊d/2⌋`.
    pub fn half_degree(&self) -> usize {
        self.d / 2
    }
}

/// Coefficients of an even polynomial in `a`: entry `k` multiplies `a^{2k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenPolynomial {
    pub coeffs: Vec<f64>,
}

impl EvenPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        EvenPolynomial { coeffs }
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        EvenPolynomial { coeffs }
    }

    pub fn eval(&self, a: f64) -> f64 {
        horner(&self.coeffs, &(a * a))
    }

    pub fn mul(&self, other: &EvenPolynomial) -> EvenPolynomial {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return EvenPolynomial { coeffs: vec![] };
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in other.coeffs.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        EvenPolynomial { coeffs: out }
    }
}

/// The real numbers `f_{r,s;k}`, `−N ≤ r, s ≤ N`, `0 ≤ k ≤ d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    params: ModelParams,
    data: Vec<f64>,
}

impl CoefficientTensor {
    pub fn zeros(params: ModelParams) -> Self {
        let side = 2 * params.n + 1;
        CoefficientTensor { params, data: vec![0.0; side * side * (params.d + 1)] }
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    fn index(&self, r: i32, s: i32, k: usize) -> Option<usize> {
        let n = self.params.n as i32;
        if r.abs() > n || s.abs() > n || k > self.params.d {
            return None;
        }
        let side = 2 * self.params.n + 1;
        Some((((r + n) as usize) * side + (s + n) as usize) * (self.params.d + 1) + k)
    }

    pub fn get(&self, r: i32, s: i32, k: usize) -> f64 {
        self.index(r, s, k).map_or(0.0, |i| self.data[i])
    }

    pub fn set(&mut self, r: i32, s: i32, k: usize, v: f64) -> Result<()> {
        let i = self
            .index(r, s, k)
            .ok_or_else(|| Error::DimensionMismatch(format!("entry ({r}, {s}, {k}) outside tensor")))?;
        self.data[i] = v;
        Ok(())
    }

    /// Sets the orbit `(r,s), (s,r), (−r,−s), (−s,−r)` at once.
    pub fn set_symmetric(&mut self, r: i32, s: i32, k: usize, v: f64) -> Result<()> {
        for (a, b) in [(r, s), (s, r), (-r, -s), (-s, -r)] {
            self.set(a, b, k, v)?;
        }
        Ok(())
    }

    /// Entries `(r, s, k, value)` with nonzero value, in index order.
    pub fn nonzero(&self) -> Vec<(i32, i32, usize, f64)> {
        let mut out = Vec::new();
        for r in self.params.freqs() {
            for s in self.params.freqs() {
                for k in 0..=self.params.d {
                    let v = self.get(r, s, k);
                    if v != 0.0 {
                        out.push((r, s, k, v));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks the structural zeros and the two symmetries to within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for (r, s, k, v) in self.nonzero() {
            let m = (r - s).abs();
            if (r - s).rem_euclid(MODULUS) != 0 && v.abs() > tol {
                return Err(Error::TensorInvariant(format!("f[{r}][{s}][{k}] = {v:e} but r - s is not a multiple of {MODULUS}")));
            }
            if (k as i32) < m / 2 && v.abs() > tol {
                return Err(Error::TensorInvariant(format!("f[{r}][{s}][{k}] = {v:e} but k < |r - s|/2")));
            }
            if (v - self.get(s, r, k)).abs() > tol {
                return Err(Error::TensorInvariant(format!("f[{r}][{s}][{k}] != f[{s}][{r}][{k}]")));
            }
            if (v - self.get(-r, -s, k)).abs() > tol {
                return Err(Error::TensorInvariant(format!("f[{r}][{s}][{k}] != f[{}][{}][{k}]", -r, -s)));
            }
        }
        Ok(())
    }

    /// Canonical text form, shortest round-trip decimal per entry.
    pub fn to_text(&self) -> String {
        let mut s = format!("{TENSOR_HEADER}\nN {}\nd {}\n", self.params.n, self.params.d);
        for (r, sf, k, v) in self.nonzero() {
            s.push_str(&format!("{r} {sf} {k} {v:e}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::MalformedFile("empty tensor file".into()))?;
        if header.trim() != TENSOR_HEADER {
            return Err(Error::MalformedFile(format!("unexpected tensor header {header:?}")));
        }
        let mut field = |name: &str| -> Result<usize> {
            let line = lines.next().ok_or_else(|| Error::MalformedFile(format!("missing {name} line")))?;
            let mut it = line.split_whitespace();
            match (it.next(), it.next().map(str::parse::<usize>)) {
                (Some(tag), Some(Ok(v))) if tag == name => Ok(v),
                _ => Err(Error::MalformedFile(format!("bad {name} line {line:?}"))),
            }
        };
        let n = field("N")?;
        let d = field("d")?;
        let mut t = CoefficientTensor::zeros(ModelParams::new(n, d)?);
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(Error::MalformedFile(format!("bad tensor entry {line:?}")));
            }
            let bad = || Error::MalformedFile(format!("bad tensor entry {line:?}"));
            let r: i32 = parts[0].parse().map_err(|_| bad())?;
            let s: i32 = parts[1].parse().map_err(|_| bad())?;
            let k: usize = parts[2].parse().map_err(|_| bad())?;
            let v: f64 = parts[3].parse().map_err(|_| bad())?;
            t.set(r, s, k, v)?;
        }
        Ok(t)
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        CoefficientTensor { params: self.params, data: self.data.iter().map(|v| c * v).collect() }
    }

    pub fn add(&self, other: &CoefficientTensor) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::DimensionMismatch("tensor parameters differ".into()));
        }
        Ok(CoefficientTensor {
            params: self.params,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }
}

/// `τ_{r,s}(a^{2k})` without its angular factor, as a polynomial in
/// `u = ρ²`: `(−1)^{m/2} D_{r,s;k}(ρ) L_n^m(πρ²)` with `m = |r−s|`,
/// `n = k − m/2`. Zero when `k < m/2`.
pub fn tau_radial_poly<T: Real>(r: i32, s: i32, k: usize) -> Result<Vec<T>> {
    let m = (r - s).unsigned_abs() as usize;
    if m % 2 != 0 {
        return Err(Error::Precondition(format!("|r - s| = {m} is odd")));
    }
    if k < m / 2 {
        return Ok(vec![]);
    }
    let n = k - m / 2;
    // D is a constant multiple of ρ^m, read off at ρ = 1
    let mut scale = coeff_d_real::<T>(r, s, k as i32, &T::one())?;
    if (m / 2) % 2 == 1 {
        scale = -scale;
    }
    let pi = T::pi();
    let mut out = vec![T::zero(); m / 2];
    let mut pow = T::one();
    for c in laguerre_coefficients::<T>(n, m) {
        out.push(scale.clone() * c * &pow);
        pow = pow * &pi;
    }
    Ok(out)
}

fn check_modulus(r: i32, s: i32) -> Result<()> {
    if (r - s).rem_euclid(MODULUS) != 0 {
        return Err(Error::Precondition(format!("r - s = {} is not a multiple of {MODULUS}", r - s)));
    }
    Ok(())
}

fn phase(r: i32, s: i32, p: &MotionPoint) -> Complex<f64> {
    let angle = -(s as f64 * p.alpha + (r - s) as f64 * p.theta);
    Complex::new(angle.cos(), angle.sin())
}

/// `τ_{r,s}(q)` at `p`, extended linearly over the monomials of `q`.
pub fn tau(r: i32, s: i32, q: &EvenPolynomial, p: &MotionPoint) -> Result<Complex<f64>> {
    check_modulus(r, s)?;
    let u = p.rho * p.rho;
    let mut radial = 0.0;
    for (k, c) in q.coeffs.iter().enumerate() {
        if *c != 0.0 {
            radial += c * horner(&tau_radial_poly::<f64>(r, s, k)?, &u);
        }
    }
    Ok(phase(r, s, p) * radial)
}

/// The closed-form series at `p`, literally as a complex sum.
pub fn evaluate_f(t: &CoefficientTensor, p: &MotionPoint) -> Result<f64> {
    t.validate(0.0)?;
    let u = p.rho * p.rho;
    let mut sum = Complex::new(0.0, 0.0);
    let mut scale = 0.0;
    for (r, s, k, v) in t.nonzero() {
        let term = phase(r, s, p) * (v * horner(&tau_radial_poly::<f64>(r, s, k)?, &u));
        scale += term.norm();
        sum += term;
    }
    let g = (-PI * u).exp();
    if sum.im.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::TensorInvariant(format!("imaginary residue {:e} in f", sum.im)));
    }
    Ok(sum.re * g)
}

/// `f̂(a)`: entry `(r, s)` is `(Σ_k f_{r,s;k} a^{2k}) e^{−πa²}`, rows and
/// columns ordered `−N..=N`.
pub fn evaluate_fhat(t: &CoefficientTensor, a: f64) -> DMatrix<f64> {
    let params = t.params();
    let side = 2 * params.n + 1;
    let g = (-PI * a * a).exp();
    let n = params.n as i32;
    DMatrix::from_fn(side, side, |i, j| {
        let (r, s) = (i as i32 - n, j as i32 - n);
        let coeffs: Vec<f64> = (0..=params.d).map(|k| t.get(r, s, k)).collect();
        horner(&coeffs, &(a * a)) * g
    })
}

/// `u^a_{r,s}(ρ, θ, α) = i^{s−r} e^{−i(sα+(r−s)θ)} J_{s−r}(2πaρ)`.
pub fn matrix_coefficient_u(a: f64, r: i32, s: i32, p: &MotionPoint) -> Complex<f64> {
    let ipow = match (s - r).rem_euclid(4) {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    };
    ipow * phase(r, s, p) * bessel_j(s - r, 2.0 * PI * a * p.rho)
}

/// `∫₀^{A_MAX} Σ_{r,s} f̂(a)_{r,s} u^a_{r,s}(p) a da` by adaptive quadrature.
pub fn evaluate_f_quadrature(t: &CoefficientTensor, p: &MotionPoint) -> Result<f64> {
    t.validate(0.0)?;
    let entries = t.nonzero();
    let params = t.params();
    let mut pairs: Vec<(i32, i32, Vec<f64>)> = Vec::new();
    for r in params.freqs() {
        for s in params.freqs() {
            let coeffs: Vec<f64> = (0..=params.d).map(|k| t.get(r, s, k)).collect();
            if coeffs.iter().any(|c| *c != 0.0) {
                pairs.push((r, s, coeffs));
            }
        }
    }
    if entries.is_empty() {
        return Ok(0.0);
    }
    let opts = QuadratureOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 4000 };
    integrate(
        |a| {
            let g = (-PI * a * a).exp() * a;
            pairs
                .iter()
                .map(|(r, s, c)| (matrix_coefficient_u(a, *r, *s, p) * horner(c, &(a * a))).re)
                .sum::<f64>()
                * g
        },
        0.0,
        A_MAX,
        opts,
    )
}

/// `λ = ∫ f = f_{0,0;0}`.
pub fn lambda_of(t: &CoefficientTensor) -> f64 {
    t.get(0, 0, 0)
}

/// Per-frequency-pair radial polynomials used by fast and extended
/// precision evaluation.
///
/// With `u = ρ²`, `m = |r−s|` and `w = x₁ − i x₂` (or its conjugate when
/// `r < s`), the series is `e^{−πu} Σ Re(e^{−isα} w^m q_{r,s}(u))`. The
/// terms of `(r, s)` and `(−r, −s)` are complex conjugates, so each such
/// pair is stored once with `q` doubled.
#[derive(Debug, Clone)]
pub struct RadialExpansion<T> {
    pub groups: Vec<RadialGroup<T>>,
}

#[derive(Debug, Clone)]
pub struct RadialGroup<T> {
    pub r: i32,
    pub s: i32,
    pub m: u32,
    pub q: Vec<T>,
}

fn complex_powi<T: Real>(re: T, im: T, mut n: u32) -> (T, T) {
    let (mut pr, mut pi) = (T::one(), T::zero());
    let (mut br, mut bi) = (re, im);
    while n > 0 {
        if n & 1 == 1 {
            let nr = pr.clone() * &br - pi.clone() * &bi;
            pi = pr * &bi + pi * &br;
            pr = nr;
        }
        n >>= 1;
        if n > 0 {
            let nr = br.clone() * &br - bi.clone() * &bi;
            bi = br.clone() * &bi * T::from_f64(2.0);
            br = nr;
        }
    }
    (pr, pi)
}

impl<T: Real> RadialExpansion<T> {
    pub fn new(t: &CoefficientTensor) -> Result<Self> {
        t.validate(0.0)?;
        let params = t.params();
        let mut groups = Vec::new();
        for r in params.freqs() {
            for s in params.freqs() {
                if (r, s) < (-r, -s) {
                    continue;
                }
                let weight = if (r, s) == (-r, -s) { 1.0 } else { 2.0 };
                let m = (r - s).unsigned_abs();
                let mut q: Vec<T> = Vec::new();
                for k in 0..=params.d {
                    let v = t.get(r, s, k);
                    if v == 0.0 {
                        continue;
                    }
                    let poly = tau_radial_poly::<T>(r, s, k)?;
                    let shifted = &poly[(m / 2) as usize..];
                    if q.len() < shifted.len() {
                        q.resize(shifted.len(), T::zero());
                    }
                    let vt = T::from_f64(v) * T::from_f64(weight);
                    for (j, c) in shifted.iter().enumerate() {
                        q[j] = q[j].clone() + vt.clone() * c;
                    }
                }
                if !q.is_empty() {
                    groups.push(RadialGroup { r, s, m, q });
                }
            }
        }
        Ok(RadialExpansion { groups })
    }

    /// `(cos sα, sin sα)` for every group.
    pub fn phases(&self, alpha: &T) -> Vec<(T, T)> {
        self.groups
            .iter()
            .map(|g| {
                let sa = T::from_i64(g.s as i64) * alpha;
                (sa.cos(), sa.sin())
            })
            .collect()
    }

    /// Value at Cartesian `x` with phases from [`Self::phases`].
    pub fn eval_with_phases(&self, x1: &T, x2: &T, phases: &[(T, T)]) -> T {
        let u = x1.clone() * x1 + x2.clone() * x2;
        let mut acc = T::zero();
        for (g, (c, sn)) in self.groups.iter().zip(phases) {
            let wi = if g.r >= g.s { -x2.clone() } else { x2.clone() };
            let (pr, pi) = complex_powi(x1.clone(), wi, g.m);
            // Re((c − i sn)(pr + i pi)) = c pr + sn pi
            let re = c.clone() * &pr + sn.clone() * &pi;
            acc = acc + re * horner(&g.q, &u);
        }
        acc * (-(T::pi() * &u)).exp()
    }

    /// Value of the series at Cartesian `x` and rotation `alpha`.
    pub fn eval(&self, x1: &T, x2: &T, alpha: &T) -> T {
        self.eval_with_phases(x1, x2, &self.phases(alpha))
    }
}
