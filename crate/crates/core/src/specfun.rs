//! Special functions: integer-order Bessel J, generalized Laguerre
//! polynomials, Kummer's ₁F₁, factorials, and the radial coefficient
//! functions C and D of the closed-form Fourier inversion.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::real::Real;

const FACTORIAL_MAX: usize = 170;

fn factorial_table() -> &'static [f64; FACTORIAL_MAX + 1] {
    static TABLE: OnceLock<[f64; FACTORIAL_MAX + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; FACTORIAL_MAX + 1];
        for i in 1..=FACTORIAL_MAX {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

/// `n!` from a table; exact for `n ≤ 22`, correctly rounded products beyond.
pub fn factorial(n: usize) -> f64 {
    if n > FACTORIAL_MAX {
        f64::INFINITY
    } else {
        factorial_table()[n]
    }
}

/// Rising factorial `(a)_n = a (a+1) ⋯ (a+n−1)`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

pub fn binomial_u128(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn factorial_u128(n: u32) -> u128 {
    (1..=n as u128).product()
}

/// Exact conversion of a 128-bit integer into any `Real` whose mantissa
/// holds it.
pub fn real_from_u128<T: Real>(v: u128) -> T {
    let two32 = T::from_f64(4294967296.0);
    let mut acc = T::zero();
    for shift in [96u32, 64, 32, 0] {
        let chunk = ((v >> shift) & 0xffff_ffff) as f64;
        acc = acc * &two32 + T::from_f64(chunk);
    }
    acc
}

/// Integer-order Bessel function of the first kind.
pub fn bessel_j(n: i32, z: f64) -> f64 {
    if z < 0.0 {
        let v = bessel_j(n, -z);
        return if n % 2 == 0 { v } else { -v };
    }
    if n < 0 {
        let v = bessel_j(-n, z);
        return if n % 2 == 0 { v } else { -v };
    }
    if z == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if z < 2.0 {
        bessel_series(n as u32, z)
    } else {
        bessel_miller(n as u32, z)
    }
}

fn bessel_series(n: u32, z: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + n as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
            return sum;
        }
    }
}

fn bessel_miller(n: u32, z: f64) -> f64 {
    let reach = (n as f64).max(z);
    let mut top = (reach + 30.0 + 10.0 * z.cbrt()).ceil() as u32;
    if top % 2 == 1 {
        top += 1;
    }
    const BIG: f64 = 1e250;
    let mut next = 0.0;
    let mut cur = 1.0;
    let mut sum = 2.0;
    let mut ans = if top == n { cur } else { 0.0 };
    for k in (1..=top).rev() {
        let prev = 2.0 * k as f64 / z * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > BIG {
            cur /= BIG;
            next /= BIG;
            sum /= BIG;
            ans /= BIG;
        }
        let order = k - 1;
        if order == n {
            ans = cur;
        }
        if order == 0 {
            sum += cur;
        } else if order % 2 == 0 {
            sum += 2.0 * cur;
        }
    }
    ans / sum
}

/// Generalized Laguerre polynomial `L_n^m(x)` by the three-term recurrence.
pub fn laguerre(n: usize, m: usize, x: f64) -> f64 {
    laguerre_real(n, m, &x)
}

pub fn laguerre_real<T: Real>(n: usize, m: usize, x: &T) -> T {
    let a = T::from_f64(m as f64);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() + &a - x.clone();
    for k in 1..n {
        let kf = T::from_f64(k as f64);
        let lead = kf.clone() * T::from_f64(2.0) + T::one() + &a - x.clone();
        let nxt = (lead * &cur - (kf.clone() + &a) * &prev) / (kf + T::one());
        prev = cur;
        cur = nxt;
    }
    cur
}

/// Monomial coefficients of `L_n^m(x)`, lowest degree first:
/// `(−1)^j C(n+m, n−j) / j!`.
pub fn laguerre_coefficients<T: Real>(n: usize, m: usize) -> Vec<T> {
    (0..=n)
        .map(|j| {
            let num: T = real_from_u128(binomial_u128((n + m) as u32, (n - j) as u32));
            let den: T = real_from_u128(factorial_u128(j as u32));
            let c = num / den;
            if j % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .collect()
}

/// Kummer's confluent hypergeometric function `₁F₁(a; b; x)` by its series.
pub fn kummer_1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if b <= 0.0 && b.fract() == 0.0 {
        return Err(Error::InvalidParameter(format!("1F1 lower parameter b = {b} is a nonpositive integer")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..100_000 {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
        if term == 0.0 || (term.abs() <= 1e-17 * sum.abs() && kf > a.abs()) {
            return Ok(sum);
        }
    }
    Err(Error::NumericalFailure(format!("1F1({a}; {b}; {x}) series did not converge")))
}

/// The terminating series `₁F₁(−n; b; x) = Σ_{j≤n} (−n)_j x^j / ((b)_j j!)`.
pub fn kummer_1f1_terminating<T: Real>(n: usize, b: &T, x: &T) -> T {
    let mut term = T::one();
    let mut sum = T::one();
    for j in 0..n {
        let jf = T::from_f64(j as f64);
        let a = jf.clone() - T::from_f64(n as f64);
        term = term * a * x / ((b.clone() + &jf) * (jf + T::one()));
        sum = sum + &term;
    }
    sum
}

fn check_coeff_args(r: i32, s: i32, k: i32) -> Result<(usize, usize)> {
    let m = (r - s).unsigned_abs() as usize;
    if m % 2 != 0 {
        return Err(Error::Precondition(format!("|r - s| = {m} is odd")));
    }
    if k < 0 || (k as usize) < m / 2 {
        return Err(Error::Precondition(format!("k = {k} below |r - s|/2 = {}", m / 2)));
    }
    Ok((m, k as usize))
}

/// `C_{r,s;k}(ρ) = Γ(k+1+m/2) (ρ√π)^m / (2 π^{k+1} m!)` with `m = |r−s|`.
pub fn coeff_c_real<T: Real>(r: i32, s: i32, k: i32, rho: &T) -> Result<T> {
    let m = (r - s).unsigned_abs() as usize;
    if m % 2 != 0 || k < 0 {
        return Err(Error::Precondition(format!("C needs even |r - s| and k >= 0, got r={r}, s={s}, k={k}")));
    }
    let k = k as usize;
    let pi = T::pi();
    let gamma: T = real_from_u128(factorial_u128((k + m / 2) as u32));
    let m_fact: T = real_from_u128(factorial_u128(m as u32));
    let base = rho.clone() * pi.sqrt();
    let den = T::from_f64(2.0) * pi.powi(k as u32 + 1) * m_fact;
    Ok(gamma * base.powi(m as u32) / den)
}

/// `D_{r,s;k}(ρ) = C_{r,s;k}(ρ) n! / (m+1)_n` with `n = k − m/2`.
pub fn coeff_d_real<T: Real>(r: i32, s: i32, k: i32, rho: &T) -> Result<T> {
    let (m, k) = check_coeff_args(r, s, k)?;
    let n = k - m / 2;
    let c = coeff_c_real(r, s, k as i32, rho)?;
    let n_fact: T = real_from_u128(factorial_u128(n as u32));
    let rising: T = real_from_u128(factorial_u128((m + n) as u32) / factorial_u128(m as u32));
    Ok(c * n_fact / rising)
}

pub fn coeff_c(r: i32, s: i32, k: i32, rho: f64) -> Result<f64> {
    coeff_c_real(r, s, k, &rho)
}

pub fn coeff_d(r: i32, s: i32, k: i32, rho: f64) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::NegativeRadius(rho));
    }
    coeff_d_real(r, s, k, &rho)
}

/// Closed form `(−1)^{s−r} C_{r,s;k}(ρ) ₁F₁(m/2 − k; m + 1; πρ²) e^{−πρ²}`
/// of the Hankel-type integral.
pub fn hankel_closed_form(r: i32, s: i32, k: i32, rho: f64) -> Result<f64> {
    let m = (r - s).unsigned_abs() as f64;
    let c = coeff_c(r, s, k, rho)?;
    let x = PI * rho * rho;
    let sign = if (s - r).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(sign * c * kummer_1f1(m / 2.0 - k as f64, m + 1.0, x)? * (-x).exp())
}

/// `∫₀^∞ a^{2k+1} e^{−πa²} J_{s−r}(2πaρ) da` by adaptive quadrature,
/// truncated at `a = 10` where the Gaussian tail is negligible.
pub fn hankel_integral_oracle(r: i32, s: i32, k: i32, rho: f64) -> Result<f64> {
    if (r - s) % 2 != 0 || k < 0 {
        return Err(Error::Precondition(format!("oracle needs even |r - s| and k >= 0, got r={r}, s={s}, k={k}")));
    }
    let order = s - r;
    let opts = QuadratureOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 4000 };
    integrate(
        |a| a.powi(2 * k + 1) * (-PI * a * a).exp() * bessel_j(order, 2.0 * PI * a * rho),
        0.0,
        10.0,
        opts,
    )
}
