use std::f64::consts::PI;

use pentabound::fourier::*;
use pentabound::hp::{HpFloat, PrecisionGuard};
use pentabound::motion::MotionPoint;
use pentabound::specfun::{bessel_j, hankel_integral_oracle, laguerre};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random tensor obeying the symmetries and structural zeros.
fn random_tensor(rng: &mut ChaCha8Rng, n: usize, d: usize) -> CoefficientTensor {
    let params = ModelParams::new(n, d).unwrap();
    let mut t = CoefficientTensor::zeros(params);
    let ni = n as i32;
    for r in -ni..=ni {
        for s in -ni..=ni {
            let m = (r - s).unsigned_abs() as usize;
            if (r - s).rem_euclid(MODULUS) != 0 {
                continue;
            }
            for k in m / 2..=d {
                t.set_symmetric(r, s, k, rng.gen_range(-1.0..1.0) / (1 + k) as f64).unwrap();
            }
        }
    }
    t
}

fn random_point(rng: &mut ChaCha8Rng, rho_max: f64) -> MotionPoint {
    MotionPoint::new(rng.gen_range(0.0..rho_max), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)).unwrap()
}

/// The series term by term with the radial part built from `L_n^m` by
/// recurrence and the Hankel closed form's constant read off numerically.
fn series_oracle(t: &CoefficientTensor, p: &MotionPoint) -> f64 {
    let u = p.rho * p.rho;
    let mut acc = 0.0;
    for (r, s, k, v) in t.nonzero() {
        let m = (r - s).unsigned_abs() as usize;
        let n = k - m / 2;
        // D = Γ(k+1+m/2)(ρ√π)^m n! / (2π^{k+1} m! (m+1)_n) and k + m/2 = n + m
        let dval = (p.rho * PI.sqrt()).powi(m as i32) * fact(n) / (2.0 * PI.powi(k as i32 + 1));
        let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let radial = sign * dval * laguerre(n, m, PI * u);
        let angle = -(s as f64 * p.alpha + (r - s) as f64 * p.theta);
        acc += v * radial * angle.cos();
    }
    acc * (-PI * u).exp()
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[test]
fn closed_form_matches_inversion_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let t = random_tensor(&mut rng, 2, 3);
        for _ in 0..100 {
            let p = random_point(&mut rng, 2.0);
            let a = evaluate_f(&t, &p).unwrap();
            let b = evaluate_f_quadrature(&t, &p).unwrap();
            worst = worst.max((a - b).abs());
            assert!((a - b).abs() <= 1e-8, "{p:?}: {a} vs {b}");
        }
    }
    eprintln!("worst series vs quadrature {worst:e}");
}

#[test]
fn closed_form_matches_quadrature_with_off_diagonal_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = random_tensor(&mut rng, 5, 11);
    assert!(t.get(5, -5, 5) != 0.0);
    for _ in 0..20 {
        let p = random_point(&mut rng, 1.5);
        let a = evaluate_f(&t, &p).unwrap();
        let b = evaluate_f_quadrature(&t, &p).unwrap();
        assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{p:?}: {a} vs {b}");
    }
}

#[test]
fn closed_form_matches_laguerre_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = random_tensor(&mut rng, 5, 11);
    for _ in 0..200 {
        let p = random_point(&mut rng, 2.0);
        let a = evaluate_f(&t, &p).unwrap();
        let b = series_oracle(&t, &p);
        assert!((a - b).abs() <= 1e-11 * (1.0 + b.abs()), "{p:?}: {a} vs {b}");
    }
}

#[test]
fn tau_radial_matches_hankel_integral() {
    // τ_{r,s}(a^{2k}) is the inversion integral of a^{2k} e^{−πa²} against u^a_{r,s}
    for (r, s, k) in [(0, 0, 0), (0, 0, 3), (5, -5, 5), (-5, 5, 8), (5, -5, 11)] {
        for &rho in &[0.2, 0.7, 1.3] {
            let q = tau_radial_poly::<f64>(r, s, k).unwrap();
            let u = rho * rho;
            let closed = q.iter().rev().fold(0.0, |acc, c| acc * u + c) * (-PI * u).exp();
            let m = (r - s).abs();
            let ipow_re = match (s - r).rem_euclid(4) {
                0 => 1.0,
                2 => -1.0,
                _ => unreachable!("even order"),
            };
            let integral = ipow_re * hankel_integral_oracle(r, s, k as i32, rho).unwrap();
            assert!((closed - integral).abs() < 1e-10, "r={r} s={s} k={k} rho={rho} m={m}: {closed} vs {integral}");
        }
    }
}

#[test]
fn tau_at_origin() {
    let one = EvenPolynomial::new(vec![1.0]);
    let v = tau(0, 0, &one, &MotionPoint::origin()).unwrap();
    assert!((v.re - 1.0 / (2.0 * PI)).abs() < 1e-15 && v.im == 0.0);
    assert!(tau(1, 0, &one, &MotionPoint::origin()).is_err());
}

#[test]
fn lambda_matches_integral_of_f() {
    // ∫ over M(2) with Haar measure dx dα / 2π of 2π·f equals f_{0,0;0}
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = random_tensor(&mut rng, 5, 5);
    let nr = 400;
    let na = 40;
    let rho_max = 4.0;
    let h = rho_max / nr as f64;
    let mut total = 0.0;
    // Simpson in ρ, midpoint in the angles (exact for these trigonometric polynomials)
    for i in 0..=nr {
        let rho = i as f64 * h;
        let w = if i == 0 || i == nr { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        for j in 0..na {
            let theta = 2.0 * PI * (j as f64 + 0.5) / na as f64;
            for l in 0..na {
                let alpha = 2.0 * PI * (l as f64 + 0.5) / na as f64;
                let p = MotionPoint::new(rho, theta, alpha).unwrap();
                total += w * evaluate_f(&t, &p).unwrap() * rho;
            }
        }
    }
    let cell = h / 3.0 * (2.0 * PI / na as f64) * (2.0 * PI / na as f64) / (2.0 * PI);
    let integral = INVERSION_SCALE * total * cell;
    assert!((integral - lambda_of(&t)).abs() < 1e-6, "{integral} vs {}", lambda_of(&t));
}

#[test]
fn value_at_origin_is_trace_integral() {
    // f(0) = Σ_r ∫ f̂(a)_{r,r} a da
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = random_tensor(&mut rng, 5, 11);
    let n = 20000;
    let h = A_MAX / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let a = i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * evaluate_fhat(&t, a).trace() * a * h / 3.0;
    }
    let f0 = evaluate_f(&t, &MotionPoint::origin()).unwrap();
    assert!((acc - f0).abs() < 1e-8, "{acc} vs {f0}");
}

#[test]
fn matrix_coefficients_at_identity() {
    let e = MotionPoint::origin();
    for r in -3..=3 {
        for s in -3..=3 {
            let u = matrix_coefficient_u(1.3, r, s, &e);
            let want = if r == s { 1.0 } else { 0.0 };
            assert!((u.re - want).abs() < 1e-15 && u.im.abs() < 1e-15);
        }
    }
    let p = MotionPoint::new(0.4, 1.0, 2.0).unwrap();
    let u = matrix_coefficient_u(0.8, 1, 3, &p);
    assert!((u.norm() - bessel_j(2, 2.0 * PI * 0.8 * 0.4).abs()).abs() < 1e-15);
}

#[test]
fn tensor_text_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let t = random_tensor(&mut rng, 5, 11);
    let text = t.to_text();
    let back = CoefficientTensor::from_text(&text).unwrap();
    assert_eq!(back, t);
    assert_eq!(back.to_text(), text);
    assert_eq!(back.hash(), t.hash());
    assert!(CoefficientTensor::from_text("nonsense").is_err());
    assert!(CoefficientTensor::from_text(&text.replace("N 5", "N x")).is_err());
}

#[test]
fn validate_catches_broken_invariants() {
    let params = ModelParams::new(5, 11).unwrap();
    let mut t = CoefficientTensor::zeros(params);
    t.set(1, 1, 0, 1.0).unwrap();
    assert!(t.validate(0.0).is_err());
    t.set(-1, -1, 0, 1.0).unwrap();
    assert!(t.validate(0.0).is_ok());
    t.set_symmetric(5, -5, 2, 1.0).unwrap();
    assert!(t.validate(0.0).is_err());
    let mut u = CoefficientTensor::zeros(params);
    u.set(2, 0, 3, 1.0).unwrap();
    assert!(u.validate(0.0).is_err());
    assert!(evaluate_f(&u, &MotionPoint::origin()).is_err());
    assert!(ModelParams::new(5, 10).is_err());
    assert!(ModelParams::new(0, 11).is_err());
}

#[test]
fn radial_expansion_matches_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let t = random_tensor(&mut rng, 5, 11);
    let exp = RadialExpansion::<f64>::new(&t).unwrap();
    for _ in 0..300 {
        let p = random_point(&mut rng, 1.5);
        let x = p.cartesian();
        let a = exp.eval(&x[0], &x[1], &p.alpha);
        let b = evaluate_f(&t, &p).unwrap();
        assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn extended_precision_expansion_agrees() {
    let _g = PrecisionGuard::set(192);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = random_tensor(&mut rng, 5, 11);
    let lo = RadialExpansion::<f64>::new(&t).unwrap();
    let hi = RadialExpansion::<HpFloat>::new(&t).unwrap();
    for _ in 0..50 {
        let p = random_point(&mut rng, 1.0);
        let x = p.cartesian();
        let a = lo.eval(&x[0], &x[1], &p.alpha);
        let phases = hi.phases(&HpFloat::from_f64(p.alpha));
        let b = hi.eval_with_phases(&HpFloat::from_f64(x[0]), &HpFloat::from_f64(x[1]), &phases).to_f64();
        assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
    }
}

#[test]
fn fhat_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let t = random_tensor(&mut rng, 5, 11);
    for &a in &[0.0, 0.3, 1.7] {
        let m = evaluate_fhat(&t, a);
        assert!((&m - m.transpose()).amax() < 1e-15);
    }
}

proptest! {
    #[test]
    fn f_is_invariant_under_fifth_turns_of_both_angles(seed in 0u64..1000, rho in 0.0f64..2.0, theta in 0.0f64..6.28, alpha in 0.0f64..6.28) {
        // frequencies differ by multiples of 10 and the phase is e^{−i(sα+(r−s)θ)}
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tensor(&mut rng, 5, 7);
        let p = MotionPoint::new(rho, theta, alpha).unwrap();
        let q = MotionPoint::new(rho, theta + PI / 5.0, alpha).unwrap();
        let a = evaluate_f(&t, &p).unwrap();
        let b = evaluate_f(&t, &q).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn f_is_linear_in_the_tensor(seed in 0u64..1000, c in -3.0f64..3.0, rho in 0.0f64..2.0, theta in 0.0f64..6.28, alpha in 0.0f64..6.28) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t1 = random_tensor(&mut rng, 5, 5);
        let t2 = random_tensor(&mut rng, 5, 5);
        let p = MotionPoint::new(rho, theta, alpha).unwrap();
        let lhs = evaluate_f(&t1.add(&t2.scaled(c)).unwrap(), &p).unwrap();
        let rhs = evaluate_f(&t1, &p).unwrap() + c * evaluate_f(&t2, &p).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }
}
