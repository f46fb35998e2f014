//! One line per acceptance criterion. The test fails if any criterion does.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DMatrix;
use pentabound::certify::{verify_nonpositivity, SampleSpec};
use pentabound::fourier::{evaluate_f, evaluate_f_quadrature, CoefficientTensor, ModelParams, MODULUS};
use pentabound::geometry::{copies_disjoint, minkowski_difference};
use pentabound::hp::{HpFloat, PrecisionGuard};
use pentabound::motion::{compose, invert, rotate, to_polar, Motion, MotionPoint};
use pentabound::pipeline::{Pipeline, RunConfig, PROJECTION_FILE, SAMPLE_FILE};
use pentabound::real::Real;
use pentabound::sdp::*;
use pentabound::sos::{recover_from_blocks, BlockLayout};
use pentabound::specfun::*;
use pentabound::theta::{brute_force_alpha, theta_prime_bound, FiniteGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONSTRUCTION_DENSITY: f64 = 0.921_310_674_166_737_4;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct MainRun {
    _dir: tempfile::TempDir,
    pipeline: Pipeline,
    tensor: CoefficientTensor,
}

fn main_run() -> (MainRun, Outcome) {
    let dir = tempfile::TempDir::new().unwrap();
    let config = RunConfig { output_dir: dir.path().to_path_buf(), ..RunConfig::default() };
    let pipeline = Pipeline::new(config).unwrap();
    let start = Instant::now();
    let report = pipeline.all().unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let sample_points = std::fs::read_to_string(pipeline.path(SAMPLE_FILE))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("x1"))
        .count();
    let tensor = pipeline.tensor().unwrap();
    let in_corridor = (450..=650).contains(&sample_points);
    let bound_ok = (0.975..=0.985).contains(&report.bound) && report.bound > CONSTRUCTION_DENSITY;
    let detail = format!(
        "sample {sample_points} points, bound {:.6} (corridor [0.975, 0.985], construction {CONSTRUCTION_DENSITY:.5}), \
         certified {}, eigenvalue condition {}, sign condition {} (margin {:.3e}, L·R {:.3e}), {elapsed:.0} s",
        report.bound,
        report.holds(),
        report.eigenvalue_condition(),
        report.sign_condition(),
        report.sign_margin,
        report.lipschitz_bound * report.covering_radius,
    );
    let outcome = check(in_corridor && bound_ok && report.holds(), detail);
    (MainRun { _dir: dir, pipeline, tensor }, outcome)
}

fn special_functions() -> Outcome {
    let mut hankel: f64 = 0.0;
    for r in -5..=5 {
        for s in -5..=5 {
            let m = (r - s as i32).abs();
            if m % 2 != 0 || m > 10 {
                continue;
            }
            for k in m / 2..=11 {
                for &rho in &[0.1, 0.5, 1.0, 2.0] {
                    let closed = hankel_closed_form(r, s, k, rho).unwrap();
                    let quad = hankel_integral_oracle(r, s, k, rho).unwrap();
                    hankel = hankel.max((closed - quad).abs());
                }
            }
        }
    }
    let _g = PrecisionGuard::set(256);
    let mut kummer: f64 = 0.0;
    for n in 0..=20usize {
        for m in 0..=20usize {
            for i in 0..=40 {
                let x = HpFloat::from_f64(0.25 * i as f64);
                let binom: HpFloat = real_from_u128(binomial_u128((n + m) as u32, n as u32));
                let lhs = binom * kummer_1f1_terminating(n, &HpFloat::from_f64(m as f64 + 1.0), &x);
                kummer = kummer.max((lhs - laguerre_real(n, m, &x)).abs().to_f64());
            }
        }
    }
    check(hankel <= 1e-9 && kummer <= 1e-12, format!("Hankel max error {hankel:.2e} (≤ 1e-9), Kummer-Laguerre max error {kummer:.2e} (≤ 1e-12)"))
}

fn random_small_tensor(rng: &mut ChaCha8Rng) -> CoefficientTensor {
    let params = ModelParams::new(2, 3).unwrap();
    let mut t = CoefficientTensor::zeros(params);
    for r in -2..=2i32 {
        for s in -2..=2i32 {
            let m = (r - s).unsigned_abs() as usize;
            if (r - s).rem_euclid(MODULUS) != 0 {
                continue;
            }
            for k in m / 2..=3 {
                t.set_symmetric(r, s, k, rng.gen_range(-1.0..1.0)).unwrap();
            }
        }
    }
    t
}

fn inversion_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let t = random_small_tensor(&mut rng);
        for _ in 0..100 {
            let p = MotionPoint::new(rng.gen_range(0.0..2.0), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)).unwrap();
            worst = worst.max((evaluate_f(&t, &p).unwrap() - evaluate_f_quadrature(&t, &p).unwrap()).abs());
        }
    }
    check(worst <= 1e-8, format!("closed form vs inversion quadrature max error {worst:.2e} (≤ 1e-8) over 500 points"))
}

fn positive_type() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    let layouts = [BlockLayout::retained(ModelParams::new(5, 11).unwrap()), BlockLayout::full(ModelParams::new(5, 5).unwrap())];
    let mut worst = f64::INFINITY;
    for trial in 0..50 {
        let layout = &layouts[trial % 2];
        let x = common::random_blocks(&mut rng, layout, true);
        let t = recover_from_blocks(&x, layout).unwrap();
        let g: Vec<Motion> = (0..20)
            .map(|_| Motion::new([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], rng.gen_range(-PI..PI)))
            .collect();
        let k = DMatrix::from_fn(20, 20, |i, j| evaluate_f(&t, &to_polar(&compose(&invert(&g[j]), &g[i]))).unwrap());
        let sym = (&k + k.transpose()) * 0.5;
        worst = worst.min(sym.symmetric_eigenvalues().min());
    }
    check(worst >= -1e-8, format!("min Gram eigenvalue {worst:.2e} (≥ -1e-8) over 50 trials"))
}

fn sos_correctness(run: &MainRun) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let layout = BlockLayout::retained(ModelParams::new(5, 11).unwrap());
    let mut sigma_err: f64 = 0.0;
    for _ in 0..10 {
        let mut x = common::random_blocks(&mut rng, &layout, true);
        common::mirror_frequencies(&mut x, &layout);
        let sigma = common::sigma_oracle(&x, &layout);
        let t = recover_from_blocks(&x, &layout).unwrap();
        for (&(r, s, k), &v) in &sigma {
            sigma_err = sigma_err.max((t.get(r, s, k) - v).abs());
        }
    }
    let projection: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.pipeline.path(PROJECTION_FILE)).unwrap()).unwrap();
    let before = projection["data"]["residual_before"].as_f64().unwrap();
    let after = projection["data"]["residual_after"].as_f64().unwrap();
    let mut cylinder = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let p = MotionPoint::new(rng.gen_range(1.0..3.0), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)).unwrap();
        cylinder = cylinder.max(evaluate_f(&run.tensor, &p).unwrap());
    }
    check(
        sigma_err <= 1e-12 && after <= 1e-12 && cylinder <= 1e-9,
        format!(
            "σ max error {sigma_err:.2e} (≤ 1e-12), equality residual {before:.2e} -> {after:.2e} (≤ 1e-12), \
             max f on 1e4 points with ρ ≥ 1 {cylinder:.2e} (≤ 1e-9)"
        ),
    )
}

fn solver() -> Outcome {
    let (c, s) = (0.6f64, 0.8f64);
    let q = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
    let a = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 3.0, -2.0])) * q.transpose();
    let mut p = SdpProblem::default();
    let b = p.add_block("X", 3, BlockKind::Psd);
    let mut tr = LinearForm::new();
    for i in 0..3 {
        for j in i..3 {
            p.objective.add_sym(b, i, j, -a[(i, j)]);
        }
        tr.add_sym(b, i, i, 1.0);
    }
    p.constraints.push(Constraint { form: tr, relation: Relation::Eq, rhs: 1.0, tag: "trace".into() });
    let lmax_err = (-solve(&p, &SolverOptions::default()).unwrap().primal_objective - 3.0).abs();

    let problem = include_str!("data/small_problem_a.dat-s");
    let external = include_str!("data/small_problem_a.sol");
    let params = ModelParams::new(5, 3).unwrap();
    let small = pentabound::sos::assemble_problem_a(params, &pentabound::geometry::constraint_sample(3, 16).unwrap()).unwrap();
    let sf = small.problem.standard_form();
    let ours = solve(&small.problem, &SolverOptions::default()).unwrap();
    let theirs = import_solution(&sf, external).unwrap();
    let gap = (ours.primal_objective - theirs.primal_objective).abs();
    let problem_roundtrip = export_sdpa(&parse_sdpa(problem).unwrap()) == problem && export_sdpa(&sf) == problem;
    let sol_text = export_solution(&sf, &ours);
    let solution_roundtrip = export_solution(&sf, &import_solution(&sf, &sol_text).unwrap()) == sol_text;
    check(
        lmax_err <= 1e-8 && gap <= 1e-6 && problem_roundtrip && solution_roundtrip,
        format!(
            "λ_max error {lmax_err:.2e} (≤ 1e-8), embedded vs external {gap:.2e} (≤ 1e-6) on {} rows, \
             problem roundtrip {problem_roundtrip}, solution roundtrip {solution_roundtrip}",
            sf.rows.len()
        ),
    )
}

fn finite_theta() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    let mut sound = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=12);
        let p = rng.gen_range(0.1..0.9);
        let mut g = FiniteGraph::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    g.add_edge(a, b).unwrap();
                }
            }
        }
        if theta_prime_bound(&g, 1e-9).unwrap() >= brute_force_alpha(&g).unwrap() as f64 - 1e-6 {
            sound += 1;
        }
    }
    let mut perfect = vec![FiniteGraph::complete_bipartite(3, 4), FiniteGraph::cycle(8)];
    perfect.extend((1..=8).map(FiniteGraph::complete));
    perfect.extend((1..=8).map(FiniteGraph::empty));
    let tight = perfect
        .iter()
        .map(|g| (theta_prime_bound(g, 1e-9).unwrap() - brute_force_alpha(g).unwrap() as f64).abs())
        .fold(0.0f64, f64::max);
    let petersen = brute_force_alpha(&FiniteGraph::petersen()).unwrap();
    check(
        sound == 200 && tight <= 1e-5 && petersen == 4,
        format!("bound ≥ α on {sound}/200 random graphs, perfect-family gap {tight:.2e} (≤ 1e-5), Petersen α = {petersen}"),
    )
}

fn sat_overlap(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let mut best = f64::INFINITY;
    for poly in [a, b] {
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let len = (q[1] - p[1]).hypot(p[0] - q[0]);
            let axis = [(q[1] - p[1]) / len, (p[0] - q[0]) / len];
            let range = |pts: &[[f64; 2]]| {
                pts.iter().map(|v| v[0] * axis[0] + v[1] * axis[1]).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)))
            };
            let ((amin, amax), (bmin, bmax)) = (range(a), range(b));
            best = best.min(amax.min(bmax) - amin.max(bmin));
        }
    }
    best
}

fn geometry() -> Outcome {
    let mut norm: f64 = 0.0;
    for i in 0..10_000 {
        let alpha = -PI + 2.0 * PI * i as f64 / 10_000.0;
        for v in minkowski_difference(alpha, 1.0).vertices() {
            norm = norm.max(v[0].hypot(v[1]));
        }
    }
    let k: Vec<[f64; 2]> = (0..5).map(|j| rotate(2.0 * PI * j as f64 / 5.0, [0.5, 0.0])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(305);
    let (mut cases, mut disagreements) = (0, 0);
    while cases < 100_000 {
        let x = [rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)];
        let alpha = rng.gen_range(-PI..PI);
        let moved: Vec<[f64; 2]> = k.iter().map(|v| rotate(alpha, *v)).map(|r| [x[0] + r[0], x[1] + r[1]]).collect();
        let overlap = sat_overlap(&k, &moved);
        if overlap.abs() < 1e-9 {
            continue;
        }
        cases += 1;
        if copies_disjoint(x, alpha, 1.0) != (overlap < 0.0) {
            disagreements += 1;
        }
    }
    check(
        norm <= 1.0 + 1e-12 && disagreements == 0,
        format!("max vertex norm {norm:.15} over 1e4 α, {disagreements} disagreements with separating axes in {cases} cases"),
    )
}

fn desk_verification(run: &MainRun) -> Outcome {
    let spec = SampleSpec::desk_scale();
    let start = Instant::now();
    let hi = verify_nonpositivity(&run.tensor, 1.02, spec, 256).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let lo = verify_nonpositivity(&run.tensor, 1.02, spec, 128).unwrap();
    let diff = (hi.sign_margin - lo.sign_margin).abs();
    check(
        (100_000..=10_000_000).contains(&hi.points) && diff <= 1e-10,
        format!("{} points (1e5..1e7) at 256 bits in {elapsed:.1} s, sign margin {:.6e}, 128-bit difference {diff:.2e} (≤ 1e-10)", hi.points, hi.sign_margin),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    })
}

#[test]
fn acceptance() {
    let mut run = None;
    let headline = guarded(|| {
        let (r, outcome) = main_run();
        run = Some(r);
        outcome
    });
    let run = run.as_ref();
    let needs_run = |f: fn(&MainRun) -> Outcome| move || run.map(f).unwrap_or_else(|| Err("main pipeline run failed".into()));
    let results = vec![
        ("1 headline bound", headline),
        ("2 special functions", guarded(special_functions)),
        ("3 inversion consistency", guarded(inversion_consistency)),
        ("4 positive type", guarded(positive_type)),
        ("5 SOS/SDP correctness", guarded(needs_run(sos_correctness))),
        ("6 solver", guarded(solver)),
        ("7 finite theta", guarded(finite_theta)),
        ("8 geometry", guarded(geometry)),
        ("9 desk-scale verification", guarded(needs_run(desk_verification))),
    ];
    let mut failed = Vec::new();
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                println!("FAIL criterion {name}: {d}");
                failed.push(*name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
