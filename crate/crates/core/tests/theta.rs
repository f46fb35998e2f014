use pentabound::theta::*;
use pentabound::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> FiniteGraph {
    let mut g = FiniteGraph::empty(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(a, b).unwrap();
            }
        }
    }
    g
}

/// Exhaustive search over all subsets.
fn alpha_by_subsets(g: &FiniteGraph) -> usize {
    let n = g.n();
    (0u32..1 << n)
        .filter(|mask| {
            let set: Vec<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
            g.is_independent(&set)
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

#[test]
fn bound_dominates_independence_number_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..200 {
        let n = rng.gen_range(1..=12);
        let p = rng.gen_range(0.1..0.9);
        let g = random_graph(&mut rng, n, p);
        let alpha = brute_force_alpha(&g).unwrap();
        let theta = theta_prime_bound(&g, TOL).unwrap();
        assert!(theta >= alpha as f64 - 1e-6, "trial {trial}: theta' {theta} < alpha {alpha}\n{g}");
        assert!(theta <= n as f64 + 1e-6, "trial {trial}: theta' {theta} > n {n}");
    }
}

#[test]
fn branch_and_bound_matches_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..100 {
        let n = rng.gen_range(0..=12);
        let p = rng.gen_range(0.0..1.0);
        let g = random_graph(&mut rng, n, p);
        assert_eq!(brute_force_alpha(&g).unwrap(), alpha_by_subsets(&g));
    }
}

#[test]
fn perfect_families_are_tight() {
    let mut graphs = vec![];
    for n in 1..=8 {
        graphs.push(FiniteGraph::complete(n));
        graphs.push(FiniteGraph::empty(n));
    }
    for (a, b) in [(1, 1), (2, 3), (3, 3), (4, 2), (1, 6)] {
        graphs.push(FiniteGraph::complete_bipartite(a, b));
    }
    for n in [4, 6, 8, 10] {
        graphs.push(FiniteGraph::cycle(n));
    }
    // a path and a tree
    graphs.push(FiniteGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap());
    graphs.push(FiniteGraph::from_edges(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]).unwrap());
    for g in graphs {
        let alpha = brute_force_alpha(&g).unwrap() as f64;
        let theta = theta_prime_bound(&g, TOL).unwrap();
        assert!((theta - alpha).abs() <= 1e-5, "theta' {theta} vs alpha {alpha}\n{g}");
    }
}

#[test]
fn five_cycle_gives_root_five() {
    let theta = theta_prime_bound(&FiniteGraph::cycle(5), TOL).unwrap();
    assert!((theta - 5f64.sqrt()).abs() < 1e-6);
    assert_eq!(brute_force_alpha(&FiniteGraph::cycle(5)).unwrap(), 2);
}

#[test]
fn seven_cycle() {
    // 7 cos(π/7) / (1 + cos(π/7))
    let c = (std::f64::consts::PI / 7.0).cos();
    let theta = theta_prime_bound(&FiniteGraph::cycle(7), TOL).unwrap();
    assert!((theta - 7.0 * c / (1.0 + c)).abs() < 1e-6, "{theta}");
}

#[test]
fn petersen_values() {
    let g = FiniteGraph::petersen();
    assert_eq!(g.edges().len(), 15);
    assert!((0..10).all(|v| (0..10).filter(|&u| g.adjacent(v, u)).count() == 3));
    assert_eq!(brute_force_alpha(&g).unwrap(), 4);
    assert!((theta_prime_bound(&g, TOL).unwrap() - 4.0).abs() < 1e-6);
}

#[test]
fn disjoint_union_adds() {
    for g in [FiniteGraph::cycle(5), FiniteGraph::petersen(), FiniteGraph::complete_bipartite(2, 3)] {
        let one = theta_prime_bound(&g, TOL).unwrap();
        let two = theta_prime_bound(&g.disjoint_union(&g), TOL).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-5, "{two} vs 2·{one}");
        assert_eq!(brute_force_alpha(&g.disjoint_union(&g)).unwrap(), 2 * brute_force_alpha(&g).unwrap());
    }
}

#[test]
fn named_graphs() {
    assert_eq!(FiniteGraph::named("C5").unwrap(), FiniteGraph::cycle(5));
    assert_eq!(FiniteGraph::named("k4").unwrap(), FiniteGraph::complete(4));
    assert_eq!(FiniteGraph::named("e3").unwrap(), FiniteGraph::empty(3));
    assert_eq!(FiniteGraph::named("k2,3").unwrap(), FiniteGraph::complete_bipartite(2, 3));
    assert_eq!(FiniteGraph::named("petersen").unwrap(), FiniteGraph::petersen());
    for bad in ["", "x5", "cx", "k2,", "petersen2"] {
        assert!(FiniteGraph::named(bad).is_err(), "{bad}");
    }
}

#[test]
fn adjacency_list_parser() {
    let text = "# triangle plus isolated vertex\n0: 1 2\n1: 2\n\n3:\n";
    let g = FiniteGraph::parse_adjacency_list(text).unwrap();
    assert_eq!(g.n(), 4);
    assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    assert_eq!(FiniteGraph::parse_adjacency_list(&g.to_string()).unwrap(), g);
    for bad in ["0 1 2\n", "a: 1\n", "0: b\n", "0: 0\n"] {
        assert!(FiniteGraph::parse_adjacency_list(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn dimacs_parser() {
    let text = "c five cycle\np edge 5 5\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 1\n";
    let g = FiniteGraph::parse_dimacs(text).unwrap();
    assert_eq!(g, FiniteGraph::cycle(5));
    assert_eq!(FiniteGraph::parse_dimacs(&g.to_dimacs()).unwrap(), g);
    for bad in ["e 1 2\n", "p edge\n", "p edge 3 1\ne 0 1\n", "p edge 3 1\ne 1 4\n", "p edge 3 1\nx 1 2\n", ""] {
        assert!(FiniteGraph::parse_dimacs(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn edge_validation() {
    let mut g = FiniteGraph::empty(3);
    assert!(g.add_edge(0, 3).is_err());
    assert!(g.add_edge(1, 1).is_err());
    assert!(FiniteGraph::from_edges(2, &[(0, 2)]).is_err());
    assert!(theta_prime_bound(&FiniteGraph::empty(0), TOL).is_err());
}

#[test]
fn brute_force_refuses_large_graphs() {
    let g = FiniteGraph::empty(MAX_BRUTE_FORCE + 1);
    assert!(matches!(brute_force_alpha(&g), Err(Error::GraphTooLarge(31))));
    assert_eq!(brute_force_alpha(&FiniteGraph::cycle(MAX_BRUTE_FORCE)).unwrap(), MAX_BRUTE_FORCE / 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adding_edges_never_raises_the_bound(seed in 0u64..1000, n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, 0.3);
        let mut h = g.clone();
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            h.add_edge(a, b).unwrap();
        }
        let tg = theta_prime_bound(&g, TOL).unwrap();
        let th = theta_prime_bound(&h, TOL).unwrap();
        prop_assert!(th <= tg + 1e-6);
    }

    #[test]
    fn independent_sets_found_are_independent(seed in 0u64..1000, n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, 0.5);
        let greedy: Vec<usize> = (0..n).fold(Vec::new(), |mut acc, v| {
            if acc.iter().all(|&u| !g.adjacent(u, v)) {
                acc.push(v);
            }
            acc
        });
        prop_assert!(g.is_independent(&greedy));
        prop_assert!(brute_force_alpha(&g).unwrap() >= greedy.len());
    }
}
