#![allow(dead_code)]

use nalgebra::DMatrix;
use std::collections::BTreeMap;

use pentabound::fourier::{EvenPolynomial, ModelParams};
use pentabound::geometry::constraint_sample;
use pentabound::sdp::{solve, BlockMatrix, SdpSolution, SolverOptions};
use pentabound::sos::{assemble_problem_a, basis, AssembledProblem, BlockLayout, BlockRole};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `G Gᵀ / n` with `G` uniform on `[−1, 1]`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&g * g.transpose()) / n.max(1) as f64
}

/// Random PSD blocks for `layout`. With `split_frequencies`, `Q` blocks get
/// no coupling between different frequencies, so the coefficient zeros
/// hold exactly.
pub fn random_blocks(rng: &mut ChaCha8Rng, layout: &BlockLayout, split_frequencies: bool) -> Vec<BlockMatrix> {
    layout
        .blocks
        .iter()
        .map(|spec| {
            let n = spec.dim();
            let m = match (&spec.role, split_frequencies) {
                (BlockRole::Q { index, .. }, true) => {
                    let mut freqs: Vec<i32> = index.iter().map(|&(_, r)| r).collect();
                    freqs.sort_unstable();
                    freqs.dedup();
                    let mut out = DMatrix::zeros(n, n);
                    for f in freqs {
                        let pos: Vec<usize> = (0..n).filter(|&a| index[a].1 == f).collect();
                        let sub = random_psd(rng, pos.len());
                        for (x, &a) in pos.iter().enumerate() {
                            for (y, &b) in pos.iter().enumerate() {
                                out[(a, b)] = sub[(x, y)];
                            }
                        }
                    }
                    out
                }
                _ => random_psd(rng, n),
            };
            BlockMatrix::Dense(m)
        })
        .collect()
}

/// Problem A with `N = 5`, `d = 3` on a coarse sample, solved.
pub fn small_solved() -> (AssembledProblem, SdpSolution) {
    let params = ModelParams::new(5, 3).unwrap();
    let sample = constraint_sample(3, 16).unwrap();
    let a = assemble_problem_a(params, &sample).unwrap();
    let sol = solve(&a.problem, &SolverOptions::default()).unwrap();
    (a, sol)
}

/// `σ` summed straight from the blocks: entry `((l, r), (l', s))` of `Q^{ij}`
/// contributes `Q · a^{2i} P_l P_{l'}` to the coefficient of `y_r ȳ_s`.
pub fn sigma_oracle(x: &[BlockMatrix], layout: &BlockLayout) -> BTreeMap<(i32, i32, usize), f64> {
    let b = basis(layout.params.d).unwrap();
    let mut out = BTreeMap::new();
    for (spec, xb) in layout.blocks.iter().zip(x) {
        if let BlockRole::Q { i, index, .. } = &spec.role {
            for (a, &(l, r)) in index.iter().enumerate() {
                for (c, &(lp, s)) in index.iter().enumerate() {
                    let mut p = b.polys[l].mul(&b.polys[lp]);
                    if *i == 1 {
                        p = p.mul(&EvenPolynomial::monomial(1));
                    }
                    for (k, v) in p.coeffs.iter().enumerate() {
                        *out.entry((r, s, k)).or_insert(0.0) += xb.get(a, c) * v;
                    }
                }
            }
        }
    }
    out
}

/// Makes the `r` and `−r` sub-blocks of every `Q` block equal, so the
/// `σ` of the blocks is already invariant under `(r, s) ↦ (−r, −s)`.
pub fn mirror_frequencies(x: &mut [BlockMatrix], layout: &BlockLayout) {
    for (spec, xb) in layout.blocks.iter().zip(x.iter_mut()) {
        if let BlockRole::Q { index, .. } = &spec.role {
            let pos = |l: usize, r: i32| index.iter().position(|&e| e == (l, r));
            let mut m = xb.to_dense();
            for (a, &(l, r)) in index.iter().enumerate() {
                for (c, &(lp, s)) in index.iter().enumerate() {
                    if r > 0 && s > 0 {
                        if let (Some(a2), Some(c2)) = (pos(l, -r), pos(lp, -s)) {
                            m[(a2, c2)] = m[(a, c)];
                        }
                    }
                }
            }
            *xb = BlockMatrix::Dense(m);
        }
    }
}
