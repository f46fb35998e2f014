//! Block-diagonal semidefinite programs.
//!
//! A [`SdpProblem`] minimizes `⟨C, X⟩` over block-diagonal `X ⪰ 0` subject to
//! linear equalities and `≤` inequalities. Inequalities are turned into
//! equalities with one diagonal slack block by [`SdpProblem::standard_form`];
//! the solver and the SDPA exporter both work on that standard form.

mod sdpa;
mod solver;

pub use sdpa::{export_sdpa, export_solution, import_solution, parse_sdpa};
pub use solver::{solve, SolverOptions};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    Psd,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub label: String,
    pub dim: usize,
    pub kind: BlockKind,
}

/// Symmetric block-sparse matrix: entry `(block, i, j)` with `i ≤ j` stands
/// for both `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    pub entries: BTreeMap<(usize, usize, usize), f64>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` to the symmetric entry at `(i, j)`.
    pub fn add_sym(&mut self, block: usize, i: usize, j: usize, v: f64) {
        let key = (block, i.min(j), i.max(j));
        *self.entries.entry(key).or_insert(0.0) += v;
    }

    /// Adds the functional `v · X[i][j]`; off-diagonal coefficients are split
    /// over the two symmetric positions.
    pub fn add_functional(&mut self, block: usize, i: usize, j: usize, v: f64) {
        if i == j {
            self.add_sym(block, i, i, v);
        } else {
            self.add_sym(block, i, j, 0.5 * v);
        }
    }

    pub fn prune(&mut self) {
        self.entries.retain(|_, v| *v != 0.0);
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| *v == 0.0)
    }

    pub fn scale(&mut self, c: f64) {
        for v in self.entries.values_mut() {
            *v *= c;
        }
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|((_, i, j), v)| if i == j { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    /// `⟨F, X⟩` for symmetric `X`.
    pub fn apply(&self, x: &[BlockMatrix]) -> f64 {
        self.entries
            .iter()
            .map(|(&(b, i, j), v)| {
                let xv = x[b].get(i, j);
                if i == j {
                    v * xv
                } else {
                    2.0 * v * xv
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub form: LinearForm,
    pub relation: Relation,
    pub rhs: f64,
    pub tag: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<Block>,
    pub objective: LinearForm,
    pub constraints: Vec<Constraint>,
}

pub const SLACK_LABEL: &str = "slack";

impl SdpProblem {
    pub fn add_block(&mut self, label: impl Into<String>, dim: usize, kind: BlockKind) -> usize {
        self.blocks.push(Block { label: label.into(), dim, kind });
        self.blocks.len() - 1
    }

    pub fn block_index(&self, label: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.label == label)
    }

    pub fn inequality_count(&self) -> usize {
        self.constraints.iter().filter(|c| c.relation == Relation::Le).count()
    }

    /// Equality-only form: every `≤` row receives its own nonnegative slack
    /// in a trailing diagonal block.
    pub fn standard_form(&self) -> StandardSdp {
        let mut blocks = self.blocks.clone();
        let ineq = self.inequality_count();
        let slack_block = (ineq > 0).then(|| {
            blocks.push(Block { label: SLACK_LABEL.into(), dim: ineq, kind: BlockKind::Diagonal });
            blocks.len() - 1
        });
        let mut rows = Vec::with_capacity(self.constraints.len());
        let mut rhs = Vec::with_capacity(self.constraints.len());
        let mut next_slack = 0;
        for c in &self.constraints {
            let mut f = c.form.clone();
            if c.relation == Relation::Le {
                let sb = slack_block.expect("slack block exists when inequalities exist");
                f.add_sym(sb, next_slack, next_slack, 1.0);
                next_slack += 1;
            }
            rows.push(f);
            rhs.push(c.rhs);
        }
        StandardSdp { blocks, objective: self.objective.clone(), rows, rhs }
    }
}

/// `min ⟨C, X⟩  s.t.  ⟨A_p, X⟩ = b_p,  X ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardSdp {
    pub blocks: Vec<Block>,
    pub objective: LinearForm,
    pub rows: Vec<LinearForm>,
    pub rhs: Vec<f64>,
}

impl StandardSdp {
    pub fn zero_blocks(&self) -> Vec<BlockMatrix> {
        self.blocks.iter().map(BlockMatrix::zeros).collect()
    }

    pub fn check_entries(&self) -> Result<()> {
        let forms = std::iter::once(&self.objective).chain(self.rows.iter());
        for f in forms {
            for &(b, i, j) in f.entries.keys() {
                let blk = self.blocks.get(b).ok_or_else(|| Error::DimensionMismatch(format!("block {b} does not exist")))?;
                if j >= blk.dim || (blk.kind == BlockKind::Diagonal && i != j) {
                    return Err(Error::DimensionMismatch(format!("entry ({i}, {j}) outside block {}", blk.label)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockMatrix {
    Dense(DMatrix<f64>),
    Diagonal(DVector<f64>),
}

impl BlockMatrix {
    pub fn zeros(b: &Block) -> Self {
        match b.kind {
            BlockKind::Psd => BlockMatrix::Dense(DMatrix::zeros(b.dim, b.dim)),
            BlockKind::Diagonal => BlockMatrix::Diagonal(DVector::zeros(b.dim)),
        }
    }

    pub fn identity(b: &Block) -> Self {
        match b.kind {
            BlockKind::Psd => BlockMatrix::Dense(DMatrix::identity(b.dim, b.dim)),
            BlockKind::Diagonal => BlockMatrix::Diagonal(DVector::from_element(b.dim, 1.0)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BlockMatrix::Dense(m) => m.nrows(),
            BlockMatrix::Diagonal(v) => v.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            BlockMatrix::Dense(m) => m[(i, j)],
            BlockMatrix::Diagonal(v) => {
                if i == j {
                    v[i]
                } else {
                    0.0
                }
            }
        }
    }

    pub fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        match self {
            BlockMatrix::Dense(m) => {
                m[(i, j)] = value;
                m[(j, i)] = value;
            }
            BlockMatrix::Diagonal(v) => {
                if i == j {
                    v[i] = value;
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            BlockMatrix::Dense(m) => m.clone(),
            BlockMatrix::Diagonal(v) => DMatrix::from_diagonal(v),
        }
    }

    pub fn symmetrize(&mut self) {
        if let BlockMatrix::Dense(m) = self {
            let t = m.transpose();
            *m = (&*m + t) * 0.5;
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            BlockMatrix::Dense(m) if m.nrows() == 0 => f64::INFINITY,
            BlockMatrix::Dense(m) => m.clone().symmetric_eigenvalues().min(),
            BlockMatrix::Diagonal(v) if v.is_empty() => f64::INFINITY,
            BlockMatrix::Diagonal(v) => v.min(),
        }
    }

    pub fn frobenius_dot(&self, other: &BlockMatrix) -> f64 {
        match (self, other) {
            (BlockMatrix::Dense(a), BlockMatrix::Dense(b)) => a.dot(b),
            (BlockMatrix::Diagonal(a), BlockMatrix::Diagonal(b)) => a.dot(b),
            (a, b) => a.to_dense().dot(&b.to_dense()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

/// Primal blocks `X`, dual slack blocks `Z` and multipliers `y` of a
/// standard-form problem, with `Z = C − Σ y_p A_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: Vec<BlockMatrix>,
    pub z: Vec<BlockMatrix>,
    pub y: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn zero(p: &StandardSdp) -> Self {
        SdpSolution {
            x: p.zero_blocks(),
            z: p.zero_blocks(),
            y: DVector::zeros(p.rows.len()),
            primal_objective: 0.0,
            dual_objective: 0.0,
            status: SolveStatus::NumericalFailure,
            iterations: 0,
        }
    }

    pub fn objective(&self, p: &StandardSdp) -> f64 {
        p.objective.apply(&self.x)
    }

    /// Largest `|⟨A_p, X⟩ − b_p|`.
    pub fn max_residual(&self, p: &StandardSdp) -> f64 {
        p.rows
            .iter()
            .zip(&p.rhs)
            .map(|(a, b)| (a.apply(&self.x) - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.x.iter().map(BlockMatrix::min_eigenvalue).fold(f64::INFINITY, f64::min)
    }
}
