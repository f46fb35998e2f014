//! Kernel bound on the independence number of a finite graph.
//!
//! For `K` with `K − J ⪰ 0` and `K(x, y) ≤ 0` on distinct nonadjacent
//! pairs, every independent set `I` has `|I|² ≤ Σ_{I×I} K ≤ |I| max K(x, x)`.
//! The best such bound is the theta-prime number.

use std::fmt;

use crate::error::{Error, Result};
use crate::sdp::{solve, BlockKind, Constraint, LinearForm, Relation, SdpProblem, SolveStatus, SolverOptions};

pub const MAX_BRUTE_FORCE: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl FiniteGraph {
    pub fn empty(n: usize) -> Self {
        FiniteGraph { n, adj: vec![vec![false; n]; n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n {
            return Err(Error::InvalidParameter(format!("edge ({a}, {b}) outside {} vertices", self.n)));
        }
        if a == b {
            return Err(Error::InvalidParameter(format!("loop at vertex {a}")));
        }
        self.adj[a][b] = true;
        self.adj[b][a] = true;
        Ok(())
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for a in 0..n {
            for b in 0..n {
                g.adj[a][b] = a != b;
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n);
        if n >= 3 {
            for a in 0..n {
                g.add_edge(a, (a + 1) % n).expect("cycle edge in range");
            }
        } else if n == 2 {
            g.add_edge(0, 1).expect("edge in range");
        }
        g
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let mut g = Self::empty(a + b);
        for x in 0..a {
            for y in a..a + b {
                g.add_edge(x, y).expect("edge in range");
            }
        }
        g
    }

    /// Outer 5-cycle, inner pentagram, spokes.
    pub fn petersen() -> Self {
        let mut g = Self::empty(10);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5).expect("edge in range");
            g.add_edge(5 + i, 5 + (i + 2) % 5).expect("edge in range");
            g.add_edge(i, 5 + i).expect("edge in range");
        }
        g
    }

    pub fn disjoint_union(&self, other: &FiniteGraph) -> FiniteGraph {
        let mut g = Self::empty(self.n + other.n);
        for a in 0..self.n {
            for b in 0..self.n {
                g.adj[a][b] = self.adj[a][b];
            }
        }
        for a in 0..other.n {
            for b in 0..other.n {
                g.adj[self.n + a][self.n + b] = other.adj[a][b];
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|a| (a + 1..self.n).filter(move |&b| self.adj[a][b]).map(move |b| (a, b))).collect()
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(i, &a)| set[i + 1..].iter().all(|&b| a != b && !self.adj[a][b]))
    }

    /// Named families: `c5`, `k4`, `e3` (edgeless), `k2,3`, `petersen`.
    pub fn named(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let bad = || Error::InvalidParameter(format!("unknown graph name {name:?}"));
        if lower == "petersen" {
            return Ok(Self::petersen());
        }
        let (kind, rest) = lower.split_at(1.min(lower.len()));
        match kind {
            "c" => Ok(Self::cycle(rest.parse().map_err(|_| bad())?)),
            "e" => Ok(Self::empty(rest.parse().map_err(|_| bad())?)),
            "k" => match rest.split_once(',') {
                Some((a, b)) => Ok(Self::complete_bipartite(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)),
                None => Ok(Self::complete(rest.parse().map_err(|_| bad())?)),
            },
            _ => Err(bad()),
        }
    }

    /// One line per vertex: `v: u w …`, vertices numbered from 0. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse_adjacency_list(text: &str) -> Result<Self> {
        let mut lists: Vec<(usize, Vec<usize>)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| Error::MalformedFile(format!("line {}: expected `vertex: neighbours`", ln + 1)))?;
            let v: usize = head.trim().parse().map_err(|_| Error::MalformedFile(format!("line {}: bad vertex {head:?}", ln + 1)))?;
            let nb = tail
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::MalformedFile(format!("line {}: bad neighbour {t:?}", ln + 1))))
                .collect::<Result<Vec<usize>>>()?;
            lists.push((v, nb));
        }
        let n = lists.iter().flat_map(|(v, nb)| std::iter::once(*v).chain(nb.iter().copied())).max().map_or(0, |m| m + 1);
        let mut g = Self::empty(n);
        for (v, nb) in lists {
            for u in nb {
                g.add_edge(v, u)?;
            }
        }
        Ok(g)
    }

    /// `p edge n m` header and `e a b` lines with 1-based vertices; `c`
    /// lines are comments.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut g: Option<FiniteGraph> = None;
        for (ln, line) in text.lines().enumerate() {
            let mut t = line.split_whitespace();
            let bad = |what: &str| Error::MalformedFile(format!("line {}: {what}", ln + 1));
            match t.next() {
                None | Some("c") => {}
                Some("p") => {
                    let _format = t.next().ok_or_else(|| bad("missing format"))?;
                    let n: usize = t.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("missing vertex count"))?;
                    g = Some(Self::empty(n));
                }
                Some("e") => {
                    let g = g.as_mut().ok_or_else(|| bad("edge before problem line"))?;
                    let a: usize = t.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad edge"))?;
                    let b: usize = t.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad edge"))?;
                    if a == 0 || b == 0 {
                        return Err(bad("vertices are numbered from 1"));
                    }
                    g.add_edge(a - 1, b - 1)?;
                }
                Some(other) => return Err(bad(&format!("unknown line type {other:?}"))),
            }
        }
        g.ok_or_else(|| Error::MalformedFile("missing `p edge n m` line".into()))
    }

    pub fn to_dimacs(&self) -> String {
        let edges = self.edges();
        let mut s = format!("p edge {} {}\n", self.n, edges.len());
        for (a, b) in edges {
            s.push_str(&format!("e {} {}\n", a + 1, b + 1));
        }
        s
    }
}

impl fmt::Display for FiniteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in 0..self.n {
            let nb: Vec<String> = (0..self.n).filter(|&b| self.adj[a][b]).map(|b| b.to_string()).collect();
            writeln!(f, "{a}: {}", nb.join(" "))?;
        }
        Ok(())
    }
}

/// Block 0 holds `K − J`, block 1 holds `B`.
pub fn theta_prime_problem(g: &FiniteGraph) -> SdpProblem {
    let n = g.n();
    let mut p = SdpProblem::default();
    let k = p.add_block("K-J", n, BlockKind::Psd);
    let b = p.add_block("B", 1, BlockKind::Diagonal);
    p.objective.add_sym(b, 0, 0, 1.0);
    for x in 0..n {
        let mut form = LinearForm::new();
        form.add_sym(k, x, x, 1.0);
        form.add_sym(b, 0, 0, -1.0);
        p.constraints.push(Constraint { form, relation: Relation::Le, rhs: -1.0, tag: format!("diag {x}") });
    }
    for x in 0..n {
        for y in x + 1..n {
            if !g.adjacent(x, y) {
                let mut form = LinearForm::new();
                form.add_functional(k, x, y, 1.0);
                p.constraints.push(Constraint { form, relation: Relation::Le, rhs: -1.0, tag: format!("pair {x} {y}") });
            }
        }
    }
    p
}

pub fn theta_prime_bound(g: &FiniteGraph, tol: f64) -> Result<f64> {
    if g.n() == 0 {
        return Err(Error::InvalidParameter("graph has no vertices".into()));
    }
    let p = theta_prime_problem(g);
    let sol = solve(&p, &SolverOptions::with_tolerances(tol, tol))?;
    match sol.status {
        SolveStatus::Optimal | SolveStatus::NearOptimal => Ok(sol.primal_objective),
        s => Err(Error::Solver(format!("theta-prime solve ended with status {s}"))),
    }
}

/// Exact independence number by branch and bound over vertex bitmasks.
pub fn brute_force_alpha(g: &FiniteGraph) -> Result<usize> {
    if g.n() > MAX_BRUTE_FORCE {
        return Err(Error::GraphTooLarge(g.n()));
    }
    let nbr: Vec<u32> = (0..g.n())
        .map(|a| (0..g.n()).filter(|&b| g.adjacent(a, b)).fold(0u32, |m, b| m | (1 << b)))
        .collect();
    let all = if g.n() == 32 { u32::MAX } else { (1u32 << g.n()) - 1 };
    let mut best = 0;
    search(&nbr, all, 0, &mut best);
    Ok(best)
}

fn search(nbr: &[u32], candidates: u32, size: usize, best: &mut usize) {
    if candidates == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + candidates.count_ones() as usize <= *best {
        return;
    }
    let v = candidates.trailing_zeros() as usize;
    let rest = candidates & !(1 << v);
    search(nbr, rest & !nbr[v], size + 1, best);
    // a vertex with no candidate neighbour is always worth taking
    if rest & nbr[v] != 0 {
        search(nbr, rest, size, best);
    }
}
