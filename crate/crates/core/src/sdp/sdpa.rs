//! SDPA sparse format (`.dat-s`) and CSDP-style solution files.
//!
//! The file stores `max ⟨F0, X⟩` with `F0 = −C`, so a file read back gives
//! the same minimization. Solution files carry the multipliers with the
//! sign used by CSDP, which is the negative of ours.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DVector;

use super::{Block, BlockKind, LinearForm, SdpSolution, SolveStatus, StandardSdp};
use crate::error::{Error, Result};

const HEADER: &str = "* pentabound sdp v1";

fn malformed(line: usize, msg: impl Into<String>) -> Error {
    Error::MalformedFile(format!("line {line}: {}", msg.into()))
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || ",(){}".contains(c)).filter(|t| !t.is_empty())
}

fn is_comment(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('*') || t.starts_with('"')
}

pub fn export_sdpa(p: &StandardSdp) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    for (k, b) in p.blocks.iter().enumerate() {
        let kind = match b.kind {
            BlockKind::Psd => "psd",
            BlockKind::Diagonal => "diagonal",
        };
        writeln!(out, "* block {} {} {} {}", k + 1, b.label, kind, b.dim).unwrap();
    }
    writeln!(out, "{}", p.rows.len()).unwrap();
    writeln!(out, "{}", p.blocks.len()).unwrap();
    let dims: Vec<String> = p
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Psd => b.dim.to_string(),
            BlockKind::Diagonal => format!("-{}", b.dim),
        })
        .collect();
    writeln!(out, "{}", dims.join(" ")).unwrap();
    let rhs: Vec<String> = p.rhs.iter().map(|v| format!("{v:e}")).collect();
    writeln!(out, "{}", rhs.join(" ")).unwrap();
    let mut write_form = |matno: usize, f: &LinearForm, sign: f64| {
        for (&(b, i, j), v) in &f.entries {
            if *v != 0.0 {
                writeln!(out, "{} {} {} {} {:e}", matno, b + 1, i + 1, j + 1, sign * v).unwrap();
            }
        }
    };
    write_form(0, &p.objective, -1.0);
    for (k, row) in p.rows.iter().enumerate() {
        write_form(k + 1, row, 1.0);
    }
    out
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| malformed(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| malformed(line, format!("cannot parse {what} from {tok:?}")))
}

pub fn parse_sdpa(text: &str) -> Result<StandardSdp> {
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    let mut lines = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if is_comment(line) {
            let mut t = tokens(line.trim_start().trim_start_matches('*'));
            if t.next() == Some("block") {
                if let (Some(Ok(k)), Some(label)) = (t.next().map(str::parse::<usize>), t.next()) {
                    labels.insert(k, label.to_string());
                }
            }
            continue;
        }
        lines.push((n + 1, line));
    }
    let mut it = lines.into_iter();
    let (ln, l) = it.next().ok_or_else(|| Error::MalformedFile("empty file".into()))?;
    let m: usize = parse_num(tokens(l).next(), ln, "constraint count")?;
    let (ln, l) = it.next().ok_or_else(|| Error::MalformedFile("missing block count".into()))?;
    let nblocks: usize = parse_num(tokens(l).next(), ln, "block count")?;

    let mut dims: Vec<i64> = Vec::new();
    let mut last_line = ln;
    while dims.len() < nblocks {
        let (ln, l) = it.next().ok_or_else(|| malformed(last_line, "missing block sizes"))?;
        last_line = ln;
        for t in tokens(l) {
            dims.push(parse_num(Some(t), ln, "block size")?);
        }
    }
    if dims.len() != nblocks {
        return Err(malformed(last_line, format!("expected {nblocks} block sizes, found {}", dims.len())));
    }
    let mut rhs: Vec<f64> = Vec::new();
    while rhs.len() < m {
        let (ln, l) = it.next().ok_or_else(|| malformed(last_line, "missing right-hand side"))?;
        last_line = ln;
        for t in tokens(l) {
            rhs.push(parse_num(Some(t), ln, "right-hand side")?);
        }
    }
    if rhs.len() != m {
        return Err(malformed(last_line, format!("expected {m} right-hand sides, found {}", rhs.len())));
    }
    let blocks: Vec<Block> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let (dim, kind) = if d < 0 { ((-d) as usize, BlockKind::Diagonal) } else { (d as usize, BlockKind::Psd) };
            let label = labels.get(&(k + 1)).cloned().unwrap_or_else(|| format!("b{}", k + 1));
            Block { label, dim, kind }
        })
        .collect();

    let mut objective = LinearForm::new();
    let mut rows = vec![LinearForm::new(); m];
    for (ln, l) in it {
        let mut t = tokens(l);
        let matno: usize = parse_num(t.next(), ln, "matrix number")?;
        let blk: usize = parse_num(t.next(), ln, "block number")?;
        let i: usize = parse_num(t.next(), ln, "row index")?;
        let j: usize = parse_num(t.next(), ln, "column index")?;
        let v: f64 = parse_num(t.next(), ln, "value")?;
        if matno > m {
            return Err(Error::DimensionMismatch(format!("line {ln}: matrix {matno} exceeds {m} constraints")));
        }
        if blk == 0 || blk > nblocks {
            return Err(Error::DimensionMismatch(format!("line {ln}: block {blk} out of range")));
        }
        let b = &blocks[blk - 1];
        if i == 0 || j == 0 || i > b.dim || j > b.dim || (b.kind == BlockKind::Diagonal && i != j) {
            return Err(Error::DimensionMismatch(format!("line {ln}: entry ({i}, {j}) outside block {blk}")));
        }
        if matno == 0 {
            objective.add_sym(blk - 1, i - 1, j - 1, -v);
        } else {
            rows[matno - 1].add_sym(blk - 1, i - 1, j - 1, v);
        }
    }
    Ok(StandardSdp { blocks, objective, rows, rhs })
}

pub fn export_solution(p: &StandardSdp, sol: &SdpSolution) -> String {
    let mut out = String::new();
    let y: Vec<String> = sol.y.iter().map(|v| format!("{:e}", -v)).collect();
    writeln!(out, "{}", y.join(" ")).unwrap();
    for (matno, mats) in [(1, &sol.z), (2, &sol.x)] {
        for (b, (blk, mat)) in p.blocks.iter().zip(mats.iter()).enumerate() {
            for i in 0..blk.dim {
                let js = match blk.kind {
                    BlockKind::Psd => i..blk.dim,
                    BlockKind::Diagonal => i..i + 1,
                };
                for j in js {
                    let v = mat.get(i, j);
                    if v != 0.0 {
                        writeln!(out, "{} {} {} {} {:e}", matno, b + 1, i + 1, j + 1, v).unwrap();
                    }
                }
            }
        }
    }
    out
}

/// Reads a CSDP-style solution for `p`. Objectives are recomputed from the
/// imported blocks; the status is left as near-optimal since the file does
/// not record one.
pub fn import_solution(p: &StandardSdp, text: &str) -> Result<SdpSolution> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !is_comment(l));
    let (ln, first) = lines.next().ok_or_else(|| Error::MalformedFile("empty solution file".into()))?;
    let y_file: Vec<f64> =
        tokens(first).map(|t| parse_num(Some(t), ln + 1, "multiplier")).collect::<Result<_>>()?;
    if y_file.len() != p.rows.len() {
        return Err(Error::DimensionMismatch(format!(
            "solution has {} multipliers, problem has {} constraints",
            y_file.len(),
            p.rows.len()
        )));
    }
    let mut sol = SdpSolution::zero(p);
    sol.y = DVector::from_iterator(y_file.len(), y_file.iter().map(|v| -v));
    for (ln, l) in lines {
        let ln = ln + 1;
        let mut t = tokens(l);
        let matno: usize = parse_num(t.next(), ln, "matrix number")?;
        let blk: usize = parse_num(t.next(), ln, "block number")?;
        let i: usize = parse_num(t.next(), ln, "row index")?;
        let j: usize = parse_num(t.next(), ln, "column index")?;
        let v: f64 = parse_num(t.next(), ln, "value")?;
        let target = match matno {
            1 => &mut sol.z,
            2 => &mut sol.x,
            _ => return Err(malformed(ln, format!("matrix number {matno} is neither 1 nor 2"))),
        };
        if blk == 0 || blk > p.blocks.len() {
            return Err(Error::DimensionMismatch(format!("line {ln}: block {blk} out of range")));
        }
        let b = &p.blocks[blk - 1];
        if i == 0 || j == 0 || i > b.dim || j > b.dim || (b.kind == BlockKind::Diagonal && i != j) {
            return Err(Error::DimensionMismatch(format!("line {ln}: entry ({i}, {j}) outside block {blk}")));
        }
        target[blk - 1].set_sym(i - 1, j - 1, v);
    }
    sol.primal_objective = p.objective.apply(&sol.x);
    sol.dual_objective = p.rhs.iter().zip(sol.y.iter()).map(|(b, y)| b * y).sum();
    sol.status = SolveStatus::NearOptimal;
    Ok(sol)
}

