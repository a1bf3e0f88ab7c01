//! Problem definition for `D^alpha u = A u`, the embedded jump chain the
//! walker runs on, and the experiment families used for validation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

mod io;
mod laplacian;
mod random;
mod robin;

pub use io::ProblemFile;
pub use laplacian::laplacian_problem;
pub use random::gen_random_problem;
pub use robin::{build_robin_problem, chain_rule_robin, RobinGradients, RobinSpec};

/// Row indices in errors are 1-based, matching problem files.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("row {0}: diagonal entry is zero")]
    ZeroDiagonal(usize),
    #[error("row {0}: positive diagonal entry is not allowed in simplified mode")]
    PositiveDiagonalInSimplifiedMode(usize),
    #[error("row {row}: exponent {value} outside the admissible range")]
    AlphaOutOfRange { row: usize, value: f64 },
    #[error("Robin corner denominator b1*dx - b2 vanishes")]
    RobinDenominatorZero,
    #[error("malformed problem: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Each node draws from its own Mittag-Leffler law; needs a_ii < 0.
    #[default]
    Simplified,
    /// Exponential proposal with importance weights; solution only.
    General,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simplified => "simplified",
            Mode::General => "general",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simplified" => Ok(Mode::Simplified),
            "general" => Ok(Mode::General),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

/// One matrix row: the diagonal plus nonzero off-diagonals sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub diag: f64,
    pub off: Vec<(usize, f64)>,
}

/// `D^alpha_i u_i = sum_j a_ij u_j`, `u(0) = u0`, observed at node
/// `start` (0-based) and time `t_final`.
#[derive(Debug, Clone, PartialEq)]
pub struct FodeProblem {
    pub rows: Vec<SparseRow>,
    pub alpha: Vec<f64>,
    pub u0: Vec<f64>,
    pub t_final: f64,
    pub start: usize,
    /// Admit alpha_i = 1 (ordinary ODE limit).
    pub classical_limit: bool,
}

impl FodeProblem {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn from_dense(a: &[Vec<f64>], alpha: Vec<f64>, u0: Vec<f64>, t_final: f64, start: usize) -> Self {
        let rows = a
            .iter()
            .enumerate()
            .map(|(i, r)| SparseRow {
                diag: r[i],
                off: r.iter().enumerate().filter(|&(j, &v)| j != i && v != 0.0).map(|(j, &v)| (j, v)).collect(),
            })
            .collect();
        FodeProblem { rows, alpha, u0, t_final, start, classical_limit: false }
    }

    /// Builds the rows from 0-based `(row, col, value)` triplets. Missing
    /// diagonals are stored as zero and rejected later by validation.
    pub fn from_triplets(
        n: usize,
        triplets: &[(usize, usize, f64)],
        alpha: Vec<f64>,
        u0: Vec<f64>,
        t_final: f64,
        start: usize,
    ) -> Result<Self, ModelError> {
        let mut rows = vec![SparseRow { diag: 0.0, off: Vec::new() }; n];
        let mut seen = std::collections::HashSet::new();
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(ModelError::Malformed(format!("entry ({}, {}) outside a {n}x{n} matrix", i + 1, j + 1)));
            }
            if !v.is_finite() {
                return Err(ModelError::Malformed(format!("entry ({}, {}) is not finite", i + 1, j + 1)));
            }
            if !seen.insert((i, j)) {
                return Err(ModelError::Malformed(format!("duplicate entry ({}, {})", i + 1, j + 1)));
            }
            if i == j {
                rows[i].diag = v;
            } else if v != 0.0 {
                rows[i].off.push((j, v));
            }
        }
        for r in &mut rows {
            r.off.sort_by_key(|&(j, _)| j);
        }
        Ok(FodeProblem { rows, alpha, u0, t_final, start, classical_limit: false })
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.rows[i].diag;
        }
        self.rows[i].off.iter().find(|&&(c, _)| c == j).map_or(0.0, |&(_, v)| v)
    }

    /// Overwrites `a_ij`; an off-diagonal set to zero is removed.
    pub fn set_entry(&mut self, i: usize, j: usize, v: f64) {
        let row = &mut self.rows[i];
        if i == j {
            row.diag = v;
            return;
        }
        match row.off.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(pos) if v == 0.0 => {
                row.off.remove(pos);
            }
            Ok(pos) => row.off[pos].1 = v,
            Err(_) if v == 0.0 => {}
            Err(pos) => row.off.insert(pos, (j, v)),
        }
    }

    /// Stored entries in row-major order, diagonal first in each row.
    pub fn stored_entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            out.push((i, i));
            out.extend(r.off.iter().map(|&(j, _)| (i, j)));
        }
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (i, r) in self.rows.iter().enumerate() {
            m[(i, i)] = r.diag;
            for &(j, v) in &r.off {
                m[(i, j)] = v;
            }
        }
        m
    }

    fn check_shape(&self) -> Result<(), ModelError> {
        let n = self.n();
        if n == 0 {
            return Err(ModelError::Malformed("empty system".into()));
        }
        if self.alpha.len() != n || self.u0.len() != n {
            return Err(ModelError::Malformed(format!(
                "expected {n} exponents and initial values, got {} and {}",
                self.alpha.len(),
                self.u0.len()
            )));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(ModelError::Malformed(format!("final time must be positive, got {}", self.t_final)));
        }
        if self.start >= n {
            return Err(ModelError::Malformed(format!("start node {} outside 1..={n}", self.start + 1)));
        }
        if let Some(k) = self.u0.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::Malformed(format!("u0[{}] is not finite", k + 1)));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.diag.is_finite() {
                return Err(ModelError::Malformed(format!("row {}: diagonal is not finite", i + 1)));
            }
            let mut last = None;
            for &(j, v) in &r.off {
                if j >= n || j == i || last.is_some_and(|l| l >= j) || !v.is_finite() || v == 0.0 {
                    return Err(ModelError::Malformed(format!("row {}: bad off-diagonal entry at column {}", i + 1, j + 1)));
                }
                last = Some(j);
            }
        }
        Ok(())
    }
}

/// Jump table of one row.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRow {
    /// Successor columns, aligned with `cumprobs` and `signs`.
    pub targets: Vec<usize>,
    pub cumprobs: Vec<f64>,
    pub signs: Vec<f64>,
    /// sum_{j != i} |a_ij|
    pub abs_sum: f64,
    /// abs_sum / (-a_ii); `chi(i, k) = signs[k] * chi_factor`.
    pub chi_factor: f64,
}

impl ChainRow {
    pub fn is_absorbing(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn chi(&self, slot: usize) -> f64 {
        self.signs[slot] * self.chi_factor
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedChain {
    pub rows: Vec<ChainRow>,
    pub mode: Mode,
}

impl EmbeddedChain {
    /// Largest |chi(i, k)| over stored edges; 0 when there are none.
    pub fn max_abs_chi(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| !r.is_absorbing())
            .map(|r| r.chi_factor.abs())
            .fold(0.0, f64::max)
    }
}

/// Checks the preconditions of the random-walk representation and builds
/// the jump chain.
pub fn validate_problem(p: &FodeProblem, mode: Mode) -> Result<EmbeddedChain, ModelError> {
    p.check_shape()?;
    let upper = if p.classical_limit { 1.0 } else { 1.0 - f64::EPSILON / 2.0 };
    let mut rows = Vec::with_capacity(p.n());
    for (i, r) in p.rows.iter().enumerate() {
        let a = p.alpha[i];
        if !(a > 0.0 && a <= upper) {
            return Err(ModelError::AlphaOutOfRange { row: i + 1, value: a });
        }
        if r.diag == 0.0 {
            return Err(ModelError::ZeroDiagonal(i + 1));
        }
        if r.diag > 0.0 && mode == Mode::Simplified {
            return Err(ModelError::PositiveDiagonalInSimplifiedMode(i + 1));
        }
        let abs_sum: f64 = r.off.iter().map(|&(_, v)| v.abs()).sum();
        let mut cumprobs = Vec::with_capacity(r.off.len());
        let mut acc = 0.0;
        for &(_, v) in &r.off {
            acc += v.abs();
            cumprobs.push(acc / abs_sum);
        }
        if let Some(last) = cumprobs.last_mut() {
            *last = 1.0;
        }
        rows.push(ChainRow {
            targets: r.off.iter().map(|&(j, _)| j).collect(),
            cumprobs,
            signs: r.off.iter().map(|&(_, v)| v.signum()).collect(),
            abs_sum,
            chi_factor: abs_sum / -r.diag,
        });
    }
    Ok(EmbeddedChain { rows, mode })
}
