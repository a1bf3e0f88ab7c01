//! Versioned JSON and CSV renderings of an estimate report.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::estimator::{EntryStat, EstimateReport, JumpStat, NodeStat, Stat};
use crate::model::{Mode, ProblemFile};

pub const SCHEMA_VERSION: u32 = 1;
pub const UNAVAILABLE: &str = "not available in general mode";

/// SHA-256 of the canonical problem JSON.
pub fn problem_hash(file: &ProblemFile) -> String {
    let json = serde_json::to_string(file).expect("problem files serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Field<T> {
    Value(T),
    Unavailable(&'static str),
}

impl<T> From<Option<T>> for Field<T> {
    fn from(v: Option<T>) -> Self {
        v.map_or(Field::Unavailable(UNAVAILABLE), Field::Value)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub schema: u32,
    pub problem_hash: String,
    pub mode: Mode,
    pub n_walks: u64,
    pub seed: u64,
    pub level: f64,
    pub solution: Stat,
    pub grad_u0: Field<Vec<NodeStat>>,
    #[serde(rename = "grad_A")]
    pub grad_a: Field<Vec<EntryStat>>,
    pub grad_alpha: Field<Vec<NodeStat>>,
    #[serde(rename = "grad_T")]
    pub grad_t: Field<Stat>,
    pub jumps: JumpStat,
}

impl ReportJson {
    pub fn new(r: &EstimateReport, hash: String) -> Self {
        ReportJson {
            schema: SCHEMA_VERSION,
            problem_hash: hash,
            mode: r.mode,
            n_walks: r.n_walks,
            seed: r.seed,
            level: r.level,
            solution: r.solution,
            grad_u0: r.grad_u0.clone().into(),
            grad_a: r.grad_a.clone().into(),
            grad_alpha: r.grad_alpha.clone().into(),
            grad_t: r.grad_t.into(),
            jumps: r.jumps,
        }
    }
}

pub const CSV_HEADER: &str = "quantity,row,col,mean,var,ci_lo,ci_hi";

/// One line per estimated quantity. `row`/`col` are 1-based and empty where
/// they do not apply; `jumps` reports the mean in `mean` and the maximum in
/// `var`.
pub fn to_csv(r: &EstimateReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let mut line = |q: &str, row: Option<usize>, col: Option<usize>, s: &Stat| {
        let idx = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{q},{},{},{:e},{:e},{:e},{:e}\n",
            idx(row),
            idx(col),
            s.mean,
            s.var,
            s.ci[0],
            s.ci[1]
        ));
    };
    line("solution", None, None, &r.solution);
    for e in r.grad_u0.iter().flatten() {
        line("grad_u0", Some(e.node), None, &e.stat);
    }
    for e in r.grad_a.iter().flatten() {
        line("grad_A", Some(e.row), Some(e.col), &e.stat);
    }
    for e in r.grad_alpha.iter().flatten() {
        line("grad_alpha", Some(e.node), None, &e.stat);
    }
    if let Some(t) = &r.grad_t {
        line("grad_T", None, None, t);
    }
    out.push_str(&format!("jumps,,,{:e},{},,\n", r.jumps.mean, r.jumps.max));
    out
}
