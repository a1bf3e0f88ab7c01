use serde::{Deserialize, Serialize};

use super::{FodeProblem, ModelError, Mode};

/// On-disk problem description. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    /// `[row, col, value]`
    pub triplets: Vec<(usize, usize, f64)>,
    pub alpha: Vec<f64>,
    pub u0: Vec<f64>,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "one")]
    pub start_node: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_walks: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub classical_limit: bool,
}

fn one() -> usize {
    1
}

impl ProblemFile {
    pub fn from_problem(p: &FodeProblem, mode: Mode) -> Self {
        let mut triplets = Vec::new();
        for (i, r) in p.rows.iter().enumerate() {
            let mut row: Vec<(usize, usize, f64)> = vec![(i + 1, i + 1, r.diag)];
            row.extend(r.off.iter().map(|&(j, v)| (i + 1, j + 1, v)));
            row.sort_by_key(|t| t.1);
            triplets.extend(row);
        }
        ProblemFile {
            n: p.n(),
            triplets,
            alpha: p.alpha.clone(),
            u0: p.u0.clone(),
            t_final: p.t_final,
            start_node: p.start + 1,
            mode,
            seed: None,
            num_walks: None,
            classical_limit: p.classical_limit,
        }
    }

    pub fn to_problem(&self) -> Result<FodeProblem, ModelError> {
        let mut zero_based = Vec::with_capacity(self.triplets.len());
        for &(i, j, v) in &self.triplets {
            if i == 0 || j == 0 {
                return Err(ModelError::Malformed("triplet indices are 1-based".into()));
            }
            zero_based.push((i - 1, j - 1, v));
        }
        if self.start_node == 0 {
            return Err(ModelError::Malformed("start_node is 1-based".into()));
        }
        let mut p = FodeProblem::from_triplets(
            self.n,
            &zero_based,
            self.alpha.clone(),
            self.u0.clone(),
            self.t_final,
            self.start_node - 1,
        )?;
        p.classical_limit = self.classical_limit;
        Ok(p)
    }

    /// Same problem with triplets sorted and explicit zeros dropped.
    pub fn canonical(&self) -> Result<Self, ModelError> {
        let p = self.to_problem()?;
        Ok(ProblemFile { seed: self.seed, num_walks: self.num_walks, ..Self::from_problem(&p, self.mode) })
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))
    }
}
