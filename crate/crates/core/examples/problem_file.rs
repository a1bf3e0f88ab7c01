//! Read a problem file, estimate everything and print the versioned JSON
//! report, as `fracwalk solve` does.
//!
//!     cargo run --release --example problem_file -- problem.json [walks]
//!
//! Without arguments a small built-in problem is used.

use fracwalk::cli::report::{problem_hash, ReportJson};
use fracwalk::estimator::{estimate, EstimateConfig};
use fracwalk::model::ProblemFile;

const BUILTIN: &str = r#"{
  "n": 3,
  "triplets": [[1,1,-3.0],[1,2,1.0],[1,3,-0.5],[2,1,0.7],[2,2,-2.0],[3,2,1.2],[3,3,-1.5]],
  "alpha": [0.6, 0.75, 0.9],
  "u0": [1.0, 0.2, -0.4],
  "T": 0.5,
  "seed": 7
}"#;

fn main() {
    let mut args = std::env::args().skip(1);
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(path).expect("readable problem file"),
        None => BUILTIN.to_owned(),
    };
    let walks: u64 = args.next().map_or(50_000, |s| s.parse().expect("walks"));
    let file = ProblemFile::parse(&text).expect("valid problem file");
    let p = file.to_problem().expect("valid problem");
    let r = estimate(&p, &EstimateConfig::new(walks, file.seed.unwrap_or(1))).expect("estimate");
    let hash = problem_hash(&file.canonical().unwrap());
    println!("{}", serde_json::to_string_pretty(&ReportJson::new(&r, hash)).unwrap());
}
