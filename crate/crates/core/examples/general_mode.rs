//! A system with a growing component (positive diagonal) is outside the
//! simplified walk; general mode samples exponential sojourns and corrects
//! with importance weights.
//!
//!     cargo run --release --example general_mode -- [walks]

use fracwalk::estimator::{estimate, EstimateConfig};
use fracwalk::model::{validate_problem, FodeProblem, Mode};
use fracwalk::reference::{l1_solve, L1Config};
use fracwalk::walker::WalkConfig;

fn main() {
    let walks: u64 = std::env::args().nth(1).map_or(200_000, |s| s.parse().expect("walks"));
    let p = FodeProblem::from_dense(
        &[vec![-1.0, 0.5], vec![0.3, 0.4]],
        vec![0.8, 0.9],
        vec![1.0, 0.5],
        0.5,
        0,
    );
    match validate_problem(&p, Mode::Simplified) {
        Err(e) => println!("simplified mode rejects it: {e}"),
        Ok(_) => unreachable!(),
    }
    let mut cfg = EstimateConfig::new(walks, 1);
    cfg.walk = WalkConfig::solution_only(Mode::General);
    let r = estimate(&p, &cfg).expect("estimate");
    let want = l1_solve(&p, &L1Config::default()).unwrap().final_state()[0];
    let se = (r.solution.var / walks as f64).sqrt();
    println!("L1 u_1(T) = {want:.6}");
    println!("general-mode estimate = {:.6} +- {se:.2e} (z = {:.2})", r.solution.mean, (r.solution.mean - want) / se);
    println!("sensitivities reported: {}", r.grad_a.is_some());
}
