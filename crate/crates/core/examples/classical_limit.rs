//! With every exponent equal to one the walk solves u' = A u; compare with
//! the matrix exponential.
//!
//!     cargo run --release --example classical_limit -- [seed] [walks]

use fracwalk::estimator::{estimate, EstimateConfig};
use fracwalk::model::gen_random_problem;
use fracwalk::reference::expm_oracle;
use fracwalk::sampling::RngStream;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let walks: u64 = args.next().map_or(100_000, |s| s.parse().expect("walks"));
    let mut p = gen_random_problem(5, &mut RngStream::new(seed, 0));
    p.alpha = vec![1.0; 5];
    p.classical_limit = true;
    let r = estimate(&p, &EstimateConfig::new(walks, seed)).expect("estimate");
    let exact = expm_oracle(&p.to_dense(), &p.u0, p.t_final)[0];
    let se = (r.solution.var / walks as f64).sqrt();
    println!("T = {:.4}", p.t_final);
    println!("exp(AT)u0 at node 1: {exact:.6}");
    println!("walk estimate:       {:.6} +- {se:.2e} (z = {:.2})", r.solution.mean, (r.solution.mean - exact) / se);
}
