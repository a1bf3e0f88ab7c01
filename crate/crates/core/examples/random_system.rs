//! Estimate the solution and every sensitivity of one random 5x5 system,
//! then compare against the deterministic finite-difference reference.
//!
//!     cargo run --release --example random_system -- [seed] [walks]

use std::time::Instant;

use fracwalk::cli::validate::check_system;
use fracwalk::estimator::EstimateConfig;
use fracwalk::model::gen_random_problem;
use fracwalk::reference::L1Config;
use fracwalk::sampling::RngStream;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let walks: u64 = args.next().map_or(100_000, |s| s.parse().expect("walks"));
    let p = gen_random_problem(5, &mut RngStream::new(seed, u64::MAX));
    println!("T = {:.4}, alpha = {:.3?}", p.t_final, p.alpha);
    let start = Instant::now();
    let (check, r, _) = check_system(1, &p, &EstimateConfig::new(walks, seed), &L1Config::default()).expect("check");
    println!("{walks} walks + FD reference in {:.2?}; mean jumps {:.2}", start.elapsed(), r.jumps.mean);
    println!("{:<12} {:>14} {:>14} {:>8}", "quantity", "monte carlo", "fd-l1", "z");
    for d in &check.deviations {
        println!("{:<12} {:>14.6e} {:>14.6e} {:>8.2}", d.quantity, d.mc, d.reference, d.z);
    }
    println!("tests (u, dA, dalpha, du0, dT) pass: {:?}", check.passes());
}
