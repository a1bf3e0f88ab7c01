//! Loss sweeps for the Robin-boundary heat problem: deterministic L1 values
//! against bootstrap intervals of the walk estimates.
//!
//!     cargo run --release --example robin_sweep -- [walks] [bootstrap]

use fracwalk::cli::robin::{run_robin, RobinConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let walks: u64 = args.next().map_or(20_000, |s| s.parse().expect("walks"));
    let bootstrap: usize = args.next().map_or(1000, |s| s.parse().expect("bootstrap"));
    let cfg = RobinConfig { walks, bootstrap, ..RobinConfig::default() };
    let r = run_robin(&cfg, |m| eprintln!("{m}")).expect("robin");
    println!("a_11 = {:.4}; du_1/db1 = {:.4e}, du_1/db2 = {:.4e}, du_1/dalpha = {:.4e}", r.a11_0, r.d_b1, r.d_b2, r.d_alpha);
    println!("{:<12} {:>10} {:>12} {:>12} {:>26}  in", "quantity", "theta", "L1", "walks", "interval");
    for p in &r.points {
        println!(
            "{:<12} {:>10.4} {:>12.4e} {:>12.4e} [{:>11.4e}, {:>11.4e}]  {}",
            format!("{:?}", p.quantity),
            p.theta,
            p.deterministic,
            p.stochastic,
            p.ci[0],
            p.ci[1],
            p.overlap
        );
    }
    println!("{}/{} intervals contain the deterministic value", r.overlaps, r.points.len());
}
