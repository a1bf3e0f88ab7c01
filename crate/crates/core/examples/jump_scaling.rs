//! Mean number of jumps per walk on Dirichlet Laplacians as a function of
//! T, alpha, grid size and dimension.
//!
//!     cargo run --release --example jump_scaling -- [walks]

use fracwalk::cli::bench::{run_bench, BenchConfig};

fn main() {
    let walks: u64 = std::env::args().nth(1).map_or(10_000, |s| s.parse().expect("walks"));
    let r = run_bench(&BenchConfig { walks, ..BenchConfig::default() }).expect("bench");
    for s in &r.time_sweeps {
        let m: Vec<String> = s.points.iter().map(|p| format!("{:.2}", p.mean_jumps)).collect();
        println!("alpha {:<4}: E nu_T = [{}], log-log slope {:.3}", s.alpha, m.join(", "), s.fit.slope);
    }
    for p in &r.grid_sweep {
        println!("n_x {:>3}: E nu_T = {:>8.2} ({:.1} us/walk)", p.n_x, p.mean_jumps, p.micros_per_walk);
    }
    println!("slope in n_x {:.3}", r.grid_fit.slope);
    for p in &r.dim_sweep {
        println!("d {}: E nu_T = {:.2}", p.dim, p.mean_jumps);
    }
    println!("linear fit in d: slope {:.3}, R^2 {:.5}", r.dim_fit.slope, r.dim_fit.r2);
}
