//! Second moment of the path functional against its a-priori bound, and its
//! behaviour in T when every |chi| < 1.
//!
//!     cargo run --release --example variance_bound -- [seed]

use fracwalk::estimator::{map_walks, variance_bound};
use fracwalk::model::{gen_random_problem, validate_problem, Mode};
use fracwalk::sampling::RngStream;
use fracwalk::walker::WalkConfig;

fn main() {
    let seed: u64 = std::env::args().nth(1).map_or(1, |s| s.parse().expect("seed"));
    let mut p = gen_random_problem(5, &mut RngStream::new(seed, 0));
    let walk = WalkConfig::solution_only(Mode::Simplified);
    println!("{:>4} {:>12} {:>12} {:>8}", "T", "E J^2", "bound", "M_chi");
    for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
        p.t_final = t;
        let chain = validate_problem(&p, Mode::Simplified).unwrap();
        let b = variance_bound(&p, &chain, Mode::Simplified).unwrap();
        let sq = map_walks(&p, &chain, &walk, seed, 100_000, 1, |o| o.j * o.j).unwrap();
        let m = sq.iter().sum::<f64>() / sq.len() as f64;
        println!("{t:>4} {m:>12.6} {:>12.6} {:>8.4}", b.bound, b.m_chi);
    }
}
