//! Print E_{alpha,beta}(z) with its partial derivatives over a grid of
//! arguments, plus evaluation cost.
//!
//!     cargo run --release --example ml_table -- 0.985 0.985

use std::time::Instant;

use fracwalk::special::{ml_eval, MlQuery};

fn main() {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map_or(0.7, |s| s.parse().expect("alpha"));
    let beta: f64 = args.next().map_or(1.0, |s| s.parse().expect("beta"));
    println!("{:>8} {:>22} {:>14} {:>14} {:>14} {:>10}", "z", "value", "d_alpha", "d_beta", "d_z", "micros");
    for z in [0.5, 0.0, -0.5, -1.0, -2.0, -4.0, -6.0, -10.0, -20.0, -50.0, -100.0] {
        let start = Instant::now();
        let reps = 20;
        let mut v = None;
        for _ in 0..reps {
            v = Some(ml_eval(MlQuery::new(alpha, beta, z), true));
        }
        let us = start.elapsed().as_secs_f64() * 1e6 / reps as f64;
        match v.unwrap() {
            Ok(v) => println!("{z:>8} {:>22.15e} {:>14.6e} {:>14.6e} {:>14.6e} {us:>10.1}", v.value, v.d_alpha, v.d_beta, v.d_z),
            Err(e) => println!("{z:>8} error: {e}"),
        }
    }
}
