//! Scalar relaxation D^alpha u = -lambda u: walk estimates of u(T) and
//! du/dT against E_alpha(-lambda T^alpha) and its time derivative.
//!
//!     cargo run --release --example scalar_relaxation -- [alpha] [walks]

use fracwalk::estimator::{estimate, EstimateConfig};
use fracwalk::model::FodeProblem;
use fracwalk::special::ml;

fn main() {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map_or(0.7, |s| s.parse().expect("alpha"));
    let walks: u64 = args.next().map_or(1_000_000, |s| s.parse().expect("walks"));
    let (lambda, u0) = (1.0, 1.0);
    println!("{:>5} {:>12} {:>12} {:>10} {:>12} {:>12} {:>10}", "T", "u exact", "u mc", "se", "dT exact", "dT mc", "se");
    for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let p = FodeProblem::from_dense(&[vec![-lambda]], vec![alpha], vec![u0], t, 0);
        let r = estimate(&p, &EstimateConfig::new(walks, 1)).expect("estimate");
        let z = -lambda * f64::powf(t, alpha);
        let u = ml(alpha, 1.0, z).unwrap() * u0;
        let dt = -lambda * f64::powf(t, alpha - 1.0) * ml(alpha, alpha, z).unwrap() * u0;
        let g = r.grad_t.unwrap();
        let n = walks as f64;
        println!(
            "{t:>5} {u:>12.6} {:>12.6} {:>10.2e} {dt:>12.6} {:>12.6} {:>10.2e}",
            r.solution.mean,
            (r.solution.var / n).sqrt(),
            g.mean,
            (g.var / n).sqrt()
        );
    }
}
