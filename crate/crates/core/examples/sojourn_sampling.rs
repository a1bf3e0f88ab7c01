//! Draw Mittag-Leffler sojourn times and compare their empirical CDF with
//! 1 - E_alpha(-lambda t^alpha).
//!
//!     cargo run --release --example sojourn_sampling -- [alpha] [rate]

use fracwalk::estimator::ks_test;
use fracwalk::sampling::{sample_sojourn, RngStream, SojournCdfTable, SojournLaw};

fn main() {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map_or(0.7, |s| s.parse().expect("alpha"));
    let rate: f64 = args.next().map_or(1.0, |s| s.parse().expect("rate"));
    let law = SojournLaw::mittag_leffler(alpha, rate);
    let mut rng = RngStream::new(1, 0);
    let n = 100_000;
    let mut xs: Vec<f64> = (0..n).map(|_| sample_sojourn(&law, &mut rng).unwrap()).collect();
    let table = SojournCdfTable::new(alpha, rate, 4000).unwrap();
    xs.sort_by(f64::total_cmp);
    println!("{:>12} {:>10} {:>10}", "t", "empirical", "exact");
    for q in [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
        let t = xs[(q * n as f64) as usize];
        println!("{t:>12.4e} {q:>10.3} {:>10.4}", table.cdf(t));
    }
    let ks = ks_test(&xs, |t| table.cdf(t), 0.01);
    println!("KS D = {:.5}, p = {:.3}", ks.statistic, ks.p_value);
}
