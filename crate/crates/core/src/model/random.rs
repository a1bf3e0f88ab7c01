use rand::Rng;
use rand_distr::StandardNormal;

use super::{FodeProblem, SparseRow};
use crate::sampling::RngStream;

/// Random diagonally dominant system with negative diagonal: off-diagonals
/// N(0,1), `a_ii = -(1 + U) * sum_{l != i} |a_il|`, `u0_i ~ U(0,1)`,
/// `T ~ U(0,1)`, `alpha_i ~ U(0.6, 1)`. Observed at the first node.
pub fn gen_random_problem(n: usize, rng: &mut RngStream) -> FodeProblem {
    assert!(n >= 2, "random systems need at least two nodes");
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let off: Vec<(usize, f64)> =
            (0..n).filter(|&j| j != i).map(|j| (j, rng.sample::<f64, _>(StandardNormal))).collect();
        let abs_sum: f64 = off.iter().map(|&(_, v)| v.abs()).sum();
        let diag = -(1.0 + rng.uniform()) * abs_sum;
        rows.push(SparseRow { diag, off });
    }
    let u0 = (0..n).map(|_| rng.uniform()).collect();
    let t_final = rng.uniform();
    let alpha = (0..n).map(|_| 0.6 + 0.4 * rng.uniform()).collect();
    FodeProblem { rows, alpha, u0, t_final, start: 0, classical_limit: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_problem, Mode};

    #[test]
    fn dominant_and_reproducible() {
        for seed in 0..50 {
            let p = gen_random_problem(5, &mut RngStream::new(seed, 0));
            for r in &p.rows {
                let s: f64 = r.off.iter().map(|&(_, v)| v.abs()).sum();
                assert!(-r.diag > s);
            }
            let chain = validate_problem(&p, Mode::Simplified).unwrap();
            assert!(chain.max_abs_chi() < 1.0);
            assert!(p.alpha.iter().all(|&a| (0.6..1.0).contains(&a)));
            assert!(p.t_final > 0.0 && p.t_final < 1.0);
        }
        let a = gen_random_problem(5, &mut RngStream::new(42, 0));
        let b = gen_random_problem(5, &mut RngStream::new(42, 0));
        assert_eq!(a, b);
    }
}
