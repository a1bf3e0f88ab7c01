use super::{FodeProblem, SparseRow};

/// `A = -L` for the Dirichlet Laplacian on the unit cube in `dim`
/// dimensions with `n_x - 1` interior points per axis. Every row has the
/// same diagonal `-2 dim n_x^2` and the same exponent, so the jump count is
/// a fractional Poisson process. Starts at the centre node with `u0 = 1`.
pub fn laplacian_problem(dim: usize, n_x: usize, alpha: f64, t_final: f64) -> FodeProblem {
    assert!(dim >= 1 && n_x >= 2);
    let m = n_x - 1;
    let n = m.pow(dim as u32);
    let s = (n_x * n_x) as f64;
    let mut rows = Vec::with_capacity(n);
    for idx in 0..n {
        let mut off = Vec::new();
        let mut stride = 1;
        for _ in 0..dim {
            let c = (idx / stride) % m;
            if c > 0 {
                off.push((idx - stride, s));
            }
            if c + 1 < m {
                off.push((idx + stride, s));
            }
            stride *= m;
        }
        off.sort_by_key(|&(j, _)| j);
        rows.push(SparseRow { diag: -2.0 * dim as f64 * s, off });
    }
    let centre = (0..dim).map(|k| (m / 2) * m.pow(k as u32)).sum();
    FodeProblem {
        rows,
        alpha: vec![alpha; n],
        u0: vec![1.0; n],
        t_final,
        start: centre,
        classical_limit: alpha == 1.0,
    }
}
