use rayon::prelude::*;

use super::l1::{l1_dense, L1Config};
use super::ReferenceError;
use crate::model::FodeProblem;

/// Which parameter families to difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FdTargets {
    pub a: bool,
    pub alpha: bool,
    pub u0: bool,
    pub t: bool,
}

impl FdTargets {
    pub fn all() -> Self {
        FdTargets { a: true, alpha: true, u0: true, t: true }
    }
}

/// Central-difference sensitivities of the whole final state `u(T)`.
/// Each derivative is stored as a vector over observed nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FdTable {
    pub n: usize,
    pub solution: Vec<f64>,
    /// Indexed `j * n + k` for `∂u/∂a_jk`.
    pub d_a: Option<Vec<Vec<f64>>>,
    pub d_alpha: Option<Vec<Vec<f64>>>,
    pub d_u0: Option<Vec<Vec<f64>>>,
    pub d_t: Option<Vec<f64>>,
    pub solves: usize,
}

impl FdTable {
    pub fn d_a(&self, node: usize, j: usize, k: usize) -> Option<f64> {
        self.d_a.as_ref().map(|d| d[j * self.n + k][node])
    }

    pub fn d_alpha(&self, node: usize, j: usize) -> Option<f64> {
        self.d_alpha.as_ref().map(|d| d[j][node])
    }

    pub fn d_u0(&self, node: usize, j: usize) -> Option<f64> {
        self.d_u0.as_ref().map(|d| d[j][node])
    }

    pub fn d_t(&self, node: usize) -> Option<f64> {
        self.d_t.as_ref().map(|d| d[node])
    }
}

/// Step for parameter value `theta`: `sqrt(eps) * max(1, |theta|)`.
pub fn fd_step(theta: f64) -> f64 {
    f64::EPSILON.sqrt() * theta.abs().max(1.0)
}

#[derive(Debug, Clone, Copy)]
enum Param {
    A(usize, usize),
    Alpha(usize),
    U0(usize),
    T,
}

/// Differences every requested parameter through the L1 solver. The time
/// derivative keeps `N_t` fixed, so it differentiates the discrete solution
/// with a step that moves with `T`.
pub fn fd_sensitivities(p: &FodeProblem, cfg: &L1Config, targets: FdTargets) -> Result<FdTable, ReferenceError> {
    fd_sensitivities_scaled(p, cfg, targets, 1.0)
}

/// As [`fd_sensitivities`] with every step multiplied by `scale`.
pub fn fd_sensitivities_scaled(
    p: &FodeProblem,
    cfg: &L1Config,
    targets: FdTargets,
    scale: f64,
) -> Result<FdTable, ReferenceError> {
    let n = p.n();
    let a = p.to_dense();
    let mut params = Vec::new();
    if targets.a {
        for j in 0..n {
            for k in 0..n {
                params.push(Param::A(j, k));
            }
        }
    }
    if targets.alpha {
        params.extend((0..n).map(Param::Alpha));
    }
    if targets.u0 {
        params.extend((0..n).map(Param::U0));
    }
    if targets.t {
        params.push(Param::T);
    }

    let solve_with = |param: Param, sign: f64| -> Result<Vec<f64>, ReferenceError> {
        let mut a = a.clone();
        let mut alpha = p.alpha.clone();
        let mut u0 = p.u0.clone();
        let mut t = p.t_final;
        let h = match param {
            Param::A(j, k) => {
                let h = scale * fd_step(a[(j, k)]);
                a[(j, k)] += sign * h;
                h
            }
            Param::Alpha(j) => {
                let h = scale * fd_step(alpha[j]);
                alpha[j] += sign * h;
                h
            }
            Param::U0(j) => {
                let h = scale * fd_step(u0[j]);
                u0[j] += sign * h;
                h
            }
            Param::T => {
                let h = scale * fd_step(t);
                t += sign * h;
                h
            }
        };
        let u = l1_dense(&a, &alpha, &u0, t, cfg.n_t, |_| ())?;
        Ok(u.into_iter().map(|v| sign * v / (2.0 * h)).collect())
    };

    let base = l1_dense(&a, &p.alpha, &p.u0, p.t_final, cfg.n_t, |_| ())?;
    let halves: Vec<Vec<f64>> = params
        .par_iter()
        .flat_map_iter(|&q| [(q, 1.0), (q, -1.0)])
        .map(|(q, sign)| solve_with(q, sign))
        .collect::<Result<_, _>>()?;
    let mut diffs = halves.chunks(2).map(|pair| pair[0].iter().zip(&pair[1]).map(|(x, y)| x + y).collect::<Vec<f64>>());

    let mut take = |count: usize| -> Vec<Vec<f64>> { (&mut diffs).take(count).collect() };
    let d_a = targets.a.then(|| take(n * n));
    let d_alpha = targets.alpha.then(|| take(n));
    let d_u0 = targets.u0.then(|| take(n));
    let d_t = targets.t.then(|| take(1).remove(0));
    Ok(FdTable { n, solution: base, d_a, d_alpha, d_u0, d_t, solves: 1 + 2 * params.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gen_random_problem;
    use crate::reference::l1_solve;
    use crate::sampling::RngStream;
    use crate::special::ml;

    #[test]
    fn solve_count_and_linearity_in_u0() {
        let p = gen_random_problem(3, &mut RngStream::new(3, 0));
        let cfg = L1Config::new(256);
        let fd = fd_sensitivities(&p, &cfg, FdTargets::all()).unwrap();
        assert_eq!(fd.solves, 2 * 9 + 4 * 3 + 3);
        for j in 0..3 {
            let mut q = p.clone();
            q.u0 = vec![0.0; 3];
            q.u0[j] = 1.0;
            let col = l1_solve(&q, &cfg).unwrap();
            for i in 0..3 {
                let want = col.final_state()[i];
                let got = fd.d_u0(i, j).unwrap();
                assert!((got - want).abs() <= 1e-6 * want.abs().max(1e-3), "{i} {j}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn scalar_time_derivative() {
        let (lambda, alpha, t) = (1.3, 0.75, 0.8);
        let p = FodeProblem::from_dense(&[vec![-lambda]], vec![alpha], vec![1.0], t, 0);
        let fd = fd_sensitivities(&p, &L1Config::new(1 << 13), FdTargets { a: false, alpha: false, u0: false, t: true })
            .unwrap();
        let want = -lambda * t.powf(alpha - 1.0) * ml(alpha, alpha, -lambda * t.powf(alpha)).unwrap();
        let got = fd.d_t(0).unwrap();
        assert!((got - want).abs() < 1e-3 * want.abs(), "{got} vs {want}");
        assert_eq!(fd.solves, 3);
    }

    #[test]
    fn central_stencil_is_second_order() {
        // steps large enough that truncation dominates roundoff
        let p = gen_random_problem(2, &mut RngStream::new(8, 0));
        let cfg = L1Config::new(128);
        let only_alpha = FdTargets { a: false, alpha: true, u0: false, t: false };
        let d = |s: f64| fd_sensitivities_scaled(&p, &cfg, only_alpha, s).unwrap().d_alpha(0, 0).unwrap();
        let (d1, d2, d4) = (d(2e5), d(4e5), d(8e5));
        let ratio = (d4 - d2) / (d2 - d1);
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }
}
