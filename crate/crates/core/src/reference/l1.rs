use nalgebra::{DMatrix, DVector};

use super::ReferenceError;
use crate::model::FodeProblem;
use crate::special::gamma;

/// Uniform-step L1 discretisation settings for one set of orders.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Config {
    pub n_t: usize,
}

impl L1Config {
    pub fn new(n_t: usize) -> Self {
        L1Config { n_t }
    }
}

impl Default for L1Config {
    fn default() -> Self {
        L1Config { n_t: 1 << 12 }
    }
}

/// `w_m = (m+1)^(1-α) - m^(1-α)` for `m = 0..len`.
pub fn l1_weights(alpha: f64, len: usize) -> Vec<f64> {
    let e = 1.0 - alpha;
    (0..len).map(|m| ((m + 1) as f64).powf(e) - (m as f64).powf(e)).collect()
}

/// Solution on the uniform grid `t_k = k T / N_t`, `k = 0..=N_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// `u[k]` is the state at `t[k]`.
    pub u: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.u.last().expect("trajectory has at least the initial state")
    }

    /// CSV with header `t,u_1,...,u_n`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.u.first().map_or(0, Vec::len);
        write!(w, "t")?;
        for i in 1..=n {
            write!(w, ",u_{i}")?;
        }
        writeln!(w)?;
        for (t, u) in self.t.iter().zip(&self.u) {
            write!(w, "{t:e}")?;
            for v in u {
                write!(w, ",{v:e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Implicit L1 solve of `D^{α_i} u_i = (A u)_i` from `u(0) = u0`.
pub fn l1_solve(p: &FodeProblem, cfg: &L1Config) -> Result<Trajectory, ReferenceError> {
    let mut traj = Vec::with_capacity(cfg.n_t + 1);
    l1_dense(&p.to_dense(), &p.alpha, &p.u0, p.t_final, cfg.n_t, |u| traj.push(u.to_vec()))?;
    let dt = p.t_final / cfg.n_t as f64;
    let t = (0..=cfg.n_t).map(|k| k as f64 * dt).collect();
    Ok(Trajectory { t, u: traj })
}

/// Final state only; `observe` sees every step including `u0`.
pub(crate) fn l1_dense(
    a: &DMatrix<f64>,
    alpha: &[f64],
    u0: &[f64],
    t_final: f64,
    n_t: usize,
    mut observe: impl FnMut(&[f64]),
) -> Result<Vec<f64>, ReferenceError> {
    let n = u0.len();
    if n_t == 0 {
        return Err(ReferenceError::Config("N_t must be positive".into()));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(ReferenceError::Config(format!("final time must be positive, got {t_final}")));
    }
    for (i, &al) in alpha.iter().enumerate() {
        if !(al > 0.0 && al < 1.0) {
            return Err(ReferenceError::AlphaDomain { row: i + 1, value: al });
        }
    }
    let dt = t_final / n_t as f64;
    let c: Vec<f64> = alpha.iter().map(|&al| dt.powf(-al) / gamma(2.0 - al)).collect();
    // reversed weights so that the history sum runs forward through both arrays
    let w_rev: Vec<Vec<f64>> = alpha
        .iter()
        .map(|&al| {
            let mut w = l1_weights(al, n_t);
            w.reverse();
            w
        })
        .collect();
    let mut m = -a.clone();
    for i in 0..n {
        m[(i, i)] += c[i];
    }
    let lu = m.lu();
    if !lu.is_invertible() {
        return Err(ReferenceError::Singular);
    }
    // diffs[i][j-1] = u_i^j - u_i^{j-1}
    let mut diffs: Vec<Vec<f64>> = vec![Vec::with_capacity(n_t); n];
    let mut u = u0.to_vec();
    observe(&u);
    let mut rhs = DVector::zeros(n);
    for step in 1..=n_t {
        for i in 0..n {
            // sum_{j=1}^{step-1} w_{step-j} d_j; w_{step-j} sits at w_rev[n_t - 1 - step + j]
            let hist = &diffs[i];
            let w = &w_rev[i][n_t - step..];
            rhs[i] = c[i] * (u[i] - dot(w, hist));
        }
        let next = lu.solve(&rhs).ok_or(ReferenceError::Singular)?;
        for i in 0..n {
            diffs[i].push(next[i] - u[i]);
            u[i] = next[i];
        }
        observe(&u);
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(ReferenceError::NonFinite);
    }
    Ok(u)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().min(b.len());
    let (a, b) = (&a[..len], &b[..len]);
    let mut acc = [0.0; 4];
    let chunks = len / 4;
    for k in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * k + l] * b[4 * k + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..len {
        s += a[k] * b[k];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ml;

    fn scalar(lambda: f64, alpha: f64, t: f64) -> FodeProblem {
        FodeProblem::from_dense(&[vec![-lambda]], vec![alpha], vec![1.0], t, 0)
    }

    #[test]
    fn weights() {
        for &al in &[0.3, 0.6, 0.95] {
            let w = l1_weights(al, 50);
            assert_eq!(w[0], 1.0);
            assert!(w.windows(2).all(|p| p[1] < p[0]));
        }
    }

    #[test]
    fn zero_matrix_is_stationary() {
        let p = FodeProblem::from_dense(&[vec![0.0, 0.0], vec![0.0, 0.0]], vec![0.6, 0.8], vec![0.3, -2.0], 1.7, 0);
        let tr = l1_solve(&p, &L1Config::new(64)).unwrap();
        for u in &tr.u {
            assert_eq!(u, &vec![0.3, -2.0]);
        }
    }

    #[test]
    fn scalar_relaxation() {
        let p = scalar(1.0, 0.7, 1.0);
        let got = l1_solve(&p, &L1Config::new(1 << 14)).unwrap().final_state()[0];
        let want = ml(0.7, 1.0, -1.0).unwrap();
        assert!((got - want).abs() < 1e-4 * want, "{got} vs {want}");
    }

    #[test]
    fn richardson_ratio() {
        let p = scalar(1.0, 0.7, 1.0);
        let u: Vec<f64> = [1 << 9, 1 << 10, 1 << 11]
            .iter()
            .map(|&nt| l1_solve(&p, &L1Config::new(nt)).unwrap().final_state()[0])
            .collect();
        let ratio = (u[0] - u[1]).abs() / (u[1] - u[2]).abs();
        assert!((1.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            l1_solve(&scalar(1.0, 1.0, 1.0), &L1Config::new(8)),
            Err(ReferenceError::AlphaDomain { row: 1, .. })
        ));
        // c - a = 0 makes the implicit step singular
        let dt: f64 = 0.5;
        let c = dt.powf(-0.5) / gamma(1.5);
        assert!(matches!(l1_solve(&scalar(-c, 0.5, 1.0), &L1Config::new(2)), Err(ReferenceError::Singular)));
    }

    #[test]
    fn csv_layout() {
        let p = scalar(1.0, 0.5, 1.0);
        let tr = l1_solve(&p, &L1Config::new(4)).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,u_1");
        assert_eq!(lines.len(), 6);
    }
}
