use std::f64::consts::PI;

use super::{FodeProblem, ModelError, SparseRow};

/// Time-fractional heat equation on (0, 1) with a Robin condition
/// `b1 u + b2 u_x = 0` at x = 0 and a Neumann condition at x = 1,
/// discretized on `x_i = i/n_x`, `i = 1..n_x-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinSpec {
    pub n_x: usize,
    /// Diffusivity at the interior grid points (length `n_x - 1`).
    pub kappa: Vec<f64>,
    pub b1: f64,
    pub b2: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Scalar parameter of the exponent profile g(x; alpha).
    pub alpha_param: f64,
}

impl RobinSpec {
    /// Unit diffusivity with `b1 = 1`, `b2 = 1.1`; at `n_x = 20` the corner
    /// entry of A is -380.952...
    pub fn new(n_x: usize) -> Self {
        RobinSpec {
            n_x,
            kappa: vec![1.0; n_x.saturating_sub(1)],
            b1: 1.0,
            b2: 1.1,
            mu: 0.1,
            sigma: 0.025,
            alpha_param: 0.7,
        }
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_x as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (1..self.n_x).map(|i| i as f64 * self.dx()).collect()
    }

    /// Exponent profile `alpha (sin(pi x) + 1)/4 + 1/2`.
    pub fn g(&self, x: f64) -> f64 {
        self.alpha_param * ((PI * x).sin() + 1.0) / 4.0 + 0.5
    }

    /// Corner entry a_11 of A as a function of the Robin coefficients.
    pub fn corner(&self) -> Result<f64, ModelError> {
        let dx = self.dx();
        let den = self.b1 * dx - self.b2;
        if den == 0.0 {
            return Err(ModelError::RobinDenominatorZero);
        }
        Ok(-self.kappa[0] / (dx * dx) * (self.b2 / den + 2.0))
    }
}

pub fn build_robin_problem(spec: &RobinSpec, t_final: f64) -> Result<FodeProblem, ModelError> {
    let n = spec.n_x.checked_sub(1).filter(|&n| n >= 2).ok_or_else(|| {
        ModelError::Malformed(format!("Robin grid needs n_x >= 3, got {}", spec.n_x))
    })?;
    if spec.kappa.len() != n {
        return Err(ModelError::Malformed(format!("expected {n} diffusivity samples, got {}", spec.kappa.len())));
    }
    let dx = spec.dx();
    let h2 = dx * dx;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let s = spec.kappa[i] / h2;
        let row = if i == 0 {
            SparseRow { diag: spec.corner()?, off: vec![(1, s)] }
        } else if i == n - 1 {
            SparseRow { diag: -s, off: vec![(i - 1, s)] }
        } else {
            SparseRow { diag: -2.0 * s, off: vec![(i - 1, s), (i + 1, s)] }
        };
        rows.push(row);
    }
    let x = spec.grid();
    let pulse: Vec<f64> =
        x.iter().map(|&xi| (-(xi - spec.mu).powi(2) / (2.0 * spec.sigma * spec.sigma)).exp()).collect();
    let c = pulse.iter().copied().fold(0.0, f64::max);
    Ok(FodeProblem {
        rows,
        alpha: x.iter().map(|&xi| spec.g(xi)).collect(),
        u0: pulse.iter().map(|v| v / c).collect(),
        t_final,
        start: 0,
        classical_limit: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinGradients {
    pub d_b1: f64,
    pub d_b2: f64,
    pub d_alpha: f64,
}

/// Pushes gradients with respect to a_11 and the per-node exponents through
/// the Robin corner formula and the exponent profile.
pub fn chain_rule_robin(grad_a11: f64, grad_alpha_vec: &[f64], spec: &RobinSpec) -> RobinGradients {
    let dx = spec.dx();
    let den = spec.b1 * dx - spec.b2;
    let k = spec.kappa[0] / (dx * dx);
    let da_db1 = k * spec.b2 * dx / (den * den);
    let da_db2 = -k * spec.b1 * dx / (den * den);
    let d_alpha = spec
        .grid()
        .iter()
        .zip(grad_alpha_vec)
        .map(|(&x, &g)| g * ((PI * x).sin() + 1.0) / 4.0)
        .sum();
    RobinGradients { d_b1: grad_a11 * da_db1, d_b2: grad_a11 * da_db2, d_alpha }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n_x: usize, b1: f64, b2: f64) -> RobinSpec {
        RobinSpec { b1, b2, ..RobinSpec::new(n_x) }
    }

    #[test]
    fn corner_entries() {
        let p = build_robin_problem(&spec(4, 1.0, 0.0), 1.0).unwrap();
        assert_eq!(p.rows[0].diag, -32.0);
        // pure Neumann limit
        let p = build_robin_problem(&spec(4, 0.0, 1.0), 1.0).unwrap();
        assert_eq!(p.rows[0].diag, -16.0);
        let a11 = RobinSpec::new(20).corner().unwrap();
        assert!((a11 + 380.952_380_952).abs() < 1e-6);
        let bad = spec(4, 4.0, 1.0);
        assert_eq!(build_robin_problem(&bad, 1.0), Err(ModelError::RobinDenominatorZero));
    }

    #[test]
    fn interior_rows_conserve() {
        let p = build_robin_problem(&RobinSpec::new(10), 1.0).unwrap();
        for r in &p.rows[1..] {
            let s: f64 = r.diag + r.off.iter().map(|&(_, v)| v).sum::<f64>();
            assert_eq!(s, 0.0);
        }
        assert_eq!(p.n(), 9);
        assert_eq!(p.u0.iter().copied().fold(0.0, f64::max), 1.0);
    }

    #[test]
    fn exponent_profile() {
        let s = RobinSpec::new(2 * 5);
        assert!((s.g(0.5) - 0.85).abs() < 1e-15);
        let p = build_robin_problem(&s, 1.0).unwrap();
        assert!(p.alpha.iter().all(|&a| a > 0.0 && a < 1.0));
    }

    #[test]
    fn chain_rule_matches_corner_differences() {
        let s = spec(4, 1.0, 0.0);
        let g = chain_rule_robin(1.0, &[0.0; 3], &s);
        assert!((g.d_b2 + 64.0).abs() < 1e-12);
        assert_eq!(g.d_alpha, 0.0);
        let h = 1e-6;
        let fd = |f: &dyn Fn(f64) -> RobinSpec| {
            (f(h).corner().unwrap() - f(-h).corner().unwrap()) / (2.0 * h)
        };
        let s = RobinSpec::new(20);
        let g = chain_rule_robin(1.0, &vec![0.0; 19], &s);
        let fd_b1 = fd(&|d| RobinSpec { b1: s.b1 + d, ..s.clone() });
        let fd_b2 = fd(&|d| RobinSpec { b2: s.b2 + d, ..s.clone() });
        assert!((g.d_b1 - fd_b1).abs() < 1e-6 * fd_b1.abs());
        assert!((g.d_b2 - fd_b2).abs() < 1e-6 * fd_b2.abs());
        let mut unit = vec![0.0; 19];
        unit[9] = 1.0;
        // x_10 = 0.5
        assert!((chain_rule_robin(0.0, &unit, &s).d_alpha - 0.5).abs() < 1e-15);
    }
}
