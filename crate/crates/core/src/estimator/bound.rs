use serde::Serialize;

use crate::model::{EmbeddedChain, FodeProblem, Mode};
use crate::special::{ml, MlError};

/// Upper bound on the second moment of the path functional,
/// `max u0^2 * M_p^2 * exp(lambda T ((M_s M_chi)^2 - 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBound {
    pub m_chi: f64,
    pub m_p: f64,
    pub m_s: f64,
    pub lambda: f64,
    pub bound: f64,
}

const GRID: usize = 10_000;

/// Maximum of `f` on (0, t]: grid search followed by golden-section
/// refinement around the best grid point.
fn maximize<F: Fn(f64) -> Result<f64, MlError>>(f: F, t: f64) -> Result<f64, MlError> {
    let h = t / GRID as f64;
    let mut best = (f(t)?, GRID);
    for k in 1..GRID {
        let v = f(k as f64 * h)?;
        if v > best.0 {
            best = (v, k);
        }
    }
    let (mut lo, mut hi) = ((best.1 as f64 - 1.0) * h, ((best.1 + 1) as f64 * h).min(t));
    lo = lo.max(h * 1e-3);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut best_v = best.0;
    for _ in 0..60 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        let (f1, f2) = (f(x1)?, f(x2)?);
        best_v = best_v.max(f1).max(f2);
        if f1 > f2 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    Ok(best_v)
}

pub fn variance_bound(p: &FodeProblem, chain: &EmbeddedChain, mode: Mode) -> Result<VarianceBound, MlError> {
    let lambda = p.rows.iter().map(|r| r.diag.abs()).fold(0.0, f64::max);
    let m_chi = chain.max_abs_chi();
    let u2 = p.u0.iter().map(|u| u * u).fold(0.0, f64::max);
    let t = p.t_final;
    let (m_p, m_s) = match mode {
        Mode::Simplified => (1.0, 1.0),
        Mode::General => {
            let mut m_p: f64 = 0.0;
            let mut m_s: f64 = 0.0;
            for (i, row) in p.rows.iter().enumerate() {
                let (a, al) = (row.diag, p.alpha[i]);
                if al < 1.0 {
                    // t^(alpha-1) is unbounded at t = 0 while the
                    // exponential proposal density stays at lambda
                    m_p = f64::INFINITY;
                } else {
                    m_p = m_p.max(maximize(|s| Ok((a * (a * s).exp() / (lambda * (-lambda * s).exp())).abs()), t)?);
                }
                m_s = m_s.max(maximize(|s| Ok(ml(al, 1.0, a * s.powf(al))?.abs() * (lambda * s).exp()), t)?);
            }
            (m_p, m_s)
        }
    };
    let bound = u2 * m_p * m_p * (lambda * t * ((m_s * m_chi).powi(2) - 1.0)).exp();
    Ok(VarianceBound { m_chi, m_p, m_s, lambda, bound })
}
