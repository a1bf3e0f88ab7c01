//! Special functions: the two-parameter Mittag-Leffler function on the real
//! line, its parameter derivatives, and the gamma-family helpers it needs.

pub mod ml;
pub mod quadrature;

pub use ml::{
    ml, ml_eval, ml_log_deriv_alpha, ml_log_deriv_rate, ml_log_derivs, LogDerivs, MlError,
    MlQuery, MlValue, SojournKind,
};

/// Gamma function (Lanczos, via `statrs`).
#[inline]
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

#[inline]
pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// 1/Γ(x), defined as 0 at the poles x = 0, -1, -2, ...
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}
