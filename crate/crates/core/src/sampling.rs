//! Random variates for the walk: Mittag-Leffler and exponential sojourn
//! times, categorical jumps, and per-walk counter-based random streams.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("sojourn law out of domain: {0}")]
    Domain(String),
    #[error("row has no successors to jump to")]
    NoSuccessor,
}

/// Independent random stream identified by `(master_seed, stream_index)`.
///
/// Walk `k` of a run always uses stream `k`, so its draws do not depend on
/// which worker executes it or in what order.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    master_seed: u64,
    stream_index: u64,
    draws: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        RngStream { rng, master_seed, stream_index, draws: 0 }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Number of 32/64-bit words consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.sample(Open01)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.draws += 1;
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.draws += dst.len().div_ceil(8) as u64;
        self.rng.fill_bytes(dst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    MittagLeffler,
    Exponential,
}

/// Holding-time law with survival `E_alpha(-rate t^alpha)` (Mittag-Leffler)
/// or `exp(-rate t)` (exponential).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SojournLaw {
    pub alpha: f64,
    pub rate: f64,
    pub kind: LawKind,
}

impl SojournLaw {
    pub fn mittag_leffler(alpha: f64, rate: f64) -> Self {
        SojournLaw { alpha, rate, kind: LawKind::MittagLeffler }
    }

    pub fn exponential(rate: f64) -> Self {
        SojournLaw { alpha: 1.0, rate, kind: LawKind::Exponential }
    }

    fn check(&self) -> Result<(), SamplingError> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(SamplingError::Domain(format!("rate must be positive, got {}", self.rate)));
        }
        if self.kind == LawKind::MittagLeffler && !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(SamplingError::Domain(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Draws one holding time. Mittag-Leffler laws consume two uniforms, the
/// exponential law one.
pub fn sample_sojourn(law: &SojournLaw, rng: &mut RngStream) -> Result<f64, SamplingError> {
    law.check()?;
    match law.kind {
        LawKind::Exponential => Ok(-rng.uniform().ln() / law.rate),
        LawKind::MittagLeffler => {
            let u = rng.uniform();
            let v = rng.uniform();
            let a = law.alpha;
            let expo = -u.ln();
            if a == 1.0 {
                return Ok(expo / law.rate);
            }
            // sin(a pi)/tan(a pi v) - cos(a pi), written as a ratio of sines
            // so that it stays positive in floating point
            let ratio = (a * PI * (1.0 - v)).sin() / (a * PI * v).sin();
            Ok(expo / law.rate.powf(1.0 / a) * ratio.powf(1.0 / a))
        }
    }
}

/// Picks an index from a cumulative probability row by binary search.
pub fn sample_jump(row_cumprobs: &[f64], rng: &mut RngStream) -> Result<usize, SamplingError> {
    if row_cumprobs.is_empty() {
        return Err(SamplingError::NoSuccessor);
    }
    let u = rng.uniform();
    let k = row_cumprobs.partition_point(|&c| c <= u);
    Ok(k.min(row_cumprobs.len() - 1))
}

/// Distribution function `1 - E_alpha(-rate t^alpha)` tabulated on a
/// log-spaced grid and interpolated linearly in `ln t`.
#[derive(Debug, Clone)]
pub struct SojournCdfTable {
    ln_t0: f64,
    step: f64,
    values: Vec<f64>,
}

impl SojournCdfTable {
    /// `points` nodes spanning `scale * [1e-12, 1e12]`, `scale = rate^(-1/alpha)`.
    pub fn new(alpha: f64, rate: f64, points: usize) -> Result<Self, crate::special::MlError> {
        let scale = rate.powf(-1.0 / alpha);
        let ln_t0 = (1e-12 * scale).ln();
        let step = (1e24f64).ln() / (points - 1) as f64;
        let values = (0..points)
            .map(|k| {
                let t = (ln_t0 + k as f64 * step).exp();
                crate::special::ml(alpha, 1.0, -rate * t.powf(alpha)).map(|e| 1.0 - e)
            })
            .collect::<Result<_, _>>()?;
        Ok(SojournCdfTable { ln_t0, step, values })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let h = (t.ln() - self.ln_t0) / self.step;
        let last = self.values.len() - 1;
        if h <= 0.0 {
            return self.values[0] * (t.ln() - self.ln_t0).exp().min(1.0);
        }
        if h >= last as f64 {
            return self.values[last];
        }
        let k = h as usize;
        let w = h - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_reproduce_and_differ() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let mut c = RngStream::new(7, 4);
        let xa: Vec<f64> = (0..16).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..16).map(|_| b.uniform()).collect();
        let xc: Vec<f64> = (0..16).map(|_| c.uniform()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_eq!(a.draws(), 16);
    }

    #[test]
    fn draw_budget_per_law() {
        let mut rng = RngStream::new(1, 0);
        sample_sojourn(&SojournLaw::mittag_leffler(0.6, 2.0), &mut rng).unwrap();
        assert_eq!(rng.draws(), 2);
        sample_sojourn(&SojournLaw::mittag_leffler(1.0, 2.0), &mut rng).unwrap();
        assert_eq!(rng.draws(), 4);
        sample_sojourn(&SojournLaw::exponential(2.0), &mut rng).unwrap();
        assert_eq!(rng.draws(), 5);
    }

    #[test]
    fn rejects_bad_laws() {
        let mut rng = RngStream::new(1, 0);
        assert!(sample_sojourn(&SojournLaw::mittag_leffler(0.5, 0.0), &mut rng).is_err());
        assert!(sample_sojourn(&SojournLaw::mittag_leffler(1.5, 1.0), &mut rng).is_err());
        assert!(sample_sojourn(&SojournLaw::exponential(-1.0), &mut rng).is_err());
        assert_eq!(sample_jump(&[], &mut rng), Err(SamplingError::NoSuccessor));
    }

    #[test]
    fn exponential_mean() {
        let mut rng = RngStream::new(11, 0);
        let n = 1_000_000;
        let law = SojournLaw::mittag_leffler(1.0, 2.0);
        let mean = (0..n).map(|_| sample_sojourn(&law, &mut rng).unwrap()).sum::<f64>() / n as f64;
        // Exp(2) has standard deviation 0.5
        assert!((mean - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn jump_frequencies() {
        let mut rng = RngStream::new(5, 0);
        assert_eq!(sample_jump(&[1.0], &mut rng).unwrap(), 0);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| sample_jump(&[0.25, 1.0], &mut rng).unwrap() == 0).count();
        let p = hits as f64 / n as f64;
        assert!((p - 0.25).abs() < 4.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }
}
