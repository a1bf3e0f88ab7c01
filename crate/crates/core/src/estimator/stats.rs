//! Hypothesis tests and bootstrap intervals for Monte Carlo output.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};
use thiserror::Error;

use crate::sampling::RngStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("covariance matrix is singular after dropping degenerate components")]
    SingularCovariance,
    #[error("need more samples ({n}) than dimensions ({dim})")]
    TooFewSamples { n: u64, dim: usize },
    #[error("significance level {0} outside (0, 0.5)")]
    Level(f64),
}

/// Two-sided standard normal quantile `z_{1 - level/2}`.
pub fn normal_quantile(level: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - level / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Absolute agreement required of components whose sample variance is zero.
const DEGENERATE_MATCH: f64 = 1e-10;

/// Two-sided one-sample t-test of `E = reference`.
pub fn t_test(mean: f64, var: f64, n: u64, reference: f64, level: f64) -> TestOutcome {
    if var <= 0.0 {
        let pass = (mean - reference).abs() <= DEGENERATE_MATCH;
        return TestOutcome { statistic: 0.0, p_value: if pass { 1.0 } else { 0.0 }, pass };
    }
    let t = (mean - reference) / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid degrees of freedom");
    let p_value = 2.0 * dist.cdf(-t.abs());
    TestOutcome { statistic: t, p_value, pass: p_value >= level }
}

/// Hotelling T^2 test of `E x = reference`. Components with sample variance
/// below `1e-14 * scale^2` are removed from the quadratic form and must
/// instead match the reference to 1e-10.
pub fn hotelling_test(
    mean: &[f64],
    cov: &DMatrix<f64>,
    n: u64,
    reference: &[f64],
    level: f64,
) -> Result<TestOutcome, StatsError> {
    let scale2 = (0..mean.len())
        .map(|i| cov[(i, i)].max(mean[i] * mean[i]).max(reference[i] * reference[i]))
        .fold(0.0, f64::max);
    let keep: Vec<usize> = (0..mean.len()).filter(|&i| cov[(i, i)] >= 1e-14 * scale2 && cov[(i, i)] > 0.0).collect();
    let degenerate_ok = (0..mean.len())
        .filter(|i| !keep.contains(i))
        .all(|i| (mean[i] - reference[i]).abs() <= DEGENERATE_MATCH);
    let d = keep.len();
    if d == 0 {
        let p_value = if degenerate_ok { 1.0 } else { 0.0 };
        return Ok(TestOutcome { statistic: 0.0, p_value, pass: degenerate_ok });
    }
    if n <= d as u64 {
        return Err(StatsError::TooFewSamples { n, dim: d });
    }
    let s = DMatrix::from_fn(d, d, |a, b| cov[(keep[a], keep[b])]);
    let diff = DVector::from_fn(d, |a, _| mean[keep[a]] - reference[keep[a]]);
    let chol = s.cholesky().ok_or(StatsError::SingularCovariance)?;
    let t2 = n as f64 * diff.dot(&chol.solve(&diff));
    let nf = n as f64;
    let df = d as f64;
    let f = (nf - df) / (df * (nf - 1.0)) * t2;
    let dist = FisherSnedecor::new(df, nf - df).expect("valid degrees of freedom");
    let p_value = 1.0 - dist.cdf(f);
    Ok(TestOutcome { statistic: t2, p_value, pass: degenerate_ok && p_value >= level })
}

/// Evaluates `stat` on `b` resamples (with replacement) of the index set
/// `0..n`. Resample `r` draws from stream `r` of `seed`. Each call returns
/// one value per tracked statistic.
pub fn bootstrap_replicates<S>(n: usize, b: usize, seed: u64, stat: S) -> Vec<Vec<f64>>
where
    S: Fn(&[usize]) -> Vec<f64> + Sync,
{
    (0..b)
        .into_par_iter()
        .map_init(
            || vec![0usize; n],
            |idx, r| {
                let mut rng = RngStream::new(seed, r as u64);
                for slot in idx.iter_mut() {
                    *slot = rng.random_range(0..n);
                }
                stat(idx)
            },
        )
        .collect()
}

/// Linear-interpolation sample quantile, `q` in [0, 1].
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// `[level, 1 - level]` quantiles of the bootstrap distribution of a scalar
/// statistic.
pub fn bootstrap_ci<S>(n: usize, b: usize, level: f64, seed: u64, stat: S) -> [f64; 2]
where
    S: Fn(&[usize]) -> f64 + Sync,
{
    let reps: Vec<f64> = bootstrap_replicates(n, b, seed, |idx| vec![stat(idx)]).into_iter().map(|v| v[0]).collect();
    [quantile(&reps, level), quantile(&reps, 1.0 - level)]
}

/// One-sample Kolmogorov-Smirnov test of `samples` against `cdf`, with the
/// Stephens finite-sample correction of the asymptotic distribution.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F, level: f64) -> TestOutcome {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    let p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
    TestOutcome { statistic: d, p_value, pass: p_value >= level }
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_sample(rng: &mut RngStream, n: usize) -> (f64, f64) {
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (m, v)
    }

    #[test]
    fn t_test_basics() {
        assert!(t_test(1.5, 4.0, 100, 1.5, 0.05).pass);
        assert!(!t_test(1.5, 4.0, 100, 1.5 + 10.0 * 0.2, 0.05).pass);
        assert!(t_test(2.0, 0.0, 100, 2.0, 0.05).pass);
        assert!(!t_test(2.0, 0.0, 100, 2.1, 0.05).pass);
    }

    #[test]
    fn t_test_calibration() {
        let mut rng = RngStream::new(17, 0);
        let rejections = (0..1000)
            .filter(|_| {
                let (m, v) = gaussian_sample(&mut rng, 100);
                !t_test(m, v, 100, 0.0, 0.05).pass
            })
            .count();
        let rate = rejections as f64 / 1000.0;
        assert!((rate - 0.05).abs() <= 0.02, "{rate}");
    }

    #[test]
    fn hotelling_reduces_to_squared_t() {
        let cov = DMatrix::from_element(1, 1, 2.0);
        for shift in [0.0, 0.1, 0.3] {
            let h = hotelling_test(&[1.0], &cov, 200, &[1.0 + shift], 0.05).unwrap();
            let t = t_test(1.0, 2.0, 200, 1.0 + shift, 0.05);
            assert!((h.statistic - t.statistic.powi(2)).abs() < 1e-12);
            assert!((h.p_value - t.p_value).abs() < 1e-10);
            assert_eq!(h.pass, t.pass);
        }
    }

    #[test]
    fn hotelling_drops_degenerate_components() {
        let mut cov = DMatrix::zeros(3, 3);
        cov[(0, 0)] = 1.0;
        cov[(2, 2)] = 0.5;
        assert!(hotelling_test(&[0.0, 3.0, 0.1], &cov, 50, &[0.0, 3.0, 0.1], 0.05).unwrap().pass);
        assert!(!hotelling_test(&[0.0, 3.0, 0.1], &cov, 50, &[0.0, 3.1, 0.1], 0.05).unwrap().pass);
        let mut sing = DMatrix::from_element(2, 2, 1.0);
        sing[(1, 1)] = 1.0;
        assert_eq!(hotelling_test(&[0.0, 0.0], &sing, 50, &[0.0, 0.0], 0.05), Err(StatsError::SingularCovariance));
    }

    #[test]
    fn bootstrap_constant_and_mean() {
        let ci = bootstrap_ci(50, 200, 0.05, 1, |_| 3.0);
        assert_eq!(ci, [3.0, 3.0]);
        let mut rng = RngStream::new(2, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ci = bootstrap_ci(xs.len(), 1000, 0.05, 3, |idx| idx.iter().map(|&i| xs[i]).sum::<f64>() / idx.len() as f64);
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
        let clt = normal_quantile(0.1) * sd / (xs.len() as f64).sqrt();
        let half = (ci[1] - ci[0]) / 2.0;
        assert!((half - clt).abs() < 0.2 * clt, "{half} vs {clt}");
    }

    #[test]
    fn ks_uniform() {
        // P(K > 1.3581) = 0.05
        assert!((kolmogorov_survival(1.358_098_8) - 0.05).abs() < 1e-6);
        let mut rng = RngStream::new(4, 0);
        let xs: Vec<f64> = (0..5000).map(|_| rng.uniform()).collect();
        assert!(ks_test(&xs, |x| x, 0.01).pass);
        assert!(!ks_test(&xs, |x| x * x, 0.01).pass);
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.25), 1.25);
    }
}
