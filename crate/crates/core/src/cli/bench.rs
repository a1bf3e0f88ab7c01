//! Jump-count scaling of the walk on Dirichlet Laplacians, with wall time
//! per walk reported for information only.

use std::time::Instant;

use serde::Serialize;

use crate::estimator::map_walks;
use crate::model::{laplacian_problem, validate_problem, Mode};
use crate::walker::WalkConfig;

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub walks: u64,
    pub seed: u64,
    pub workers: usize,
    pub times: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Grid sizes for the n_x sweep (at `alpha = 1`, time `sweep_t`).
    pub n_xs: Vec<usize>,
    pub dims: Vec<usize>,
    /// Grid size used by the time and dimension sweeps.
    pub n_x: usize,
    pub sweep_t: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            walks: 10_000,
            seed: 1,
            workers: 1,
            times: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0],
            alphas: vec![0.5, 0.75, 1.0],
            n_xs: vec![8, 16, 32, 64],
            dims: vec![1, 2, 3, 4],
            n_x: 8,
            sweep_t: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchPoint {
    pub dim: usize,
    pub n_x: usize,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub mean_jumps: f64,
    pub micros_per_walk: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeSweep {
    pub alpha: f64,
    pub points: Vec<BenchPoint>,
    /// Fit of log E(nu_T) against log T.
    pub fit: Fit,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub walks: u64,
    pub seed: u64,
    pub time_sweeps: Vec<TimeSweep>,
    pub grid_sweep: Vec<BenchPoint>,
    /// Fit of log E(nu_T) against log n_x.
    pub grid_fit: Fit,
    pub dim_sweep: Vec<BenchPoint>,
    /// Linear fit of E(nu_T) against d.
    pub dim_fit: Fit,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Fit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Fit { slope, intercept, r2 }
}

fn log_fit(x: &[f64], y: &[f64]) -> Fit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Mean jump count of `walks` solution-only walks on one Laplacian.
pub fn measure(cfg: &BenchConfig, dim: usize, n_x: usize, alpha: f64, t_final: f64) -> Result<BenchPoint, CliError> {
    let p = laplacian_problem(dim, n_x, alpha, t_final);
    let chain = validate_problem(&p, Mode::Simplified)?;
    let walk = WalkConfig::solution_only(Mode::Simplified);
    let start = Instant::now();
    let jumps = map_walks(&p, &chain, &walk, cfg.seed, cfg.walks, cfg.workers, |o| o.jumps)?;
    let micros = start.elapsed().as_secs_f64() * 1e6 / cfg.walks as f64;
    let mean_jumps = jumps.iter().map(|&j| j as f64).sum::<f64>() / cfg.walks as f64;
    Ok(BenchPoint { dim, n_x, alpha, t_final, mean_jumps, micros_per_walk: micros })
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, CliError> {
    let mut time_sweeps = Vec::new();
    for &alpha in &cfg.alphas {
        let points = cfg
            .times
            .iter()
            .map(|&t| measure(cfg, 1, cfg.n_x, alpha, t))
            .collect::<Result<Vec<_>, _>>()?;
        let y: Vec<f64> = points.iter().map(|p| p.mean_jumps).collect();
        time_sweeps.push(TimeSweep { alpha, fit: log_fit(&cfg.times, &y), points });
    }
    let grid_sweep =
        cfg.n_xs.iter().map(|&nx| measure(cfg, 1, nx, 1.0, cfg.sweep_t)).collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = cfg.n_xs.iter().map(|&v| v as f64).collect();
    let grid_fit = log_fit(&xs, &grid_sweep.iter().map(|p| p.mean_jumps).collect::<Vec<_>>());
    let dim_sweep =
        cfg.dims.iter().map(|&d| measure(cfg, d, cfg.n_x, 1.0, cfg.sweep_t)).collect::<Result<Vec<_>, _>>()?;
    let ds: Vec<f64> = cfg.dims.iter().map(|&v| v as f64).collect();
    let dim_fit = linear_fit(&ds, &dim_sweep.iter().map(|p| p.mean_jumps).collect::<Vec<_>>());
    Ok(BenchReport { walks: cfg.walks, seed: cfg.seed, time_sweeps, grid_sweep, grid_fit, dim_sweep, dim_fit })
}
