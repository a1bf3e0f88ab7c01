//! Robin-boundary heat problem: quadratic loss in the exponent parameter and
//! in the corner entry a_11, Monte Carlo with bootstrap intervals against
//! the L1 reference.

use std::f64::consts::PI;

use serde::Serialize;

use crate::estimator::{bootstrap_replicates, map_walks, quantile};
use crate::model::{build_robin_problem, chain_rule_robin, validate_problem, FodeProblem, Mode, RobinSpec};
use crate::reference::{fd_step, l1_solve, L1Config};
use crate::walker::WalkConfig;

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RobinConfig {
    pub n_x: usize,
    pub t_final: f64,
    pub alpha0: f64,
    pub alphas: Vec<f64>,
    /// Offsets added to the constructed corner entry.
    pub a11_offsets: Vec<f64>,
    pub walks: u64,
    pub bootstrap: usize,
    pub seed: u64,
    pub workers: usize,
    pub level: f64,
    pub n_t: usize,
}

impl Default for RobinConfig {
    fn default() -> Self {
        RobinConfig {
            n_x: 20,
            t_final: 0.01,
            alpha0: 0.7,
            alphas: (4..=9).map(|i| i as f64 / 10.0).collect(),
            a11_offsets: (-3..=2).map(|i| 5.0 * i as f64).collect(),
            walks: 1_000_000,
            bootstrap: 5000,
            seed: 1,
            workers: 1,
            level: 0.05,
            n_t: 1 << 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepQuantity {
    LossAlpha,
    DlossAlpha,
    LossA11,
    DlossA11,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub quantity: SweepQuantity,
    pub theta: f64,
    pub deterministic: f64,
    pub stochastic: f64,
    pub ci: [f64; 2],
    pub overlap: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobinReport {
    pub n_x: usize,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub a11_0: f64,
    pub alpha0: f64,
    pub walks: u64,
    pub bootstrap: usize,
    pub seed: u64,
    pub level: f64,
    pub n_t: usize,
    /// Monte Carlo gradient of u_1(T) at the true parameters.
    pub d_b1: f64,
    pub d_b2: f64,
    pub d_alpha: f64,
    pub points: Vec<SweepPoint>,
    pub overlaps: usize,
}

/// A sweep parameter value together with its problem.
struct Case {
    quantity: SweepQuantity,
    theta: f64,
    problem: FodeProblem,
}

fn robin_at(cfg: &RobinConfig, alpha: f64) -> Result<(RobinSpec, FodeProblem), CliError> {
    let mut spec = RobinSpec::new(cfg.n_x);
    spec.alpha_param = alpha;
    let p = build_robin_problem(&spec, cfg.t_final)?;
    Ok((spec, p))
}

fn with_a11(p: &FodeProblem, a11: f64) -> FodeProblem {
    let mut q = p.clone();
    q.set_entry(0, 0, a11);
    q
}

/// u_1(T) and its central difference in the sweep parameter, both from L1.
fn deterministic(cfg: &RobinConfig, case: &Case, l1: &L1Config) -> Result<(f64, f64), CliError> {
    let u1 = |p: &FodeProblem| -> Result<f64, CliError> { Ok(l1_solve(p, l1)?.final_state()[0]) };
    let u = u1(&case.problem)?;
    let h = fd_step(case.theta);
    let (plus, minus) = match case.quantity {
        SweepQuantity::LossAlpha => (robin_at(cfg, case.theta + h)?.1, robin_at(cfg, case.theta - h)?.1),
        _ => (with_a11(&case.problem, case.theta + h), with_a11(&case.problem, case.theta - h)),
    };
    Ok((u, (u1(&plus)? - u1(&minus)?) / (2.0 * h)))
}

pub fn run_robin(cfg: &RobinConfig, mut progress: impl FnMut(&str)) -> Result<RobinReport, CliError> {
    let (spec0, base) = robin_at(cfg, cfg.alpha0)?;
    let a11_0 = base.entry(0, 0);
    let mut cases = Vec::new();
    for &a in &cfg.alphas {
        cases.push(Case { quantity: SweepQuantity::LossAlpha, theta: a, problem: robin_at(cfg, a)?.1 });
    }
    for &d in &cfg.a11_offsets {
        cases.push(Case { quantity: SweepQuantity::LossA11, theta: a11_0 + d, problem: with_a11(&base, a11_0 + d) });
    }

    let weights: Vec<f64> = spec0.grid().iter().map(|&x| ((PI * x).sin() + 1.0) / 4.0).collect();
    let walk = WalkConfig::simplified();
    let n = cfg.walks as usize;
    // per case: walk scores J and the per-walk derivative in the case's parameter
    let mut j_cols: Vec<Vec<f64>> = Vec::new();
    let mut d_cols: Vec<Vec<f64>> = Vec::new();
    // the true-parameter problem appears in both sweeps; simulate it once
    let mut base_da11: Option<Vec<f64>> = None;
    for case in &cases {
        if case.quantity == SweepQuantity::LossA11 && case.problem == base {
            if let Some(d) = base_da11.take() {
                let at = cases.iter().position(|c| c.problem == base).expect("base case present");
                j_cols.push(j_cols[at].clone());
                d_cols.push(d);
                continue;
            }
        }
        progress(&format!("{:?} theta={:.4}: {} walks", case.quantity, case.theta, cfg.walks));
        let chain = validate_problem(&case.problem, Mode::Simplified)?;
        let triples = map_walks(&case.problem, &chain, &walk, cfg.seed, cfg.walks, cfg.workers, |o| {
            let d_alpha: f64 = o.grad_alpha().map(|(i, g)| g * weights[i]).sum();
            let d_a11 = o.grad_a().find(|&(e, _)| e == (0, 0)).map_or(0.0, |(_, g)| g);
            (o.j, d_alpha, d_a11)
        })?;
        j_cols.push(triples.iter().map(|t| t.0).collect());
        match case.quantity {
            SweepQuantity::LossAlpha => {
                d_cols.push(triples.iter().map(|t| t.1).collect());
                if case.problem == base {
                    base_da11 = Some(triples.iter().map(|t| t.2).collect());
                }
            }
            _ => d_cols.push(triples.iter().map(|t| t.2).collect()),
        }
    }
    let base_alpha = cases
        .iter()
        .position(|c| c.quantity == SweepQuantity::LossAlpha && c.theta == cfg.alpha0)
        .ok_or_else(|| CliError::Config("alpha sweep must contain alpha0".into()))?;
    let base_a11 = cases
        .iter()
        .position(|c| c.quantity == SweepQuantity::LossA11 && c.theta == a11_0)
        .ok_or_else(|| CliError::Config("a11 offsets must contain 0".into()))?;

    // interleave per walk so a resample touches one contiguous record
    let k = cases.len();
    let mut rec = vec![0.0; n * 2 * k];
    for c in 0..k {
        for w in 0..n {
            rec[w * 2 * k + 2 * c] = j_cols[c][w];
            rec[w * 2 * k + 2 * c + 1] = d_cols[c][w];
        }
    }
    let statistic = |means: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * k);
        for (c, case) in cases.iter().enumerate() {
            let base = if case.quantity == SweepQuantity::LossAlpha { base_alpha } else { base_a11 };
            let diff = means[2 * c] - means[2 * base];
            out.push(0.5 * diff * diff);
            out.push(means[2 * c + 1] * diff);
        }
        out
    };
    let full_means: Vec<f64> = (0..2 * k).map(|c| (0..n).map(|w| rec[w * 2 * k + c]).sum::<f64>() / n as f64).collect();
    let point = statistic(&full_means);
    progress(&format!("bootstrap: {} resamples", cfg.bootstrap));
    let reps = bootstrap_replicates(n, cfg.bootstrap, cfg.seed ^ 0xB007_5742, |idx| {
        let mut sums = vec![0.0; 2 * k];
        for &w in idx {
            for (s, v) in sums.iter_mut().zip(&rec[w * 2 * k..(w + 1) * 2 * k]) {
                *s += v;
            }
        }
        sums.iter_mut().for_each(|s| *s /= n as f64);
        statistic(&sums)
    });

    progress("L1 reference");
    let l1 = L1Config::new(cfg.n_t);
    let mut det = Vec::with_capacity(k);
    for case in &cases {
        det.push(deterministic(cfg, case, &l1)?);
    }
    let mut points = Vec::new();
    for (c, case) in cases.iter().enumerate() {
        let base = if case.quantity == SweepQuantity::LossAlpha { base_alpha } else { base_a11 };
        let diff = det[c].0 - det[base].0;
        let values = [0.5 * diff * diff, det[c].1 * diff];
        let kinds = match case.quantity {
            SweepQuantity::LossAlpha => [SweepQuantity::LossAlpha, SweepQuantity::DlossAlpha],
            _ => [SweepQuantity::LossA11, SweepQuantity::DlossA11],
        };
        for s in 0..2 {
            let col: Vec<f64> = reps.iter().map(|r| r[2 * c + s]).collect();
            let ci = [quantile(&col, cfg.level), quantile(&col, 1.0 - cfg.level)];
            let deterministic = values[s];
            points.push(SweepPoint {
                quantity: kinds[s],
                theta: case.theta,
                deterministic,
                stochastic: point[2 * c + s],
                ci,
                overlap: ci[0] <= deterministic && deterministic <= ci[1],
            });
        }
    }
    points.sort_by_key(|p| p.quantity as u8);

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    // mean of the per-walk alpha derivative equals the chained sum of means
    let grads = chain_rule_robin(mean(&d_cols[base_a11]), &[], &spec0);
    let overlaps = points.iter().filter(|p| p.overlap).count();
    Ok(RobinReport {
        n_x: cfg.n_x,
        t_final: cfg.t_final,
        a11_0,
        alpha0: cfg.alpha0,
        walks: cfg.walks,
        bootstrap: cfg.bootstrap,
        seed: cfg.seed,
        level: cfg.level,
        n_t: cfg.n_t,
        d_b1: grads.d_b1,
        d_b2: grads.d_b2,
        d_alpha: mean(&d_cols[base_alpha]),
        points,
        overlaps,
    })
}
