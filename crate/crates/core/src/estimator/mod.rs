//! Runs many walks in parallel and reduces them into means, variances and
//! confidence intervals. Reductions are exact, so a report depends only on
//! the seed and the number of walks, never on the worker count.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{validate_problem, EmbeddedChain, FodeProblem, ModelError, Mode};
use crate::sampling::RngStream;
use crate::walker::{simulate_walk, WalkConfig, WalkError, WalkOutcome};

mod bound;
pub mod exact;
pub mod stats;

pub use bound::{variance_bound, VarianceBound};
pub use exact::{ExactSum, Moments};
pub use stats::{
    bootstrap_ci, bootstrap_replicates, hotelling_test, ks_test, normal_quantile, quantile, t_test, StatsError,
    TestOutcome,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("walk {stream}: {source}")]
    Walk { stream: u64, source: WalkError },
    #[error("at least two walks are needed for a variance, got {0}")]
    TooFewWalks(u64),
    #[error("significance level {0} outside (0, 0.5)")]
    Level(f64),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConfig {
    pub n_walks: u64,
    pub workers: usize,
    pub seed: u64,
    pub walk: WalkConfig,
    /// Significance level p of the reported intervals.
    pub level: f64,
    /// Track the full covariance of the A-gradient (for Hotelling tests).
    pub grad_a_covariance: bool,
}

impl EstimateConfig {
    pub fn new(n_walks: u64, seed: u64) -> Self {
        EstimateConfig {
            n_walks,
            workers: 1,
            seed,
            walk: WalkConfig::simplified(),
            level: 0.05,
            grad_a_covariance: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub var: f64,
    pub ci: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeStat {
    /// 1-based node index.
    pub node: usize,
    #[serde(flatten)]
    pub stat: Stat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntryStat {
    /// 1-based row and column.
    pub row: usize,
    pub col: usize,
    #[serde(flatten)]
    pub stat: Stat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpStat {
    pub mean: f64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub n_walks: u64,
    pub seed: u64,
    pub mode: Mode,
    pub level: f64,
    pub solution: Stat,
    pub grad_u0: Option<Vec<NodeStat>>,
    /// One entry per stored matrix entry, row-major, diagonal first.
    pub grad_a: Option<Vec<EntryStat>>,
    pub grad_alpha: Option<Vec<NodeStat>>,
    pub grad_t: Option<Stat>,
    /// Sample covariance of the A-gradient, ordered like `grad_a`.
    #[serde(skip)]
    pub grad_a_cov: Option<DMatrix<f64>>,
    pub jumps: JumpStat,
}

impl EstimateReport {
    pub fn grad_a_mean(&self, row: usize, col: usize) -> Option<f64> {
        self.grad_a.as_ref()?.iter().find(|e| e.row == row + 1 && e.col == col + 1).map(|e| e.stat.mean)
    }
}

/// Worker-local partial sums; `merge` is exact, so partials combine in any
/// order.
#[derive(Clone, Debug, Default)]
struct Partial {
    count: u64,
    solution: Moments,
    grad_t: Moments,
    grad_u0: BTreeMap<usize, Moments>,
    grad_a: BTreeMap<(usize, usize), Moments>,
    grad_alpha: BTreeMap<usize, Moments>,
    // cross products over the tracked entries, lower triangle row-major
    cov: Vec<ExactSum>,
    jumps: u128,
    max_jumps: u64,
}

impl Partial {
    fn push(&mut self, o: &WalkOutcome, sens: bool, cov_index: Option<&BTreeMap<(usize, usize), usize>>) {
        self.count += 1;
        self.solution.push(o.j);
        self.jumps += o.jumps as u128;
        self.max_jumps = self.max_jumps.max(o.jumps);
        if !sens {
            return;
        }
        self.grad_t.push(o.dt_term);
        self.grad_u0.entry(o.final_node).or_default().push(o.chi_product);
        for (e, g) in o.grad_a() {
            self.grad_a.entry(e).or_default().push(g);
        }
        for (i, g) in o.grad_alpha() {
            self.grad_alpha.entry(i).or_default().push(g);
        }
        if let Some(index) = cov_index {
            if self.cov.is_empty() {
                let d = index.len();
                self.cov = vec![ExactSum::new(); d * (d + 1) / 2];
            }
            let vals: Vec<(usize, f64)> = o.grad_a().filter_map(|(e, g)| index.get(&e).map(|&k| (k, g))).collect();
            for &(a, ga) in &vals {
                for &(b, gb) in &vals {
                    if b <= a {
                        self.cov[a * (a + 1) / 2 + b].add_product(ga, gb);
                    }
                }
            }
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.count += other.count;
        self.solution.merge(&other.solution);
        self.grad_t.merge(&other.grad_t);
        for (k, m) in other.grad_u0 {
            self.grad_u0.entry(k).or_default().merge(&m);
        }
        for (k, m) in other.grad_a {
            self.grad_a.entry(k).or_default().merge(&m);
        }
        for (k, m) in other.grad_alpha {
            self.grad_alpha.entry(k).or_default().merge(&m);
        }
        if self.cov.is_empty() {
            self.cov = other.cov;
        } else {
            for (a, b) in self.cov.iter_mut().zip(&other.cov) {
                a.merge(b);
            }
        }
        self.jumps += other.jumps;
        self.max_jumps = self.max_jumps.max(other.max_jumps);
        self
    }
}

/// Walks per scheduling unit.
const CHUNK: u64 = 1024;

fn stat(m: Option<&Moments>, n: u64, z: f64) -> Stat {
    match m {
        None => Stat { mean: 0.0, var: 0.0, ci: [0.0, 0.0] },
        Some(m) => {
            let mean = m.mean(n);
            let var = m.variance(n);
            let half = z * (var / n as f64).sqrt();
            Stat { mean, var, ci: [mean - half, mean + half] }
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, EstimateError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| EstimateError::Pool(e.to_string()))
}

fn lowest_error<T>(a: Result<T, EstimateError>, b: Result<T, EstimateError>, merge: impl Fn(T, T) -> T) -> Result<T, EstimateError> {
    match (a, b) {
        (Ok(x), Ok(y)) => Ok(merge(x, y)),
        (Err(e), Ok(_)) | (Ok(_), Err(e)) => Err(e),
        (Err(e1), Err(e2)) => match (&e1, &e2) {
            (EstimateError::Walk { stream: s1, .. }, EstimateError::Walk { stream: s2, .. }) if s2 < s1 => Err(e2),
            _ => Err(e1),
        },
    }
}

/// Runs `cfg.n_walks` walks on streams `0..n_walks` of `cfg.seed`.
pub fn estimate(p: &FodeProblem, cfg: &EstimateConfig) -> Result<EstimateReport, EstimateError> {
    if cfg.n_walks < 2 {
        return Err(EstimateError::TooFewWalks(cfg.n_walks));
    }
    if !(cfg.level > 0.0 && cfg.level < 0.5) {
        return Err(EstimateError::Level(cfg.level));
    }
    let chain = validate_problem(p, cfg.walk.mode)?;
    let sens = cfg.walk.sensitivities && cfg.walk.mode == Mode::Simplified;
    let walk = WalkConfig { sensitivities: sens, ..cfg.walk };
    let entries = p.stored_entries();
    let cov_index: Option<BTreeMap<(usize, usize), usize>> =
        (sens && cfg.grad_a_covariance).then(|| entries.iter().enumerate().map(|(k, &e)| (e, k)).collect());
    let n = cfg.n_walks;
    let chunks = n.div_ceil(CHUNK);
    let total = pool(cfg.workers)?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut part = Partial::default();
                for k in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    let mut rng = RngStream::new(cfg.seed, k);
                    let o = simulate_walk(p, &chain, &mut rng, &walk)
                        .map_err(|source| EstimateError::Walk { stream: k, source })?;
                    part.push(&o, sens, cov_index.as_ref());
                }
                Ok(part)
            })
            .reduce(|| Ok(Partial::default()), |a, b| lowest_error(a, b, Partial::merge))
    })?;
    Ok(build_report(p, &entries, cfg, sens, total))
}

fn build_report(p: &FodeProblem, entries: &[(usize, usize)], cfg: &EstimateConfig, sens: bool, t: Partial) -> EstimateReport {
    let n = t.count;
    let z = normal_quantile(cfg.level);
    let nodes = |m: &BTreeMap<usize, Moments>| -> Vec<NodeStat> {
        (0..p.n()).map(|i| NodeStat { node: i + 1, stat: stat(m.get(&i), n, z) }).collect()
    };
    let grad_a: Vec<EntryStat> = entries
        .iter()
        .map(|&(i, j)| EntryStat { row: i + 1, col: j + 1, stat: stat(t.grad_a.get(&(i, j)), n, z) })
        .collect();
    let grad_a_cov = (!t.cov.is_empty() || (sens && cfg.grad_a_covariance)).then(|| {
        let d = entries.len();
        let means: Vec<f64> = grad_a.iter().map(|e| e.stat.mean).collect();
        let sums: Vec<f64> = entries.iter().map(|e| t.grad_a.get(e).map_or(0.0, |m| m.sum.value())).collect();
        let nf = n as f64;
        DMatrix::from_fn(d, d, |a, b| {
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            let Some(cross) = t.cov.get(hi * (hi + 1) / 2 + lo) else { return 0.0 };
            // sum (x - mx)(y - my) = Sxy - mx Sy - my Sx + n mx my
            let mut acc = cross.clone();
            acc.add_product(-means[hi], sums[lo]);
            acc.add_product(-means[lo], sums[hi]);
            acc.add_product(nf * means[hi], means[lo]);
            acc.value() / (nf - 1.0)
        })
    });
    EstimateReport {
        n_walks: n,
        seed: cfg.seed,
        mode: cfg.walk.mode,
        level: cfg.level,
        solution: stat(Some(&t.solution), n, z),
        grad_u0: sens.then(|| nodes(&t.grad_u0)),
        grad_a: sens.then_some(grad_a),
        grad_alpha: sens.then(|| nodes(&t.grad_alpha)),
        grad_t: sens.then(|| stat(Some(&t.grad_t), n, z)),
        grad_a_cov,
        jumps: JumpStat { mean: t.jumps as f64 / n as f64, max: t.max_jumps },
    }
}

/// Runs walks `0..n_walks` and returns `f` of each outcome in stream order.
pub fn map_walks<T, F>(
    p: &FodeProblem,
    chain: &EmbeddedChain,
    walk: &WalkConfig,
    seed: u64,
    n_walks: u64,
    workers: usize,
    f: F,
) -> Result<Vec<T>, EstimateError>
where
    T: Send,
    F: Fn(&WalkOutcome) -> T + Sync,
{
    pool(workers)?.install(|| {
        (0..n_walks)
            .into_par_iter()
            .map(|k| {
                let mut rng = RngStream::new(seed, k);
                simulate_walk(p, chain, &mut rng, walk)
                    .map(|o| f(&o))
                    .map_err(|source| EstimateError::Walk { stream: k, source })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gen_random_problem;

    #[test]
    fn worker_count_does_not_change_report() {
        let p = gen_random_problem(4, &mut RngStream::new(3, 0));
        let mut cfg = EstimateConfig::new(5000, 11);
        cfg.grad_a_covariance = true;
        let one = estimate(&p, &cfg).unwrap();
        cfg.workers = 3;
        let three = estimate(&p, &cfg).unwrap();
        assert_eq!(format!("{one:?}"), format!("{three:?}"));
    }

    #[test]
    fn covariance_diagonal_matches_entry_variance() {
        let p = gen_random_problem(3, &mut RngStream::new(5, 0));
        let mut cfg = EstimateConfig::new(4000, 2);
        cfg.grad_a_covariance = true;
        let r = estimate(&p, &cfg).unwrap();
        let cov = r.grad_a_cov.as_ref().unwrap();
        for (k, e) in r.grad_a.as_ref().unwrap().iter().enumerate() {
            assert!((cov[(k, k)] - e.stat.var).abs() <= 1e-12 * e.stat.var.max(1e-300));
        }
        assert_eq!(cov, &cov.transpose());
    }

    #[test]
    fn rejects_single_walk_and_reports_unvisited_rows_as_zero() {
        let p = FodeProblem::from_dense(&[vec![-1.0, 0.0], vec![1.0, -1.0]], vec![0.6, 0.6], vec![1.0, 1.0], 1.0, 0);
        assert_eq!(estimate(&p, &EstimateConfig::new(1, 0)), Err(EstimateError::TooFewWalks(1)));
        let r = estimate(&p, &EstimateConfig::new(1000, 0)).unwrap();
        let row2 = r.grad_a.unwrap().into_iter().filter(|e| e.row == 2).collect::<Vec<_>>();
        assert!(!row2.is_empty());
        assert!(row2.iter().all(|e| e.stat.mean == 0.0 && e.stat.var == 0.0));
    }

    #[test]
    fn general_mode_omits_sensitivities() {
        let p = FodeProblem::from_dense(&[vec![-1.0, 0.5], vec![0.5, 2.0]], vec![0.6, 0.6], vec![1.0, 1.0], 0.5, 0);
        let mut cfg = EstimateConfig::new(100, 0);
        cfg.walk = WalkConfig::solution_only(Mode::General);
        let r = estimate(&p, &cfg).unwrap();
        assert!(r.grad_a.is_none() && r.grad_t.is_none() && r.grad_u0.is_none());
    }
}
