//! Random-system validation: Monte Carlo estimates against the L1 and
//! finite-difference oracles, one hypothesis test per quantity family.

use serde::Serialize;

use crate::estimator::{estimate, hotelling_test, t_test, EstimateConfig, EstimateReport, TestOutcome};
use crate::model::{gen_random_problem, FodeProblem};
use crate::reference::{fd_sensitivities, FdTable, FdTargets, L1Config};
use crate::sampling::RngStream;

use super::CliError;

/// Absolute agreement required where the Monte Carlo variance is zero.
const DEGENERATE_MATCH: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct Deviation {
    pub quantity: String,
    pub mc: f64,
    pub reference: f64,
    /// `(mc - reference) / standard error`; zero-variance components report
    /// 0 when they match and infinity otherwise.
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemCheck {
    pub system: usize,
    pub solution: TestOutcome,
    pub grad_a: TestOutcome,
    pub grad_alpha: TestOutcome,
    pub grad_u0: TestOutcome,
    pub grad_t: TestOutcome,
    pub deviations: Vec<Deviation>,
}

impl SystemCheck {
    pub fn passes(&self) -> [bool; 5] {
        [self.solution.pass, self.grad_a.pass, self.grad_alpha.pass, self.grad_u0.pass, self.grad_t.pass]
    }

    pub fn max_abs_z(&self) -> f64 {
        self.deviations.iter().map(|d| d.z.abs()).fold(0.0, f64::max)
    }
}

fn deviation(quantity: String, mean: f64, var: f64, n: u64, reference: f64) -> Deviation {
    let z = if var > 0.0 {
        (mean - reference) / (var / n as f64).sqrt()
    } else if (mean - reference).abs() <= DEGENERATE_MATCH {
        0.0
    } else {
        f64::INFINITY
    };
    Deviation { quantity, mc: mean, reference, z }
}

/// Runs the estimator (with the A-gradient covariance) and the FD oracle on
/// `p`, and tests each Table-1 quantity at the start node.
pub fn check_system(
    system: usize,
    p: &FodeProblem,
    est: &EstimateConfig,
    l1: &L1Config,
) -> Result<(SystemCheck, EstimateReport, FdTable), CliError> {
    let mut est = *est;
    est.grad_a_covariance = true;
    let r = estimate(p, &est)?;
    let fd = fd_sensitivities(p, l1, FdTargets::all())?;
    Ok((compare(system, p, &r, &fd)?, r, fd))
}

/// Tests a finished report against a finished FD table.
pub fn compare(system: usize, p: &FodeProblem, r: &EstimateReport, fd: &FdTable) -> Result<SystemCheck, CliError> {
    let s = p.start;
    let n = r.n_walks;
    let level = r.level;
    let missing = || CliError::Numerical("report carries no sensitivities".into());
    let grad_a = r.grad_a.as_ref().ok_or_else(missing)?;
    let grad_alpha = r.grad_alpha.as_ref().ok_or_else(missing)?;
    let grad_u0 = r.grad_u0.as_ref().ok_or_else(missing)?;
    let grad_t = r.grad_t.ok_or_else(missing)?;
    let cov = r.grad_a_cov.as_ref().ok_or_else(missing)?;
    let fd_a = |row: usize, col: usize| fd.d_a(s, row - 1, col - 1).expect("A targets requested");

    let mut deviations = vec![deviation("u".into(), r.solution.mean, r.solution.var, n, fd.solution[s])];
    for e in grad_a {
        deviations.push(deviation(format!("dA[{},{}]", e.row, e.col), e.stat.mean, e.stat.var, n, fd_a(e.row, e.col)));
    }
    for e in grad_alpha {
        let want = fd.d_alpha(s, e.node - 1).expect("alpha targets requested");
        deviations.push(deviation(format!("dalpha[{}]", e.node), e.stat.mean, e.stat.var, n, want));
    }
    for e in grad_u0 {
        let want = fd.d_u0(s, e.node - 1).expect("u0 targets requested");
        deviations.push(deviation(format!("du0[{}]", e.node), e.stat.mean, e.stat.var, n, want));
    }
    let want_t = fd.d_t(s).expect("T target requested");
    deviations.push(deviation("dT".into(), grad_t.mean, grad_t.var, n, want_t));

    let means: Vec<f64> = grad_a.iter().map(|e| e.stat.mean).collect();
    let refs: Vec<f64> = grad_a.iter().map(|e| fd_a(e.row, e.col)).collect();
    let own = |v: &[crate::estimator::NodeStat]| v[s].stat;
    let a_own = own(grad_alpha);
    let u_own = own(grad_u0);
    Ok(SystemCheck {
        system,
        solution: t_test(r.solution.mean, r.solution.var, n, fd.solution[s], level),
        grad_a: hotelling_test(&means, cov, n, &refs, level)?,
        grad_alpha: t_test(a_own.mean, a_own.var, n, fd.d_alpha(s, s).unwrap(), level),
        grad_u0: t_test(u_own.mean, u_own.var, n, fd.d_u0(s, s).unwrap(), level),
        grad_t: t_test(grad_t.mean, grad_t.var, n, want_t, level),
        deviations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateConfig {
    pub systems: usize,
    pub n: usize,
    pub walks: u64,
    pub seed: u64,
    pub workers: usize,
    pub level: f64,
    pub n_t: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { systems: 100, n: 5, walks: 100_000, seed: 1, workers: 1, level: 0.05, n_t: 1 << 12 }
    }
}

/// System `k` of a validation run with master `seed`.
pub fn validation_system(seed: u64, n: usize, k: usize) -> FodeProblem {
    gen_random_problem(n, &mut RngStream::new(seed, u64::MAX - k as u64))
}

/// Master seed of the walks for system `k`; distinct from the problem seed.
pub fn validation_walk_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(1 + k as u64)
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedSystem {
    pub system: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub systems: usize,
    pub n: usize,
    pub walks: u64,
    pub seed: u64,
    pub level: f64,
    pub n_t: usize,
    /// Passes for u(T), dA, dalpha, du0, dT.
    pub pass_counts: [usize; 5],
    pub checks: Vec<SystemCheck>,
    pub failures: Vec<FailedSystem>,
}

pub const TABLE_COLUMNS: [&str; 5] = ["u_i(T)", "du_i/da_ij", "du_i/dalpha_i", "du_i/du_i(0)", "du_i/dT"];

/// Runs every system, recording errors per system instead of stopping.
pub fn run_validation(cfg: &ValidateConfig, mut progress: impl FnMut(usize, &Result<SystemCheck, String>)) -> ValidationReport {
    let l1 = L1Config::new(cfg.n_t);
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    let mut pass_counts = [0; 5];
    for k in 0..cfg.systems {
        let p = validation_system(cfg.seed, cfg.n, k);
        let mut est = EstimateConfig::new(cfg.walks, validation_walk_seed(cfg.seed, k));
        est.workers = cfg.workers;
        est.level = cfg.level;
        let res = check_system(k + 1, &p, &est, &l1).map(|(c, _, _)| c).map_err(|e| e.to_string());
        progress(k + 1, &res);
        match res {
            Ok(c) => {
                for (count, pass) in pass_counts.iter_mut().zip(c.passes()) {
                    *count += pass as usize;
                }
                checks.push(c);
            }
            Err(error) => failures.push(FailedSystem { system: k + 1, error }),
        }
    }
    ValidationReport {
        systems: cfg.systems,
        n: cfg.n,
        walks: cfg.walks,
        seed: cfg.seed,
        level: cfg.level,
        n_t: cfg.n_t,
        pass_counts,
        checks,
        failures,
    }
}
