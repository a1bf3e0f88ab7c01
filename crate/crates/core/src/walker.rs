//! One continuous-time random walk: the path functional, its initial-value
//! gradient entry, Malliavin weights for the matrix and the exponents, and
//! the conditional Monte Carlo term for the final time.

use thiserror::Error;

use crate::model::{EmbeddedChain, FodeProblem, Mode};
use crate::sampling::{sample_jump, sample_sojourn, RngStream, SamplingError, SojournLaw};
use crate::special::{ml, ml_log_derivs, MlError, SojournKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("hazard is singular at tau* = 0 for alpha = {0} < 1")]
    SingularHazard(f64),
    #[error("chain was validated for {chain} mode but the walk runs in {walk} mode")]
    ModeMismatch { chain: Mode, walk: Mode },
    #[error("own-law proposal needs a negative diagonal (row {0})")]
    ProposalDomain(usize),
}

/// Sojourn law used by general-mode walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Proposal {
    /// One exponential law with rate `max_i |a_ii|`.
    #[default]
    Exponential,
    /// Each node's own Mittag-Leffler law (all weights equal one).
    OwnLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub mode: Mode,
    pub proposal: Proposal,
    /// Accumulate Malliavin weights and the time term (simplified mode only).
    pub sensitivities: bool,
}

impl WalkConfig {
    pub fn simplified() -> Self {
        WalkConfig { mode: Mode::Simplified, proposal: Proposal::Exponential, sensitivities: true }
    }

    pub fn solution_only(mode: Mode) -> Self {
        WalkConfig { mode, proposal: Proposal::Exponential, sensitivities: false }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WalkOutcome {
    /// Path functional `prod chi * u0[final_node]`.
    pub j: f64,
    /// Node the walk occupies at the final time.
    pub final_node: usize,
    /// `prod chi`, the gradient of `j` with respect to `u0[final_node]`.
    pub chi_product: f64,
    /// Malliavin weight for A, one entry per traversed edge or visited row.
    pub w_a: Vec<((usize, usize), f64)>,
    pub w_alpha: Vec<(usize, f64)>,
    /// Estimate of d u / d T for this path.
    pub dt_term: f64,
    pub jumps: u64,
    pub draws: u64,
    /// The walk jumped out of a row without successors.
    pub absorbed: bool,
}

impl WalkOutcome {
    pub fn grad_u0(&self) -> (usize, f64) {
        (self.final_node, self.chi_product)
    }

    pub fn grad_a(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.w_a.iter().map(move |&(e, w)| (e, self.j * w))
    }

    pub fn grad_alpha(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.w_alpha.iter().map(move |&(i, w)| (i, self.j * w))
    }
}

fn bump<K: PartialEq + Copy>(acc: &mut Vec<(K, f64)>, key: K, by: f64) {
    match acc.iter_mut().find(|(k, _)| *k == key) {
        Some(slot) => slot.1 += by,
        None => acc.push((key, by)),
    }
}

/// Ratio of the in-progress sojourn density to its survival function,
/// `-a tau^(alpha-1) E_{alpha,alpha}(a tau^alpha) / E_alpha(a tau^alpha)`.
pub fn hazard(alpha: f64, a: f64, tau_star: f64) -> Result<f64, WalkError> {
    if !(a < 0.0) {
        return Err(MlError::Domain(format!("rate parameter must be negative, got {a}")).into());
    }
    if !(tau_star >= 0.0) {
        return Err(MlError::Domain(format!("tau* must be nonnegative, got {tau_star}")).into());
    }
    if alpha == 1.0 {
        return Ok(-a);
    }
    if tau_star == 0.0 {
        return Err(WalkError::SingularHazard(alpha));
    }
    let z = a * tau_star.powf(alpha);
    Ok(-a * tau_star.powf(alpha - 1.0) * ml(alpha, alpha, z)? / ml(alpha, 1.0, z)?)
}

/// Smallest final interval, as a fraction of T, fed to the hazard.
const TAU_STAR_FLOOR: f64 = 1e-12;

/// Simulates one walk from `p.start` on stream `rng`.
pub fn simulate_walk(
    p: &FodeProblem,
    chain: &EmbeddedChain,
    rng: &mut RngStream,
    cfg: &WalkConfig,
) -> Result<WalkOutcome, WalkError> {
    if chain.mode != cfg.mode {
        return Err(WalkError::ModeMismatch { chain: chain.mode, walk: cfg.mode });
    }
    let draws0 = rng.draws();
    let mut out = match cfg.mode {
        Mode::Simplified => walk_simplified(p, chain, rng, cfg.sensitivities)?,
        Mode::General => walk_general(p, chain, rng, cfg.proposal)?,
    };
    out.draws = rng.draws() - draws0;
    Ok(out)
}

fn walk_simplified(
    p: &FodeProblem,
    chain: &EmbeddedChain,
    rng: &mut RngStream,
    sens: bool,
) -> Result<WalkOutcome, WalkError> {
    let t_final = p.t_final;
    let mut out = WalkOutcome { chi_product: 1.0, ..Default::default() };
    let mut node = p.start;
    let mut t = 0.0;
    loop {
        let a = p.rows[node].diag;
        let alpha = p.alpha[node];
        let tau = sample_sojourn(&SojournLaw::mittag_leffler(alpha, -a), rng)?;
        let row = &chain.rows[node];
        if t + tau >= t_final {
            out.final_node = node;
            out.j = out.chi_product * p.u0[node];
            if sens {
                let tau_star = (t_final - t).max(TAU_STAR_FLOOR * t_final);
                let d = ml_log_derivs(alpha, a, tau_star, SojournKind::Survival)?;
                bump(&mut out.w_a, (node, node), d.d_rate);
                bump(&mut out.w_alpha, node, d.d_alpha);
                let j_plus = if row.is_absorbing() {
                    0.0
                } else {
                    let s = sample_jump(&row.cumprobs, rng)?;
                    out.chi_product * row.chi(s) * p.u0[row.targets[s]]
                };
                out.dt_term = hazard(alpha, a, tau_star)? * (j_plus - out.j);
            }
            return Ok(out);
        }
        t += tau;
        out.jumps += 1;
        if row.is_absorbing() {
            out.chi_product = 0.0;
            out.j = 0.0;
            out.final_node = node;
            out.absorbed = true;
            return Ok(out);
        }
        let s = sample_jump(&row.cumprobs, rng)?;
        let k = row.targets[s];
        out.chi_product *= row.chi(s);
        if sens {
            let d = ml_log_derivs(alpha, a, tau, SojournKind::Density)?;
            // entries of row `node` are stored in the same order as the chain targets
            bump(&mut out.w_a, (node, k), 1.0 / p.rows[node].off[s].1);
            bump(&mut out.w_a, (node, node), d.d_rate);
            // ln tau from the tau^(alpha-1) factor of the density
            bump(&mut out.w_alpha, node, d.d_alpha + tau.ln());
        }
        node = k;
    }
}

/// Signed log of a density or survival value, so importance weights can be
/// formed without overflowing `exp(lambda tau)`.
#[derive(Clone, Copy)]
struct SignedLog {
    sign: f64,
    ln: f64,
}

impl SignedLog {
    fn of(x: f64) -> Self {
        SignedLog { sign: x.signum(), ln: x.abs().ln() }
    }

    fn ratio(self, den: SignedLog) -> f64 {
        self.sign * den.sign * (self.ln - den.ln).exp()
    }
}

/// `-a tau^(alpha-1) E_{alpha,alpha}(a tau^alpha)`, the density form that
/// appears in the integral representation for any sign of `a`.
fn target_density(alpha: f64, a: f64, tau: f64) -> Result<SignedLog, MlError> {
    let e = ml(alpha, alpha, a * tau.powf(alpha))?;
    let s = SignedLog::of(-a * e);
    Ok(SignedLog { sign: s.sign, ln: s.ln + (alpha - 1.0) * tau.ln() })
}

fn target_survival(alpha: f64, a: f64, tau: f64) -> Result<SignedLog, MlError> {
    Ok(SignedLog::of(ml(alpha, 1.0, a * tau.powf(alpha))?))
}

fn walk_general(
    p: &FodeProblem,
    chain: &EmbeddedChain,
    rng: &mut RngStream,
    proposal: Proposal,
) -> Result<WalkOutcome, WalkError> {
    let t_final = p.t_final;
    let lambda = p.rows.iter().map(|r| r.diag.abs()).fold(0.0, f64::max);
    let mut out = WalkOutcome { chi_product: 1.0, ..Default::default() };
    let mut node = p.start;
    let mut t = 0.0;
    loop {
        let a = p.rows[node].diag;
        let alpha = p.alpha[node];
        let law = match proposal {
            Proposal::Exponential => SojournLaw::exponential(lambda),
            Proposal::OwnLaw if a < 0.0 => SojournLaw::mittag_leffler(alpha, -a),
            Proposal::OwnLaw => return Err(WalkError::ProposalDomain(node + 1)),
        };
        let tau = sample_sojourn(&law, rng)?;
        let row = &chain.rows[node];
        if t + tau >= t_final {
            let tau_star = (t_final - t).max(TAU_STAR_FLOOR * t_final);
            let den = match proposal {
                Proposal::Exponential => SignedLog { sign: 1.0, ln: -lambda * tau_star },
                Proposal::OwnLaw => target_survival(alpha, a, tau_star)?,
            };
            out.chi_product *= target_survival(alpha, a, tau_star)?.ratio(den);
            out.final_node = node;
            out.j = out.chi_product * p.u0[node];
            return Ok(out);
        }
        t += tau;
        out.jumps += 1;
        if row.is_absorbing() {
            out.chi_product = 0.0;
            out.j = 0.0;
            out.final_node = node;
            out.absorbed = true;
            return Ok(out);
        }
        let den = match proposal {
            Proposal::Exponential => SignedLog { sign: 1.0, ln: lambda.ln() - lambda * tau },
            Proposal::OwnLaw => target_density(alpha, a, tau)?,
        };
        out.chi_product *= target_density(alpha, a, tau)?.ratio(den);
        let s = sample_jump(&row.cumprobs, rng)?;
        out.chi_product *= row.chi(s);
        node = row.targets[s];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_random_problem, validate_problem};

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    fn run(p: &FodeProblem, cfg: WalkConfig, n: u64, seed: u64) -> Vec<WalkOutcome> {
        let chain = validate_problem(p, cfg.mode).unwrap();
        (0..n).map(|k| simulate_walk(p, &chain, &mut RngStream::new(seed, k), &cfg).unwrap()).collect()
    }

    #[test]
    fn hazard_values() {
        assert_eq!(hazard(1.0, -3.0, 0.0).unwrap(), 3.0);
        assert_eq!(hazard(1.0, -3.0, 7.0).unwrap(), 3.0);
        let want = ml(0.5, 0.5, -1.0).unwrap() / ml(0.5, 1.0, -1.0).unwrap();
        assert!((hazard(0.5, -1.0, 1.0).unwrap() - want).abs() < 1e-14);
        assert_eq!(hazard(0.5, -1.0, 0.0), Err(WalkError::SingularHazard(0.5)));
    }

    #[test]
    fn scalar_walks_survive_or_vanish() {
        let p = FodeProblem::from_dense(&[vec![-1.0]], vec![0.7], vec![2.0], 1.0, 0);
        let outs = run(&p, WalkConfig::simplified(), 20_000, 3);
        for o in &outs {
            assert!(o.j == 0.0 || o.j == 2.0);
            assert_eq!(o.absorbed, o.j == 0.0);
            assert!(o.jumps <= 1);
        }
        let (m, se) = mean_sd(&outs.iter().map(|o| o.j).collect::<Vec<_>>());
        let want = 2.0 * ml(0.7, 1.0, -1.0).unwrap();
        assert!((m - want).abs() < 4.0 * se, "{m} vs {want}");
        let (m, se) = mean_sd(&outs.iter().map(|o| o.dt_term).collect::<Vec<_>>());
        let want = -2.0 * ml(0.7, 0.7, -1.0).unwrap();
        assert!((m - want).abs() < 4.0 * se, "{m} vs {want}");
    }

    #[test]
    fn matrix_weight_sign_convention() {
        // node 2 is nearly frozen, so u_1(T) = (exp(a11 T) - 1)/a11
        let eps = 1e-9;
        let mut p = FodeProblem::from_dense(&[vec![-1.0, 1.0], vec![eps, -eps]], vec![1.0, 1.0], vec![0.0, 1.0], 1.5, 0);
        p.classical_limit = true;
        let outs = run(&p, WalkConfig::simplified(), 100_000, 8);
        let g: Vec<f64> = outs
            .iter()
            .map(|o| o.grad_a().find(|&(e, _)| e == (0, 0)).map_or(0.0, |(_, v)| v))
            .collect();
        let (m, se) = mean_sd(&g);
        let t: f64 = 1.5;
        let want = 1.0 - (1.0 + t) * (-t).exp();
        assert!((m - want).abs() < 4.0 * se, "{m} +- {se} vs {want}");
    }

    #[test]
    fn per_walk_identities() {
        for seed in 0..5 {
            let p = gen_random_problem(5, &mut RngStream::new(seed, 99));
            for o in run(&p, WalkConfig::simplified(), 2000, seed) {
                let (node, v) = o.grad_u0();
                assert_eq!(v * p.u0[node], o.j);
                let mut visited: Vec<usize> = o.w_alpha.iter().map(|&(i, _)| i).collect();
                visited.sort_unstable();
                assert!(o.w_a.iter().all(|&((i, _), _)| visited.binary_search(&i).is_ok()));
                assert!(visited.len() as u64 <= o.jumps + 1);
            }
        }
    }

    #[test]
    fn own_law_proposal_matches_simplified_bitwise() {
        let p = gen_random_problem(5, &mut RngStream::new(4, 0));
        let simple = run(&p, WalkConfig::solution_only(Mode::Simplified), 3000, 1);
        let cfg = WalkConfig { proposal: Proposal::OwnLaw, ..WalkConfig::solution_only(Mode::General) };
        let general = run(&p, cfg, 3000, 1);
        for (s, g) in simple.iter().zip(&general) {
            assert_eq!(s.j.to_bits(), g.j.to_bits());
            assert_eq!(s.jumps, g.jumps);
        }
    }

    #[test]
    fn mode_mismatch_is_reported() {
        let p = gen_random_problem(3, &mut RngStream::new(1, 0));
        let chain = validate_problem(&p, Mode::General).unwrap();
        let r = simulate_walk(&p, &chain, &mut RngStream::new(1, 0), &WalkConfig::simplified());
        assert!(matches!(r, Err(WalkError::ModeMismatch { .. })));
    }
}
