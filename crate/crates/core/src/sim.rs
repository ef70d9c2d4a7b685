//! Reproducible Monte Carlo engine.
//!
//! Trial `k` of a run with master seed `s` draws from `ChaCha8Rng` seeded
//! with `s` on stream `k`, so any trial can be replayed on its own and the
//! aggregate does not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, Bounds, ReliabilityRegion};
use crate::error::{invalid_arg, Error, Result};
use crate::games::{GameQuantities, SolverOptions};
use crate::model::{Belief, Model};
use crate::policies::{Decision, Policy, PolicyConfig, PolicyKind, ThresholdPolicy};

pub const DEFAULT_STEP_CAP: usize = 1_000_000;
/// Generator identity recorded in output metadata.
pub const RNG_NAME: &str = "rand_chacha 0.3 ChaCha8Rng, seed_from_u64(master), stream = trial index";
/// Observed-symbol probabilities below this are flagged on the trial.
pub const TINY_MARGINAL: f64 = 1e-200;
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub true_theta: usize,
    pub tau: usize,
    /// `None` only when the step cap was hit.
    pub declared: Option<usize>,
    pub correct: bool,
    pub capped: bool,
    /// Some observed symbol had predictive probability below
    /// [`TINY_MARGINAL`]; the posterior may have lost precision.
    pub tiny_marginal: bool,
    /// Largest coordinate of the belief at declaration.
    pub final_max_belief: f64,
}

impl TrialRecord {
    /// Sampling cost plus penalty; capped trials count as errors.
    pub fn cost(&self, penalty: f64) -> f64 {
        self.tau as f64 + if self.correct { 0.0 } else { penalty }
    }
}

/// The generator for trial `index` of a run.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

fn check_inputs(model: &Model, policy: &dyn Policy, prior: &Belief) -> Result<()> {
    let m = model.num_hypotheses();
    if prior.len() != m {
        return Err(Error::InvalidBelief(format!("prior has {} entries, model has {m} hypotheses", prior.len())));
    }
    if policy.num_hypotheses() != m {
        return Err(invalid_arg(
            "policy",
            format!("built for M = {}, model has M = {m}", policy.num_hypotheses()),
        ));
    }
    Ok(())
}

fn run_with<R: Rng>(
    model: &Model,
    policy: &dyn Policy,
    true_theta: usize,
    prior: &Belief,
    step_cap: usize,
    rng: &mut R,
) -> TrialRecord {
    let mut belief = prior.clone();
    let mut tau = 0;
    let mut tiny_marginal = false;
    loop {
        match policy.decide(&belief) {
            Decision::Declare(i) => {
                return TrialRecord {
                    true_theta,
                    tau,
                    declared: Some(i),
                    correct: i == true_theta,
                    capped: false,
                    tiny_marginal,
                    final_max_belief: belief.argmax().1,
                };
            }
            Decision::Sample(mix) => {
                if tau >= step_cap {
                    return TrialRecord {
                        true_theta,
                        tau,
                        declared: None,
                        correct: false,
                        capped: true,
                        tiny_marginal,
                        final_max_belief: belief.argmax().1,
                    };
                }
                let a = mix.sample(rng);
                let z = sample_index(model.row(a, true_theta), rng);
                let up = model.bayes_update_unchecked(&belief, a, z);
                tiny_marginal |= up.marginal < TINY_MARGINAL;
                belief = up.posterior;
                tau += 1;
            }
        }
    }
}

/// One trial with a fixed true hypothesis, reproducible from `seed`.
pub fn run_trial(
    model: &Model,
    policy: &dyn Policy,
    true_theta: usize,
    prior: &Belief,
    seed: u64,
    step_cap: usize,
) -> Result<TrialRecord> {
    check_inputs(model, policy, prior)?;
    if true_theta >= model.num_hypotheses() {
        return Err(Error::Index {
            what: "hypotheses",
            index: true_theta,
            size: model.num_hypotheses(),
        });
    }
    if step_cap == 0 {
        return Err(invalid_arg("step_cap", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(run_with(model, policy, true_theta, prior, step_cap, &mut rng))
}

/// Trial `index` of a run: draws `θ` from the prior, then plays the policy.
pub fn run_indexed_trial(
    model: &Model,
    policy: &dyn Policy,
    prior: &Belief,
    master_seed: u64,
    index: u64,
    step_cap: usize,
) -> TrialRecord {
    let mut rng = trial_rng(master_seed, index);
    let theta = sample_index(prior.probs(), &mut rng);
    run_with(model, policy, theta, prior, step_cap, &mut rng)
}

/// Mean with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
}

impl MeanCi {
    pub fn from_samples(xs: impl Iterator<Item = f64>) -> MeanCi {
        let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
        for x in xs {
            n += 1.0;
            let d = x - mean;
            mean += d / n;
            m2 += d * (x - mean);
        }
        let half_width = if n > 1.0 {
            Z_95 * (m2 / (n - 1.0) / n).sqrt()
        } else {
            f64::INFINITY
        };
        MeanCi { mean, half_width }
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }
}

/// Exact one-sided 95% upper confidence bound on a binomial proportion
/// with `errors` successes in `n` trials; `1 - 0.05^(1/n)` at zero.
pub fn binomial_upper(errors: usize, n: usize) -> f64 {
    if n == 0 || errors >= n {
        return 1.0;
    }
    if errors == 0 {
        return 1.0 - 0.05f64.powf(1.0 / n as f64);
    }
    statrs::function::beta::inv_beta_reg(errors as f64 + 1.0, (n - errors) as f64, 0.95)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    pub n_trials: usize,
    pub penalty: f64,
    pub master_seed: u64,
    pub tau: MeanCi,
    pub errors: usize,
    pub capped: usize,
    pub tiny_marginal_trials: usize,
    pub pe: f64,
    pub pe_upper: f64,
    /// `mean τ + L·P̂e` with the CI of the per-trial cost.
    pub total_cost: MeanCi,
    /// A single trial gives no spread estimate; half-widths are infinite.
    pub degenerate_ci: bool,
}

impl SimEstimate {
    /// `mean τ + L·P̂e_upper`, the conservative cost used against upper
    /// bounds (`L = penalty`).
    pub fn conservative_cost(&self) -> f64 {
        self.tau.mean + self.penalty * self.pe_upper
    }

    pub fn from_records(records: &[TrialRecord], penalty: f64, master_seed: u64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty("trial records"));
        }
        let n = records.len();
        let errors = records.iter().filter(|r| !r.correct).count();
        Ok(SimEstimate {
            n_trials: n,
            penalty,
            master_seed,
            tau: MeanCi::from_samples(records.iter().map(|r| r.tau as f64)),
            errors,
            capped: records.iter().filter(|r| r.capped).count(),
            tiny_marginal_trials: records.iter().filter(|r| r.tiny_marginal).count(),
            pe: errors as f64 / n as f64,
            pe_upper: binomial_upper(errors, n),
            total_cost: MeanCi::from_samples(records.iter().map(|r| r.cost(penalty))),
            degenerate_ci: n == 1,
        })
    }
}

/// Runs `n_trials` independent trials in parallel.
pub fn simulate(
    model: &Model,
    policy: &dyn Policy,
    prior: &Belief,
    n_trials: usize,
    master_seed: u64,
    step_cap: usize,
) -> Result<Vec<TrialRecord>> {
    check_inputs(model, policy, prior)?;
    if n_trials == 0 {
        return Err(invalid_arg("trials", "must be >= 1"));
    }
    if step_cap == 0 {
        return Err(invalid_arg("step_cap", "must be >= 1"));
    }
    Ok((0..n_trials as u64)
        .into_par_iter()
        .map(|k| run_indexed_trial(model, policy, prior, master_seed, k, step_cap))
        .collect())
}

/// Estimates `E[τ]`, `Pe` and the total cost `E[τ] + L·Pe`.
pub fn estimate(
    model: &Model,
    policy: &dyn Policy,
    penalty: f64,
    prior: &Belief,
    n_trials: usize,
    master_seed: u64,
) -> Result<SimEstimate> {
    if !(penalty > 1.0) {
        return Err(invalid_arg("L", format!("must be > 1, got {penalty}")));
    }
    let records = simulate(model, policy, prior, n_trials, master_seed, DEFAULT_STEP_CAP)?;
    SimEstimate::from_records(&records, penalty, master_seed)
}

/// Empirical drift of the log-odds process in one phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseDrift {
    pub steps: usize,
    /// Mean of the realized increments.
    pub empirical: MeanCi,
    /// Mean of the exact one-step conditional expectations along the path.
    pub conditional: f64,
    /// Required floor: `I₂` below zero, `D_ηθ` at or above zero.
    pub floor: f64,
    /// Fewer steps than requested were observed.
    pub insufficient: bool,
}

impl PhaseDrift {
    pub fn holds(&self, tol: f64) -> bool {
        !self.insufficient && self.empirical.mean >= self.floor - tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftReport {
    pub true_theta: usize,
    /// Steps with `U_n < 0`.
    pub below: PhaseDrift,
    /// Steps with `U_n ≥ 0`.
    pub above: PhaseDrift,
    pub max_increment: f64,
    pub xi: f64,
    pub trajectories: usize,
}

impl DriftReport {
    /// Increments never exceed `ξ`; compared without tolerance.
    pub fn increments_bounded(&self) -> bool {
        self.max_increment <= self.xi
    }
}

/// `log(q_θ(z) / m(z))` with `m` the competitors' mixture, clamped into the
/// range of the competitors' probabilities so rounding cannot push the
/// increment past `ξ`.
fn log_odds_increment(model: &Model, a: usize, z: usize, theta: usize, belief: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (j, &r) in belief.iter().enumerate() {
        if j == theta {
            continue;
        }
        let q = model.prob(a, j, z);
        num += r * q;
        den += r;
        lo = lo.min(q);
        hi = hi.max(q);
    }
    let m = if den > 0.0 { (num / den).clamp(lo, hi) } else { hi };
    let q = model.prob(a, theta, z);
    // the larger value on top, as in the computation of ξ
    if q >= m {
        (q / m).log2()
    } else {
        -(m / q).log2()
    }
}

/// Runs the mixture two-phase policy from the prior under `θ = true_theta`,
/// restarting after each declaration, until both phases of
/// `U_n = log(ρ_θ/(1-ρ_θ)) - log(ρ̃/(1-ρ̃))` have `n_steps` steps (or a
/// budget of `20·n_steps` total steps runs out).
pub fn drift_check(
    model: &Model,
    config: &PolicyConfig,
    prior: &Belief,
    true_theta: usize,
    n_steps: usize,
    seed: u64,
) -> Result<DriftReport> {
    let m = model.num_hypotheses();
    if true_theta >= m {
        return Err(Error::Index {
            what: "hypotheses",
            index: true_theta,
            size: m,
        });
    }
    let policy = ThresholdPolicy::new(PolicyKind::Pi2, config.clone())?;
    check_inputs(model, &policy, prior)?;
    let q = &config.quantities;
    let xi = model.xi();
    let shift = (config.threshold_rho / (1.0 - config.threshold_rho)).log2();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut below, mut above): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let (mut cond_below, mut cond_above) = (0.0, 0.0);
    let mut max_increment: f64 = 0.0;
    let mut trajectories = 0;
    let budget = 20 * n_steps;
    let mut total = 0;
    'outer: while (below.len() < n_steps || above.len() < n_steps) && total < budget {
        trajectories += 1;
        let mut belief = prior.clone();
        while let Decision::Sample(mix) = policy.decide(&belief) {
            let rho = belief.probs()[true_theta];
            let u = (rho / (1.0 - rho)).log2() - shift;
            let a = mix.sample(&mut rng);
            let z = sample_index(model.row(a, true_theta), &mut rng);
            let du = log_odds_increment(model, a, z, true_theta, belief.probs());
            let expected: f64 = (0..model.alphabet_size())
                .filter(|&s| model.prob(a, true_theta, s) > 0.0)
                .map(|s| model.prob(a, true_theta, s) * log_odds_increment(model, a, s, true_theta, belief.probs()))
                .sum();
            max_increment = max_increment.max(du.abs());
            if u < 0.0 {
                if below.len() < n_steps {
                    below.push(du);
                    cond_below += expected;
                }
            } else if above.len() < n_steps {
                above.push(du);
                cond_above += expected;
            }
            belief = model.bayes_update_unchecked(&belief, a, z).posterior;
            total += 1;
            if total >= budget {
                break 'outer;
            }
        }
    }
    let phase = |xs: &[f64], cond: f64, floor: f64| PhaseDrift {
        steps: xs.len(),
        empirical: MeanCi::from_samples(xs.iter().copied()),
        conditional: if xs.is_empty() { f64::NAN } else { cond / xs.len() as f64 },
        floor,
        insufficient: xs.len() < n_steps,
    };
    Ok(DriftReport {
        true_theta,
        below: phase(&below, cond_below, q.i_2),
        above: phase(&above, cond_above, q.d_eta[true_theta]),
        max_increment,
        xi,
        trajectories,
    })
}

/// A synthetic process whose increments are `K + (K₃ - K)·s` with `s = ±1`
/// equiprobable, `K = K₁` below zero and `K₂` at or above: drift exactly
/// `K₁`/`K₂` and jumps at most `K₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticSubmartingale {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl SyntheticSubmartingale {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        if !(0.0 < k1 && k1 <= k2 && k2 <= k3) {
            return Err(Error::Precondition {
                regime: "0 < K1 <= K2 <= K3",
                detail: format!("K1 = {k1}, K2 = {k2}, K3 = {k3}"),
            });
        }
        Ok(SyntheticSubmartingale { k1, k2, k3 })
    }

    /// Steps until the process started at `u0` first reaches `b`.
    pub fn hitting_time<R: Rng>(&self, u0: f64, b: f64, rng: &mut R) -> usize {
        let mut u = u0;
        let mut n = 0;
        while u < b {
            let k = if u < 0.0 { self.k1 } else { self.k2 };
            let jump = self.k3 - k;
            u += if rng.gen::<bool>() { k + jump } else { k - jump };
            n += 1;
        }
        n
    }

    /// Mean hitting time over `n_trials` independent runs.
    pub fn mean_hitting_time(&self, u0: f64, b: f64, n_trials: usize, master_seed: u64) -> Result<MeanCi> {
        if n_trials == 0 {
            return Err(invalid_arg("trials", "must be >= 1"));
        }
        if !(b > u0) {
            return Err(invalid_arg("B", format!("must exceed U0 = {u0}, got {b}")));
        }
        let times: Vec<f64> = (0..n_trials as u64)
            .into_par_iter()
            .map(|k| self.hitting_time(u0, b, &mut trial_rng(master_seed, k)) as f64)
            .collect();
        Ok(MeanCi::from_samples(times.iter().copied()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    pub num_hypotheses: usize,
    /// `log M / mean τ`.
    pub rate: f64,
    /// `-log(P̂e_upper) / mean τ`.
    pub reliability: f64,
    pub estimate: SimEstimate,
    /// Upper bound at the uniform belief, for comparison.
    pub ub_v2bar: f64,
    pub converse_reliability: f64,
    pub achievable_reliability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSweep {
    pub points: Vec<RatePoint>,
    pub region: ReliabilityRegion,
}

/// Simulates a threshold policy on each model of a family (uniform prior)
/// and places the empirical `(rate, reliability)` points against the
/// straight-line region of the family.
#[allow(clippy::too_many_arguments)]
pub fn rate_sweep(
    family: &[Model],
    kind: PolicyKind,
    penalty: f64,
    threshold_rho: f64,
    n_trials: usize,
    master_seed: u64,
    opts: &SolverOptions,
) -> Result<RateSweep> {
    if family.is_empty() {
        return Err(Error::Empty("model family"));
    }
    let quantities: Vec<GameQuantities> = family
        .iter()
        .map(|m| GameQuantities::compute(m, threshold_rho, opts))
        .collect::<Result<_>>()?;
    let region = bounds::reliability_region(&quantities)?;
    let mut points = Vec::with_capacity(family.len());
    for (model, q) in family.iter().zip(&quantities) {
        let m = model.num_hypotheses();
        let prior = Belief::uniform(m);
        let ub = Bounds::new(model, q)?.ub_v2bar(&prior, penalty)?.as_f64();
        let config = PolicyConfig::new(penalty, threshold_rho, q.clone())?;
        let policy = ThresholdPolicy::new(kind, config)?;
        let est = estimate(model, &policy, penalty, &prior, n_trials, master_seed)?;
        let tau = est.tau.mean;
        let rate = if tau > 0.0 { (m as f64).log2() / tau } else { f64::INFINITY };
        let reliability = if tau > 0.0 { -est.pe_upper.log2() / tau } else { 0.0 };
        points.push(RatePoint {
            num_hypotheses: m,
            rate,
            reliability,
            ub_v2bar: ub,
            converse_reliability: region.upper(rate),
            achievable_reliability: region.achievable(rate),
            estimate: est,
        });
    }
    Ok(RateSweep { points, region })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pi2(model: &Model, penalty: f64) -> ThresholdPolicy {
        let q = GameQuantities::compute(model, 0.9, &SolverOptions::default()).unwrap();
        ThresholdPolicy::new(PolicyKind::Pi2, PolicyConfig::new(penalty, 0.9, q).unwrap()).unwrap()
    }

    #[test]
    fn binomial_upper_bounds() {
        for n in [1, 10, 1000] {
            assert_abs_diff_eq!(binomial_upper(0, n), 1.0 - 0.05f64.powf(1.0 / n as f64), epsilon = 1e-15);
        }
        // P(X <= k) = 0.05 at the bound, checked with the binomial sum
        for (k, n) in [(1usize, 20usize), (3, 50), (10, 200)] {
            let p = binomial_upper(k, n);
            let mut cdf = 0.0;
            let mut term = (1.0 - p).powi(n as i32);
            for j in 0..=k {
                cdf += term;
                term *= (n - j) as f64 / (j + 1) as f64 * p / (1.0 - p);
            }
            assert_abs_diff_eq!(cdf, 0.05, epsilon = 1e-9);
        }
        assert_eq!(binomial_upper(5, 5), 1.0);
    }

    #[test]
    fn mean_ci_matches_hand_values() {
        let ci = MeanCi::from_samples([1.0, 2.0, 3.0, 4.0].into_iter());
        assert_abs_diff_eq!(ci.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(ci.half_width, Z_95 * sd / 2.0, epsilon = 1e-12);
        assert!(MeanCi::from_samples([7.0].into_iter()).half_width.is_infinite());
    }

    #[test]
    fn immediate_declaration_outside_region() {
        let model = Model::bsc_bank(2, 0.25).unwrap();
        let policy = pi2(&model, 10.0);
        let prior = Belief::new(vec![0.95, 0.05]).unwrap();
        let r = run_trial(&model, &policy, 1, &prior, 3, 100).unwrap();
        assert_eq!(r.tau, 0);
        assert_eq!(r.declared, Some(0));
        assert!(!r.correct);
    }

    #[test]
    fn replay_is_identical() {
        let model = Model::bsc_bank(3, 0.2).unwrap();
        let policy = pi2(&model, 100.0);
        let prior = Belief::uniform(3);
        let a = run_trial(&model, &policy, 2, &prior, 99, 10_000).unwrap();
        let b = run_trial(&model, &policy, 2, &prior, 99, 10_000).unwrap();
        assert_eq!(a, b);
        let x = estimate(&model, &policy, 100.0, &prior, 500, 7).unwrap();
        let y = estimate(&model, &policy, 100.0, &prior, 500, 7).unwrap();
        assert_eq!(x, y);
        // trial k alone reproduces its entry in the batch
        let all = simulate(&model, &policy, &prior, 50, 7, 10_000).unwrap();
        assert_eq!(all[17], run_indexed_trial(&model, &policy, &prior, 7, 17, 10_000));
    }

    #[test]
    fn declarations_respect_threshold() {
        let model = Model::bsc_bank(3, 0.2).unwrap();
        let policy = pi2(&model, 100.0);
        let records = simulate(&model, &policy, &Belief::uniform(3), 300, 1, 10_000).unwrap();
        for r in &records {
            assert!(!r.capped);
            assert!(r.final_max_belief >= 0.99);
        }
    }

    #[test]
    fn step_cap_counts_as_error() {
        let model = Model::bsc_bank(2, 0.45).unwrap();
        let policy = pi2(&model, 1e6);
        let r = run_trial(&model, &policy, 0, &Belief::uniform(2), 5, 3).unwrap();
        assert!(r.capped && !r.correct && r.declared.is_none());
        assert_eq!(r.tau, 3);
        assert_eq!(r.cost(1e6), 3.0 + 1e6);
    }

    #[test]
    fn estimate_components_are_consistent() {
        let model = Model::bsc_bank(2, 0.25).unwrap();
        let policy = pi2(&model, 50.0);
        let est = estimate(&model, &policy, 50.0, &Belief::uniform(2), 2000, 11).unwrap();
        assert_abs_diff_eq!(est.total_cost.mean, est.tau.mean + 50.0 * est.pe, epsilon = 1e-9);
        assert!(est.pe_upper >= est.pe);
        let one = estimate(&model, &policy, 50.0, &Belief::uniform(2), 1, 11).unwrap();
        assert!(one.degenerate_ci);
    }

    #[test]
    fn drift_on_single_action_model() {
        // both phases sample the one action, so both drifts are the same KL
        let model = Model::bsc(0.25).unwrap();
        let q = GameQuantities::compute(&model, 0.9, &SolverOptions::default()).unwrap();
        let config = PolicyConfig::new(1e4, 0.9, q).unwrap();
        let rep = drift_check(&model, &config, &Belief::uniform(2), 0, 20_000, 5).unwrap();
        let d = 0.5 * 3f64.log2();
        assert!(rep.increments_bounded());
        assert_abs_diff_eq!(rep.max_increment, model.xi());
        assert_abs_diff_eq!(rep.below.conditional, d, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.above.conditional, d, epsilon = 1e-12);
        assert!(rep.below.holds(0.05) && rep.above.holds(0.05));
    }

    #[test]
    fn synthetic_process_drifts() {
        let proc_ = SyntheticSubmartingale::new(0.5, 1.0, 2.0).unwrap();
        let mut rng = trial_rng(0, 0);
        // started at B, the hitting time is zero
        assert_eq!(proc_.hitting_time(3.0, 3.0, &mut rng), 0);
        let ci = proc_.mean_hitting_time(0.0, 10.0, 4000, 3).unwrap();
        assert!(ci.mean > 5.0 && ci.mean < 12.0, "{ci:?}");
        assert!(SyntheticSubmartingale::new(1.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn rate_sweep_single_model() {
        let sweep = rate_sweep(
            &[Model::bsc_bank(2, 0.25).unwrap()],
            PolicyKind::Pi2,
            100.0,
            0.9,
            500,
            1,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(sweep.points.len(), 1);
        let p = &sweep.points[0];
        assert_abs_diff_eq!(p.rate, 1.0 / p.estimate.tau.mean, epsilon = 1e-12);
        assert!(p.reliability >= 0.0);
    }
}
