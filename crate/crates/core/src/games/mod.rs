//! Max-min information games and the scalar summaries derived from them.
//!
//! The pairwise (μ) games are finite and solved exactly as linear programs.
//! The mixture-alternative (η) games have a continuum of column strategies;
//! they are solved by column generation: the restricted finite game gives the
//! action mixture and an upper bound, the convex inner minimization gives a
//! certified lower bound and the next column.

mod alternative;
pub mod capacity;
pub mod matrix;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;
use alternative::{Alternatives, Floor, InnerSolution};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

/// A distribution over actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionMixture(Vec<f64>);

impl ActionMixture {
    /// Accepts weights that sum to 1 within `1e-10` and renormalizes.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("action mixture"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(crate::error::invalid_arg("weights", "entries must be finite and >= 0"));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(crate::error::invalid_arg("weights", format!("sum to {s}, expected 1")));
        }
        Ok(ActionMixture(weights.into_iter().map(|w| w / s).collect()))
    }

    /// Cleans solver output: tiny negatives are dropped, mass renormalized.
    pub(crate) fn from_solver(mut weights: Vec<f64>) -> Self {
        weights.iter_mut().for_each(|w| *w = w.max(0.0));
        let s: f64 = weights.iter().sum();
        if s > 0.0 {
            weights.iter_mut().for_each(|w| *w /= s);
        } else {
            let n = weights.len() as f64;
            weights.iter_mut().for_each(|w| *w = 1.0 / n);
        }
        ActionMixture(weights)
    }

    pub fn point_mass(num_actions: usize, a: usize) -> Result<Self> {
        if a >= num_actions {
            return Err(Error::Index {
                what: "actions",
                index: a,
                size: num_actions,
            });
        }
        let mut w = vec![0.0; num_actions];
        w[a] = 1.0;
        Ok(ActionMixture(w))
    }

    pub fn uniform(num_actions: usize) -> Self {
        ActionMixture(vec![1.0 / num_actions as f64; num_actions])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Draws an action by inverting the cumulative weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (a, &w) in self.0.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = a;
            if u < acc {
                return a;
            }
        }
        last
    }

    /// `Σ_a λ_a x_a`.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&w, &v)| if w > 0.0 { w * v } else { 0.0 })
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Target certified gap, bits.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Largest certified duality gap among the games solved, bits.
    pub best_response_gap: f64,
    pub converged: bool,
}

impl SolverReport {
    fn combine(self, other: SolverReport) -> SolverReport {
        SolverReport {
            iterations: self.iterations + other.iterations,
            best_response_gap: self.best_response_gap.max(other.best_response_gap),
            converged: self.converged && other.converged,
        }
    }
}

fn check_assumption1(model: &Model) -> Result<()> {
    let m = model.num_hypotheses();
    for i in 0..m {
        for j in 0..m {
            if i != j && model.max_kl(i, j) <= 0.0 {
                return Err(Error::Precondition {
                    regime: "pairwise separation",
                    detail: format!("hypotheses {i} and {j} are indistinguishable under every action"),
                });
            }
        }
    }
    Ok(())
}

/// Replaces `+inf` payoffs by a value larger than anything finite so the LP
/// stays well posed. Returns the largest finite entry.
fn clamp_infinite(payoff: &mut [Vec<f64>]) -> f64 {
    let max_finite = payoff
        .iter()
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let big = 1e6 * (1.0 + max_finite);
    for v in payoff.iter_mut().flatten() {
        if !v.is_finite() {
            *v = big;
        }
    }
    max_finite
}

/// Solves a finite game whose payoff may contain `+inf`; the value is `+inf`
/// when the row player can force an infinite payoff against every column.
fn solve_clamped(mut payoff: Vec<Vec<f64>>) -> (matrix::MatrixGameSolution, f64) {
    let max_finite = clamp_infinite(&mut payoff);
    let sol = matrix::solve(&payoff);
    let value = if sol.lower > max_finite {
        f64::INFINITY
    } else {
        sol.lower
    };
    (sol, value)
}

/// Pairwise-divergence games.
#[derive(Debug, Clone, Serialize)]
pub struct MuSolution {
    pub mu0: ActionMixture,
    pub mu: Vec<ActionMixture>,
    /// `min_{i≠j} Σ_a μ₀[a] D(q[a][i] || q[a][j])`.
    pub i_mu0: f64,
    /// `min_{j≠i} Σ_a μᵢ[a] D(q[a][i] || q[a][j])`.
    pub d_mu: Vec<f64>,
    pub report: SolverReport,
}

/// Solves the `μ₀` game (columns are all ordered pairs) and the `μᵢ` games
/// (pairs with first coordinate `i`).
pub fn solve_mu(model: &Model, opts: &SolverOptions) -> Result<MuSolution> {
    check_assumption1(model)?;
    let m = model.num_hypotheses();
    let k = model.num_actions();
    // kl[a][i][j]
    let kl: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|a| (0..m).map(|i| (0..m).map(|j| model.kl_unchecked(i, j, a)).collect()).collect())
        .collect();

    let mut report = SolverReport {
        iterations: 0,
        best_response_gap: 0.0,
        converged: true,
    };
    let mut record = |sol: &matrix::MatrixGameSolution, value: f64| {
        let gap = if value.is_finite() { sol.gap() } else { 0.0 };
        report.iterations += sol.pivots;
        report.best_response_gap = report.best_response_gap.max(gap);
        report.converged &= gap <= opts.tol;
    };

    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let payoff0: Vec<Vec<f64>> = (0..k).map(|a| pairs.iter().map(|&(i, j)| kl[a][i][j]).collect()).collect();
    let (sol0, i_mu0) = solve_clamped(payoff0);
    record(&sol0, i_mu0);

    let mut mu = Vec::with_capacity(m);
    let mut d_mu = Vec::with_capacity(m);
    for i in 0..m {
        let payoff: Vec<Vec<f64>> = (0..k)
            .map(|a| (0..m).filter(|&j| j != i).map(|j| kl[a][i][j]).collect())
            .collect();
        let (sol, value) = solve_clamped(payoff);
        record(&sol, value);
        mu.push(ActionMixture::from_solver(sol.row_strategy));
        d_mu.push(value);
    }
    Ok(MuSolution {
        mu0: ActionMixture::from_solver(sol0.row_strategy),
        mu,
        i_mu0,
        d_mu,
        report,
    })
}

/// Mixture-alternative games.
#[derive(Debug, Clone, Serialize)]
pub struct EtaSolution {
    pub eta0: ActionMixture,
    pub eta: Vec<ActionMixture>,
    pub i_eta0: f64,
    /// `I_{η,ρ̃}`: alternatives with weight at least `ρ̃` on some `k ≠ i`,
    /// scored with `η_k`.
    pub i_eta_threshold: f64,
    /// `min(i_eta0, i_eta_threshold)`.
    pub i_2: f64,
    pub d_eta: Vec<f64>,
    pub threshold_rho: f64,
    pub report: SolverReport,
}

struct CgResult {
    lambda: Vec<f64>,
    /// Certified lower bound on the game value (bits).
    lower: f64,
    upper: f64,
    iterations: usize,
}

impl CgResult {
    fn report(&self, tol: f64) -> SolverReport {
        let gap = if self.lower.is_infinite() {
            0.0
        } else {
            (self.upper - self.lower).max(0.0)
        };
        SolverReport {
            iterations: self.iterations,
            best_response_gap: gap,
            converged: gap <= tol,
        }
    }
}

const INNER_MAX_STEPS: usize = 50_000;

/// Column generation for `max_λ min_{t ∈ targets} min_w Σ_a λ_a D(q[a][t] || m_a(w))`.
fn column_generation(model: &Model, targets: &[usize], opts: &SolverOptions) -> CgResult {
    let k = model.num_actions();
    let alts: Vec<Alternatives<'_>> = targets.iter().map(|&t| Alternatives::new(model, t, None)).collect();
    // columns stored as payoff vectors over actions
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (alt, &t) in alts.iter().zip(targets) {
        for j in (0..model.num_hypotheses()).filter(|&j| j != t) {
            columns.push(alt.payoff(&alt.vertex(j)));
        }
        columns.push(alt.payoff(&alt.centre()));
    }
    let mut warm: Vec<Option<Vec<f64>>> = vec![None; alts.len()];
    let mut best = CgResult {
        lambda: vec![1.0 / k as f64; k],
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        iterations: 0,
    };
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let payoff: Vec<Vec<f64>> = (0..k).map(|a| columns.iter().map(|c| c[a]).collect()).collect();
        let (sol, value) = solve_clamped(payoff);
        let lambda = ActionMixture::from_solver(sol.row_strategy).0;
        let upper = if value.is_infinite() { f64::INFINITY } else { sol.upper };
        best.upper = best.upper.min(upper);

        let gap = best.upper - best.lower.max(0.0);
        let inner_tol = if gap.is_finite() {
            (0.01 * gap).clamp(0.1 * opts.tol, 1e-3)
        } else {
            1e-3
        };
        let inner: Vec<InnerSolution> = alts
            .iter()
            .zip(&warm)
            .map(|(alt, w)| alt.minimize(&lambda, w.as_deref(), inner_tol, INNER_MAX_STEPS))
            .collect();
        let lower = inner.iter().map(|s| s.lower.max(0.0)).fold(f64::INFINITY, f64::min);
        if lower > best.lower {
            best.lower = lower;
            best.lambda = lambda.clone();
        }
        if best.lower.is_infinite() || best.upper - best.lower <= opts.tol {
            break;
        }
        let mut added = false;
        for ((alt, s), w) in alts.iter().zip(&inner).zip(warm.iter_mut()) {
            // only alternatives that undercut the restricted value help
            if s.value < upper - 0.5 * opts.tol {
                columns.push(alt.payoff(&s.weights));
                added = true;
            }
            *w = Some(s.weights.clone());
        }
        if !added && inner_tol <= 0.1 * opts.tol {
            break;
        }
    }
    best.iterations = iterations;
    best
}

/// Certified `min_w Σ_a λ_a D(q[a][i] || m_a(w))`, optionally with a weight
/// floor on one alternative.
fn inner_value(model: &Model, target: usize, floor: Option<Floor>, lambda: &[f64], tol: f64) -> f64 {
    let alt = Alternatives::new(model, target, floor);
    alt.minimize(lambda, None, tol, INNER_MAX_STEPS).lower.max(0.0)
}

/// Solves the `η₀`, `ηᵢ` games and evaluates `I_{η,ρ̃}` at `threshold_rho`.
///
/// The alternative weights range over the whole simplex, which can only
/// lower the computed divergences relative to a restricted alternative set.
pub fn solve_eta(model: &Model, threshold_rho: f64, opts: &SolverOptions) -> Result<EtaSolution> {
    check_assumption1(model)?;
    if !(threshold_rho > 0.5 && threshold_rho < 1.0) {
        return Err(crate::error::invalid_arg(
            "threshold_rho",
            format!("must lie in (0.5, 1), got {threshold_rho}"),
        ));
    }
    let m = model.num_hypotheses();
    let all: Vec<usize> = (0..m).collect();
    let g0 = column_generation(model, &all, opts);
    let mut report = g0.report(opts.tol);

    let mut eta = Vec::with_capacity(m);
    let mut d_eta = Vec::with_capacity(m);
    for i in 0..m {
        let gi = column_generation(model, &[i], opts);
        report = report.combine(gi.report(opts.tol));
        d_eta.push(gi.lower);
        eta.push(ActionMixture::from_solver(gi.lambda));
    }

    let inner_tol = 0.1 * opts.tol;
    let mut i_eta_threshold = f64::INFINITY;
    for i in 0..m {
        for k in (0..m).filter(|&k| k != i) {
            let floor = Floor {
                hypothesis: k,
                weight: threshold_rho,
            };
            let v = inner_value(model, i, Some(floor), eta[k].weights(), inner_tol);
            i_eta_threshold = i_eta_threshold.min(v);
        }
    }
    let i_eta0 = g0.lower;
    Ok(EtaSolution {
        eta0: ActionMixture::from_solver(g0.lambda),
        eta,
        i_eta0,
        i_eta_threshold,
        i_2: i_eta0.min(i_eta_threshold),
        d_eta,
        threshold_rho,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IMaxSolution {
    /// Certified upper end of the capacity bracket, bits.
    pub i_max: f64,
    pub lower: f64,
    pub action: usize,
    pub report: SolverReport,
}

/// `I_max = max_a` capacity of the channel hypothesis → symbol under `a`.
pub fn solve_i_max(model: &Model, opts: &SolverOptions) -> IMaxSolution {
    let m = model.num_hypotheses();
    let mut best: Option<IMaxSolution> = None;
    let mut iterations = 0;
    let mut gap: f64 = 0.0;
    for a in 0..model.num_actions() {
        let rows: Vec<&[f64]> = (0..m).map(|i| model.row(a, i)).collect();
        // capacity is cheap; bracket it well inside the requested tolerance
        let c = capacity::channel_capacity(&rows, opts.tol * 1e-3, opts.max_iterations);
        iterations += c.iterations;
        gap = gap.max(c.upper - c.lower);
        if best.as_ref().is_none_or(|b| c.upper > b.i_max) {
            best = Some(IMaxSolution {
                i_max: c.upper,
                lower: c.lower,
                action: a,
                report: SolverReport {
                    iterations: 0,
                    best_response_gap: 0.0,
                    converged: true,
                },
            });
        }
    }
    let mut best = best.expect("model has at least one action");
    best.report = SolverReport {
        iterations,
        best_response_gap: gap,
        converged: gap <= opts.tol * 1e-3,
    };
    best
}

/// `I₁ = I_μ₀ · (min_i min_{j≠i} Σ_a μⱼ[a] D(q[a][i] || q[a][j]) / (log M + 4ξ))²`;
/// zero when `ξ` is infinite.
pub fn compute_i1(model: &Model, mu: &MuSolution) -> f64 {
    let xi = model.xi();
    if !xi.is_finite() || mu.i_mu0 <= 0.0 {
        return 0.0;
    }
    let m = model.num_hypotheses();
    let mut inner = f64::INFINITY;
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            let s: f64 = (0..model.num_actions())
                .map(|a| {
                    let w = mu.mu[j].weights()[a];
                    if w > 0.0 {
                        w * model.kl_unchecked(i, j, a)
                    } else {
                        0.0
                    }
                })
                .sum();
            inner = inner.min(s);
        }
    }
    let ratio = inner / ((m as f64).log2() + 4.0 * xi);
    mu.i_mu0 * ratio * ratio
}

/// `α(L, M) = (M−1)/(M−1 + 2^{L·I_max})`, evaluated without overflow.
pub fn alpha(penalty: f64, m: usize, i_max: f64) -> f64 {
    let e = penalty * i_max - ((m - 1) as f64).log2();
    1.0 / (1.0 + e.exp2())
}

fn harmonic_mean(d: &[f64]) -> f64 {
    if d.iter().any(|&x| x <= 0.0) {
        return 0.0;
    }
    d.len() as f64 / d.iter().map(|x| 1.0 / x).sum::<f64>()
}

/// All scalar summaries of a model needed by the policies and bounds.
#[derive(Debug, Clone, Serialize)]
pub struct GameQuantities {
    pub num_hypotheses: usize,
    pub mu0: ActionMixture,
    pub mu: Vec<ActionMixture>,
    pub eta0: ActionMixture,
    pub eta: Vec<ActionMixture>,
    pub i_mu0: f64,
    pub i_1: f64,
    pub d_mu: Vec<f64>,
    pub i_eta0: f64,
    pub i_eta_threshold: f64,
    pub i_2: f64,
    pub d_eta: Vec<f64>,
    pub i_max: f64,
    pub i_max_action: usize,
    pub d_max: f64,
    pub xi: f64,
    pub d1_harmonic: f64,
    pub d2_harmonic: f64,
    pub threshold_rho: f64,
    pub mu_report: SolverReport,
    pub eta_report: SolverReport,
    pub i_max_report: SolverReport,
}

impl GameQuantities {
    pub fn compute(model: &Model, threshold_rho: f64, opts: &SolverOptions) -> Result<Self> {
        let mu = solve_mu(model, opts)?;
        let eta = solve_eta(model, threshold_rho, opts)?;
        let imax = solve_i_max(model, opts);
        let i_1 = compute_i1(model, &mu);
        Ok(GameQuantities {
            num_hypotheses: model.num_hypotheses(),
            d1_harmonic: harmonic_mean(&mu.d_mu),
            d2_harmonic: harmonic_mean(&eta.d_eta),
            mu0: mu.mu0,
            mu: mu.mu,
            eta0: eta.eta0,
            eta: eta.eta,
            i_mu0: mu.i_mu0,
            i_1,
            d_mu: mu.d_mu,
            i_eta0: eta.i_eta0,
            i_eta_threshold: eta.i_eta_threshold,
            i_2: eta.i_2,
            d_eta: eta.d_eta,
            i_max: imax.i_max,
            i_max_action: imax.action,
            d_max: model.d_max(),
            xi: model.xi(),
            threshold_rho,
            mu_report: mu.report,
            eta_report: eta.report,
            i_max_report: imax.report,
        })
    }

    /// Every solver reached its requested gap.
    pub fn converged(&self) -> bool {
        self.mu_report.converged && self.eta_report.converged && self.i_max_report.converged
    }

    /// Flat `(name, value)` list of the scalar quantities.
    pub fn scalars(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("i_mu0".to_string(), self.i_mu0),
            ("i_1".to_string(), self.i_1),
            ("i_eta0".to_string(), self.i_eta0),
            ("i_eta_threshold".to_string(), self.i_eta_threshold),
            ("i_2".to_string(), self.i_2),
            ("i_max".to_string(), self.i_max),
            ("d_max".to_string(), self.d_max),
            ("xi".to_string(), self.xi),
            ("d1_harmonic".to_string(), self.d1_harmonic),
            ("d2_harmonic".to_string(), self.d2_harmonic),
            ("threshold_rho".to_string(), self.threshold_rho),
        ];
        for (i, d) in self.d_mu.iter().enumerate() {
            out.push((format!("d_mu_{i}"), *d));
        }
        for (i, d) in self.d_eta.iter().enumerate() {
            out.push((format!("d_eta_{i}"), *d));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn dominant_action_gets_all_mass() {
        let m = Model::from_kernels(vec![
            vec![vec![0.9, 0.1], vec![0.1, 0.9]],
            vec![vec![0.6, 0.4], vec![0.4, 0.6]],
        ])
        .unwrap();
        let s = solve_mu(&m, &opts()).unwrap();
        assert_abs_diff_eq!(s.mu0.weights()[0], 1.0, epsilon = 1e-12);
        assert!(s.report.converged);
    }

    #[test]
    fn forced_support_violation_is_infinite() {
        // each action has one infinite direction; mixing both makes every
        // pair infinitely separated
        let m = Model::from_kernels(vec![
            vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            vec![vec![0.5, 0.5], vec![1.0, 0.0]],
        ])
        .unwrap();
        let s = solve_mu(&m, &opts()).unwrap();
        assert!(s.i_mu0.is_infinite());
        assert_abs_diff_eq!(s.mu0.weights()[0], 0.5, epsilon = 1e-9);
        assert_eq!(compute_i1(&m, &s), 0.0);
    }

    #[test]
    fn single_action_bsc() {
        let m = Model::bsc(0.25).unwrap();
        let d = 0.5 * 3f64.log2();
        let s = solve_mu(&m, &opts()).unwrap();
        assert_eq!(s.mu0.weights(), &[1.0]);
        assert_abs_diff_eq!(s.i_mu0, d, epsilon = 1e-12);
        let e = solve_eta(&m, 0.9, &opts()).unwrap();
        assert_abs_diff_eq!(e.d_eta[0], d, epsilon = 1e-9);
        assert_abs_diff_eq!(e.i_2, d, epsilon = 1e-9);
    }

    #[test]
    fn two_hypotheses_eta_equals_mu() {
        let m = Model::from_kernels(vec![
            vec![vec![0.7, 0.2, 0.1], vec![0.2, 0.3, 0.5]],
            vec![vec![0.4, 0.4, 0.2], vec![0.1, 0.8, 0.1]],
        ])
        .unwrap();
        let mu = solve_mu(&m, &opts()).unwrap();
        let eta = solve_eta(&m, 0.9, &opts()).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(mu.d_mu[i], eta.d_eta[i], epsilon = 1e-6);
            assert_abs_diff_eq!(mu.d_mu[i], m.max_kl(i, 1 - i), epsilon = 1e-9);
        }
        assert_abs_diff_eq!(mu.i_mu0, eta.i_eta0, epsilon = 1e-6);
    }

    #[test]
    fn identical_kernels_are_rejected() {
        let m = Model::from_kernels(vec![vec![vec![0.4, 0.6], vec![0.4, 0.6]]]).unwrap();
        assert!(matches!(solve_mu(&m, &opts()), Err(Error::Precondition { .. })));
        let imax = solve_i_max(&m, &opts());
        assert_abs_diff_eq!(imax.i_max, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bank_search_matches_closed_form() {
        let p = 0.25;
        let m = Model::bsc_bank(4, p).unwrap();
        let e = solve_eta(&m, 0.9, &opts()).unwrap();
        let closed = (1.0 - 2.0 * p) * ((1.0 - p) / p).log2();
        for d in &e.d_eta {
            assert_abs_diff_eq!(*d, closed, epsilon = 1e-5);
        }
        assert!(e.report.converged, "{:?}", e.report);
    }

    #[test]
    fn i1_plugs_into_formula() {
        let m = Model::bsc(0.25).unwrap();
        let mu = solve_mu(&m, &opts()).unwrap();
        let d = 0.5 * 3f64.log2();
        let expect = d * (d / (1.0 + 4.0 * 3f64.log2())).powi(2);
        assert_abs_diff_eq!(compute_i1(&m, &mu), expect, epsilon = 1e-12);
    }

    #[test]
    fn alpha_values() {
        assert_abs_diff_eq!(alpha(50.0, 4, 0.0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(alpha(1.0, 2, 1.0), 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(alpha(1e9, 2, 1.0), 0.0);
    }

    #[test]
    fn quantities_chain_and_permutation() {
        let m = Model::from_kernels(vec![
            vec![vec![0.7, 0.3], vec![0.4, 0.6], vec![0.2, 0.8]],
            vec![vec![0.5, 0.5], vec![0.9, 0.1], vec![0.3, 0.7]],
            vec![vec![0.6, 0.4], vec![0.6, 0.4], vec![0.1, 0.9]],
        ])
        .unwrap();
        let q = GameQuantities::compute(&m, 0.9, &opts()).unwrap();
        assert!(q.converged());
        let tol = 2e-6;
        for i in 0..3 {
            assert!(q.i_2 <= q.d_eta[i] + tol);
            assert!(q.d_eta[i] <= q.d_mu[i] + tol);
            assert!(q.d_mu[i] <= q.d_max + tol);
        }
        assert!(q.d_max <= q.xi);
        assert_abs_diff_eq!(q.i_2, q.i_eta0.min(q.i_eta_threshold), epsilon = 0.0);

        let perm = [2, 0, 1];
        let pm = m.permute_hypotheses(&perm).unwrap();
        let pq = GameQuantities::compute(&pm, 0.9, &opts()).unwrap();
        assert_abs_diff_eq!(q.i_mu0, pq.i_mu0, epsilon = 1e-9);
        assert_abs_diff_eq!(q.i_eta0, pq.i_eta0, epsilon = 2e-6);
        let mut a: Vec<f64> = q.d_eta.clone();
        let mut b: Vec<f64> = pq.d_eta.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 2e-6);
        }
    }

    #[test]
    fn harmonic_means() {
        assert_abs_diff_eq!(harmonic_mean(&[1.0, 3.0]), 1.5, epsilon = 1e-15);
        assert_eq!(harmonic_mean(&[0.0, 3.0]), 0.0);
    }
}
