//! Explicit lower and upper bounds on the optimal expected cost `V*(ρ)`.
//!
//! Every bound is clipped at zero. A bound whose evaluation involves an
//! infinite quantity is reported as [`Bound::Infinite`] (vacuous), and a
//! bound whose feasibility condition fails as [`Bound::Infeasible`].
//! Constants that have no closed form here (`K'`, `K'₁`, `K'₂`, `K'₃`) are
//! caller-supplied.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{invalid_arg, Error, Result};
use crate::games::{self, GameQuantities};
use crate::info::{self, pos, LOG2_E};
use crate::model::{Belief, Model};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Value(f64),
    /// The formula evaluates to `+inf`.
    Infinite,
    /// A feasibility condition of the formula fails.
    Infeasible,
}

impl Bound {
    fn clipped(x: f64) -> Bound {
        if x == f64::INFINITY {
            Bound::Infinite
        } else if x.is_nan() {
            Bound::Infeasible
        } else {
            Bound::Value(pos(x))
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(v),
            _ => None,
        }
    }

    /// `+inf` for [`Bound::Infinite`], `NaN` for [`Bound::Infeasible`].
    pub fn as_f64(self) -> f64 {
        match self {
            Bound::Value(v) => v,
            Bound::Infinite => f64::INFINITY,
            Bound::Infeasible => f64::NAN,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Value(v) => write!(f, "{v}"),
            Bound::Infinite => f.write_str("inf"),
            Bound::Infeasible => f.write_str("infeasible"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Value(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// Free parameters of the bounds. `None` selects the default for each
/// bound: `δ = (log L)^{-1/3}` (Chernoff-style bound), `δ = 1/log(2ML)`
/// (entropy bounds), `ι = (log L)^{-1/4}`, `b = log log(LM)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub k1_prime: f64,
    pub k2_prime: f64,
    /// Multiplies `log 2L` inside the Chernoff-style bound; must be > 0.
    pub k_prime: f64,
    pub k3_prime: f64,
    pub delta: Option<f64>,
    pub iota: Option<f64>,
    pub b: Option<f64>,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            k1_prime: 0.0,
            k2_prime: 0.0,
            k_prime: 1.0,
            k3_prime: 0.0,
            delta: None,
            iota: None,
            b: None,
        }
    }
}

impl BoundParams {
    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("k1_prime", self.k1_prime),
            ("k2_prime", self.k2_prime),
            ("k3_prime", self.k3_prime),
        ] {
            if !(v >= 0.0) {
                return Err(invalid_arg(name, format!("must be >= 0, got {v}")));
            }
        }
        if !(self.k_prime > 0.0) {
            return Err(invalid_arg("k_prime", format!("must be > 0, got {}", self.k_prime)));
        }
        Ok(())
    }
}

fn check_penalty(penalty: f64) -> Result<()> {
    if !(penalty > 1.0) || penalty.is_infinite() {
        return Err(invalid_arg("L", format!("must be finite and > 1, got {penalty}")));
    }
    Ok(())
}

fn check_region(belief: &Belief, penalty: f64) -> Result<()> {
    if !belief.in_region_of_interest(penalty) {
        return Err(Error::Precondition {
            regime: "region of interest: min_j (1 - rho_j) L > 1",
            detail: format!(
                "stopping cost {} <= 1 at L = {penalty}; declaring immediately is optimal",
                belief.stopping_cost(penalty)
            ),
        });
    }
    Ok(())
}

fn check_xi(xi: f64) -> Result<()> {
    if !xi.is_finite() {
        return Err(Error::Precondition {
            regime: "bounded log-likelihood ratios",
            detail: "xi_M is infinite (hypotheses with different supports)".into(),
        });
    }
    Ok(())
}

/// `Σ_i ρ_i log L / d_i`; infinite when some `d_i ≤ 0` carries mass.
fn weighted_log_penalty(belief: &Belief, penalty: f64, d: &[f64], shift: f64) -> f64 {
    let log_l = penalty.log2();
    belief
        .probs()
        .iter()
        .zip(d)
        .filter(|(&r, _)| r > 0.0)
        .map(|(&r, &di)| {
            let den = di - shift;
            if den <= 0.0 {
                f64::INFINITY
            } else {
                r * log_l / den
            }
        })
        .sum()
}

fn log_odds(t: f64) -> f64 {
    (t / (1.0 - t)).log2()
}

/// Bound evaluator for one model and its game quantities.
#[derive(Debug, Clone, Copy)]
pub struct Bounds<'a> {
    model: &'a Model,
    q: &'a GameQuantities,
}

impl<'a> Bounds<'a> {
    pub fn new(model: &'a Model, quantities: &'a GameQuantities) -> Result<Self> {
        if quantities.num_hypotheses != model.num_hypotheses() {
            return Err(invalid_arg(
                "quantities",
                format!(
                    "computed for M = {}, model has M = {}",
                    quantities.num_hypotheses,
                    model.num_hypotheses()
                ),
            ));
        }
        Ok(Bounds { model, q: quantities })
    }

    pub fn quantities(&self) -> &GameQuantities {
        self.q
    }

    fn check_belief(&self, belief: &Belief) -> Result<()> {
        if belief.len() != self.model.num_hypotheses() {
            return Err(Error::InvalidBelief(format!(
                "belief has {} entries, model has {} hypotheses",
                belief.len(),
                self.model.num_hypotheses()
            )));
        }
        Ok(())
    }

    /// Log-likelihood lower bound:
    /// `[Σ_i ρ_i max_{j≠i} (log(L-1) - log(ρ_i/ρ_j)) / max_a D(q_i||q_j) - K'₁]⁺`.
    pub fn lb_v1(&self, belief: &Belief, penalty: f64, params: &BoundParams) -> Result<Bound> {
        params.check()?;
        self.check_belief(belief)?;
        check_penalty(penalty)?;
        check_region(belief, penalty)?;
        let m = self.model.num_hypotheses();
        let rho = belief.probs();
        let target = (penalty - 1.0).log2();
        let mut total = 0.0;
        for i in 0..m {
            if rho[i] <= 0.0 {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for j in (0..m).filter(|&j| j != i) {
                let d = self.model.max_kl(i, j);
                if d <= 0.0 {
                    return Err(Error::Precondition {
                        regime: "pairwise separation",
                        detail: format!("hypotheses {i} and {j} are indistinguishable"),
                    });
                }
                if rho[j] <= 0.0 {
                    continue;
                }
                let num = target - (rho[i] / rho[j]).log2();
                let term = if d.is_infinite() { 0.0 } else { num / d };
                best = best.max(term);
            }
            if best.is_finite() {
                total += rho[i] * best;
            }
        }
        Ok(Bound::clipped(total - params.k1_prime))
    }

    /// Chernoff-style lower bound with the per-hypothesis game values
    /// `d_mu[i]` in the denominators.
    pub fn lb_chernoff(&self, belief: &Belief, penalty: f64, params: &BoundParams) -> Result<Bound> {
        params.check()?;
        self.check_belief(belief)?;
        check_penalty(penalty)?;
        check_region(belief, penalty)?;
        check_xi(self.q.xi)?;
        let delta = params.delta.unwrap_or_else(|| penalty.log2().powf(-1.0 / 3.0));
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid_arg("delta", format!("must lie in (0, 1), got {delta}")));
        }
        let m = self.model.num_hypotheses();
        let rho = belief.probs();
        let k_log = params.k_prime * (2.0 * penalty).log2();
        let head = (1.0 - delta) * (penalty / k_log).log2();
        let leak = 2.0 * m as f64 * (k_log / penalty).powf(delta);
        let mut total = 0.0;
        for i in 0..m {
            if rho[i] <= 0.0 {
                continue;
            }
            let worst_ratio = (0..m)
                .filter(|&j| j != i)
                .map(|j| (rho[i] / rho[j]).log2())
                .fold(f64::NEG_INFINITY, f64::max);
            let num = pos(head - worst_ratio);
            if num == 0.0 {
                continue;
            }
            total += rho[i] * num / (self.q.d_mu[i] + delta) * (1.0 - leak / rho[i]);
        }
        total -= m as f64 * self.q.xi * self.q.xi / (delta * delta);
        Ok(Bound::clipped(total))
    }

    /// Entropy lower bound with no unknown constants:
    /// `[(H(ρ) - H(α) - α log(M-1))/I_max + αL]⁺`.
    pub fn lb_alpha_form(&self, belief: &Belief, penalty: f64) -> Result<Bound> {
        self.check_belief(belief)?;
        check_penalty(penalty)?;
        lb_alpha_form(belief, penalty, self.q.i_max)
    }

    fn entropy_regime(&self, penalty: f64) -> Result<()> {
        let m = self.model.num_hypotheses() as f64;
        let floor = m.log2() / self.q.i_max;
        if !(penalty > 1.0 && penalty > floor) {
            return Err(Error::Precondition {
                regime: "L > max(1, log M / I_max); below it the optimal policy guesses without sampling",
                detail: format!("L = {penalty}, log M / I_max = {floor}"),
            });
        }
        Ok(())
    }

    fn entropy_delta(&self, penalty: f64, params: &BoundParams) -> Result<f64> {
        let m = self.model.num_hypotheses() as f64;
        let delta = params.delta.unwrap_or_else(|| 1.0 / (2.0 * m * penalty).log2());
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(invalid_arg("delta", format!("must lie in (0, 0.5], got {delta}")));
        }
        Ok(delta)
    }

    /// Shared body of the two entropy/log-likelihood lower bounds; `slack`
    /// is `ξ` or `b`.
    fn lb_entropy_core(&self, belief: &Belief, penalty: f64, delta: f64, slack: f64, k: f64) -> f64 {
        let m = self.model.num_hypotheses() as f64;
        let first = (belief.entropy() - info::binary_entropy(delta) - delta * (m - 1.0).log2()) / self.q.i_max;
        let (_, max_rho) = belief.argmax();
        let second = if max_rho <= 1.0 - delta {
            ((penalty - 1.0).log2() - ((1.0 - delta) / delta).log2() - slack) / self.q.d_max
        } else {
            0.0
        };
        first + second - k
    }

    pub fn lb_v2(&self, belief: &Belief, penalty: f64, params: &BoundParams) -> Result<Bound> {
        params.check()?;
        self.check_belief(belief)?;
        check_penalty(penalty)?;
        check_xi(self.q.xi)?;
        self.entropy_regime(penalty)?;
        let delta = self.entropy_delta(penalty, params)?;
        Ok(Bound::clipped(self.lb_entropy_core(belief, penalty, delta, self.q.xi, params.k2_prime)))
    }

    /// The uniform-prior specialization of [`Bounds::lb_v2`] at the default
    /// `δ`, with the family extremes taken at this single model:
    /// `[(log M - 2)/I_max + log(L-1)/D_max - (log log(LM) + ξ)/D_max - K'₂]⁺`.
    pub fn lb_uniform(&self, penalty: f64, params: &BoundParams) -> Result<Bound> {
        params.check()?;
        check_xi(self.q.xi)?;
        self.entropy_regime(penalty)?;
        if !(penalty > 2.0) {
            return Err(invalid_arg("L", format!("must be > 2, got {penalty}")));
        }
        let m = self.model.num_hypotheses() as f64;
        let v = (m.log2() - 2.0) / self.q.i_max + (penalty - 1.0).log2() / self.q.d_max
            - ((penalty * m).log2().log2() + self.q.xi) / self.q.d_max
            - params.k2_prime;
        Ok(Bound::clipped(v))
    }

    fn default_b(&self, penalty: f64, params: &BoundParams) -> Result<f64> {
        let m = self.model.num_hypotheses() as f64;
        let b = params.b.unwrap_or_else(|| (penalty * m).log2().log2());
        if !(b > 0.0) {
            return Err(invalid_arg("b", format!("must be > 0, got {b}")));
        }
        Ok(b)
    }

    /// Lower bound without the bounded-ratio assumption, using `ψ(b)`.
    pub fn lb_v3(&self, belief: &Belief, penalty: f64, params: &BoundParams) -> Result<Bound> {
        params.check()?;
        self.check_belief(belief)?;
        check_penalty(penalty)?;
        self.entropy_regime(penalty)?;
        let delta = self.entropy_delta(penalty, params)?;
        let b = self.default_b(penalty, params)?;
        let psi = self.model.psi(b)?;
        let shrink = 1.0 / (1.0 + psi / self.q.d_max);
        let inner = pos(self.lb_entropy_core(belief, penalty, delta, b, params.k3_prime));
        Ok(Bound::clipped(shrink * inner))
    }

    /// Upper bound from the analysis of the pairwise two-phase policy.
    pub fn ub_v1bar(&self, belief: &Belief, penalty: f64, params: &BoundParams) -> Result<Bound> {
        params.check()?;
        self.check_belief(belief)?;
        check_penalty(penalty)?;
        check_xi(self.q.xi)?;
        let iota = params.iota.unwrap_or_else(|| penalty.log2().powf(-0.25));
        if !(iota > 0.0 && iota < 1.0) {
            return Err(invalid_arg("iota", format!("must lie in (0, 1), got {iota}")));
        }
        let i1 = self.q.i_1;
        if i1 <= 0.0 {
            return Ok(Bound::Infinite);
        }
        let m = self.model.num_hypotheses() as f64;
        let xi = self.q.xi;
        let scale = 1.0 + iota;
        let entropy = (belief.entropy() + m.log2() + log_odds(self.q.threshold_rho)) / i1 * scale;
        let sampling = weighted_log_penalty(belief, penalty, &self.q.d_mu, 0.0) * scale;
        let (_, max_rho) = belief.argmax();
        let base = penalty * (1.0 - max_rho);
        let exponent = iota.powi(3) / (scale * scale) * i1 * i1 / (4.0 * xi.powi(3));
        let coef = m * (2.0 + 1.0 / ((iota / 2.0 / scale).powi(5) * (i1 / (2.0 * xi)).powi(4)));
        let tail = if base <= 0.0 {
            f64::INFINITY
        } else {
            coef * base.powf(-exponent)
        };
        Ok(Bound::clipped(entropy + sampling + tail + 2.0))
    }

    /// Upper bound from the analysis of the mixture two-phase policy:
    /// `(H(ρ) + log(ρ̃/(1-ρ̃)) + ξ + log e)/I₂ + Σ_i ρ_i log L / D_ηi + 1`.
    pub fn ub_v2bar(&self, belief: &Belief, penalty: f64) -> Result<Bound> {
        self.check_belief(belief)?;
        check_penalty(penalty)?;
        check_xi(self.q.xi)?;
        if self.q.i_2 <= 0.0 {
            return Ok(Bound::Infinite);
        }
        let head = (belief.entropy() + log_odds(self.q.threshold_rho) + self.q.xi + LOG2_E) / self.q.i_2;
        let tail = weighted_log_penalty(belief, penalty, &self.q.d_eta, 0.0);
        Ok(Bound::clipped(head + tail + 1.0))
    }

    /// The tightened form, valid when `I_η₀ > I_{η,ρ̃}`. Returns the bound
    /// and whether the tightened form was used; otherwise it falls back to
    /// [`Bounds::ub_v2bar`].
    pub fn ub_v2bar_refined(&self, belief: &Belief, penalty: f64) -> Result<(Bound, bool)> {
        let plain = self.ub_v2bar(belief, penalty)?;
        let q = self.q;
        if !(q.i_eta0 > q.i_eta_threshold) || q.i_eta_threshold <= 0.0 {
            return Ok((plain, false));
        }
        let m = self.model.num_hypotheses() as f64;
        let rt = q.threshold_rho;
        let v = (belief.entropy() + log_odds(rt) + q.xi) / q.i_eta0
            + weighted_log_penalty(belief, penalty, &q.d_eta, 0.0)
            + ((1.0 - rt) * m.log2() + (2.0 - rt) * q.xi + 4.0 + LOG2_E) / q.i_eta_threshold
            + 1.0;
        Ok((Bound::clipped(v), true))
    }

    /// Upper bound using `ψ(b)` in place of `ξ`. [`Bound::Infeasible`] when
    /// `ψ(b) ≥ I₂` or the correction factor is not below 1.
    pub fn ub_v3(&self, belief: &Belief, penalty: f64, params: &BoundParams) -> Result<Bound> {
        params.check()?;
        self.check_belief(belief)?;
        check_penalty(penalty)?;
        let b = self.default_b(penalty, params)?;
        let psi = self.model.psi(b)?;
        let q = self.q;
        let room = q.i_2 - psi;
        if !(room > 0.0) {
            return Ok(Bound::Infeasible);
        }
        let c = (1.0 + LOG2_E / b) * (-b).exp2() * psi / room;
        if !(c < 1.0) {
            return Ok(Bound::Infeasible);
        }
        let sampling = weighted_log_penalty(belief, penalty, &q.d_eta, psi);
        if sampling.is_infinite() {
            return Ok(Bound::Infeasible);
        }
        let head = (belief.entropy() + log_odds(q.threshold_rho) + b + LOG2_E) / room;
        Ok(Bound::clipped((head + sampling) / (1.0 - c) + 1.0))
    }

    /// Every bound at one belief and penalty. Bounds whose preconditions
    /// fail are recorded with the reason instead of a value.
    pub fn report(&self, belief: &Belief, penalty: f64, params: &BoundParams) -> BoundReport {
        let mut entries = Vec::new();
        let mut push = |name: &'static str, r: Result<Bound>, fallback: Option<&str>| {
            entries.push(match r {
                Ok(b) => BoundEntry {
                    name,
                    bound: Some(b),
                    note: fallback.map(str::to_string),
                },
                Err(e) => BoundEntry {
                    name,
                    bound: None,
                    note: Some(e.to_string()),
                },
            })
        };
        push("lb_v1", self.lb_v1(belief, penalty, params), None);
        push("lb_chernoff", self.lb_chernoff(belief, penalty, params), None);
        push("lb_alpha_form", self.lb_alpha_form(belief, penalty), None);
        push("lb_v2", self.lb_v2(belief, penalty, params), None);
        push("lb_uniform", self.lb_uniform(penalty, params), None);
        push("lb_v3", self.lb_v3(belief, penalty, params), None);
        push("ub_v1bar", self.ub_v1bar(belief, penalty, params), None);
        push("ub_v2bar", self.ub_v2bar(belief, penalty), None);
        let refined = self.ub_v2bar_refined(belief, penalty);
        let fell_back = matches!(refined, Ok((_, false)));
        push(
            "ub_v2bar_refined",
            refined.map(|(b, _)| b),
            fell_back.then_some("I_eta0 <= I_eta_threshold: fell back to ub_v2bar"),
        );
        push("ub_v3bar", self.ub_v3(belief, penalty, params), None);
        BoundReport {
            penalty,
            params: *params,
            entries,
        }
    }
}

/// Free-standing form of [`Bounds::lb_alpha_form`].
///
/// When `I_max = 0` the first term is read as its limit `I_max → 0⁺`: the
/// numerator `H(ρ) - log M` is zero only at the uniform belief, where the
/// bound is `αL`; elsewhere it tends to `-∞` and the bound to 0.
pub fn lb_alpha_form(belief: &Belief, penalty: f64, i_max: f64) -> Result<Bound> {
    check_penalty(penalty)?;
    if !(i_max >= 0.0) {
        return Err(invalid_arg("i_max", format!("must be >= 0, got {i_max}")));
    }
    let m = belief.len();
    let alpha = games::alpha(penalty, m, i_max);
    let num = belief.entropy() - info::binary_entropy(alpha) - alpha * ((m - 1) as f64).log2();
    if i_max == 0.0 {
        let v = if num >= -1e-12 { alpha * penalty } else { 0.0 };
        return Ok(Bound::clipped(v));
    }
    Ok(Bound::clipped(num / i_max + alpha * penalty))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundEntry {
    pub name: &'static str,
    /// `None` when a precondition failed; see `note`.
    pub bound: Option<Bound>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub penalty: f64,
    pub params: BoundParams,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn get(&self, name: &str) -> Option<Bound> {
        self.entries.iter().find(|e| e.name == name).and_then(|e| e.bound)
    }
}

/// Straight-line bounds on the optimal reliability `E(R)` over a family of
/// models indexed by `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReliabilityRegion {
    /// `sup_M D_max(M)`.
    pub d_max_sup: f64,
    /// `sup_M I_max(M)`.
    pub i_max_sup: f64,
    /// `inf_M D₂(M)`.
    pub d2_inf: f64,
    /// `inf_M I₂(M)`.
    pub i2_inf: f64,
}

impl ReliabilityRegion {
    /// Converse line `D̄_max (1 - R/Ī_max)`, zero beyond `Ī_max`.
    pub fn upper(&self, rate: f64) -> f64 {
        pos(self.d_max_sup * (1.0 - rate / self.i_max_sup))
    }

    /// Achievable line `D̲₂ (1 - R/I̲₂)`, zero beyond `I̲₂`.
    pub fn achievable(&self, rate: f64) -> f64 {
        if self.i2_inf <= 0.0 {
            return 0.0;
        }
        pos(self.d2_inf * (1.0 - rate / self.i2_inf))
    }
}

pub fn reliability_region(family: &[GameQuantities]) -> Result<ReliabilityRegion> {
    if family.is_empty() {
        return Err(Error::Empty("model family"));
    }
    let sup = |f: fn(&GameQuantities) -> f64| family.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let inf = |f: fn(&GameQuantities) -> f64| family.iter().map(f).fold(f64::INFINITY, f64::min);
    Ok(ReliabilityRegion {
        d_max_sup: sup(|q| q.d_max),
        i_max_sup: sup(|q| q.i_max),
        d2_inf: inf(|q| q.d2_harmonic),
        i2_inf: inf(|q| q.i_2),
    })
}

/// Lower bound on the samples needed for error probability `ε` given the
/// optimal cost at penalty `L`: `[(1 - εL)(V* - 1)]⁺`.
pub fn primal_lower(v_star: f64, penalty: f64, epsilon: f64) -> Result<f64> {
    check_penalty(penalty)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid_arg("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    let factor = 1.0 - epsilon * penalty;
    if factor <= 0.0 {
        return Ok(0.0);
    }
    Ok(pos(factor * (v_star - 1.0)))
}

/// Expected hitting time bound for a process with drift at least `K₁`
/// below zero, `K₂` at or above zero and jumps at most `K₃`, started at
/// `U₀` and stopped on reaching `B`.
pub fn submartingale_stopping_bound(b: f64, u0: f64, k1: f64, k2: f64, k3: f64) -> Result<f64> {
    if !(0.0 < k1 && k1 <= k2 && k2 <= k3) {
        return Err(Error::Precondition {
            regime: "0 < K1 <= K2 <= K3",
            detail: format!("K1 = {k1}, K2 = {k2}, K3 = {k3}"),
        });
    }
    if !(b > pos(u0)) {
        return Err(Error::Precondition {
            regime: "B > [U0]+",
            detail: format!("B = {b}, U0 = {u0}"),
        });
    }
    let correction = if u0 < 0.0 { u0 * (1.0 / k2 - 1.0 / k1) } else { 0.0 };
    Ok((b - u0) / k2 + correction + (k3 + LOG2_E) / k1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::SolverOptions;
    use approx::assert_abs_diff_eq;

    fn bsc_setup() -> (Model, GameQuantities) {
        let m = Model::bsc(0.25).unwrap();
        let q = GameQuantities::compute(&m, 0.9, &SolverOptions::default()).unwrap();
        (m, q)
    }

    const D: f64 = 0.792_481_250_360_578_1; // 0.5·log2(3)

    #[test]
    fn lb_v1_plug_in() {
        let (m, q) = bsc_setup();
        let b = Bounds::new(&m, &q).unwrap();
        let u = Belief::uniform(2);
        let v = b.lb_v1(&u, 1000.0, &BoundParams::default()).unwrap();
        assert_abs_diff_eq!(v.value().unwrap(), 999f64.log2() / D, epsilon = 1e-9);
        let big = BoundParams {
            k1_prime: 1e6,
            ..Default::default()
        };
        assert_eq!(b.lb_v1(&u, 1000.0, &big).unwrap(), Bound::Value(0.0));
        let corner = Belief::new(vec![0.9995, 0.0005]).unwrap();
        assert!(matches!(
            b.lb_v1(&corner, 1000.0, &BoundParams::default()),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn lb_chernoff_plug_in() {
        let (m, q) = bsc_setup();
        let b = Bounds::new(&m, &q).unwrap();
        let l: f64 = 1e6;
        let delta = l.log2().powf(-1.0 / 3.0);
        let xi = 3f64.log2();
        let klog = (2.0 * l).log2();
        let head = (1.0 - delta) * (l / klog).log2();
        let per = head / (D + delta) * (1.0 - 4.0 * (klog / l).powf(delta) / 0.5);
        let expect = (per - 2.0 * xi * xi / (delta * delta)).max(0.0);
        let v = b.lb_chernoff(&Belief::uniform(2), l, &BoundParams::default()).unwrap();
        assert_abs_diff_eq!(v.value().unwrap(), expect, epsilon = 1e-9);
        // the penalty term dominates for δ near 1
        let p = BoundParams {
            delta: Some(0.999),
            ..Default::default()
        };
        assert_eq!(b.lb_chernoff(&Belief::uniform(2), l, &p).unwrap(), Bound::Value(0.0));
    }

    #[test]
    fn lb_alpha_form_cases() {
        // G(ν) = αL at ν = [α/(M-1), ..., 1-α]
        let (l, m, imax) = (30.0, 4, 0.05);
        let a = games::alpha(l, m, imax);
        let nu = Belief::new(vec![a / 3.0, a / 3.0, a / 3.0, 1.0 - a]).unwrap();
        assert_abs_diff_eq!(lb_alpha_form(&nu, l, imax).unwrap().as_f64(), a * l, epsilon = 1e-12);
        // point mass: entropy term vanishes
        let pm = Belief::point_mass(4, 2).unwrap();
        let expect = (-info::binary_entropy(a) - a * 3f64.log2()) / imax + a * l;
        assert_abs_diff_eq!(lb_alpha_form(&pm, l, imax).unwrap().as_f64(), expect.max(0.0), epsilon = 1e-12);
        // uniform M = 4, BSC(0.25) bank, L = 100
        let bank = Model::bsc_bank(4, 0.25).unwrap();
        let cap = games::solve_i_max(&bank, &SolverOptions::default()).i_max;
        let a = games::alpha(100.0, 4, cap);
        let expect = (2.0 - info::binary_entropy(a) - a * 3f64.log2()) / cap + 100.0 * a;
        assert_abs_diff_eq!(
            lb_alpha_form(&Belief::uniform(4), 100.0, cap).unwrap().as_f64(),
            expect,
            epsilon = 1e-12
        );
        // uninformative limit
        assert_abs_diff_eq!(lb_alpha_form(&Belief::uniform(4), 100.0, 0.0).unwrap().as_f64(), 75.0, epsilon = 1e-12);
        assert_eq!(lb_alpha_form(&pm, 100.0, 0.0).unwrap().as_f64(), 0.0);
    }

    #[test]
    fn lb_v2_indicator_and_corollary() {
        let m = Model::bsc_bank(4, 0.25).unwrap();
        let q = GameQuantities::compute(&m, 0.9, &SolverOptions::default()).unwrap();
        let b = Bounds::new(&m, &q).unwrap();
        let l: f64 = 1e4;
        let p = BoundParams::default();
        let u = Belief::uniform(4);
        let v2 = b.lb_v2(&u, l, &p).unwrap().as_f64();
        let delta = 1.0 / (8.0 * l).log2();
        let expect = (2.0 - info::binary_entropy(delta) - delta * 3f64.log2()) / q.i_max
            + ((l - 1.0).log2() - ((1.0 - delta) / delta).log2() - q.xi) / q.d_max;
        assert_abs_diff_eq!(v2, expect.max(0.0), epsilon = 1e-9);
        assert!(v2 + 1e-9 >= b.lb_uniform(l, &p).unwrap().as_f64());
        // concentrated belief: second term drops
        let conc = Belief::new(vec![0.9999, 0.0000333, 0.0000333, 0.0000334]).unwrap();
        let v = b.lb_v2(&conc, l, &p).unwrap().as_f64();
        let first = (conc.entropy() - info::binary_entropy(delta) - delta * 3f64.log2()) / q.i_max;
        assert_abs_diff_eq!(v, first.max(0.0), epsilon = 1e-9);
        assert!(matches!(b.lb_v2(&u, 5.0, &p), Err(Error::Precondition { .. })));
    }

    #[test]
    fn ub_v2bar_cases() {
        let (m, q) = bsc_setup();
        let b = Bounds::new(&m, &q).unwrap();
        let xi = 3f64.log2();
        let u = Belief::uniform(2);
        let expect = (1.0 + 9f64.log2() + xi + LOG2_E) / D + 1000f64.log2() / D + 1.0;
        assert_abs_diff_eq!(b.ub_v2bar(&u, 1000.0).unwrap().as_f64(), expect, epsilon = 1e-6);
        let pm = Belief::point_mass(2, 0).unwrap();
        let expect = (9f64.log2() + xi + LOG2_E) / D + 1000f64.log2() / D + 1.0;
        assert_abs_diff_eq!(b.ub_v2bar(&pm, 1000.0).unwrap().as_f64(), expect, epsilon = 1e-6);
        let mut last = 0.0;
        for l in [2.0, 10.0, 100.0, 1e6] {
            let v = b.ub_v2bar(&u, l).unwrap().as_f64();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn ub_v3_collapses_at_xi() {
        let (m, q) = bsc_setup();
        let b = Bounds::new(&m, &q).unwrap();
        let p = BoundParams {
            b: Some(q.xi),
            ..Default::default()
        };
        let u = Belief::uniform(2);
        let v3 = b.ub_v3(&u, 500.0, &p).unwrap().as_f64();
        assert_abs_diff_eq!(v3, b.ub_v2bar(&u, 500.0).unwrap().as_f64(), epsilon = 1e-12);
        // ψ(b) ≥ I₂ at small b
        let tiny = BoundParams {
            b: Some(1e-3),
            ..Default::default()
        };
        assert_eq!(b.ub_v3(&u, 500.0, &tiny).unwrap(), Bound::Infeasible);
    }

    #[test]
    fn ub_v1bar_point_mass() {
        let (m, q) = bsc_setup();
        let b = Bounds::new(&m, &q).unwrap();
        let l: f64 = 1e4;
        let iota = l.log2().powf(-0.25);
        let xi = 3f64.log2();
        let i1 = q.i_1;
        let rho = Belief::new(vec![0.99, 0.01]).unwrap();
        let s = 1.0 + iota;
        let expect = (rho.entropy() + 1.0 + 9f64.log2()) / i1 * s
            + l.log2() / D * s
            + 2.0
                * (2.0 + 1.0 / ((iota / 2.0 / s).powi(5) * (i1 / (2.0 * xi)).powi(4)))
                * (l * 0.01).powf(-(iota.powi(3) / (s * s)) * i1 * i1 / (4.0 * xi.powi(3)))
            + 2.0;
        let v = b.ub_v1bar(&rho, l, &BoundParams::default()).unwrap().as_f64();
        approx::assert_relative_eq!(v, expect, max_relative = 1e-9);
    }

    #[test]
    fn refined_falls_back() {
        let (m, q) = bsc_setup();
        let b = Bounds::new(&m, &q).unwrap();
        // M = 2: both η quantities coincide, so the tightened form is unavailable
        let (v, used) = b.ub_v2bar_refined(&Belief::uniform(2), 100.0).unwrap();
        assert!(!used);
        assert_eq!(v, b.ub_v2bar(&Belief::uniform(2), 100.0).unwrap());
    }

    #[test]
    fn report_has_every_bound_nonnegative() {
        let (m, q) = bsc_setup();
        let b = Bounds::new(&m, &q).unwrap();
        let r = b.report(&Belief::uniform(2), 1e4, &BoundParams::default());
        assert_eq!(r.entries.len(), 10);
        for e in &r.entries {
            if let Some(Bound::Value(v)) = e.bound {
                assert!(v >= 0.0, "{}", e.name);
            }
        }
    }

    #[test]
    fn region_lines() {
        let (_, q) = bsc_setup();
        let r = reliability_region(std::slice::from_ref(&q)).unwrap();
        assert_abs_diff_eq!(r.upper(0.0), q.d_max, epsilon = 1e-15);
        assert_abs_diff_eq!(r.upper(r.i_max_sup), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.achievable(0.0), q.d2_harmonic, epsilon = 1e-15);
        assert!(reliability_region(&[]).is_err());

        // search with constant noise: both lines share their endpoints
        let p: f64 = 0.25;
        let d = (1.0 - 2.0 * p) * ((1.0 - p) / p).log2();
        let c = 1.0 - info::binary_entropy(p);
        let r = ReliabilityRegion {
            d_max_sup: d,
            i_max_sup: c,
            d2_inf: d,
            i2_inf: c,
        };
        for k in 0..=20 {
            let rate = c * k as f64 / 20.0;
            assert_abs_diff_eq!(r.upper(rate), r.achievable(rate), epsilon = 1e-15);
        }
    }

    #[test]
    fn primal_and_stopping() {
        assert_abs_diff_eq!(primal_lower(20.0, 1e3, 1e-4).unwrap(), 17.1, epsilon = 1e-12);
        assert_eq!(primal_lower(20.0, 1e3, 1e-3).unwrap(), 0.0);
        assert_eq!(primal_lower(1.0, 1e3, 1e-4).unwrap(), 0.0);
        let v = submartingale_stopping_bound(10.0, -2.0, 0.5, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(v, 12.0 + 2.0 + (2.0 + LOG2_E) / 0.5, epsilon = 1e-12);
        let v = submartingale_stopping_bound(10.0, 0.0, 0.5, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(v, 10.0 + (2.0 + LOG2_E) / 0.5, epsilon = 1e-12);
        let v = submartingale_stopping_bound(10.0, -3.0, 1.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(v, 13.0 + 2.0 + LOG2_E, epsilon = 1e-12);
        assert!(submartingale_stopping_bound(10.0, 0.0, 2.0, 1.0, 3.0).is_err());
        assert!(submartingale_stopping_bound(1.0, 3.0, 0.5, 1.0, 2.0).is_err());
    }
}
