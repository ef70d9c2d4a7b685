//! Decision rules mapping a belief to a sampling distribution or a
//! declaration.

use std::str::FromStr;

use serde::Serialize;

use crate::dp::ValueGrid;
use crate::error::{invalid_arg, Error, Result};
use crate::games::{ActionMixture, GameQuantities};
use crate::model::{Belief, Model};

pub const DEFAULT_THRESHOLD_RHO: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision<'a> {
    Sample(&'a ActionMixture),
    Declare(usize),
}

/// A stationary Markov policy.
pub trait Policy: Sync {
    fn decide(&self, belief: &Belief) -> Decision<'_>;

    fn name(&self) -> &'static str;

    fn num_hypotheses(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Pi1,
    Pi2,
    Chernoff,
    Dp,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Pi1 => "pi1",
            PolicyKind::Pi2 => "pi2",
            PolicyKind::Chernoff => "chernoff",
            PolicyKind::Dp => "dp",
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pi1" => Ok(PolicyKind::Pi1),
            "pi2" => Ok(PolicyKind::Pi2),
            "chernoff" => Ok(PolicyKind::Chernoff),
            "dp" | "grid" => Ok(PolicyKind::Dp),
            other => Err(invalid_arg("policy", format!("unknown policy '{other}' (pi1, pi2, chernoff, dp)"))),
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct PolicyConfig {
    pub penalty: f64,
    pub threshold_rho: f64,
    pub quantities: GameQuantities,
}

impl PolicyConfig {
    pub fn new(penalty: f64, threshold_rho: f64, quantities: GameQuantities) -> Result<Self> {
        if !(penalty > 1.0) {
            return Err(invalid_arg("L", format!("must be > 1, got {penalty}")));
        }
        if !(threshold_rho > 0.5 && threshold_rho < 1.0) {
            return Err(invalid_arg("rho_tilde", format!("must lie in (0.5, 1), got {threshold_rho}")));
        }
        if quantities.threshold_rho != threshold_rho {
            return Err(invalid_arg(
                "rho_tilde",
                format!(
                    "game quantities were computed for rho_tilde = {}, policy uses {threshold_rho}",
                    quantities.threshold_rho
                ),
            ));
        }
        Ok(PolicyConfig {
            penalty,
            threshold_rho,
            quantities,
        })
    }

    /// `1 - 1/L`.
    pub fn declare_level(&self) -> f64 {
        1.0 - 1.0 / self.penalty
    }
}

fn threshold_decide<'a>(
    config: &PolicyConfig,
    belief: &Belief,
    explore: &'a ActionMixture,
    targeted: &'a [ActionMixture],
) -> Decision<'a> {
    let (i, top) = belief.argmax();
    if top >= config.declare_level() {
        Decision::Declare(i)
    } else if top >= config.threshold_rho {
        Decision::Sample(&targeted[i])
    } else {
        Decision::Sample(explore)
    }
}

/// Pairwise two-phase policy: `μ₀` until some `ρᵢ ≥ ρ̃`, then `μᵢ`, and
/// declare once `ρᵢ ≥ 1 - 1/L`.
pub fn pi1_decide<'a>(config: &'a PolicyConfig, belief: &Belief) -> Decision<'a> {
    threshold_decide(config, belief, &config.quantities.mu0, &config.quantities.mu)
}

/// Mixture two-phase policy: as [`pi1_decide`] with `η₀` and `ηᵢ`.
pub fn pi2_decide<'a>(config: &'a PolicyConfig, belief: &Belief) -> Decision<'a> {
    threshold_decide(config, belief, &config.quantities.eta0, &config.quantities.eta)
}

/// Samples `μ_{i*}` for the current leader `i*` (ties to the lowest index);
/// declares with the same `1 - 1/L` rule as the two-phase policies.
pub fn chernoff_decide<'a>(config: &'a PolicyConfig, belief: &Belief) -> Decision<'a> {
    let (i, top) = belief.argmax();
    if top >= config.declare_level() {
        Decision::Declare(i)
    } else {
        Decision::Sample(&config.quantities.mu[i])
    }
}

/// One of the threshold rules bound to its configuration.
#[derive(Debug, Clone)]
pub struct ThresholdPolicy {
    kind: PolicyKind,
    config: PolicyConfig,
}

impl ThresholdPolicy {
    pub fn new(kind: PolicyKind, config: PolicyConfig) -> Result<Self> {
        if kind == PolicyKind::Dp {
            return Err(invalid_arg("policy", "the dp policy is built from a value grid, see GridPolicy"));
        }
        Ok(ThresholdPolicy { kind, config })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }
}

impl Policy for ThresholdPolicy {
    fn decide(&self, belief: &Belief) -> Decision<'_> {
        match self.kind {
            PolicyKind::Pi1 => pi1_decide(&self.config, belief),
            PolicyKind::Pi2 => pi2_decide(&self.config, belief),
            PolicyKind::Chernoff => chernoff_decide(&self.config, belief),
            PolicyKind::Dp => unreachable!("rejected in ThresholdPolicy::new"),
        }
    }

    fn name(&self) -> &'static str {
        self.kind.as_str()
    }

    fn num_hypotheses(&self) -> usize {
        self.config.quantities.num_hypotheses
    }
}

/// Greedy policy with respect to a grid value function: declares when the
/// guessing cost is at most `1 + min_a (𝕋ᵃV̂)(ρ)`, otherwise takes the
/// minimizing action.
#[derive(Debug, Clone)]
pub struct GridPolicy<'a> {
    model: &'a Model,
    grid: &'a ValueGrid,
    point_masses: Vec<ActionMixture>,
}

impl<'a> GridPolicy<'a> {
    pub fn new(model: &'a Model, grid: &'a ValueGrid) -> Result<Self> {
        grid.check_matches(model, grid.penalty)?;
        let point_masses = (0..model.num_actions())
            .map(|a| ActionMixture::point_mass(model.num_actions(), a))
            .collect::<Result<_>>()?;
        Ok(GridPolicy {
            model,
            grid,
            point_masses,
        })
    }

    pub fn penalty(&self) -> f64 {
        self.grid.penalty
    }
}

impl Policy for GridPolicy<'_> {
    fn decide(&self, belief: &Belief) -> Decision<'_> {
        let (i, _) = belief.argmax();
        let stop = belief.stopping_cost(self.grid.penalty);
        if stop <= 1.0 {
            return Decision::Declare(i);
        }
        let (cont, a) = self.grid.continuation(self.model, belief);
        if stop <= cont {
            Decision::Declare(i)
        } else {
            Decision::Sample(&self.point_masses[a])
        }
    }

    fn name(&self) -> &'static str {
        "dp"
    }

    fn num_hypotheses(&self) -> usize {
        self.model.num_hypotheses()
    }
}

/// Free-function form of [`GridPolicy::decide`].
pub fn grid_policy_decide<'a>(policy: &'a GridPolicy<'_>, belief: &Belief) -> Decision<'a> {
    policy.decide(belief)
}
