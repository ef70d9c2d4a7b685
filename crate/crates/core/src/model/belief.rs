use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info;

/// A point on the probability simplex over hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(Vec<f64>);

/// Result of one Bayes step.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefUpdate {
    pub posterior: Belief,
    /// Predictive probability of the observed symbol under the prior.
    pub marginal: f64,
}

impl Belief {
    /// Accepts entries that are nonnegative and sum to one within `1e-9`,
    /// then renormalizes.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidBelief("need at least two hypotheses".into()));
        }
        if let Some((i, v)) = probs
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidBelief(format!("entry {i} is {v}")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidBelief(format!("entries sum to {s}")));
        }
        Ok(Belief(probs.into_iter().map(|v| v / s).collect()))
    }

    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        Belief(probs)
    }

    pub fn uniform(m: usize) -> Self {
        Belief(vec![1.0 / m as f64; m])
    }

    pub fn point_mass(m: usize, i: usize) -> Result<Self> {
        if i >= m {
            return Err(Error::Index {
                what: "hypotheses",
                index: i,
                size: m,
            });
        }
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        Ok(Belief(v))
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        info::entropy(&self.0)
    }

    /// Index and value of the largest coordinate, ties to the lowest index.
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = (0, self.0[0]);
        for (i, &v) in self.0.iter().enumerate().skip(1) {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// Expected cost of declaring the best hypothesis now:
    /// `min_j (1 - ρ_j) L`.
    pub fn stopping_cost(&self, penalty: f64) -> f64 {
        (1.0 - self.argmax().1) * penalty
    }

    /// Membership in `{ρ : min_j (1 - ρ_j) L > 1}`, the region where
    /// sampling can beat guessing.
    pub fn in_region_of_interest(&self, penalty: f64) -> bool {
        self.stopping_cost(penalty) > 1.0
    }

    pub fn permuted(&self, perm: &[usize]) -> Belief {
        Belief(perm.iter().map(|&p| self.0[p]).collect())
    }
}

impl AsRef<[f64]> for Belief {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
