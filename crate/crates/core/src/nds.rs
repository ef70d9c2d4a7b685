//! Noisy search: one target among `M` locations, found by inspecting
//! subsets whose binary report is flipped with a probability that depends on
//! the inspected size.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::info;
use crate::model::Model;

/// Largest `M` accepted for [`ActionFamily::AllSubsets`].
pub const MAX_ALL_SUBSETS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionFamily {
    Singletons,
    /// Every subset except `∅` and `Ω`, which carry no information.
    AllSubsets,
    /// Nonempty proper intervals `[k·2^l, (k+1)·2^l)` clipped to `[0, M)`.
    DyadicIntervals,
}

impl std::str::FromStr for ActionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singletons" => Ok(ActionFamily::Singletons),
            "all_subsets" | "all-subsets" => Ok(ActionFamily::AllSubsets),
            "dyadic_intervals" | "dyadic-intervals" | "dyadic" => Ok(ActionFamily::DyadicIntervals),
            other => Err(invalid_arg("family", format!("unknown action family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdsSpec {
    pub num_locations: usize,
    /// `noise[n-1]` is the flip probability when `n` locations are inspected.
    pub noise: Vec<f64>,
    pub family: ActionFamily,
}

impl NdsSpec {
    pub fn new(num_locations: usize, noise: Vec<f64>, family: ActionFamily) -> Result<Self> {
        let spec = NdsSpec {
            num_locations,
            noise,
            family,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Flip probability `p` for every inspection size.
    pub fn size_independent(num_locations: usize, p: f64, family: ActionFamily) -> Result<Self> {
        NdsSpec::new(num_locations, vec![p; num_locations], family)
    }

    fn check(&self) -> Result<()> {
        let m = self.num_locations;
        if m < 2 {
            return Err(invalid_arg("M", format!("need at least 2 locations, got {m}")));
        }
        if self.noise.len() != m {
            return Err(invalid_arg(
                "noise",
                format!("profile has {} entries, expected one per size 1..={m}", self.noise.len()),
            ));
        }
        if !(self.noise[0] > 0.0) {
            return Err(invalid_arg("noise", "p_1 must be > 0"));
        }
        if self.noise.iter().any(|&p| !(p < 0.5)) {
            return Err(invalid_arg("noise", "every p_n must be < 0.5"));
        }
        if self.noise.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid_arg("noise", "profile must be nondecreasing in the inspected size"));
        }
        if self.family == ActionFamily::AllSubsets && m > MAX_ALL_SUBSETS {
            return Err(Error::TooLarge(format!(
                "all_subsets has 2^{m} - 2 actions; limited to M <= {MAX_ALL_SUBSETS}"
            )));
        }
        Ok(())
    }

    /// Inspected sets of the family, each as sorted locations.
    pub fn action_sets(&self) -> Vec<Vec<usize>> {
        let m = self.num_locations;
        match self.family {
            ActionFamily::Singletons => (0..m).map(|i| vec![i]).collect(),
            ActionFamily::AllSubsets => (1..(1u32 << m) - 1)
                .map(|mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect())
                .collect(),
            ActionFamily::DyadicIntervals => {
                let mut out: Vec<Vec<usize>> = Vec::new();
                let mut width = 1;
                while width < m {
                    for start in (0..m).step_by(width) {
                        let set: Vec<usize> = (start..(start + width).min(m)).collect();
                        if !out.contains(&set) {
                            out.push(set);
                        }
                    }
                    width *= 2;
                }
                out
            }
        }
    }
}

/// Builds the model: symbol 1 means "target detected"; inspecting `a`
/// reports 1 w.p. `1 - p_|a|` when the target is in `a` and w.p. `p_|a|`
/// otherwise.
pub fn build_model(spec: &NdsSpec) -> Result<Model> {
    spec.check()?;
    let m = spec.num_locations;
    let sets = spec.action_sets();
    let mut names = Vec::with_capacity(sets.len());
    let mut kernels = Vec::with_capacity(sets.len());
    for set in &sets {
        let p = spec.noise[set.len() - 1];
        let mut inside = vec![false; m];
        set.iter().for_each(|&i| inside[i] = true);
        kernels.push(
            inside
                .iter()
                .map(|&hit| if hit { vec![p, 1.0 - p] } else { vec![1.0 - p, p] })
                .collect(),
        );
        let labels: Vec<String> = set.iter().map(usize::to_string).collect();
        names.push(format!("{{{}}}", labels.join(",")));
    }
    Model::new(names, vec!["miss".into(), "detect".into()], kernels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForms {
    /// `(1 - 2p₁) log((1 - p₁)/p₁)`.
    pub d_eta_closed: f64,
    /// `1 - sup_n H(p_n)`.
    pub i2_lower: f64,
    /// `1 - H(p₁)`.
    pub i_max_upper: f64,
}

pub fn closed_forms(spec: &NdsSpec) -> Result<ClosedForms> {
    spec.check()?;
    let p1 = spec.noise[0];
    let worst = spec.noise.iter().copied().map(info::binary_entropy).fold(0.0, f64::max);
    Ok(ClosedForms {
        d_eta_closed: (1.0 - 2.0 * p1) * ((1.0 - p1) / p1).log2(),
        i2_lower: 1.0 - worst,
        i_max_upper: 1.0 - info::binary_entropy(p1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn family_sizes() {
        let count = |m, f| NdsSpec::size_independent(m, 0.25, f).unwrap().action_sets().len();
        assert_eq!(count(2, ActionFamily::Singletons), 2);
        assert_eq!(count(4, ActionFamily::AllSubsets), 14);
        assert_eq!(count(8, ActionFamily::DyadicIntervals), 14);
        assert_eq!(count(32, ActionFamily::DyadicIntervals), 62);
        // clipped intervals for M = 5; clipped duplicates are dropped
        assert_eq!(count(5, ActionFamily::DyadicIntervals), 5 + 2 + 1);
    }

    #[test]
    fn all_subsets_is_capped() {
        assert!(matches!(
            NdsSpec::size_independent(13, 0.25, ActionFamily::AllSubsets),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(NdsSpec::new(3, vec![0.2, 0.1, 0.3], ActionFamily::Singletons).is_err());
        assert!(NdsSpec::new(2, vec![0.2, 0.5], ActionFamily::Singletons).is_err());
        assert!(NdsSpec::new(2, vec![0.0, 0.1], ActionFamily::Singletons).is_err());
    }

    #[test]
    fn singleton_kernels() {
        let spec = NdsSpec::size_independent(2, 0.25, ActionFamily::Singletons).unwrap();
        let m = build_model(&spec).unwrap();
        assert_eq!(m.num_actions(), 2);
        assert_eq!(m.row(0, 0), &[0.25, 0.75]);
        assert_eq!(m.row(0, 1), &[0.75, 0.25]);
        assert_abs_diff_eq!(m.kl(0, 1, 0).unwrap(), 0.5 * 3f64.log2(), epsilon = 1e-15);
    }

    #[test]
    fn complement_has_same_divergences() {
        let spec = NdsSpec::size_independent(4, 0.2, ActionFamily::AllSubsets).unwrap();
        let sets = spec.action_sets();
        let m = build_model(&spec).unwrap();
        for (a, set) in sets.iter().enumerate() {
            let comp: Vec<usize> = (0..4).filter(|i| !set.contains(i)).collect();
            let b = sets.iter().position(|s| *s == comp).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!(m.kl(i, j, a).unwrap(), m.kl(i, j, b).unwrap(), epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn closed_form_values() {
        let spec = NdsSpec::size_independent(4, 0.25, ActionFamily::Singletons).unwrap();
        let c = closed_forms(&spec).unwrap();
        assert_abs_diff_eq!(c.d_eta_closed, 0.5 * 3f64.log2(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.i_max_upper, 0.188_721_875_540_867, epsilon = 1e-12);
        assert_eq!(c.i2_lower, c.i_max_upper);

        let rising = NdsSpec::new(3, vec![0.1, 0.3, 0.499], ActionFamily::Singletons).unwrap();
        let c = closed_forms(&rising).unwrap();
        assert!(c.i2_lower > 0.0 && c.i2_lower < 1e-5);
    }
}
