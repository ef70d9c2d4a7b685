//! Observation models and belief-state calculus.
//!
//! A [`Model`] holds `M` hypotheses, `K` sensing actions and a finite
//! observation alphabet `Z`; `q[a][i]` is the law of the next observation
//! when action `a` is taken under hypothesis `i`. Every quantity is in bits.

mod belief;
mod file;
mod validate;

pub use belief::{Belief, BeliefUpdate};
pub use file::ModelFile;
pub use validate::{validate, RowIssue, RowIssueKind, ValidationReport};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::info;

/// Rows whose mass is off by at most this much are renormalized on load.
pub const LOAD_NORMALIZATION_TOL: f64 = 1e-9;

/// A validated finite-alphabet observation model.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    num_hypotheses: usize,
    actions: Vec<String>,
    alphabet: Vec<String>,
    // flat [action][hypothesis][symbol]
    kernels: Vec<f64>,
}

impl Model {
    /// Builds a model from `kernels[a][i][z]`.
    ///
    /// Rows off by at most [`LOAD_NORMALIZATION_TOL`] are renormalized; any
    /// other violation is rejected. Use [`validate`] for a full report.
    pub fn new(
        actions: Vec<String>,
        alphabet: Vec<String>,
        kernels: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let num_hypotheses = kernels.first().map(Vec::len).unwrap_or(0);
        let file = ModelFile {
            num_hypotheses,
            actions,
            alphabet,
            kernels,
        };
        Model::try_from(file)
    }

    /// Same as [`Model::new`] with generated action and symbol labels.
    pub fn from_kernels(kernels: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let k = kernels.len();
        let z = kernels
            .first()
            .and_then(|a| a.first())
            .map(Vec::len)
            .unwrap_or(0);
        Model::new(
            (0..k).map(|a| format!("a{a}")).collect(),
            (0..z).map(|s| s.to_string()).collect(),
            kernels,
        )
    }

    /// Binary symmetric observation with crossover `p`: under its single
    /// action hypothesis 0 emits symbol 0 w.p. `1 - p` and hypothesis 1 emits
    /// symbol 1 w.p. `1 - p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Model::from_kernels(vec![vec![vec![1.0 - p, p], vec![p, 1.0 - p]]])
    }

    /// `M` hypotheses with one binary "is it `a`?" action per hypothesis:
    /// action `a` reports 1 w.p. `1 - p` under hypothesis `a` and w.p. `p`
    /// otherwise.
    pub fn bsc_bank(m: usize, p: f64) -> Result<Self> {
        let kernels = (0..m)
            .map(|a| {
                (0..m)
                    .map(|i| {
                        if i == a {
                            vec![p, 1.0 - p]
                        } else {
                            vec![1.0 - p, p]
                        }
                    })
                    .collect()
            })
            .collect();
        Model::from_kernels(kernels)
    }

    pub(crate) fn from_parts_unchecked(
        num_hypotheses: usize,
        actions: Vec<String>,
        alphabet: Vec<String>,
        kernels: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(kernels.len(), actions.len() * num_hypotheses * alphabet.len());
        Model {
            num_hypotheses,
            actions,
            alphabet,
            kernels,
        }
    }

    #[inline]
    pub fn num_hypotheses(&self) -> usize {
        self.num_hypotheses
    }

    #[inline]
    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    #[inline]
    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// The observation law `q[a][i]`.
    #[inline]
    pub fn row(&self, a: usize, i: usize) -> &[f64] {
        let z = self.alphabet.len();
        let start = (a * self.num_hypotheses + i) * z;
        &self.kernels[start..start + z]
    }

    #[inline]
    pub fn prob(&self, a: usize, i: usize, z: usize) -> f64 {
        self.row(a, i)[z]
    }

    pub(crate) fn check_hypothesis(&self, i: usize) -> Result<()> {
        if i >= self.num_hypotheses {
            return Err(Error::Index {
                what: "hypotheses",
                index: i,
                size: self.num_hypotheses,
            });
        }
        Ok(())
    }

    pub(crate) fn check_action(&self, a: usize) -> Result<()> {
        if a >= self.num_actions() {
            return Err(Error::Index {
                what: "actions",
                index: a,
                size: self.num_actions(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_symbol(&self, z: usize) -> Result<()> {
        if z >= self.alphabet_size() {
            return Err(Error::Index {
                what: "alphabet",
                index: z,
                size: self.alphabet_size(),
            });
        }
        Ok(())
    }

    /// `D(q[a][i] || q[a][j])` in bits, `+inf` on a support violation.
    pub fn kl(&self, i: usize, j: usize, a: usize) -> Result<f64> {
        self.check_hypothesis(i)?;
        self.check_hypothesis(j)?;
        self.check_action(a)?;
        Ok(self.kl_unchecked(i, j, a))
    }

    #[inline]
    pub(crate) fn kl_unchecked(&self, i: usize, j: usize, a: usize) -> f64 {
        info::kl_divergence(self.row(a, i), self.row(a, j))
    }

    /// `max_a D(q[a][i] || q[a][j])`.
    pub fn max_kl(&self, i: usize, j: usize) -> f64 {
        (0..self.num_actions())
            .map(|a| self.kl_unchecked(i, j, a))
            .fold(0.0, f64::max)
    }

    /// `D_max`: the largest pairwise divergence over all actions.
    pub fn d_max(&self) -> f64 {
        let m = self.num_hypotheses;
        let mut best: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    best = best.max(self.max_kl(i, j));
                }
            }
        }
        best
    }

    /// `ξ_M`: the largest one-sample log-likelihood ratio, `+inf` when two
    /// hypotheses have different supports under some action.
    pub fn xi(&self) -> f64 {
        let m = self.num_hypotheses;
        let mut best: f64 = 0.0;
        for a in 0..self.num_actions() {
            for i in 0..m {
                for j in 0..m {
                    for (&pi, &pj) in self.row(a, i).iter().zip(self.row(a, j)) {
                        if pi <= 0.0 {
                            continue;
                        }
                        if pj <= 0.0 {
                            return f64::INFINITY;
                        }
                        best = best.max((pi / pj).log2());
                    }
                }
            }
        }
        best
    }

    /// `ψ_M(b)`: the largest expected log-likelihood ratio restricted to the
    /// event that the ratio exceeds `b`.
    pub fn psi(&self, b: f64) -> Result<f64> {
        if !(b >= 0.0) {
            return Err(crate::error::invalid_arg("b", format!("must be >= 0, got {b}")));
        }
        let m = self.num_hypotheses;
        let mut best: f64 = 0.0;
        for a in 0..self.num_actions() {
            for i in 0..m {
                for j in 0..m {
                    let mut s = 0.0;
                    for (&pi, &pj) in self.row(a, i).iter().zip(self.row(a, j)) {
                        if pi <= 0.0 {
                            continue;
                        }
                        if pj <= 0.0 {
                            return Ok(f64::INFINITY);
                        }
                        let llr = (pi / pj).log2();
                        if llr > b {
                            s += pi * llr;
                        }
                    }
                    best = best.max(s);
                }
            }
        }
        Ok(best)
    }

    /// Predictive law of the next symbol, `q_ρ[a](z) = Σ_i ρ_i q[a][i](z)`.
    pub fn marginal(&self, a: usize, belief: &Belief) -> Vec<f64> {
        let mut out = vec![0.0; self.alphabet_size()];
        for (i, &r) in belief.probs().iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for (o, &q) in out.iter_mut().zip(self.row(a, i)) {
                *o += r * q;
            }
        }
        out
    }

    /// Bayes' rule for one observation. When the observed symbol has zero
    /// predictive probability the posterior equals the prior.
    pub fn bayes_update(&self, belief: &Belief, a: usize, z: usize) -> Result<BeliefUpdate> {
        self.check_belief(belief)?;
        self.check_action(a)?;
        self.check_symbol(z)?;
        Ok(self.bayes_update_unchecked(belief, a, z))
    }

    pub(crate) fn bayes_update_unchecked(&self, belief: &Belief, a: usize, z: usize) -> BeliefUpdate {
        let prior = belief.probs();
        let mut post: Vec<f64> = (0..self.num_hypotheses)
            .map(|i| prior[i] * self.prob(a, i, z))
            .collect();
        let marginal: f64 = post.iter().sum();
        if marginal <= 0.0 {
            return BeliefUpdate {
                posterior: belief.clone(),
                marginal: 0.0,
            };
        }
        for p in &mut post {
            *p /= marginal;
        }
        BeliefUpdate {
            posterior: Belief::from_normalized(post),
            marginal: marginal.min(1.0),
        }
    }

    /// `(𝕋ᵃ g)(ρ) = Σ_z g(Φᵃ(ρ, z)) q_ρᵃ(z)`.
    pub fn markov_operator<G>(&self, a: usize, g: G, belief: &Belief) -> Result<f64>
    where
        G: Fn(&Belief) -> f64,
    {
        self.check_belief(belief)?;
        self.check_action(a)?;
        let mut acc = 0.0;
        for z in 0..self.alphabet_size() {
            let up = self.bayes_update_unchecked(belief, a, z);
            if up.marginal > 0.0 {
                acc += up.marginal * g(&up.posterior);
            }
        }
        Ok(acc)
    }

    /// `I(ρ; q_ρᵃ) = Σ_i ρ_i D(q[a][i] || q_ρᵃ)`, always finite and ≥ 0.
    pub fn mutual_information(&self, a: usize, belief: &Belief) -> Result<f64> {
        self.check_belief(belief)?;
        self.check_action(a)?;
        Ok(self.mutual_information_unchecked(a, belief.probs()))
    }

    pub(crate) fn mutual_information_unchecked(&self, a: usize, probs: &[f64]) -> f64 {
        let mut mix = vec![0.0; self.alphabet_size()];
        for (i, &r) in probs.iter().enumerate() {
            for (o, &q) in mix.iter_mut().zip(self.row(a, i)) {
                *o += r * q;
            }
        }
        let mut total = 0.0;
        for (i, &r) in probs.iter().enumerate() {
            if r > 0.0 {
                total += r * info::kl_divergence(self.row(a, i), &mix);
            }
        }
        total.max(0.0)
    }

    pub(crate) fn check_belief(&self, belief: &Belief) -> Result<()> {
        if belief.len() != self.num_hypotheses {
            return Err(Error::InvalidBelief(format!(
                "belief has {} entries, model has {} hypotheses",
                belief.len(),
                self.num_hypotheses
            )));
        }
        Ok(())
    }

    /// Relabels hypotheses: hypothesis `i` of the result is hypothesis
    /// `perm[i]` of `self`.
    pub fn permute_hypotheses(&self, perm: &[usize]) -> Result<Model> {
        let m = self.num_hypotheses;
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(crate::error::invalid_arg("perm", "not a permutation of the hypotheses"));
        }
        let z = self.alphabet_size();
        let mut kernels = Vec::with_capacity(self.kernels.len());
        for a in 0..self.num_actions() {
            for &p in perm {
                kernels.extend_from_slice(self.row(a, p));
            }
        }
        debug_assert_eq!(kernels.len(), self.num_actions() * m * z);
        Ok(Model::from_parts_unchecked(
            m,
            self.actions.clone(),
            self.alphabet.clone(),
            kernels,
        ))
    }

    pub fn to_file(&self) -> ModelFile {
        let kernels = (0..self.num_actions())
            .map(|a| (0..self.num_hypotheses).map(|i| self.row(a, i).to_vec()).collect())
            .collect();
        ModelFile {
            num_hypotheses: self.num_hypotheses,
            actions: self.actions.clone(),
            alphabet: self.alphabet.clone(),
            kernels,
        }
    }

    /// Short content hash (hex SHA-256 prefix) over labels and the exact
    /// bit patterns of every kernel entry.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.num_hypotheses as u64).to_le_bytes());
        for s in self.actions.iter().chain(&self.alphabet) {
            h.update((s.len() as u64).to_le_bytes());
            h.update(s.as_bytes());
        }
        for v in &self.kernels {
            h.update(v.to_bits().to_le_bytes());
        }
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl TryFrom<ModelFile> for Model {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        file.check_structure()?;
        let report = validate(&file)?;
        if let Some(issue) = report.row_issues.first() {
            return Err(Error::InvalidModel(format!(
                "{} ({} row problem(s) in total)",
                issue,
                report.row_issues.len()
            )));
        }
        let ModelFile {
            num_hypotheses,
            actions,
            alphabet,
            kernels,
        } = file;
        let mut flat = Vec::with_capacity(actions.len() * num_hypotheses * alphabet.len());
        for per_action in kernels {
            for row in per_action {
                let s: f64 = row.iter().sum();
                flat.extend(row.into_iter().map(|v| v / s));
            }
        }
        Ok(Model::from_parts_unchecked(num_hypotheses, actions, alphabet, flat))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bsc() -> Model {
        Model::bsc(0.25).unwrap()
    }

    #[test]
    fn kl_and_xi_on_bsc() {
        let m = bsc();
        assert_abs_diff_eq!(m.kl(0, 1, 0).unwrap(), 0.5 * 3f64.log2(), epsilon = 1e-15);
        assert_eq!(m.kl(0, 0, 0).unwrap(), 0.0);
        assert_abs_diff_eq!(m.xi(), 3f64.log2(), epsilon = 1e-15);
        assert!(m.kl(0, 2, 0).is_err());
    }

    #[test]
    fn bayes_update_bsc() {
        let m = bsc();
        let up = m.bayes_update(&Belief::uniform(2), 0, 0).unwrap();
        assert_abs_diff_eq!(up.posterior.probs()[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(up.posterior.probs()[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(up.marginal, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn bayes_update_uninformative_and_degenerate() {
        let flat = Model::from_kernels(vec![vec![vec![0.3, 0.7], vec![0.3, 0.7], vec![0.3, 0.7]]]).unwrap();
        let prior = Belief::new(vec![0.2, 0.5, 0.3]).unwrap();
        let up = flat.bayes_update(&prior, 0, 1).unwrap();
        for (a, b) in up.posterior.probs().iter().zip(prior.probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }

        let m = Model::from_kernels(vec![vec![vec![1.0, 0.0], vec![0.5, 0.5]]]).unwrap();
        let pm = Belief::point_mass(2, 0).unwrap();
        let up = m.bayes_update(&pm, 0, 1).unwrap();
        assert_eq!(up.marginal, 0.0);
        assert_eq!(up.posterior, pm);
    }

    #[test]
    fn markov_operator_cases() {
        let m = bsc();
        let u = Belief::uniform(2);
        assert_abs_diff_eq!(m.markov_operator(0, |_| 3.5, &u).unwrap(), 3.5, epsilon = 1e-15);
        let rho = Belief::new(vec![0.3, 0.7]).unwrap();
        let t = m.markov_operator(0, |b| b.probs()[0], &rho).unwrap();
        assert_abs_diff_eq!(t, 0.3, epsilon = 1e-12);
        // entropy after one look = H(ρ) - I
        let th = m.markov_operator(0, |b| b.entropy(), &u).unwrap();
        let i = 1.0 - info::binary_entropy(0.25);
        assert_abs_diff_eq!(th, 1.0 - i, epsilon = 1e-12);
    }

    #[test]
    fn mutual_information_cases() {
        let m = bsc();
        let i = m.mutual_information(0, &Belief::uniform(2)).unwrap();
        assert_abs_diff_eq!(i, 1.0 - info::binary_entropy(0.25), epsilon = 1e-12);
        assert_abs_diff_eq!(i, 0.188_721_875_540_867, epsilon = 1e-12);
        assert_eq!(m.mutual_information(0, &Belief::point_mass(2, 1).unwrap()).unwrap(), 0.0);
        let flat = Model::from_kernels(vec![vec![vec![0.4, 0.6], vec![0.4, 0.6]]]).unwrap();
        assert_abs_diff_eq!(flat.mutual_information(0, &Belief::uniform(2)).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn psi_cases() {
        let m = bsc();
        // only z with ratio 3 counts: 0.75 log2 3
        assert_abs_diff_eq!(m.psi(0.0).unwrap(), 0.75 * 3f64.log2(), epsilon = 1e-15);
        assert_eq!(m.psi(m.xi()).unwrap(), 0.0);
        assert_eq!(m.psi(10.0).unwrap(), 0.0);
        assert!(m.psi(0.5).unwrap() >= m.psi(1.0).unwrap());
        assert!(m.psi(-1.0).is_err());
        let bad = Model::from_kernels(vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]]).unwrap();
        assert!(bad.psi(1.0).unwrap().is_infinite());
    }

    #[test]
    fn permutation_relabels_rows() {
        let m = Model::bsc_bank(3, 0.2).unwrap();
        let p = m.permute_hypotheses(&[2, 0, 1]).unwrap();
        assert_eq!(p.row(1, 0), m.row(1, 2));
        assert!(m.permute_hypotheses(&[0, 0, 1]).is_err());
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        assert_eq!(bsc().content_hash(), bsc().content_hash());
        assert_ne!(bsc().content_hash(), Model::bsc(0.2).unwrap().content_hash());
    }
}
