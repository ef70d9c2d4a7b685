//! Value iteration for the optimal cost on a regular grid of the belief
//! simplex, used as the small-`M` oracle.
//!
//! The grid is `{k/N : k ∈ ℕᴹ, Σk = N}`. Off-grid posteriors are evaluated
//! by barycentric interpolation on the Freudenthal triangulation, so every
//! interpolated value is a convex combination of grid values and the
//! Bellman operator stays monotone.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid_arg, Error, Result};
use crate::model::{Belief, Model};

/// Largest number of hypotheses accepted.
pub const MAX_HYPOTHESES: usize = 4;
/// Budget on `points × actions × symbols × M` transition entries.
pub const MAX_TRANSITION_ENTRIES: usize = 60_000_000;
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;
pub const MIN_RESOLUTION: usize = 10;

/// The points `k/N` of the simplex, in lexicographic order of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dim: usize,
    resolution: usize,
    // counts[m][n]: compositions of n into m nonnegative parts
    counts: Vec<Vec<usize>>,
    points: Vec<u32>,
}

impl Lattice {
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid_arg("M", "need at least two hypotheses"));
        }
        if resolution == 0 {
            return Err(invalid_arg("resolution", "must be >= 1"));
        }
        let mut counts = vec![vec![0usize; resolution + 1]; dim + 1];
        counts[1].iter_mut().for_each(|c| *c = 1);
        for m in 2..=dim {
            let mut acc = 0usize;
            for n in 0..=resolution {
                acc = acc.checked_add(counts[m - 1][n]).ok_or_else(too_many)?;
                counts[m][n] = acc;
            }
        }
        let total = counts[dim][resolution];
        if total.saturating_mul(dim) > MAX_TRANSITION_ENTRIES {
            return Err(too_many());
        }
        let mut points = Vec::with_capacity(total * dim);
        let mut k = vec![0u32; dim];
        enumerate(&mut k, 0, resolution as u32, &mut points);
        debug_assert_eq!(points.len(), total * dim);
        Ok(Lattice {
            dim,
            resolution,
            counts,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integer coordinates `k` of point `idx`.
    pub fn coords(&self, idx: usize) -> &[u32] {
        &self.points[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn belief(&self, idx: usize) -> Belief {
        let n = self.resolution as f64;
        Belief::from_normalized(self.coords(idx).iter().map(|&k| k as f64 / n).collect())
    }

    /// Position of `k` in the lexicographic order.
    pub fn index(&self, k: &[u32]) -> usize {
        let mut rank = 0;
        let mut rem = self.resolution;
        for (p, &kp) in k[..self.dim - 1].iter().enumerate() {
            let parts = self.dim - p - 1;
            for v in 0..kp as usize {
                rank += self.counts[parts][rem - v];
            }
            rem -= kp as usize;
        }
        rank
    }

    /// Barycentric weights of `x` on the simplex of the triangulation that
    /// contains it. Returns `(index, weight)` pairs with positive weights
    /// summing to one.
    pub fn locate(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let m = self.dim;
        let n = self.resolution as f64;
        // cumulative coordinates c_p = N Σ_{q<p} x_q, p = 1..M-1
        let mut c = Vec::with_capacity(m - 1);
        let mut acc = 0.0;
        let mut prev: f64 = 0.0;
        for &xi in &x[..m - 1] {
            acc += xi;
            let v = (acc * n).clamp(prev, n);
            c.push(v);
            prev = v;
        }
        let base: Vec<u32> = c.iter().map(|&v| (v.floor() as u32).min(self.resolution as u32)).collect();
        let frac: Vec<f64> = c.iter().zip(&base).map(|(&v, &b)| v - b as f64).collect();
        let mut order: Vec<usize> = (0..m - 1).collect();
        // equal fractions: higher coordinate first keeps vertices monotone
        order.sort_by(|&a, &b| frac[b].partial_cmp(&frac[a]).unwrap().then(b.cmp(&a)));

        let mut out = Vec::with_capacity(m);
        let mut vertex = base.clone();
        let mut upper = 1.0;
        for step in 0..m {
            let next = if step < m - 1 { frac[order[step]] } else { 0.0 };
            let w = upper - next;
            if w > 0.0 {
                out.push((self.index_of_cumulative(&vertex), w));
            }
            if step < m - 1 {
                vertex[order[step]] += 1;
                upper = next;
            }
        }
        out
    }

    fn index_of_cumulative(&self, cum: &[u32]) -> usize {
        let mut k = Vec::with_capacity(self.dim);
        let mut prev = 0;
        for &v in cum {
            k.push(v - prev);
            prev = v;
        }
        k.push(self.resolution as u32 - prev);
        self.index(&k)
    }

    /// Interpolated value of grid function `values` at `x`.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        self.locate(x).iter().map(|&(i, w)| w * values[i]).sum()
    }
}

fn too_many() -> Error {
    Error::TooLarge(format!(
        "lattice exceeds the budget of {MAX_TRANSITION_ENTRIES} entries; lower the resolution"
    ))
}

fn enumerate(k: &mut [u32], pos: usize, rem: u32, out: &mut Vec<u32>) {
    if pos == k.len() - 1 {
        k[pos] = rem;
        out.extend_from_slice(k);
        return;
    }
    for v in 0..=rem {
        k[pos] = v;
        enumerate(k, pos + 1, rem - v, out);
    }
}

/// Grid approximation of the optimal cost.
#[derive(Debug, Clone)]
pub struct ValueGrid {
    lattice: Lattice,
    pub penalty: f64,
    pub values: Vec<f64>,
    pub sweeps: usize,
    /// Sup-norm change of the last sweep.
    pub convergence: f64,
    pub converged: bool,
    model_hash: String,
}

impl ValueGrid {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn num_hypotheses(&self) -> usize {
        self.lattice.dim
    }

    pub fn resolution(&self) -> usize {
        self.lattice.resolution
    }

    pub fn model_hash(&self) -> &str {
        &self.model_hash
    }

    pub fn value_at(&self, belief: &Belief) -> f64 {
        self.lattice.interpolate(&self.values, belief.probs())
    }

    /// Errors unless this grid was built for `model` and `penalty`.
    pub fn check_matches(&self, model: &Model, penalty: f64) -> Result<()> {
        if model.num_hypotheses() != self.lattice.dim {
            return Err(Error::GridMismatch(format!(
                "grid has M = {}, model has M = {}",
                self.lattice.dim,
                model.num_hypotheses()
            )));
        }
        if model.content_hash() != self.model_hash {
            return Err(Error::GridMismatch("grid was built for a different model".into()));
        }
        if penalty != self.penalty {
            return Err(Error::GridMismatch(format!(
                "grid was built for L = {}, asked for L = {penalty}",
                self.penalty
            )));
        }
        Ok(())
    }

    /// `1 + min_a (𝕋ᵃ V̂)(ρ)` and the minimizing action, ties to the lowest
    /// index.
    pub fn continuation(&self, model: &Model, belief: &Belief) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for a in 0..model.num_actions() {
            let mut v = 1.0;
            for z in 0..model.alphabet_size() {
                let up = model.bayes_update_unchecked(belief, a, z);
                if up.marginal > 0.0 {
                    v += up.marginal * self.value_at(&up.posterior);
                }
            }
            if v < best.0 {
                best = (v, a);
            }
        }
        best
    }
}

/// Posterior interpolation data of one (point, action): per symbol, the
/// predictive mass and the barycentric vertices.
struct Transitions {
    // per (point, action, symbol): offset into `entries`
    offsets: Vec<u32>,
    marginals: Vec<f64>,
    entries: Vec<(u32, f64)>,
}

/// Predictive mass of one symbol and the vertices of its posterior.
type Transition = (f64, Vec<(usize, f64)>);

fn transitions(model: &Model, lattice: &Lattice) -> Result<Transitions> {
    let k = model.num_actions();
    let z = model.alphabet_size();
    let n = lattice.len();
    if n.saturating_mul(k).saturating_mul(z).saturating_mul(lattice.dim) > MAX_TRANSITION_ENTRIES {
        return Err(too_many());
    }
    let per_point: Vec<Vec<Transition>> = (0..n)
        .into_par_iter()
        .map(|p| {
            let belief = lattice.belief(p);
            let mut rows = Vec::with_capacity(k * z);
            for a in 0..k {
                for s in 0..z {
                    let up = model.bayes_update_unchecked(&belief, a, s);
                    if up.marginal > 0.0 {
                        rows.push((up.marginal, lattice.locate(up.posterior.probs())));
                    } else {
                        rows.push((0.0, Vec::new()));
                    }
                }
            }
            rows
        })
        .collect();
    let mut t = Transitions {
        offsets: Vec::with_capacity(n * k * z + 1),
        marginals: Vec::with_capacity(n * k * z),
        entries: Vec::new(),
    };
    for rows in per_point {
        for (m, verts) in rows {
            t.offsets.push(t.entries.len() as u32);
            t.marginals.push(m);
            t.entries.extend(verts.into_iter().map(|(i, w)| (i as u32, w)));
        }
    }
    t.offsets.push(t.entries.len() as u32);
    Ok(t)
}

/// Value iteration from `V₀(ρ) = min_j (1 - ρ_j) L`.
///
/// Each sweep applies `V ← min{1 + min_a 𝕋ᵃV, V₀}` to the previous grid, so
/// the iterates decrease pointwise. Stops when the sup-norm change is at
/// most `tol` or after `max_sweeps` sweeps.
pub fn value_iterate(model: &Model, penalty: f64, resolution: usize, tol: f64, max_sweeps: usize) -> Result<ValueGrid> {
    let m = model.num_hypotheses();
    if m > MAX_HYPOTHESES {
        return Err(Error::TooLarge(format!(
            "grid value iteration is limited to M <= {MAX_HYPOTHESES}, got M = {m}"
        )));
    }
    if !(penalty > 1.0) || !penalty.is_finite() {
        return Err(invalid_arg("L", format!("must be finite and > 1, got {penalty}")));
    }
    if resolution < MIN_RESOLUTION {
        return Err(invalid_arg("resolution", format!("must be >= {MIN_RESOLUTION}, got {resolution}")));
    }
    if !(tol > 0.0) {
        return Err(invalid_arg("tol", format!("must be > 0, got {tol}")));
    }
    let lattice = Lattice::new(m, resolution)?;
    let trans = transitions(model, &lattice)?;
    let k = model.num_actions();
    let z = model.alphabet_size();
    let stop: Vec<f64> = (0..lattice.len()).map(|p| lattice.belief(p).stopping_cost(penalty)).collect();

    let mut values = stop.clone();
    let mut next = vec![0.0; values.len()];
    let mut sweeps = 0;
    let mut change = f64::INFINITY;
    while sweeps < max_sweeps {
        let prev = &values;
        next.par_iter_mut().enumerate().for_each(|(p, out)| {
            let mut best = f64::INFINITY;
            for a in 0..k {
                let mut v = 1.0;
                for s in 0..z {
                    let row = (p * k + a) * z + s;
                    let mass = trans.marginals[row];
                    if mass > 0.0 {
                        let (lo, hi) = (trans.offsets[row] as usize, trans.offsets[row + 1] as usize);
                        let interp: f64 = trans.entries[lo..hi].iter().map(|&(i, w)| w * prev[i as usize]).sum();
                        v += mass * interp;
                    }
                }
                best = best.min(v);
            }
            *out = best.min(stop[p]);
        });
        change = values.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut values, &mut next);
        sweeps += 1;
        if change <= tol {
            break;
        }
    }
    Ok(ValueGrid {
        lattice,
        penalty,
        values,
        sweeps,
        convergence: change,
        converged: change <= tol,
        model_hash: model.content_hash(),
    })
}

/// Empirical interpolation error: `sup |V̂_fine - V̂_coarse|` over the
/// points the two grids share. The fine resolution must be a multiple of
/// the coarse one.
pub fn interpolation_margin(fine: &ValueGrid, coarse: &ValueGrid) -> Result<f64> {
    let (nf, nc) = (fine.resolution(), coarse.resolution());
    if fine.num_hypotheses() != coarse.num_hypotheses() || nf % nc != 0 {
        return Err(Error::GridMismatch(format!(
            "fine resolution {nf} is not a multiple of coarse resolution {nc}"
        )));
    }
    let r = (nf / nc) as u32;
    let mut worst: f64 = 0.0;
    let mut k = Vec::with_capacity(coarse.num_hypotheses());
    for p in 0..coarse.lattice.len() {
        k.clear();
        k.extend(coarse.lattice.coords(p).iter().map(|&c| c * r));
        let q = fine.lattice.index(&k);
        worst = worst.max((fine.values[q] - coarse.values[p]).abs());
    }
    Ok(worst)
}

/// Outcome of checking `V(ρ) ≤ min{β + min_a (𝕋ᵃV)(ρ), β min_j (1-ρ_j) L}`
/// at every lattice point.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    /// Largest `V(ρ) - rhs(ρ)`; the certificate holds when `≤ 0`.
    pub max_violation: f64,
    pub worst_point: usize,
    /// Points with a positive violation.
    pub violating_points: Vec<usize>,
    pub checked: usize,
}

impl CertificateReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

/// Checks the sufficient condition for `V ≤ β V*` at the grid points, with
/// `V` interpolated off the grid.
pub fn check_bellman_certificate(
    model: &Model,
    penalty: f64,
    beta: f64,
    lattice: &Lattice,
    candidate: &[f64],
) -> Result<CertificateReport> {
    if lattice.dim() != model.num_hypotheses() {
        return Err(Error::GridMismatch(format!(
            "lattice has M = {}, model has M = {}",
            lattice.dim(),
            model.num_hypotheses()
        )));
    }
    if candidate.len() != lattice.len() {
        return Err(Error::GridMismatch(format!(
            "candidate has {} values, lattice has {} points",
            candidate.len(),
            lattice.len()
        )));
    }
    if !(beta > 0.0) {
        return Err(invalid_arg("beta", format!("must be > 0, got {beta}")));
    }
    let slack: Vec<f64> = (0..lattice.len())
        .into_par_iter()
        .map(|p| {
            let belief = lattice.belief(p);
            let mut best = f64::INFINITY;
            for a in 0..model.num_actions() {
                let mut v = beta;
                for z in 0..model.alphabet_size() {
                    let up = model.bayes_update_unchecked(&belief, a, z);
                    if up.marginal > 0.0 {
                        v += up.marginal * lattice.interpolate(candidate, up.posterior.probs());
                    }
                }
                best = best.min(v);
            }
            let rhs = best.min(beta * belief.stopping_cost(penalty));
            candidate[p] - rhs
        })
        .collect();
    let mut report = CertificateReport {
        max_violation: f64::NEG_INFINITY,
        worst_point: 0,
        violating_points: Vec::new(),
        checked: slack.len(),
    };
    for (p, &s) in slack.iter().enumerate() {
        if s > report.max_violation {
            report.max_violation = s;
            report.worst_point = p;
        }
        if s > 0.0 {
            report.violating_points.push(p);
        }
    }
    Ok(report)
}
