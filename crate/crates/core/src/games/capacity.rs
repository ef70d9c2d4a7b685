//! Blahut-Arimoto capacity of a row-stochastic matrix.

use crate::info;

#[derive(Debug, Clone)]
pub struct Capacity {
    /// Upper end of the certified bracket, bits.
    pub upper: f64,
    /// Mutual information achieved by `input`, bits.
    pub lower: f64,
    /// Capacity-achieving input law (over hypotheses).
    pub input: Vec<f64>,
    pub iterations: usize,
}

/// Capacity of the channel whose input `i` emits `rows[i]`.
///
/// Iterates `p_i ← p_i 2^{D(W_i || pW)} / Σ` and stops once
/// `log max_i 2^{D_i} - log Σ_i p_i 2^{D_i} ≤ tol`, which brackets the
/// capacity from both sides.
pub fn channel_capacity(rows: &[&[f64]], tol: f64, max_iter: usize) -> Capacity {
    let n = rows.len();
    let z = rows[0].len();
    let mut p = vec![1.0 / n as f64; n];
    let mut out = vec![0.0; z];
    let mut d = vec![0.0; n];
    let mut iterations = 0;
    let (mut lower, mut upper);
    loop {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (pi, row) in p.iter().zip(rows) {
            for (o, &w) in out.iter_mut().zip(row.iter()) {
                *o += pi * w;
            }
        }
        for (di, row) in d.iter_mut().zip(rows) {
            *di = info::kl_divergence(row, &out);
        }
        // Σ p_i 2^{D_i}, computed relative to the max for stability
        let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weighted: f64 = p.iter().zip(&d).map(|(pi, di)| pi * (di - dmax).exp2()).sum();
        lower = dmax + weighted.log2();
        upper = dmax;
        // the current input already achieves its own mutual information
        let achieved: f64 = p.iter().zip(&d).map(|(pi, di)| pi * di).sum();
        lower = lower.min(upper).max(achieved.min(upper));
        iterations += 1;
        if upper - lower <= tol || iterations >= max_iter {
            break;
        }
        let mut s = 0.0;
        for (pi, di) in p.iter_mut().zip(&d) {
            *pi *= (di - dmax).exp2();
            s += *pi;
        }
        p.iter_mut().for_each(|v| *v /= s);
    }
    Capacity {
        upper: upper.max(0.0),
        lower: lower.max(0.0),
        input: p,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bsc_capacity() {
        for p in [0.1, 0.25, 0.4] {
            let r0 = [1.0 - p, p];
            let r1 = [p, 1.0 - p];
            let c = channel_capacity(&[&r0, &r1], 1e-12, 10_000);
            assert_abs_diff_eq!(c.upper, 1.0 - info::binary_entropy(p), epsilon = 1e-10);
        }
    }

    #[test]
    fn noiseless_and_useless() {
        let c = channel_capacity(&[&[1.0, 0.0], &[0.0, 1.0]], 1e-12, 100);
        assert_abs_diff_eq!(c.upper, 1.0, epsilon = 1e-12);
        let c = channel_capacity(&[&[0.3, 0.7], &[0.3, 0.7]], 1e-12, 100);
        assert_abs_diff_eq!(c.upper, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn z_channel_matches_closed_form() {
        // Z-channel with crossover e: C = log2(1 + (1-e) e^{e/(1-e)})
        let e: f64 = 0.3;
        let c = channel_capacity(&[&[1.0, 0.0], &[e, 1.0 - e]], 1e-12, 100_000);
        let closed = (1.0 + (1.0 - e) * e.powf(e / (1.0 - e))).log2();
        assert_abs_diff_eq!(c.upper, closed, epsilon = 1e-9);
        assert!(c.lower <= closed + 1e-12);
    }
}
