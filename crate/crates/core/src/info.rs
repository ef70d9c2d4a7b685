//! Base-2 information measures on finite distributions.
//!
//! Conventions: `0 log(0/q) = 0` and `p log(p/0) = +inf` for `p > 0`.

/// `log2(e)`, the conversion factor from nats to bits.
pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Shannon entropy in bits.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Entropy of the two-point distribution `[p, 1 - p]`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// Kullback-Leibler divergence `D(p || q)` in bits; `+inf` when `p` is not
/// absolutely continuous with respect to `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut d = 0.0;
    for (&pz, &qz) in p.iter().zip(q) {
        if pz <= 0.0 {
            continue;
        }
        if qz <= 0.0 {
            return f64::INFINITY;
        }
        d += pz * (pz / qz).log2();
    }
    // rounding can leave tiny negatives for near-identical rows
    d.max(0.0)
}

/// KL divergence between Bernoulli laws `B(a)` and `B(b)` (success
/// probabilities), in bits.
pub fn bernoulli_kl(a: f64, b: f64) -> f64 {
    kl_divergence(&[1.0 - a, a], &[1.0 - b, b])
}

/// `max(x, 0)`.
#[inline]
pub fn pos(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}
