//! Worst-case mixture alternatives.
//!
//! For a target hypothesis `i` and an action mixture `λ`, the minimizer picks
//! weights `w` over the other hypotheses to make
//! `Σ_a λ_a D(q[a][i] || Σ_{j≠i} w_j q[a][j])` as small as possible. The
//! objective is convex in `w`, so exponentiated-gradient descent with a
//! Frank-Wolfe gap certificate gives a bracketed minimum.

use crate::model::Model;

/// Weight floor on one alternative: `w_k ≥ floor`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Floor {
    pub hypothesis: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct InnerSolution {
    /// Full-length weights over hypotheses (zero at the target).
    pub weights: Vec<f64>,
    /// Objective at `weights`, bits.
    pub value: f64,
    /// Certified lower bound on the minimum, bits.
    pub lower: f64,
}

/// The family of alternatives for one target hypothesis.
pub(crate) struct Alternatives<'a> {
    model: &'a Model,
    target: usize,
    others: Vec<usize>,
    floor: Option<Floor>,
}

impl<'a> Alternatives<'a> {
    pub fn new(model: &'a Model, target: usize, floor: Option<Floor>) -> Self {
        let others = (0..model.num_hypotheses()).filter(|&j| j != target).collect();
        if let Some(f) = floor {
            debug_assert!(f.hypothesis != target);
            debug_assert!((0.0..=1.0).contains(&f.weight));
        }
        Alternatives {
            model,
            target,
            others,
            floor,
        }
    }

    /// Per-action divergences `D(q[a][i] || m_a(w))`, bits.
    pub fn payoff(&self, weights: &[f64]) -> Vec<f64> {
        let z = self.model.alphabet_size();
        let mut mix = vec![0.0; z];
        (0..self.model.num_actions())
            .map(|a| {
                mix.iter_mut().for_each(|v| *v = 0.0);
                for &j in &self.others {
                    let w = weights[j];
                    if w > 0.0 {
                        for (m, &q) in mix.iter_mut().zip(self.model.row(a, j)) {
                            *m += w * q;
                        }
                    }
                }
                crate::info::kl_divergence(self.model.row(a, self.target), &mix)
            })
            .collect()
    }

    /// Weights with all alternative mass on `j` (respecting the floor).
    pub fn vertex(&self, j: usize) -> Vec<f64> {
        let n = self.others.len();
        let mut v = vec![0.0; n];
        let pos = self.others.iter().position(|&o| o == j).expect("j is an alternative");
        v[pos] = 1.0;
        self.expand(&v)
    }

    pub fn centre(&self) -> Vec<f64> {
        let n = self.others.len();
        self.expand(&vec![1.0 / n as f64; n])
    }

    fn expand(&self, v: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.model.num_hypotheses()];
        let (scale, floor) = match self.floor {
            Some(f) => (1.0 - f.weight, Some(f)),
            None => (1.0, None),
        };
        for (&j, &x) in self.others.iter().zip(v) {
            w[j] = scale * x;
        }
        if let Some(f) = floor {
            w[f.hypothesis] += f.weight;
        }
        w
    }

    fn contract(&self, w: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = self.others.iter().map(|&j| w[j]).collect();
        if let Some(f) = self.floor {
            let pos = self.others.iter().position(|&o| o == f.hypothesis).unwrap();
            v[pos] = (v[pos] - f.weight).max(0.0);
        }
        let s: f64 = v.iter().sum();
        if s > 0.0 {
            v.iter_mut().for_each(|x| *x /= s);
        } else {
            let n = v.len() as f64;
            v.iter_mut().for_each(|x| *x = 1.0 / n);
        }
        v
    }

    /// Minimizes `Σ_a λ_a D(q[a][i] || m_a(w))` to a certified gap `tol`
    /// (bits) or until `max_iter` steps.
    pub fn minimize(&self, lambda: &[f64], warm: Option<&[f64]>, tol: f64, max_iter: usize) -> InnerSolution {
        let prob = Program::build(self, lambda);
        let n = self.others.len();
        if prob.infinite {
            let w = warm.map(<[f64]>::to_vec).unwrap_or_else(|| self.centre());
            return InnerSolution {
                weights: w,
                value: f64::INFINITY,
                lower: f64::INFINITY,
            };
        }
        let mut v = match warm {
            Some(w) => {
                // keep every coordinate alive so EG can move it
                let mut v = self.contract(w);
                let eps = 1e-9 / n as f64;
                v.iter_mut().for_each(|x| *x = (*x + eps) / (1.0 + eps * n as f64));
                v
            }
            None => vec![1.0 / n as f64; n],
        };
        if n == 1 {
            let (f, _) = prob.eval(&v);
            let w = self.expand(&v);
            return InnerSolution {
                weights: w,
                value: f * LOG2_E,
                lower: f * LOG2_E,
            };
        }

        let tol_nats = tol / LOG2_E;
        let (mut f, mut g) = prob.eval(&v);
        let mut step = 1.0;
        for _ in 0..max_iter {
            let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
            let dot: f64 = v.iter().zip(&g).map(|(a, b)| a * b).sum();
            if dot - gmin <= tol_nats {
                break;
            }
            // backtracking exponentiated-gradient step
            loop {
                let mut cand: Vec<f64> = v
                    .iter()
                    .zip(&g)
                    .map(|(&x, &gj)| x * (-(step * (gj - gmin))).max(-700.0).exp())
                    .collect();
                let s: f64 = cand.iter().sum();
                cand.iter_mut().for_each(|x| *x = (*x / s).max(1e-300));
                let (fc, gc) = prob.eval(&cand);
                if fc.is_finite() && fc <= f {
                    v = cand;
                    f = fc;
                    g = gc;
                    step *= 1.6;
                    break;
                }
                step *= 0.3;
                if step < 1e-14 {
                    break;
                }
            }
            if step < 1e-14 {
                break;
            }
        }
        let (f_final, g_final) = prob.eval(&v);
        let gmin = g_final.iter().copied().fold(f64::INFINITY, f64::min);
        let dot: f64 = v.iter().zip(&g_final).map(|(a, b)| a * b).sum();
        let gap = (dot - gmin).max(0.0);
        InnerSolution {
            weights: self.expand(&v),
            value: f_final * LOG2_E,
            lower: (f_final - gap) * LOG2_E,
        }
    }
}

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// The minimization in the reduced coordinates `v` on the simplex over
/// alternatives: `f(v) = Σ_r c_r (ln p_r - ln(b_r + Σ_j v_j s_rj))`, nats.
struct Program {
    c: Vec<f64>,
    ln_p: Vec<f64>,
    b: Vec<f64>,
    // row-major [r][j]
    s: Vec<f64>,
    n: usize,
    infinite: bool,
}

impl Program {
    fn build(alt: &Alternatives<'_>, lambda: &[f64]) -> Program {
        let model = alt.model;
        let n = alt.others.len();
        let (scale, floor) = match alt.floor {
            Some(f) => (1.0 - f.weight, Some(f)),
            None => (1.0, None),
        };
        let mut prog = Program {
            c: Vec::new(),
            ln_p: Vec::new(),
            b: Vec::new(),
            s: Vec::new(),
            n,
            infinite: false,
        };
        for (a, &la) in lambda.iter().enumerate() {
            if la <= 0.0 {
                continue;
            }
            let target = model.row(a, alt.target);
            for (z, &p) in target.iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let b = floor.map_or(0.0, |f| f.weight * model.prob(a, f.hypothesis, z));
                let mut any = b > 0.0;
                for &j in &alt.others {
                    let q = scale * model.prob(a, j, z);
                    any |= q > 0.0;
                    prog.s.push(q);
                }
                if !any {
                    prog.infinite = true;
                }
                prog.c.push(la * p);
                prog.ln_p.push(p.ln());
                prog.b.push(b);
            }
        }
        prog
    }

    fn eval(&self, v: &[f64]) -> (f64, Vec<f64>) {
        let mut f = 0.0;
        let mut g = vec![0.0; self.n];
        for r in 0..self.c.len() {
            let srow = &self.s[r * self.n..(r + 1) * self.n];
            let m = self.b[r] + srow.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            if m <= 0.0 {
                return (f64::INFINITY, vec![f64::NEG_INFINITY; self.n]);
            }
            f += self.c[r] * (self.ln_p[r] - m.ln());
            let k = self.c[r] / m;
            for (gj, &sj) in g.iter_mut().zip(srow) {
                *gj -= k * sj;
            }
        }
        (f, g)
    }
}
