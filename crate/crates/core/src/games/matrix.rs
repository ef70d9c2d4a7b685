//! Finite two-player zero-sum games solved as a linear program.
//!
//! The row player maximizes, the column player minimizes. The payoff is
//! shifted to be ≥ 1 and the column player's program
//! `max 1ᵀy s.t. A'y ≤ 1, y ≥ 0` is solved with a dense tableau simplex
//! starting from the slack basis; the row strategy is read off the duals.

/// Optimal strategies with a certified value bracket.
#[derive(Debug, Clone)]
pub struct MatrixGameSolution {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// `min_c xᵀA_c`: guaranteed by the row strategy.
    pub lower: f64,
    /// `max_a A_a y`: conceded at most by the column strategy.
    pub upper: f64,
    pub pivots: usize,
}

impl MatrixGameSolution {
    pub fn gap(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }
}

const PIVOT_EPS: f64 = 1e-9;
const RATIO_SLACK: f64 = 1e-11;

/// Solves `max_x min_y xᵀ A y` for a dense `rows × cols` payoff given as
/// `payoff[r][c]`. Entries must be finite.
pub fn solve(payoff: &[Vec<f64>]) -> MatrixGameSolution {
    let rows = payoff.len();
    assert!(rows > 0, "game needs at least one row");
    let cols = payoff[0].len();
    assert!(cols > 0, "game needs at least one column");
    debug_assert!(payoff.iter().all(|r| r.len() == cols && r.iter().all(|v| v.is_finite())));

    if rows == 1 {
        let row_strategy = vec![1.0];
        let (c_best, _) = argmin(&payoff[0]);
        let mut col_strategy = vec![0.0; cols];
        col_strategy[c_best] = 1.0;
        return certify(payoff, row_strategy, col_strategy, 0);
    }

    let min = payoff.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let max = payoff.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    // Affine map onto [1, 2]: same optimal strategies, positive LP value.
    let scale = if max - min > 0.0 { 1.0 / (max - min) } else { 1.0 };

    // Tableau: `rows` constraint rows plus the objective row; columns are
    // cols decision vars, rows slacks, then the right-hand side.
    let width = cols + rows + 1;
    let rhs = width - 1;
    let mut t = vec![0.0; (rows + 1) * width];
    for r in 0..rows {
        for c in 0..cols {
            t[r * width + c] = 1.0 + (payoff[r][c] - min) * scale;
        }
        t[r * width + cols + r] = 1.0;
        t[r * width + rhs] = 1.0;
    }
    let obj = rows * width;
    for c in 0..cols {
        t[obj + c] = -1.0;
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    let mut pivots = 0usize;
    let mut degenerate_streak = 0usize;
    let max_pivots = 50 * (rows + cols) + 1000;
    while pivots < max_pivots {
        let bland = degenerate_streak > rows + 10;
        let entering = {
            let mut best: Option<(usize, f64)> = None;
            for c in 0..rhs {
                let v = t[obj + c];
                if v < -PIVOT_EPS {
                    if bland {
                        best = Some((c, v));
                        break;
                    }
                    if best.is_none_or(|(_, b)| v < b) {
                        best = Some((c, v));
                    }
                }
            }
            match best {
                Some((c, _)) => c,
                None => break,
            }
        };
        // Harris two-pass ratio test: among rows whose ratio is within a
        // small tolerance of the minimum, take the largest pivot element.
        let mut min_ratio = f64::INFINITY;
        for r in 0..rows {
            let a = t[r * width + entering];
            if a > PIVOT_EPS {
                min_ratio = min_ratio.min((t[r * width + rhs] + RATIO_SLACK) / a);
            }
        }
        let mut leaving: Option<(usize, f64)> = None;
        let mut best_pivot = 0.0;
        for r in 0..rows {
            let a = t[r * width + entering];
            if a > PIVOT_EPS {
                let ratio = t[r * width + rhs] / a;
                let better = if bland {
                    ratio <= min_ratio && leaving.is_none_or(|(lr, _)| basis[r] < basis[lr])
                } else {
                    ratio <= min_ratio && a > best_pivot
                };
                if better {
                    leaving = Some((r, ratio.max(0.0)));
                    best_pivot = a;
                }
            }
        }
        // bounded: every column has a positive entry in every row
        let (lr, ratio) = leaving.expect("game LP is bounded");
        if ratio <= 1e-15 {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        pivot(&mut t, width, rows + 1, lr, entering);
        basis[lr] = entering;
        pivots += 1;
    }

    let mut y = vec![0.0; cols];
    for (r, &b) in basis.iter().enumerate() {
        if b < cols {
            y[b] = t[r * width + rhs].max(0.0);
        }
    }
    let u: Vec<f64> = (0..rows).map(|r| t[obj + cols + r].max(0.0)).collect();
    let row_strategy = normalize(u);
    let col_strategy = normalize(y);
    certify(payoff, row_strategy, col_strategy, pivots)
}

fn pivot(t: &mut [f64], width: usize, nrows: usize, pr: usize, pc: usize) {
    let p = t[pr * width + pc];
    for v in &mut t[pr * width..(pr + 1) * width] {
        *v /= p;
    }
    let prow: Vec<f64> = t[pr * width..(pr + 1) * width].to_vec();
    for r in 0..nrows {
        if r == pr {
            continue;
        }
        let f = t[r * width + pc];
        if f == 0.0 {
            continue;
        }
        let row = &mut t[r * width..(r + 1) * width];
        for (v, &pv) in row.iter_mut().zip(&prow) {
            *v -= f * pv;
        }
        row[pc] = 0.0;
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for x in &mut v {
            *x /= s;
        }
    } else {
        let n = v.len() as f64;
        v.iter_mut().for_each(|x| *x = 1.0 / n);
    }
    v
}

fn argmin(v: &[f64]) -> (usize, f64) {
    let mut best = (0, v[0]);
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x < best.1 {
            best = (i, x);
        }
    }
    best
}

pub(crate) fn row_guarantee(payoff: &[Vec<f64>], x: &[f64]) -> f64 {
    let cols = payoff[0].len();
    (0..cols)
        .map(|c| payoff.iter().zip(x).map(|(r, &w)| if w > 0.0 { w * r[c] } else { 0.0 }).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn certify(payoff: &[Vec<f64>], row_strategy: Vec<f64>, col_strategy: Vec<f64>, pivots: usize) -> MatrixGameSolution {
    let lower = row_guarantee(payoff, &row_strategy);
    let upper = payoff
        .iter()
        .map(|r| r.iter().zip(&col_strategy).map(|(&a, &w)| if w > 0.0 { a * w } else { 0.0 }).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    MatrixGameSolution {
        row_strategy,
        col_strategy,
        lower,
        upper,
        pivots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Support-enumeration oracle for small games: tries every pair of
    /// equal-size supports and returns the value of the first equilibrium.
    fn support_enumeration_value(a: &[Vec<f64>]) -> f64 {
        let rows = a.len();
        let cols = a[0].len();
        let subsets = |n: usize, k: usize| -> Vec<Vec<usize>> {
            (0u32..(1 << n))
                .filter(|m| m.count_ones() as usize == k)
                .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
                .collect()
        };
        for k in 1..=rows.min(cols) {
            for rs in subsets(rows, k) {
                for cs in subsets(cols, k) {
                    // x over rs: Σ x_r a[r][c] = v for c in cs, Σ x = 1
                    let mut m = vec![vec![0.0; k + 1]; k + 1];
                    let mut b = vec![0.0; k + 1];
                    for (e, &c) in cs.iter().enumerate() {
                        for (u, &r) in rs.iter().enumerate() {
                            m[e][u] = a[r][c];
                        }
                        m[e][k] = -1.0;
                    }
                    for u in 0..k {
                        m[k][u] = 1.0;
                    }
                    b[k] = 1.0;
                    let Some(xs) = gauss(m, b) else { continue };
                    let mut m = vec![vec![0.0; k + 1]; k + 1];
                    let mut b = vec![0.0; k + 1];
                    for (e, &r) in rs.iter().enumerate() {
                        for (u, &c) in cs.iter().enumerate() {
                            m[e][u] = a[r][c];
                        }
                        m[e][k] = -1.0;
                    }
                    for u in 0..k {
                        m[k][u] = 1.0;
                    }
                    b[k] = 1.0;
                    let Some(ys) = gauss(m, b) else { continue };
                    if xs[..k].iter().chain(&ys[..k]).any(|&p| p < -1e-12) {
                        continue;
                    }
                    let v = xs[k];
                    let mut x = vec![0.0; rows];
                    for (u, &r) in rs.iter().enumerate() {
                        x[r] = xs[u];
                    }
                    let mut y = vec![0.0; cols];
                    for (u, &c) in cs.iter().enumerate() {
                        y[c] = ys[u];
                    }
                    let guar = (0..cols)
                        .map(|c| (0..rows).map(|r| x[r] * a[r][c]).sum::<f64>())
                        .fold(f64::INFINITY, f64::min);
                    let conc = (0..rows)
                        .map(|r| (0..cols).map(|c| a[r][c] * y[c]).sum::<f64>())
                        .fold(f64::NEG_INFINITY, f64::max);
                    if guar >= v - 1e-9 && conc <= v + 1e-9 {
                        return v;
                    }
                }
            }
        }
        panic!("no equilibrium found");
    }

    fn gauss(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for col in 0..n {
            let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
            if m[p][col].abs() < 1e-12 {
                return None;
            }
            m.swap(col, p);
            b.swap(col, p);
            for r in 0..n {
                if r != col {
                    let f = m[r][col] / m[col][col];
                    for c in col..n {
                        m[r][c] -= f * m[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
        Some((0..n).map(|i| b[i] / m[i][i]).collect())
    }

    #[test]
    fn identity_game() {
        let s = solve(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_abs_diff_eq!(s.lower, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.row_strategy[0], 0.5, epsilon = 1e-12);
        assert!(s.gap() < 1e-12);
    }

    #[test]
    fn dominant_row() {
        let s = solve(&[vec![2.0, 3.0, 1.5], vec![1.0, 0.5, 1.0], vec![0.0, 0.0, 0.0]]);
        assert_abs_diff_eq!(s.row_strategy[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lower, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn rock_paper_scissors_variant() {
        let a = vec![vec![0.0, 2.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]];
        let s = solve(&a);
        assert_abs_diff_eq!(s.lower, 1.0 / 12.0, epsilon = 1e-12);
        assert!(s.gap() < 1e-12);
    }

    #[test]
    fn single_row_and_constant_games() {
        let s = solve(&[vec![3.0, 1.0, 2.0]]);
        assert_eq!(s.lower, 1.0);
        assert_eq!(s.upper, 1.0);
        let s = solve(&[vec![0.0; 4], vec![0.0; 4]]);
        assert_eq!(s.lower, 0.0);
        assert!(s.gap() == 0.0);
    }

    proptest! {
        #[test]
        fn matches_support_enumeration(
            rows in 1usize..=3,
            cols in 1usize..=4,
            seed in proptest::collection::vec(0.0f64..3.0, 12),
        ) {
            let a: Vec<Vec<f64>> = (0..rows)
                .map(|r| (0..cols).map(|c| seed[r * 4 + c]).collect())
                .collect();
            let s = solve(&a);
            prop_assert!(s.gap() < 1e-9);
            let oracle = support_enumeration_value(&a);
            prop_assert!((s.lower - oracle).abs() < 1e-8, "lp {} oracle {}", s.lower, oracle);
        }

        #[test]
        fn certificate_brackets_value(
            rows in 2usize..8,
            cols in 2usize..12,
            seed in proptest::collection::vec(-1.0f64..1.0, 96),
        ) {
            let a: Vec<Vec<f64>> = (0..rows)
                .map(|r| (0..cols).map(|c| seed[r * 12 + c]).collect())
                .collect();
            let s = solve(&a);
            prop_assert!(s.lower <= s.upper + 1e-12);
            prop_assert!(s.gap() < 1e-9);
        }
    }
}
