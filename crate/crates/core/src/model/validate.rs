use std::fmt;

use serde::Serialize;

use super::{ModelFile, LOAD_NORMALIZATION_TOL};
use crate::error::Result;
use crate::info;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RowIssueKind {
    NonFinite { symbol: usize, value: f64 },
    Negative { symbol: usize, value: f64 },
    RowSum { sum: f64 },
}

/// One bad kernel row, located by action and hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowIssue {
    pub action: usize,
    pub action_name: String,
    pub hypothesis: usize,
    pub kind: RowIssueKind,
}

impl fmt::Display for RowIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kernels[{}][{}] (action '{}', hypothesis {}): ",
            self.action, self.hypothesis, self.action_name, self.hypothesis
        )?;
        match &self.kind {
            RowIssueKind::NonFinite { symbol, value } => {
                write!(f, "non-finite entry {value} at symbol {symbol}")
            }
            RowIssueKind::Negative { symbol, value } => {
                write!(f, "negative entry {value} at symbol {symbol}")
            }
            RowIssueKind::RowSum { sum } => write!(f, "row sums to {sum}, expected 1"),
        }
    }
}

/// Everything [`validate`] found about a model document.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub row_issues: Vec<RowIssue>,
    /// Every ordered pair is separated by some action. `None` when rows are
    /// invalid.
    pub assumption1: Option<bool>,
    /// All hypotheses share supports under every action (`ξ_M < ∞`).
    pub assumption2: Option<bool>,
    /// `ξ_M`, `+inf` when supports differ.
    pub xi: Option<f64>,
    /// Ordered pairs `(i, j)` with `D(q[a][i] || q[a][j]) = 0` for all `a`.
    pub indistinguishable: Vec<(usize, usize)>,
    /// `max_a D(q[a][i] || q[a][j])` for every ordered pair.
    pub distinguishability: Vec<Vec<f64>>,
}

impl ValidationReport {
    /// Rows are valid probability vectors.
    pub fn rows_ok(&self) -> bool {
        self.row_issues.is_empty()
    }

    /// Rows are valid and the separation assumption holds.
    pub fn is_usable(&self) -> bool {
        self.rows_ok() && self.assumption1 == Some(true)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.row_issues {
            writeln!(f, "error: {issue}")?;
        }
        let flag = |b: Option<bool>| match b {
            Some(true) => "holds",
            Some(false) => "FAILS",
            None => "unchecked",
        };
        writeln!(f, "assumption 1 (pairwise separation): {}", flag(self.assumption1))?;
        writeln!(f, "assumption 2 (common supports): {}", flag(self.assumption2))?;
        match self.xi {
            Some(x) if x.is_finite() => writeln!(f, "xi_M = {x}")?,
            Some(_) => writeln!(f, "xi_M = infinite")?,
            None => writeln!(f, "xi_M = unchecked")?,
        }
        for (i, j) in &self.indistinguishable {
            writeln!(f, "indistinguishable pair: ({i}, {j})")?;
        }
        Ok(())
    }
}

/// Checks a model document: per-row probability problems are reported, not
/// raised; only a malformed tensor is an error.
pub fn validate(file: &ModelFile) -> Result<ValidationReport> {
    file.check_structure()?;
    let mut row_issues = Vec::new();
    for (a, mat) in file.kernels.iter().enumerate() {
        for (i, row) in mat.iter().enumerate() {
            let issue = |kind| RowIssue {
                action: a,
                action_name: file.actions[a].clone(),
                hypothesis: i,
                kind,
            };
            let mut bad_entry = false;
            for (z, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    row_issues.push(issue(RowIssueKind::NonFinite { symbol: z, value: v }));
                    bad_entry = true;
                } else if v < 0.0 {
                    row_issues.push(issue(RowIssueKind::Negative { symbol: z, value: v }));
                    bad_entry = true;
                }
            }
            let sum: f64 = row.iter().sum();
            if !bad_entry && (sum - 1.0).abs() > LOAD_NORMALIZATION_TOL {
                row_issues.push(issue(RowIssueKind::RowSum { sum }));
            }
        }
    }

    let m = file.num_hypotheses;
    let mut report = ValidationReport {
        row_issues,
        assumption1: None,
        assumption2: None,
        xi: None,
        indistinguishable: Vec::new(),
        distinguishability: Vec::new(),
    };
    if !report.row_issues.is_empty() {
        return Ok(report);
    }

    let normalized: Vec<Vec<Vec<f64>>> = file
        .kernels
        .iter()
        .map(|mat| {
            mat.iter()
                .map(|row| {
                    let s: f64 = row.iter().sum();
                    row.iter().map(|v| v / s).collect()
                })
                .collect()
        })
        .collect();

    let mut dist = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let d = normalized
                .iter()
                .map(|mat| info::kl_divergence(&mat[i], &mat[j]))
                .fold(0.0, f64::max);
            dist[i][j] = d;
            if d <= 0.0 {
                report.indistinguishable.push((i, j));
            }
        }
    }

    let mut xi: f64 = 0.0;
    'outer: for mat in &normalized {
        for ri in mat {
            for rj in mat {
                for (&p, &q) in ri.iter().zip(rj) {
                    if p > 0.0 && q <= 0.0 {
                        xi = f64::INFINITY;
                        break 'outer;
                    }
                    if p > 0.0 {
                        xi = xi.max((p / q).log2());
                    }
                }
            }
        }
    }

    report.assumption1 = Some(report.indistinguishable.is_empty());
    report.assumption2 = Some(xi.is_finite());
    report.xi = Some(xi);
    report.distinguishability = dist;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn file(kernels: Vec<Vec<Vec<f64>>>) -> ModelFile {
        ModelFile {
            num_hypotheses: kernels[0].len(),
            actions: (0..kernels.len()).map(|a| format!("a{a}")).collect(),
            alphabet: (0..kernels[0][0].len()).map(|z| z.to_string()).collect(),
            kernels,
        }
    }

    #[test]
    fn bsc_passes_both_assumptions() {
        let r = validate(&file(vec![vec![vec![0.75, 0.25], vec![0.25, 0.75]]])).unwrap();
        assert!(r.rows_ok());
        assert_eq!(r.assumption1, Some(true));
        assert_eq!(r.assumption2, Some(true));
        assert_abs_diff_eq!(r.xi.unwrap(), 3f64.log2(), epsilon = 1e-15);
    }

    #[test]
    fn identical_rows_fail_assumption1() {
        let r = validate(&file(vec![vec![vec![0.4, 0.6], vec![0.4, 0.6]]])).unwrap();
        assert_eq!(r.assumption1, Some(false));
        assert_eq!(r.indistinguishable, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn support_mismatch_fails_assumption2() {
        let r = validate(&file(vec![vec![vec![1.0, 0.0], vec![0.5, 0.5]]])).unwrap();
        assert_eq!(r.assumption1, Some(true));
        assert_eq!(r.assumption2, Some(false));
        assert!(r.xi.unwrap().is_infinite());
    }

    #[test]
    fn negative_entry_is_reported_not_raised() {
        let r = validate(&file(vec![vec![vec![1.1, -0.1], vec![0.5, 0.5]]])).unwrap();
        assert!(!r.rows_ok());
        assert_eq!(r.row_issues.len(), 1);
        assert!(matches!(r.row_issues[0].kind, RowIssueKind::Negative { symbol: 1, .. }));
        assert_eq!(r.assumption1, None);
        assert!(r.row_issues[0].to_string().contains("kernels[0][0]"));
    }

    #[test]
    fn small_row_error_is_tolerated_large_is_not() {
        let ok = validate(&file(vec![vec![vec![0.5 + 5e-10, 0.5], vec![0.5, 0.5]]])).unwrap();
        assert!(ok.rows_ok());
        let bad = validate(&file(vec![vec![vec![0.5 + 1e-6, 0.5], vec![0.5, 0.5]]])).unwrap();
        assert!(matches!(bad.row_issues[0].kind, RowIssueKind::RowSum { .. }));
        assert!(crate::model::Model::try_from(file(vec![vec![vec![0.6, 0.5], vec![0.5, 0.5]]])).is_err());
    }
}
