//! Model loading with source locations for error reports.

use std::collections::HashMap;
use std::path::Path;

use activeht::model::{validate, ValidationReport};
use activeht::{Model, ModelFile};

use crate::commands::CliError;

/// 1-based line of each kernel row `(action, hypothesis)` in the JSON text.
pub fn row_lines(text: &str) -> HashMap<(usize, usize), usize> {
    let mut out = HashMap::new();
    let Some(start) = text.find("\"kernels\"") else {
        return out;
    };
    let mut line = 1 + text[..start].matches('\n').count();
    let mut depth = 0usize;
    let (mut action, mut hyp) = (0usize, 0usize);
    let mut seen_open = false;
    for ch in text[start..].chars() {
        match ch {
            '\n' => line += 1,
            '[' => {
                depth += 1;
                seen_open = true;
                if depth == 3 {
                    out.insert((action, hyp), line);
                }
            }
            ']' => {
                if depth == 3 {
                    hyp += 1;
                } else if depth == 2 {
                    action += 1;
                    hyp = 0;
                }
                depth = depth.saturating_sub(1);
                if seen_open && depth == 0 {
                    break;
                }
            }
            _ => {}
        }
    }
    out
}

/// Validation findings rendered as `path:line: message` lines.
pub fn render_report(path: &Path, text: &str, report: &ValidationReport) -> String {
    let lines = row_lines(text);
    let mut s = String::new();
    for issue in &report.row_issues {
        let at = lines
            .get(&(issue.action, issue.hypothesis))
            .map(|l| format!("{}:{l}", path.display()))
            .unwrap_or_else(|| path.display().to_string());
        s.push_str(&format!("{at}: error: {issue}\n"));
    }
    // row issues were already printed with their locations
    for line in report.to_string().lines().filter(|l| !l.starts_with("error: ")) {
        s.push_str(line);
        s.push('\n');
    }
    s
}

/// Parses, validates and builds a model; any problem is a validation error
/// carrying the located report.
pub fn load_model(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: cannot read: {e}", path.display())))?;
    let file = ModelFile::from_json(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let report = validate(&file).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    if !report.is_usable() {
        return Err(CliError::Report(render_report(path, &text, &report)));
    }
    Model::try_from(file).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_located() {
        let text = "{\n  \"M\": 2,\n  \"kernels\": [\n    [\n      [0.5, 0.5],\n      [0.1, 0.9]\n    ],\n    [[0.2, 0.8], [0.3, 0.7]]\n  ]\n}\n";
        let lines = row_lines(text);
        assert_eq!(lines[&(0, 0)], 5);
        assert_eq!(lines[&(0, 1)], 6);
        assert_eq!(lines[&(1, 0)], 8);
        assert_eq!(lines[&(1, 1)], 8);
    }
}
