use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk model document (JSON).
///
/// ```json
/// {
///   "M": 2,
///   "actions": ["look"],
///   "alphabet": ["0", "1"],
///   "kernels": [[[0.75, 0.25], [0.25, 0.75]]]
/// }
/// ```
///
/// `kernels[a][i][z]` is the probability of symbol `z` under action `a` when
/// hypothesis `i` is true: one `M × |Z|` matrix per action, in the order of
/// `actions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(rename = "M")]
    pub num_hypotheses: usize,
    pub actions: Vec<String>,
    pub alphabet: Vec<String>,
    pub kernels: Vec<Vec<Vec<f64>>>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Shape checks only; probability checks live in
    /// [`validate`](super::validate).
    pub fn check_structure(&self) -> Result<()> {
        let m = self.num_hypotheses;
        if m < 2 {
            return Err(Error::Structure(format!("M must be at least 2, got {m}")));
        }
        if self.actions.is_empty() {
            return Err(Error::Structure("no actions".into()));
        }
        if self.alphabet.len() < 2 {
            return Err(Error::Structure(format!(
                "alphabet needs at least 2 symbols, got {}",
                self.alphabet.len()
            )));
        }
        if self.kernels.len() != self.actions.len() {
            return Err(Error::Structure(format!(
                "{} kernel matrices for {} actions",
                self.kernels.len(),
                self.actions.len()
            )));
        }
        for (a, mat) in self.kernels.iter().enumerate() {
            if mat.len() != m {
                return Err(Error::Structure(format!(
                    "kernel for action '{}' has {} rows, expected M = {m}",
                    self.actions[a],
                    mat.len()
                )));
            }
            for (i, row) in mat.iter().enumerate() {
                if row.len() != self.alphabet.len() {
                    return Err(Error::Structure(format!(
                        "kernel for action '{}', hypothesis {i} has {} columns, expected |Z| = {}",
                        self.actions[a],
                        row.len(),
                        self.alphabet.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BSC: &str = r#"{"M": 2, "actions": ["look"], "alphabet": ["0","1"],
        "kernels": [[[0.75, 0.25], [0.25, 0.75]]]}"#;

    #[test]
    fn parses_and_checks() {
        let f = ModelFile::from_json(BSC).unwrap();
        f.check_structure().unwrap();
        assert_eq!(f.num_hypotheses, 2);
        let back = ModelFile::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn structural_errors() {
        let mut f = ModelFile::from_json(BSC).unwrap();
        f.kernels[0].pop();
        assert!(matches!(f.check_structure(), Err(Error::Structure(_))));
        let mut f = ModelFile::from_json(BSC).unwrap();
        f.kernels[0][1].push(0.0);
        assert!(matches!(f.check_structure(), Err(Error::Structure(_))));
        assert!(ModelFile::from_json(r#"{"M":2,"actions":[],"alphabet":[],"kernels":[],"x":1}"#).is_err());
    }
}
