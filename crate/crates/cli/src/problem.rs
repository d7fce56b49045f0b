//! Problem files: intervals, boundary matrix and optional solver settings.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spectral_intervals::{BoundaryMatrix, CMatrix, IntervalUnion, C64};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<f64>,
}

/// On-disk problem description. Complex entries are `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub intervals: Vec<[f64; 2]>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    /// Candidate spectrum to test alongside the computed one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub omega: IntervalUnion,
    pub b: BoundaryMatrix,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("problem file, line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Pretty JSON with a trailing newline; parsing this back and writing it
    /// again gives the same bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    /// SHA-256 of [`ProblemFile::to_json`].
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn from_parts(omega: &IntervalUnion, b: &BoundaryMatrix) -> Self {
        ProblemFile {
            intervals: omega.endpoints().iter().map(|&(a, b)| [a, b]).collect(),
            matrix: (0..b.size()).map(|i| (0..b.size()).map(|j| {
                let z = b.entry(i, j);
                [z.re, z.im]
            }).collect()).collect(),
            window: None,
            grid_step: None,
            tolerances: None,
            spectrum: None,
        }
    }

    pub fn validate(self) -> Result<Problem, CliError> {
        let pairs: Vec<(f64, f64)> = self.intervals.iter().map(|p| (p[0], p[1])).collect();
        let omega = IntervalUnion::new(&pairs).map_err(|e| CliError::Validation(format!("intervals: {e}")))?;
        let n = omega.len();
        if self.matrix.len() != n {
            return Err(CliError::Validation(format!("matrix: {} rows for {n} intervals", self.matrix.len())));
        }
        let mut rows = Vec::with_capacity(n);
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(CliError::Validation(format!("matrix[{i}]: {} entries, expected {n}", row.len())));
            }
            for (j, z) in row.iter().enumerate() {
                if !z[0].is_finite() || !z[1].is_finite() {
                    return Err(CliError::Validation(format!("matrix[{i}][{j}]: entry is not finite")));
                }
            }
            rows.push(row.iter().map(|z| C64::new(z[0], z[1])).collect::<Vec<_>>());
        }
        let m = CMatrix::from_rows(&rows).map_err(|e| CliError::Validation(format!("matrix: {e}")))?;
        let b = BoundaryMatrix::new(m).map_err(|e| CliError::Validation(format!("matrix: {e}")))?;
        if let Some([lo, hi]) = self.window {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(CliError::Validation(format!("window: [{lo}, {hi}] is not a finite interval")));
            }
        }
        if let Some(step) = self.grid_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(CliError::Validation(format!("grid_step: must be positive, got {step}")));
            }
        }
        if let Some(t) = &self.tolerances {
            for (name, v) in [("root", t.root), ("eig", t.eig), ("constant", t.constant), ("structure", t.structure)] {
                if let Some(v) = v {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(CliError::Validation(format!("tolerances.{name}: must be positive, got {v}")));
                    }
                }
            }
        }
        Ok(Problem { file: self, omega, b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = r#"{"intervals": [[0, 1], [2, 3]],
        "matrix": [[[0.5, 0.5], [0.5, -0.5]], [[0.5, -0.5], [0.5, 0.5]]],
        "window": [-2, 2], "spectrum": [0, 0.25]}"#;

    #[test]
    fn round_trip_is_byte_identical() {
        let first = ProblemFile::from_json(PAIR).unwrap().to_json();
        let second = ProblemFile::from_json(&first).unwrap().to_json();
        assert_eq!(first, second);
        assert!(!first.contains("grid_step"));
    }

    #[test]
    fn validation_messages_name_the_field() {
        let bad = PAIR.replace("[0.5, -0.5]], [[0.5, -0.5]", "[0.5, -0.5]], [[0.9, -0.5]");
        let err = ProblemFile::from_json(&bad).unwrap().validate().unwrap_err().to_string();
        assert!(err.starts_with("matrix:") && err.contains("entry"), "{err}");
        let err = ProblemFile::from_json(&PAIR.replace("[2, 3]", "[0.5, 3]")).unwrap().validate().unwrap_err().to_string();
        assert!(err.starts_with("intervals:"), "{err}");
        let err = ProblemFile::from_json("{\"intervals\": [[0, 1]],\n \"matrix\": [[1, 0]]").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = ProblemFile::from_json(r#"{"intervals": [[0, 1]], "matrix": [[[1, 0]]], "extra": 1}"#).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn digest_is_stable() {
        let p = ProblemFile::from_json(PAIR).unwrap();
        assert_eq!(p.digest(), ProblemFile::from_json(&p.to_json()).unwrap().digest());
        assert_eq!(p.digest().len(), 64);
    }
}
