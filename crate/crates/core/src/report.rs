//! Residual reports returned by the verification routines.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    /// Diagnostic values that are reported but not judged.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, f64>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a residual; NaN never passes.
    pub fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        let passed = residual <= tolerance;
        self.checks.push(Check { name: name.into(), residual, tolerance, passed });
    }

    pub fn note(&mut self, name: impl Into<String>, value: f64) {
        self.info.insert(name.into(), value);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.info.extend(other.info);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// One line per check: `PASS name residual tolerance`.
    pub fn table(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{} {} {:.3e} {:.1e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            ));
        }
        for (k, v) in &self.info {
            s.push_str(&format!("INFO {k} {v:.3e}\n"));
        }
        s
    }
}

/// Relative difference `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: num_complex::Complex64, b: num_complex::Complex64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails() {
        let mut r = Report::new();
        r.push("a", 1e-12, 1e-10);
        assert!(r.passed());
        r.push("b", f64::NAN, 1e-10);
        assert!(!r.passed());
        assert!(r.table().starts_with("PASS a"));
    }
}
