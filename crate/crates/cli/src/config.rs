use std::path::Path;

use clap::ValueEnum;
use hms_core::quadrature::QuadratureConfig;
use hms_core::suites::SuiteConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Settings shared by all subcommands; read from an optional JSON file, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: i64,
    pub nodes: usize,
    pub shuffle_nodes: usize,
    pub tolerance: f64,
    pub height_bound: f64,
    pub window: u32,
    pub windows: (u32, u32),
    pub depth: usize,
    pub seed: u64,
    pub configurations: usize,
    pub deformations: usize,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SuiteConfig::default();
        RunConfig {
            d: 2,
            nodes: s.nodes_per_dim,
            shuffle_nodes: s.shuffle_nodes,
            tolerance: QuadratureConfig::default().tolerance,
            height_bound: s.height_bound,
            window: 8,
            windows: s.windows,
            depth: s.depth,
            seed: s.seed,
            configurations: s.configurations,
            deformations: s.deformations,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |s: &str| Err(CliError::Input(s.into()));
        if !(8..=64).contains(&self.nodes) {
            return bad("nodes must be in 8..=64");
        }
        if !(self.tolerance >= 1e-14 && self.tolerance <= 1e-2) {
            return bad("tolerance must be in [1e-14, 1e-2]");
        }
        if !(self.height_bound >= 1.0 && self.height_bound <= 200.0) {
            return bad("height_bound must be in [1, 200]");
        }
        if self.window > 30 {
            return bad("window must be at most 30");
        }
        if !(1..=4).contains(&self.depth) {
            return bad("depth must be in 1..=4");
        }
        Ok(())
    }

    pub fn quad(&self) -> QuadratureConfig {
        QuadratureConfig { nodes_per_dim: self.nodes, tolerance: self.tolerance, seed: self.seed, ..Default::default() }
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            d: self.d,
            nodes_per_dim: self.nodes,
            shuffle_nodes: self.shuffle_nodes,
            depth: self.depth,
            seed: self.seed,
            height_bound: self.height_bound,
            windows: self.windows,
            configurations: self.configurations,
            deformations: self.deformations,
        }
    }
}
