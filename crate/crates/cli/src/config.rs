use std::path::Path;

use nalgebra::{DMatrix, DVector};
use pseudomode::{InitialState, ReservoirSpec, SystemSpec, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Complex numbers are `[re, im]` pairs.
type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirConfig {
    pub g: f64,
    pub gamma: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub psi0: Pair,
    pub psi: Vec<Pair>,
}

/// Model configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub h_s: Vec<Vec<Pair>>,
    pub reservoir: ReservoirConfig,
    pub initial: InitialConfig,
}

/// Validated model.
#[derive(Debug, Clone)]
pub struct Model {
    pub system: SystemSpec,
    pub reservoir: ReservoirSpec,
    pub initial: InitialState,
}

fn c(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

impl ModelConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))
    }

    pub fn build(&self) -> Result<Model, CliError> {
        let n = self.n;
        if n == 0 {
            return Err(CliError::Validation("n must be at least 1".into()));
        }
        if self.h_s.len() != n || self.h_s.iter().any(|row| row.len() != n) {
            return Err(CliError::Validation(format!("h_s must be {n}x{n}")));
        }
        if self.initial.psi.len() != n {
            return Err(CliError::Validation(format!("initial.psi must have {n} entries, got {}", self.initial.psi.len())));
        }
        let h = DMatrix::from_fn(n, n, |i, j| c(self.h_s[i][j]));
        let system = SystemSpec::new(h)?;
        let r = &self.reservoir;
        let reservoir = ReservoirSpec::new(r.g, r.gamma, r.eps)?;
        let psi = DVector::from_iterator(n, self.initial.psi.iter().copied().map(c));
        let initial = InitialState::new(c(self.initial.psi0), psi)?;
        Ok(Model { system, reservoir, initial })
    }
}

/// Two-level model used by `verify` when no configuration is given.
pub fn reference_model() -> ModelConfig {
    ModelConfig {
        n: 2,
        h_s: vec![vec![[0.5, 0.0], [0.3, -0.2]], vec![[0.3, 0.2], [-0.7, 0.0]]],
        reservoir: ReservoirConfig { g: 1.0, gamma: 1.0, eps: 0.1 },
        initial: InitialConfig { psi0: [0.6, 0.0], psi: vec![[0.48, 0.0], [0.0, 0.64]] },
    }
}
