use clap::ValueEnum;
use meanforge_core::{RationalWeight, DEFAULT_DEPTH, DEFAULT_TOLERANCE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Scalar,
    Operator,
    Hsnorm,
    All,
}

impl Level {
    pub fn includes(self, other: Level) -> bool {
        self == Level::All || self == other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub master_seed: u64,
    pub trials: usize,
    pub dim: usize,
    /// Trial `i` uses `nu_list[i % nu_list.len()]`.
    pub nu_list: Vec<RationalWeight>,
    pub depth: usize,
    pub tol: f64,
    pub field: Field,
    pub condition_cap: f64,
}

pub const DEFAULT_SEED: u64 = 42;

impl Default for TrialConfig {
    fn default() -> Self {
        let nu_list = [(1, 4), (1, 3), (1, 2), (2, 5), (5, 8), (7, 8)]
            .into_iter()
            .map(|(p, q)| RationalWeight::new(p, q).expect("default weights are valid"))
            .collect();
        Self {
            master_seed: DEFAULT_SEED,
            trials: 1000,
            dim: 4,
            nu_list,
            depth: DEFAULT_DEPTH,
            tol: DEFAULT_TOLERANCE,
            field: Field::Real,
            condition_cap: 1e4,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.dim == 0 {
            return Err("dim must be positive".into());
        }
        if self.nu_list.is_empty() {
            return Err("at least one weight is required".into());
        }
        if !(self.depth >= 1 && self.depth <= meanforge_core::schedule::MAX_DEPTH) {
            return Err(format!(
                "depth must lie in 1..={}",
                meanforge_core::schedule::MAX_DEPTH
            ));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err("tol must be a positive number".into());
        }
        if !(self.condition_cap >= 1.0 && self.condition_cap.is_finite()) {
            return Err("condition cap must be at least 1".into());
        }
        Ok(())
    }

    pub fn nu_for(&self, trial: usize) -> RationalWeight {
        self.nu_list[trial % self.nu_list.len()]
    }
}
