use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed used by each evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPolicy {
    /// Every evaluation reuses `OptimizerConfig::seed`.
    #[default]
    CommonRandomNumbers,
    /// Each evaluation draws a new seed derived from `seed` and a counter.
    Fresh,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOrder {
    #[default]
    AscendingEnergy,
    DescendingEnergy,
}

/// Settings of the greedy amplitude-class search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Factors on the current class probability; must contain 0 and 1.
    pub prob_grid: Vec<f64>,
    /// Factors on the current class scale; must contain 1, all positive.
    pub scale_grid: Vec<f64>,
    pub max_epochs: usize,
    /// An epoch gaining less than this (bits/4D) ends the search.
    pub epoch_improvement_tol: f64,
    /// Symbols (or oracle samples) per evaluation.
    pub eval_symbols: usize,
    pub seed_policy: SeedPolicy,
    pub sweep_order: SweepOrder,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            prob_grid: vec![0.0, 0.25, 0.5, 0.8, 1.0, 1.25, 2.0, 4.0],
            scale_grid: vec![0.9, 0.95, 1.0, 1.05, 1.1],
            max_epochs: 10,
            epoch_improvement_tol: 0.002,
            eval_symbols: 10_000,
            seed_policy: SeedPolicy::CommonRandomNumbers,
            sweep_order: SweepOrder::AscendingEnergy,
            seed: 1,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !self.prob_grid.contains(&0.0) || !self.prob_grid.contains(&1.0) {
            return bad("prob_grid must contain 0 and 1");
        }
        if self.prob_grid.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return bad("prob_grid factors must be finite and nonnegative");
        }
        if !self.scale_grid.contains(&1.0) {
            return bad("scale_grid must contain 1");
        }
        if self.scale_grid.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return bad("scale_grid factors must be finite and positive");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1");
        }
        if !(self.epoch_improvement_tol >= 0.0) {
            return bad("epoch_improvement_tol must be nonnegative");
        }
        if self.eval_symbols == 0 {
            return bad("eval_symbols must be positive");
        }
        Ok(())
    }

    /// Seed of the `n`-th evaluation.
    pub fn evaluation_seed(&self, n: u64) -> u64 {
        match self.seed_policy {
            SeedPolicy::CommonRandomNumbers => self.seed,
            SeedPolicy::Fresh => splitmix64(self.seed ^ splitmix64(n.wrapping_add(1))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
