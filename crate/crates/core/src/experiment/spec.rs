use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{Fingerprint, LinkConfig};
use crate::constellation::{build_product_pam16_4d, build_product_qam, Constellation4D};
use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Uniform,
    MbSnrMatched,
    MbBruteforce,
    MdBall,
    Proposed,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::MbSnrMatched => "mb-snr-matched",
            Strategy::MbBruteforce => "mb-bruteforce",
            Strategy::MdBall => "md-ball",
            Strategy::Proposed => "proposed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseKind {
    #[serde(rename = "qam16sq")]
    Qam16Sq,
    #[serde(rename = "qam64sq")]
    Qam64Sq,
    #[serde(rename = "pam16-4d")]
    Pam16x4,
}

impl BaseKind {
    pub fn name(self) -> &'static str {
        match self {
            BaseKind::Qam16Sq => "qam16sq",
            BaseKind::Qam64Sq => "qam64sq",
            BaseKind::Pam16x4 => "pam16-4d",
        }
    }

    pub fn build(self) -> Result<Constellation4D> {
        match self {
            BaseKind::Qam16Sq => build_product_qam(16),
            BaseKind::Qam64Sq => build_product_qam(64),
            BaseKind::Pam16x4 => Ok(build_product_pam16_4d()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 3 × 8 GBaud, 10⁴ symbols, 1 km steps.
    Desk,
    /// 5 × 30 GBaud, 50 GHz spacing, 0.1 km steps.
    Paper,
}

impl Preset {
    pub fn link(self) -> LinkConfig {
        match self {
            Preset::Desk => LinkConfig::desk(),
            Preset::Paper => LinkConfig::paper(),
        }
    }
}

/// Signed grid of MB lambda values (units of 1/mean energy), refined once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
    /// Points per side of the refinement around the coarse optimum.
    pub refine_points: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self { min: -3.0, max: 5.0, step: 0.25, refine_points: 3 }
    }
}

impl LambdaGrid {
    pub fn coarse(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.min + k as f64 * self.step).collect()
    }

    /// Refinement points strictly between the coarse neighbours of `centre`.
    pub fn refine(&self, centre: f64) -> Vec<f64> {
        let h = self.step / (self.refine_points + 1) as f64;
        (1..=self.refine_points)
            .flat_map(|k| [centre - k as f64 * h, centre + k as f64 * h])
            .collect()
    }
}

/// One experiment recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub strategy: Strategy,
    pub base: BaseKind,
    /// Total launch powers in dBm, strictly increasing.
    pub power_sweep: Vec<f64>,
    pub link: LinkConfig,
    pub optimizer: OptimizerConfig,
    pub n_ball: Option<usize>,
    pub output_dir: PathBuf,
    /// Seed of the reported MI; never used for optimization.
    pub validation_seed: u64,
    /// Length of the validation run; defaults to `link.n_symbols`.
    pub validation_symbols: Option<usize>,
    pub lambda_grid: LambdaGrid,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            strategy: Strategy::Uniform,
            base: BaseKind::Qam64Sq,
            power_sweep: vec![LinkConfig::default().total_launch_power],
            link: LinkConfig::default(),
            optimizer: OptimizerConfig::default(),
            n_ball: None,
            output_dir: PathBuf::from("results"),
            validation_seed: 1_000_003,
            validation_symbols: None,
            lambda_grid: LambdaGrid::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        match (self.strategy, self.n_ball) {
            (Strategy::MdBall, None) => return bad("n_ball is required for strategy md-ball".into()),
            (Strategy::MdBall, Some(_)) | (_, None) => {}
            (s, Some(_)) => return bad(format!("n_ball is only valid for md-ball, not {}", s.name())),
        }
        if self.power_sweep.is_empty() {
            return bad("power_sweep is empty".into());
        }
        if self.power_sweep.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("power_sweep must be strictly increasing".into());
        }
        if !(self.lambda_grid.step > 0.0 && self.lambda_grid.max >= self.lambda_grid.min) {
            return bad("lambda_grid needs step > 0 and max >= min".into());
        }
        if self.validation_symbols == Some(0) {
            return bad("validation_symbols must be positive".into());
        }
        self.link.validate()?;
        self.optimizer.validate()?;
        if self.optimizer.seed == self.validation_seed {
            return bad("validation_seed must differ from the optimizer seed".into());
        }
        Ok(())
    }

    pub fn validation_symbols(&self) -> usize {
        self.validation_symbols.unwrap_or(self.link.n_symbols)
    }

    /// Parses a spec. With a preset, the preset's link is the starting point
    /// and keys of the `[link]` table override it.
    pub fn from_toml(text: &str, preset: Option<Preset>) -> Result<Self> {
        let parse_err = |e: toml::de::Error| Error::Parse {
            line: e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0),
            message: e.message().to_string(),
        };
        let mut doc: toml::Table = text.parse().map_err(parse_err)?;
        if let Some(p) = preset {
            let toml::Value::Table(mut link) = toml::Value::try_from(p.link()).expect("serializable") else {
                unreachable!()
            };
            if let Some(toml::Value::Table(over)) = doc.remove("link") {
                link.extend(over);
            }
            doc.insert("link".into(), toml::Value::Table(link));
        }
        let spec: Self = doc.try_into().map_err(parse_err)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>, preset: Option<Preset>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?, preset)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serializable")
    }

    /// Identifies the result of one cell.
    pub fn cell_fingerprint(&self, cell: &Cell) -> Fingerprint {
        #[derive(Serialize)]
        struct Key<'a> {
            cell: &'a Cell,
            link: &'a LinkConfig,
            optimizer: Option<&'a OptimizerConfig>,
            validation_seed: u64,
            validation_symbols: usize,
            lambda_grid: Option<&'a LambdaGrid>,
        }
        let key = Key {
            cell,
            link: &self.link,
            optimizer: cell.strategy.is_trained().then_some(&self.optimizer),
            validation_seed: self.validation_seed,
            validation_symbols: self.validation_symbols(),
            lambda_grid: (cell.strategy == Strategy::MbBruteforce).then_some(&self.lambda_grid),
        };
        Fingerprint::of(&[b"cell", serde_json::to_string(&key).expect("serializable").as_bytes()])
    }

    /// One cell per sweep power for the spec's own strategy and base.
    pub fn sweep_cells(&self) -> Vec<Cell> {
        self.power_sweep
            .iter()
            .map(|&p| Cell { strategy: self.strategy, base: self.base, power_dbm: p, n_ball: self.n_ball })
            .collect()
    }
}

/// One (strategy, base, power) job of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub strategy: Strategy,
    pub base: BaseKind,
    pub power_dbm: f64,
    pub n_ball: Option<usize>,
}

impl Cell {
    /// File stem for per-cell artifacts.
    pub fn stem(&self) -> String {
        let mut s = format!("{}-{}-{:+.2}dBm", self.strategy.name(), self.base.name(), self.power_dbm);
        if let Some(n) = self.n_ball {
            s.push_str(&format!("-n{n}"));
        }
        s
    }
}

impl Strategy {
    /// Whether the strategy consumes training evaluations.
    pub fn is_trained(self) -> bool {
        matches!(self, Strategy::Proposed | Strategy::MbBruteforce | Strategy::MbSnrMatched)
    }
}
