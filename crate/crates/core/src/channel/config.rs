use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Fingerprint;
use crate::error::{Error, Result};

/// How `total_launch_power` is shared between WDM channels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaunchPowerMode {
    /// Power summed over all channels.
    #[default]
    Total,
    /// Power of each channel.
    PerChannel,
}

/// Physical and DSP parameters of the simulated single-span WDM link.
///
/// Units: Baud, Hz, km, dB/km, ps/(nm·km), 1/(W·km), nm, dB, dBm, rad.
/// A noise figure of `-inf` switches amplifier noise off.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub n_channels: usize,
    pub symbol_rate: f64,
    pub channel_spacing: f64,
    pub span_length: f64,
    pub attenuation: f64,
    pub dispersion: f64,
    pub gamma: f64,
    pub center_wavelength: f64,
    pub edfa_noise_figure: f64,
    pub received_power_target: f64,
    pub total_launch_power: f64,
    pub launch_power_mode: LaunchPowerMode,
    pub rrc_rolloff: f64,
    pub samples_per_symbol: usize,
    /// Uniform split-step length in km.
    pub ssfm_step: f64,
    /// Optional cap on the nonlinear phase per step; shortens steps as needed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_nonlinear_phase: Option<f64>,
    pub n_symbols: usize,
    pub seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            n_channels: 5,
            symbol_rate: 30e9,
            channel_spacing: 50e9,
            span_length: 250.0,
            attenuation: 0.2,
            dispersion: 17.0,
            gamma: 1.3,
            center_wavelength: 1550.0,
            edfa_noise_figure: 5.0,
            received_power_target: 0.0,
            total_launch_power: 18.5,
            launch_power_mode: LaunchPowerMode::Total,
            rrc_rolloff: 0.1,
            samples_per_symbol: 16,
            ssfm_step: 0.1,
            max_nonlinear_phase: None,
            n_symbols: 1 << 14,
            seed: 1,
        }
    }
}

/// Speed of light in m/s.
pub const LIGHT_SPEED: f64 = 299_792_458.0;
/// Planck constant in J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

impl LinkConfig {
    /// Full-scale 5 × 30 GBaud link.
    pub fn paper() -> Self {
        Self::default()
    }

    /// Reduced 3 × 8 GBaud link with 1 km steps, for quick runs.
    pub fn desk() -> Self {
        Self {
            n_channels: 3,
            symbol_rate: 8e9,
            channel_spacing: 50e9 / 30e9 * 8e9,
            samples_per_symbol: 8,
            ssfm_step: 1.0,
            n_symbols: 10_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_channels == 0 || self.n_channels.is_multiple_of(2) {
            return bad(format!("n_channels must be odd and >= 1, got {}", self.n_channels));
        }
        if !(self.symbol_rate > 0.0) {
            return bad("symbol_rate must be positive".into());
        }
        if self.samples_per_symbol == 0 {
            return bad("samples_per_symbol must be >= 1".into());
        }
        let sim_bw = self.samples_per_symbol as f64 * self.symbol_rate;
        let occupied = self.n_channels as f64 * self.channel_spacing;
        if !(sim_bw > occupied) {
            return bad(format!(
                "simulation bandwidth {sim_bw:.4e} Hz does not exceed WDM occupancy {occupied:.4e} Hz"
            ));
        }
        if self.n_channels > 1 && !(self.channel_spacing > 0.0) {
            return bad("channel_spacing must be positive".into());
        }
        if !(self.ssfm_step > 0.0) {
            return bad("ssfm_step must be positive".into());
        }
        if self.n_symbols == 0 {
            return bad("n_symbols must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.rrc_rolloff) {
            return bad("rrc_rolloff must lie in [0, 1]".into());
        }
        if !(self.span_length >= 0.0) || !(self.attenuation >= 0.0) {
            return bad("span_length and attenuation must be nonnegative".into());
        }
        if !(self.center_wavelength > 0.0) {
            return bad("center_wavelength must be positive".into());
        }
        if self.edfa_noise_figure.is_nan() || self.edfa_noise_figure == f64::INFINITY {
            return bad("edfa_noise_figure must be finite or -inf".into());
        }
        if let Some(p) = self.max_nonlinear_phase {
            if !(p > 0.0) {
                return bad("max_nonlinear_phase must be positive".into());
            }
        }
        if !self.total_launch_power.is_finite() || !self.received_power_target.is_finite() {
            return bad("powers must be finite".into());
        }
        Ok(())
    }

    /// Launch power of one channel in W.
    pub fn channel_power_w(&self) -> f64 {
        let p = crate::numeric::dbm_to_watt(self.total_launch_power);
        match self.launch_power_mode {
            LaunchPowerMode::Total => p / self.n_channels as f64,
            LaunchPowerMode::PerChannel => p,
        }
    }

    pub fn total_power_w(&self) -> f64 {
        self.channel_power_w() * self.n_channels as f64
    }

    /// Field attenuation coefficient α in 1/km (power decays as e^{-αz}).
    pub fn alpha_per_km(&self) -> f64 {
        self.attenuation * std::f64::consts::LN_10 / 10.0
    }

    /// Group-velocity dispersion β₂ in s²/km.
    pub fn beta2(&self) -> f64 {
        let lambda = self.center_wavelength * 1e-9;
        let d = self.dispersion * 1e-3; // s/(m·km)
        -d * lambda * lambda / (2.0 * std::f64::consts::PI * LIGHT_SPEED)
    }

    /// Photon energy hν at the center wavelength in J.
    pub fn photon_energy(&self) -> f64 {
        PLANCK * LIGHT_SPEED / (self.center_wavelength * 1e-9)
    }

    /// (1 - e^{-αL}) / α, in km.
    pub fn effective_length(&self) -> f64 {
        let a = self.alpha_per_km();
        if a == 0.0 {
            self.span_length
        } else {
            (1.0 - (-a * self.span_length).exp()) / a
        }
    }

    pub fn sample_rate(&self) -> f64 {
        self.samples_per_symbol as f64 * self.symbol_rate
    }

    /// Identifies the physical channel, ignoring the seed and record length.
    pub fn channel_fingerprint(&self) -> Fingerprint {
        let mut c = self.clone();
        c.seed = 0;
        c.n_symbols = 0;
        Fingerprint::of(&[b"wdm", serde_json::to_string(&c).expect("serializable").as_bytes()])
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}
