//! Channel evaluators: map a constellation to an achievable-rate report.

use crate::air::{
    fit_gaussian_auxiliary, mutual_information, AirReport, AuxChannel, AwgnOracle, FitOptions, Gain, GainModel,
    JACKKNIFE_GROUPS,
};
use crate::channel::{awgn_channel_fingerprint, sample_symbols, simulate_awgn, simulate_wdm, Fingerprint, LinkConfig};
use crate::constellation::{moments, Constellation4D};
use crate::error::Result;
use crate::numeric::db_to_lin;

/// Deterministic AIR measurement of a constellation for a given seed.
pub trait Evaluator: Sync {
    /// `n_symbols` is the Monte-Carlo length of one evaluation.
    fn evaluate(&self, c: &Constellation4D, seed: u64, n_symbols: usize) -> Result<AirReport>;

    /// Identity of the channel; reports are only comparable when equal.
    fn channel_fingerprint(&self) -> Fingerprint;
}

/// Numeric AWGN mutual information with `n_symbols` oracle samples.
#[derive(Clone, Debug)]
pub struct OracleEvaluator {
    pub snr_db: f64,
}

impl Evaluator for OracleEvaluator {
    fn evaluate(&self, c: &Constellation4D, seed: u64, n_symbols: usize) -> Result<AirReport> {
        let est = AwgnOracle::with_samples(n_symbols)
            .with_seed(seed)
            .estimate(c, self.snr_db)?;
        let m = moments(c);
        Ok(AirReport {
            mi_bits_per_4d: est.mi_bits,
            mi_se: est.se,
            entropy_bits: m.entropy_bits,
            snr_eff_db: self.snr_db,
            n_symbols,
            aux: AuxChannel::scaled_identity(Gain::Real(1.0), m.mean_energy / (4.0 * db_to_lin(self.snr_db)))?,
            papr: m.papr,
            group_means: est.group_means,
            seed,
            channel_fingerprint: self.channel_fingerprint(),
        })
    }

    fn channel_fingerprint(&self) -> Fingerprint {
        awgn_channel_fingerprint(self.snr_db)
    }
}

/// Simulated AWGN channel with a fitted Gaussian auxiliary channel.
#[derive(Clone, Debug)]
pub struct AwgnEvaluator {
    pub snr_db: f64,
    pub fit: FitOptions,
}

impl AwgnEvaluator {
    pub fn new(snr_db: f64) -> Self {
        Self { snr_db, fit: FitOptions::default() }
    }
}

impl Evaluator for AwgnEvaluator {
    fn evaluate(&self, c: &Constellation4D, seed: u64, n_symbols: usize) -> Result<AirReport> {
        let tx = sample_symbols(c, n_symbols, seed)?;
        let batch = simulate_awgn(c, &tx, self.snr_db, seed)?;
        let aux = fit_gaussian_auxiliary(&batch, self.fit)?;
        mutual_information(&batch, c, &aux)
    }

    fn channel_fingerprint(&self) -> Fingerprint {
        awgn_channel_fingerprint(self.snr_db)
    }
}

/// Full WDM fiber link; `link.seed` and `link.n_symbols` are overridden per call.
#[derive(Clone, Debug)]
pub struct FiberEvaluator {
    pub link: LinkConfig,
    pub fit: FitOptions,
}

impl FiberEvaluator {
    /// Complex common gain, scaled-identity covariance.
    pub fn new(link: LinkConfig) -> Self {
        Self {
            link,
            fit: FitOptions { gain: GainModel::Complex, ..FitOptions::default() },
        }
    }
}

impl Evaluator for FiberEvaluator {
    fn evaluate(&self, c: &Constellation4D, seed: u64, n_symbols: usize) -> Result<AirReport> {
        let cfg = LinkConfig { seed, n_symbols, ..self.link.clone() };
        let batch = simulate_wdm(c, &cfg)?;
        let aux = fit_gaussian_auxiliary(&batch, self.fit)?;
        mutual_information(&batch, c, &aux)
    }

    fn channel_fingerprint(&self) -> Fingerprint {
        self.link.channel_fingerprint()
    }
}

/// Channel-free stub whose "rate" is the PMF entropy.
#[derive(Clone, Copy, Debug, Default)]
pub struct EntropyEvaluator;

impl Evaluator for EntropyEvaluator {
    fn evaluate(&self, c: &Constellation4D, seed: u64, n_symbols: usize) -> Result<AirReport> {
        let m = moments(c);
        Ok(AirReport {
            mi_bits_per_4d: m.entropy_bits,
            mi_se: 0.0,
            entropy_bits: m.entropy_bits,
            snr_eff_db: f64::INFINITY,
            n_symbols,
            aux: AuxChannel::scaled_identity(Gain::Real(1.0), 0.0)?,
            papr: m.papr,
            group_means: vec![m.entropy_bits; JACKKNIFE_GROUPS],
            seed,
            channel_fingerprint: self.channel_fingerprint(),
        })
    }

    fn channel_fingerprint(&self) -> Fingerprint {
        Fingerprint::of(&[b"entropy"])
    }
}
