//! End-to-end WDM link: RRC-shaped dual-polarization channels, one fiber span,
//! a receiver EDFA, dispersion compensation and a matched filter on the
//! central channel. The whole record is processed as one cyclic block.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::dsp::{cdc_response, frequency_grid, raised_cosine};
use super::source::{sample_symbols, sample_symbols_from, substream, NOISE_STREAM};
use super::ssfm::{propagate, Fiber, Field, StepControl, Transform};
use super::{Fingerprint, LinkConfig, SymbolBatch};
use crate::constellation::{Constellation4D, Point4};
use crate::error::{Error, Result};
use crate::numeric::{db_to_lin, dbm_to_watt};

/// Bin offset of WDM channel `ch` relative to the center frequency.
fn channel_bin(cfg: &LinkConfig, ch: usize, df: f64) -> i64 {
    let m = ch as i64 - (cfg.n_channels as i64 - 1) / 2;
    (m as f64 * cfg.channel_spacing / df).round() as i64
}

fn wrap(bin: i64, n: usize) -> usize {
    bin.rem_euclid(n as i64) as usize
}

/// Hash of everything that determines a batch: link, seed and constellation.
pub fn wdm_config_fingerprint(c: &Constellation4D, cfg: &LinkConfig) -> Fingerprint {
    let json = serde_json::to_string(cfg).expect("serializable");
    Fingerprint::of(&[b"wdm-batch", json.as_bytes(), &c.content_bytes()])
}

/// One-sided ASE power spectral density per polarization in W/Hz.
pub fn ase_psd(cfg: &LinkConfig, gain: f64) -> f64 {
    let f = db_to_lin(cfg.edfa_noise_figure);
    (f * gain - 1.0).max(0.0) * cfg.photon_energy() / 2.0
}

/// Analytic SNR per 4D symbol of an ideal receiver fed by a noiseless
/// amplifier input of `rx_channel_power_w` (after gain) per channel.
pub fn ase_limited_snr_db(cfg: &LinkConfig, gain: f64, rx_channel_power_w: f64) -> f64 {
    let noise = 2.0 * ase_psd(cfg, gain) * cfg.symbol_rate;
    crate::numeric::lin_to_db(rx_channel_power_w / noise)
}

struct Shaper {
    n: usize,
    sps: usize,
    /// sqrt of the raised-cosine response on the N-point grid.
    rrc: Vec<f64>,
}

impl Shaper {
    fn new(cfg: &LinkConfig) -> Self {
        let n = cfg.n_symbols;
        let sps = cfg.samples_per_symbol;
        let freqs = frequency_grid(n * sps, cfg.sample_rate());
        let rrc = freqs
            .iter()
            .map(|&f| raised_cosine(f, cfg.symbol_rate, cfg.rrc_rolloff).sqrt())
            .collect();
        Self { n, sps, rrc }
    }

    /// Adds the shaped spectrum of `symbols` (one polarization) at bin offset `shift`.
    fn add_channel(&self, spec: &mut [Complex64], symbols: &[Complex64], shift: i64, small: &mut Transform) {
        let mut a = symbols.to_vec();
        small.forward(&mut a);
        let big = spec.len();
        let g = self.sps as f64;
        for (i, &h) in self.rrc.iter().enumerate() {
            if h > 0.0 {
                spec[wrap(i as i64 + shift, big)] += a[i % self.n] * (g * h);
            }
        }
    }

    /// Matched filter, fold and downsample one spectrum (central channel).
    fn receive(&self, spec: &[Complex64], small: &mut Transform) -> Vec<Complex64> {
        let mut fold = vec![Complex64::new(0.0, 0.0); self.n];
        for (i, &h) in self.rrc.iter().enumerate() {
            if h > 0.0 {
                fold[i % self.n] += spec[i] * h;
            }
        }
        small.inverse(&mut fold);
        let norm = 1.0 / spec.len() as f64;
        fold.iter_mut().for_each(|v| *v *= norm);
        fold
    }
}

fn pol_streams(values: &[Point4], scale: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    values
        .iter()
        .map(|p| {
            (
                Complex64::new(p[0] * scale, p[1] * scale),
                Complex64::new(p[2] * scale, p[3] * scale),
            )
        })
        .unzip()
}

/// Simulates the full link for constellation `c` and returns the central
/// channel's transmitted and received 4D symbols.
///
/// `tx` holds symbols at launch scale (`tx_scale = sqrt(P_ch)` W^½). `rx` is
/// referred back to the same scale by undoing the span loss and amplifier gain.
pub fn simulate_wdm(c: &Constellation4D, cfg: &LinkConfig) -> Result<SymbolBatch> {
    cfg.validate()?;
    let n = cfg.n_symbols;
    let sps = cfg.samples_per_symbol;
    let big = n * sps;
    let fs = cfg.sample_rate();
    let df = fs / big as f64;
    let centre = (cfg.n_channels - 1) / 2;

    let p_ch = cfg.channel_power_w();
    let tx_scale = (p_ch / c.mean_energy()).sqrt();
    let shaper = Shaper::new(cfg);
    let mut small = Transform::new(n);
    let mut tr = Transform::new(big);

    let mut spec_x = vec![Complex64::new(0.0, 0.0); big];
    let mut spec_y = vec![Complex64::new(0.0, 0.0); big];
    let mut tx_indices = Vec::new();
    for ch in 0..cfg.n_channels {
        let idx = if ch == centre {
            sample_symbols(c, n, cfg.seed)?
        } else {
            sample_symbols_from(c, n, &mut substream(cfg.seed, 1 + ch as u64))?
        };
        let values: Vec<Point4> = idx.iter().map(|&i| c.points()[i as usize]).collect();
        let (sx, sy) = pol_streams(&values, tx_scale);
        let shift = channel_bin(cfg, ch, df);
        shaper.add_channel(&mut spec_x, &sx, shift, &mut small);
        shaper.add_channel(&mut spec_y, &sy, shift, &mut small);
        if ch == centre {
            tx_indices = idx;
        }
    }

    let mut field = Field { x: spec_x, y: spec_y };
    let norm = 1.0 / big as f64;
    for pol in [&mut field.x, &mut field.y] {
        tr.inverse(pol);
        pol.iter_mut().for_each(|v| *v *= norm);
    }

    let fiber = Fiber {
        length_km: cfg.span_length,
        alpha_per_km: cfg.alpha_per_km(),
        beta2: cfg.beta2(),
        gamma: cfg.gamma,
    };
    let control = StepControl {
        step_km: cfg.ssfm_step,
        max_nonlinear_phase: cfg.max_nonlinear_phase,
    };
    propagate(&mut field, &fiber, fs, &control, &mut tr)?;

    let p_out = field.mean_power();
    if !(p_out > 0.0) || !p_out.is_finite() {
        return Err(Error::NumericDivergence { step: 0 });
    }
    let gain = dbm_to_watt(cfg.received_power_target) / p_out;
    field.scale(gain.sqrt());
    let psd = ase_psd(cfg, gain);
    if psd > 0.0 {
        let sigma = (psd * fs / 2.0).sqrt();
        let mut rng = substream(cfg.seed, NOISE_STREAM);
        for pol in [&mut field.x, &mut field.y] {
            for v in pol.iter_mut() {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                *v += Complex64::new(sigma * a, sigma * b);
            }
        }
    }

    let cdc = cdc_response(&frequency_grid(big, fs), cfg.beta2(), cfg.span_length);
    let mut rx_pols = Vec::with_capacity(2);
    for pol in [&mut field.x, &mut field.y] {
        tr.forward(pol);
        pol.iter_mut().zip(&cdc).for_each(|(v, h)| *v *= h);
        rx_pols.push(shaper.receive(pol, &mut small));
    }

    let back = 1.0 / (gain * (-fiber.alpha_per_km * fiber.length_km).exp()).sqrt();
    let rx: Vec<Point4> = rx_pols[0]
        .iter()
        .zip(&rx_pols[1])
        .map(|(x, y)| [x.re * back, x.im * back, y.re * back, y.im * back])
        .collect();
    let tx: Vec<Point4> = tx_indices
        .iter()
        .map(|&i| c.points()[i as usize].map(|v| v * tx_scale))
        .collect();
    if rx.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NumericDivergence { step: 0 });
    }
    Ok(SymbolBatch {
        tx_indices,
        tx,
        rx,
        tx_scale,
        seed: cfg.seed,
        config_fingerprint: wdm_config_fingerprint(c, cfg),
        channel_fingerprint: cfg.channel_fingerprint(),
    })
}
