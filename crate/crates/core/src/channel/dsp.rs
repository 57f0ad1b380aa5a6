//! Frequency-domain pulse shaping and dispersion operators on a cyclic grid.

use num_complex::Complex64;

/// FFT-ordered frequencies in Hz for `n` samples at rate `fs`.
pub fn frequency_grid(n: usize, fs: f64) -> Vec<f64> {
    let df = fs / n as f64;
    (0..n)
        .map(|k| {
            let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            k * df
        })
        .collect()
}

/// Raised-cosine spectrum, unit height in the flat region.
pub fn raised_cosine(f: f64, symbol_rate: f64, rolloff: f64) -> f64 {
    let af = f.abs();
    let f1 = (1.0 - rolloff) * symbol_rate / 2.0;
    let f2 = (1.0 + rolloff) * symbol_rate / 2.0;
    if af <= f1 {
        1.0
    } else if af > f2 {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI / (rolloff * symbol_rate) * (af - f1)).cos())
    }
}

/// Root-raised-cosine response sampled on `freqs`.
pub fn rrc_response(freqs: &[f64], symbol_rate: f64, rolloff: f64) -> Vec<f64> {
    freqs
        .iter()
        .map(|&f| raised_cosine(f, symbol_rate, rolloff).sqrt())
        .collect()
}

/// `exp(-j β₂/2 ω² z)`: the phase response of `z` km of dispersion.
pub fn dispersion_response(freqs: &[f64], beta2: f64, z: f64) -> Vec<Complex64> {
    freqs
        .iter()
        .map(|&f| {
            let w = 2.0 * std::f64::consts::PI * f;
            Complex64::from_polar(1.0, 0.5 * beta2 * w * w * z)
        })
        .collect()
}

/// Inverse of [`dispersion_response`]: ideal chromatic dispersion compensation.
pub fn cdc_response(freqs: &[f64], beta2: f64, z: f64) -> Vec<Complex64> {
    dispersion_response(freqs, beta2, -z)
}
