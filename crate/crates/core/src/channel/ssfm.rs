//! Symmetric split-step integration of the Manakov equation
//!
//! ```text
//! ∂E/∂z = -α/2 E + j β₂/2 ω² E (frequency domain) + j (8/9) γ ‖E‖² E
//! ```
//!
//! for a dual-polarization field sampled on a cyclic time grid. Each step is
//! half a linear step, a full nonlinear phase rotation, and another half
//! linear step; consecutive half steps are fused when the step is uniform.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::dsp::frequency_grid;
use crate::error::{Error, Result};

/// Manakov nonlinear coefficient relative to γ.
pub const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fiber {
    pub length_km: f64,
    /// Power attenuation in 1/km.
    pub alpha_per_km: f64,
    /// s²/km
    pub beta2: f64,
    /// 1/(W·km)
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub step_km: f64,
    /// Per-step cap on (8/9)·γ·max‖E‖²·h, in rad.
    pub max_nonlinear_phase: Option<f64>,
}

/// Dual-polarization field samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl Field {
    pub fn zeros(n: usize) -> Self {
        Self {
            x: vec![Complex64::new(0.0, 0.0); n],
            y: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Σ (|x|² + |y|²) over samples.
    pub fn energy(&self) -> f64 {
        crate::numeric::ksum(self.x.iter().chain(&self.y).map(|v| v.norm_sqr()))
    }

    pub fn mean_power(&self) -> f64 {
        self.energy() / self.len() as f64
    }

    pub fn peak_power(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, g: f64) {
        for v in self.x.iter_mut().chain(self.y.iter_mut()) {
            *v *= g;
        }
    }
}

/// Forward/inverse FFT pair with a private scratch buffer.
pub struct Transform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Transform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    /// Unnormalized inverse; callers fold in 1/N.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }
}

fn apply(buf: &mut [Complex64], op: &[Complex64]) {
    for (v, o) in buf.iter_mut().zip(op) {
        *v *= o;
    }
}

/// Nonlinear rotation over `h` km; returns false on a non-finite sample.
fn nonlinear_step(field: &mut Field, coeff: f64) -> bool {
    let mut finite = true;
    for (a, b) in field.x.iter_mut().zip(field.y.iter_mut()) {
        let p = a.norm_sqr() + b.norm_sqr();
        finite &= p.is_finite();
        let rot = Complex64::from_polar(1.0, coeff * p);
        *a *= rot;
        *b *= rot;
    }
    finite
}

/// Linear propagation operator over `z` km with 1/N folded in.
fn linear_operator(omega2: &[f64], fiber: &Fiber, z: f64, norm: f64) -> Vec<Complex64> {
    let amp = (-0.5 * fiber.alpha_per_km * z).exp() * norm;
    omega2
        .iter()
        .map(|w2| Complex64::from_polar(amp, 0.5 * fiber.beta2 * w2 * z))
        .collect()
}

/// Propagates `field` (time domain, sample rate `fs`) through `fiber` in place.
/// Returns the number of steps taken.
pub fn propagate(
    field: &mut Field,
    fiber: &Fiber,
    fs: f64,
    control: &StepControl,
    transform: &mut Transform,
) -> Result<usize> {
    if fiber.length_km <= 0.0 {
        return Ok(0);
    }
    let n = field.len();
    let norm = 1.0 / n as f64;
    let omega2: Vec<f64> = frequency_grid(n, fs)
        .iter()
        .map(|f| {
            let w = 2.0 * std::f64::consts::PI * f;
            w * w
        })
        .collect();
    let g = MANAKOV_FACTOR * fiber.gamma;

    if control.max_nonlinear_phase.is_none() {
        let steps = (fiber.length_km / control.step_km).ceil().max(1.0) as usize;
        let h = fiber.length_km / steps as f64;
        let half = linear_operator(&omega2, fiber, 0.5 * h, norm);
        let full = linear_operator(&omega2, fiber, h, norm);
        for pol in [&mut field.x, &mut field.y] {
            transform.forward(pol);
            apply(pol, &half);
        }
        for s in 0..steps {
            let last = s + 1 == steps;
            for pol in [&mut field.x, &mut field.y] {
                transform.inverse(pol);
            }
            if !nonlinear_step(field, g * h) {
                return Err(Error::NumericDivergence { step: s });
            }
            for pol in [&mut field.x, &mut field.y] {
                transform.forward(pol);
                apply(pol, if last { &half } else { &full });
            }
        }
        for pol in [&mut field.x, &mut field.y] {
            transform.inverse(pol);
        }
        return Ok(steps);
    }

    let cap = control.max_nonlinear_phase.unwrap_or(f64::INFINITY);
    let mut z = 0.0;
    let mut s = 0;
    while z < fiber.length_km * (1.0 - 1e-12) {
        let peak = field.peak_power();
        if !peak.is_finite() {
            return Err(Error::NumericDivergence { step: s });
        }
        let mut h = control.step_km.min(fiber.length_km - z);
        if g * peak > 0.0 {
            h = h.min(cap / (g * peak));
        }
        let half = linear_operator(&omega2, fiber, 0.5 * h, norm);
        for pol in [&mut field.x, &mut field.y] {
            transform.forward(pol);
            apply(pol, &half);
            transform.inverse(pol);
        }
        if !nonlinear_step(field, g * h) {
            return Err(Error::NumericDivergence { step: s });
        }
        for pol in [&mut field.x, &mut field.y] {
            transform.forward(pol);
            apply(pol, &half);
            transform.inverse(pol);
        }
        z += h;
        s += 1;
    }
    Ok(s)
}
