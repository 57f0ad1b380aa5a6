use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::SymbolBatch;
use crate::constellation::Point4;
use crate::error::{Error, Result};
use crate::numeric::ksum;

/// Smallest admissible noise variance per real dimension.
pub const VARIANCE_FLOOR: f64 = 1e-15;

/// Linear gain of the auxiliary channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gain {
    Real(f64),
    /// Common complex gain applied to both polarizations.
    Complex { re: f64, im: f64 },
}

impl Gain {
    pub fn apply(&self, p: &Point4) -> Point4 {
        match *self {
            Gain::Real(h) => [h * p[0], h * p[1], h * p[2], h * p[3]],
            Gain::Complex { re, im } => [
                re * p[0] - im * p[1],
                im * p[0] + re * p[1],
                re * p[2] - im * p[3],
                im * p[2] + re * p[3],
            ],
        }
    }

    pub fn magnitude(&self) -> f64 {
        match *self {
            Gain::Real(h) => h.abs(),
            Gain::Complex { re, im } => Complex64::new(re, im).norm(),
        }
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariance {
    /// Same variance in each of the four real dimensions.
    ScaledIdentity { variance: f64 },
    /// Full 4×4 covariance, stored with its lower Cholesky factor.
    Full {
        matrix: [[f64; 4]; 4],
        cholesky: [[f64; 4]; 4],
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceMode {
    #[default]
    ScaledIdentity,
    FullCovariance,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainModel {
    #[default]
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    #[serde(default)]
    pub gain: GainModel,
    #[serde(default)]
    pub covariance: CovarianceMode,
}

/// Memoryless 4D Gaussian channel law `y = h·x + n`, `n ~ N(0, sigma)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxChannel {
    pub gain: Gain,
    pub covariance: Covariance,
    /// A full-covariance fit was singular and replaced by scaled identity.
    #[serde(default)]
    pub fallback: bool,
}

impl AuxChannel {
    pub fn scaled_identity(gain: Gain, variance: f64) -> Result<Self> {
        if !(gain.magnitude().is_finite()) {
            return Err(Error::InvalidArgument("gain is not finite".into()));
        }
        Ok(Self {
            gain,
            covariance: Covariance::ScaledIdentity {
                variance: variance.max(VARIANCE_FLOOR),
            },
            fallback: false,
        })
    }

    /// Noise variance averaged over the four real dimensions.
    pub fn mean_variance(&self) -> f64 {
        match &self.covariance {
            Covariance::ScaledIdentity { variance } => *variance,
            Covariance::Full { matrix, .. } => (0..4).map(|i| matrix[i][i]).sum::<f64>() / 4.0,
        }
    }

    /// Maps a point into coordinates where the noise is standard normal.
    pub fn whiten(&self, p: &Point4) -> Point4 {
        match &self.covariance {
            Covariance::ScaledIdentity { variance } => {
                let s = variance.sqrt().recip();
                [p[0] * s, p[1] * s, p[2] * s, p[3] * s]
            }
            Covariance::Full { cholesky: l, .. } => {
                let mut z = [0.0; 4];
                for i in 0..4 {
                    let mut acc = p[i];
                    for k in 0..i {
                        acc -= l[i][k] * z[k];
                    }
                    z[i] = acc / l[i][i];
                }
                z
            }
        }
    }
}

fn cholesky(m: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let s = m[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > VARIANCE_FLOOR) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Least-squares gain between `tx` and `rx`.
pub fn fit_gain(tx: &[Point4], rx: &[Point4], model: GainModel) -> Result<Gain> {
    let power = ksum(tx.iter().map(crate::numeric::energy));
    if !(power > 0.0) {
        return Err(Error::InvalidArgument("transmitted batch has zero power".into()));
    }
    let inphase = ksum(
        tx.iter()
            .zip(rx)
            .map(|(x, y)| x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3]),
    );
    Ok(match model {
        GainModel::Real => Gain::Real(inphase / power),
        GainModel::Complex => {
            let quad = ksum(
                tx.iter()
                    .zip(rx)
                    .map(|(x, y)| x[0] * y[1] - x[1] * y[0] + x[2] * y[3] - x[3] * y[2]),
            );
            Gain::Complex {
                re: inphase / power,
                im: quad / power,
            }
        }
    })
}

/// Fits gain and noise covariance of the auxiliary channel to a batch.
///
/// A singular full covariance falls back to scaled identity and sets
/// [`AuxChannel::fallback`].
pub fn fit_gaussian_auxiliary(batch: &SymbolBatch, opts: FitOptions) -> Result<AuxChannel> {
    if batch.len() < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 symbols to fit, got {}",
            batch.len()
        )));
    }
    let gain = fit_gain(&batch.tx, &batch.rx, opts.gain)?;
    let residuals: Vec<Point4> = batch
        .tx
        .iter()
        .zip(&batch.rx)
        .map(|(x, y)| {
            let hx = gain.apply(x);
            [y[0] - hx[0], y[1] - hx[1], y[2] - hx[2], y[3] - hx[3]]
        })
        .collect();
    let n = residuals.len() as f64;
    let scaled = |gain| {
        let v = ksum(residuals.iter().map(crate::numeric::energy)) / (4.0 * n);
        AuxChannel::scaled_identity(gain, v)
    };
    match opts.covariance {
        CovarianceMode::ScaledIdentity => scaled(gain),
        CovarianceMode::FullCovariance => {
            let mut m = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..=i {
                    let v = ksum(residuals.iter().map(|r| r[i] * r[j])) / n;
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
            match cholesky(&m) {
                Some(l) => Ok(AuxChannel {
                    gain,
                    covariance: Covariance::Full {
                        matrix: m,
                        cholesky: l,
                    },
                    fallback: false,
                }),
                None => {
                    warn!("singular residual covariance; falling back to scaled identity");
                    let mut aux = scaled(gain)?;
                    aux.fallback = true;
                    Ok(aux)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_symbols, Fingerprint};
    use crate::constellation::build_product_qam;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn batch(tx: Vec<Point4>, rx: Vec<Point4>) -> SymbolBatch {
        SymbolBatch {
            tx_indices: vec![0; tx.len()],
            tx,
            rx,
            tx_scale: 1.0,
            seed: 0,
            config_fingerprint: Fingerprint::default(),
            channel_fingerprint: Fingerprint::default(),
        }
    }

    fn synthetic(n: usize, h: f64, sigma: f64, seed: u64) -> SymbolBatch {
        let c = build_product_qam(16).unwrap();
        let idx = sample_symbols(&c, n, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let tx: Vec<Point4> = idx.iter().map(|&i| c.points()[i as usize]).collect();
        let rx = tx
            .iter()
            .map(|x| {
                let mut y = [0.0; 4];
                for d in 0..4 {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    y[d] = h * x[d] + sigma * g;
                }
                y
            })
            .collect();
        batch(tx, rx)
    }

    #[test]
    fn identity_channel_hits_floor() {
        let b = synthetic(1000, 1.0, 0.0, 1);
        let aux = fit_gaussian_auxiliary(&b, FitOptions::default()).unwrap();
        assert_eq!(aux.gain, Gain::Real(1.0));
        assert_eq!(aux.mean_variance(), VARIANCE_FLOOR);
    }

    #[test]
    fn full_covariance_of_noiseless_batch_falls_back() {
        let b = synthetic(1000, 1.0, 0.0, 1);
        let opts = FitOptions {
            covariance: CovarianceMode::FullCovariance,
            ..FitOptions::default()
        };
        let aux = fit_gaussian_auxiliary(&b, opts).unwrap();
        assert!(aux.fallback);
    }

    #[test]
    fn recovers_gain_and_variance() {
        // Synthetic oracle: rx = 2 tx + N(0, 0.1²) per dimension.
        let b = synthetic(100_000, 2.0, 0.1, 7);
        for cov in [CovarianceMode::ScaledIdentity, CovarianceMode::FullCovariance] {
            let aux = fit_gaussian_auxiliary(
                &b,
                FitOptions {
                    gain: GainModel::Real,
                    covariance: cov,
                },
            )
            .unwrap();
            let Gain::Real(h) = aux.gain else { panic!() };
            assert!((h - 2.0).abs() < 2e-3, "h = {h}");
            assert!((aux.mean_variance() / 0.01 - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn residuals_uncorrelated_with_tx() {
        let b = synthetic(20_000, 0.7, 0.3, 3);
        let g = fit_gain(&b.tx, &b.rx, GainModel::Real).unwrap();
        let r: Vec<f64> = b
            .tx
            .iter()
            .zip(&b.rx)
            .map(|(x, y)| {
                let hx = g.apply(x);
                (0..4).map(|d| x[d] * (y[d] - hx[d])).sum::<f64>()
            })
            .collect();
        let n = r.len() as f64;
        let mean = r.iter().sum::<f64>() / n;
        let sd = (r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 3.0 * sd / n.sqrt());
    }

    #[test]
    fn complex_gain_recovers_rotation() {
        let b = synthetic(1000, 1.0, 0.0, 2);
        let rot = Gain::Complex {
            re: 0.5f64.cos(),
            im: 0.5f64.sin(),
        };
        let rx: Vec<Point4> = b.tx.iter().map(|x| rot.apply(x)).collect();
        let g = fit_gain(&b.tx, &rx, GainModel::Complex).unwrap();
        let Gain::Complex { re, im } = g else { panic!() };
        assert!((im.atan2(re) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn full_whitening_matches_inverse_covariance() {
        let m = [
            [2.0, 0.3, 0.0, 0.1],
            [0.3, 1.0, 0.2, 0.0],
            [0.0, 0.2, 1.5, 0.4],
            [0.1, 0.0, 0.4, 0.8],
        ];
        let l = cholesky(&m).unwrap();
        let aux = AuxChannel {
            gain: Gain::Real(1.0),
            covariance: Covariance::Full { matrix: m, cholesky: l },
            fallback: false,
        };
        // ‖L⁻¹v‖² must equal vᵀ M⁻¹ v; check via M (L⁻ᵀ L⁻¹) v = v on a basis.
        for k in 0..4 {
            let mut v = [0.0; 4];
            v[k] = 1.0;
            let z = aux.whiten(&v);
            // L z = v
            for i in 0..4 {
                let lz: f64 = (0..=i).map(|j| l[i][j] * z[j]).sum();
                assert!((lz - v[i]).abs() < 1e-12);
            }
        }
        let _ = batch(vec![], vec![]);
    }
}
