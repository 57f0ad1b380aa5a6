use super::{amplitude_classes, Constellation4D, Metadata, ENERGY_REL_TOL};
use crate::air::AwgnOracle;
use crate::error::{Error, Result};

/// Maxwell-Boltzmann reshaping: `pmf_i ∝ exp(-lambda ‖x_i‖²)` over the support of `c`.
///
/// `lambda` is in units of 1/(mean energy of `c`) and may be negative. Pruned
/// points stay pruned. The result is renormalized to unit mean energy.
pub fn mb_pmf(c: &Constellation4D, lambda: f64) -> Result<Constellation4D> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda {lambda} is not finite")));
    }
    let e = c.energies();
    let exponent = |i: usize| -lambda * e[i];
    let peak = (0..c.len())
        .filter(|&i| !c.is_pruned(i))
        .map(exponent)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = (0..c.len())
        .map(|i| if c.is_pruned(i) { 0.0 } else { (exponent(i) - peak).exp() })
        .collect();
    let mut out = c.with_pmf(weights)?;
    let meta = out.metadata_mut();
    meta.lambda = Some(lambda);
    meta.name = format!("{} MB(lambda={lambda})", c.metadata().base);
    Ok(out)
}

/// Search settings for the AWGN-matched Maxwell-Boltzmann family.
#[derive(Clone, Debug)]
pub struct MbSearch {
    pub lambda_max: f64,
    /// Coarse grid points on `[0, lambda_max]`.
    pub grid_points: usize,
    /// Golden-section stopping width on lambda.
    pub tolerance: f64,
    pub oracle: AwgnOracle,
}

impl Default for MbSearch {
    fn default() -> Self {
        Self {
            lambda_max: 6.0,
            grid_points: 25,
            tolerance: 1e-2,
            oracle: AwgnOracle::with_samples(1 << 15),
        }
    }
}

impl MbSearch {
    /// Maximizes the AWGN mutual information over `lambda >= 0`.
    ///
    /// A coarse grid brackets the optimum, golden-section search refines it to
    /// `tolerance`; the best of every evaluated lambda is returned.
    pub fn run(&self, c: &Constellation4D, snr_db: f64) -> Result<(Constellation4D, f64)> {
        if snr_db.is_nan() {
            return Err(Error::InvalidArgument("SNR is NaN".into()));
        }
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut eval = |lambda: f64| -> Result<f64> {
            let mi = self.oracle.mutual_information(&mb_pmf(c, lambda)?, snr_db)?;
            if mi > best.0 {
                best = (mi, lambda);
            }
            Ok(mi)
        };
        let n = self.grid_points.max(3);
        let step = self.lambda_max / (n - 1) as f64;
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            values.push(eval(k as f64 * step)?);
        }
        let k = values
            .iter()
            .enumerate()
            .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
        let (mut lo, mut hi) = (
            (k as f64 - 1.0).max(0.0) * step,
            ((k + 1).min(n - 1)) as f64 * step,
        );
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        while hi - lo > self.tolerance {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = eval(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = eval(x2)?;
            }
        }
        let lambda = best.1;
        Ok((mb_pmf(c, lambda)?, lambda))
    }
}

/// MB constellation maximizing AWGN mutual information at `snr_db`, with its lambda.
pub fn mb_for_awgn_snr(c: &Constellation4D, snr_db: f64) -> Result<(Constellation4D, f64)> {
    MbSearch::default().run(c, snr_db)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MdBallOptions {
    /// Extend the cut to the end of the straddling energy shell.
    pub whole_shell: bool,
}

/// Keeps the `n_ball` lowest-energy points of `base` with a uniform PMF.
///
/// Points in the shell straddling the cut are taken in base point order.
pub fn md_ball(base: &Constellation4D, n_ball: usize) -> Result<Constellation4D> {
    md_ball_with(base, n_ball, MdBallOptions::default())
}

pub fn md_ball_with(base: &Constellation4D, n_ball: usize, opts: MdBallOptions) -> Result<Constellation4D> {
    if n_ball == 0 || n_ball > base.len() {
        return Err(Error::InvalidArgument(format!(
            "n_ball {n_ball} outside [1, {}]",
            base.len()
        )));
    }
    let acs = amplitude_classes(base, ENERGY_REL_TOL);
    let mut kept = Vec::with_capacity(n_ball);
    for class in &acs.classes {
        if kept.len() >= n_ball {
            break;
        }
        let room = n_ball - kept.len();
        if opts.whole_shell || class.size() <= room {
            kept.extend_from_slice(&class.members);
        } else {
            kept.extend_from_slice(&class.members[..room]);
        }
    }
    kept.sort_unstable();
    let points = kept.iter().map(|&i| base.points()[i]).collect();
    Constellation4D::uniform(
        points,
        Metadata {
            name: format!("MD ball {} from {}", kept.len(), base.metadata().base),
            base: base.metadata().base.clone(),
            n_ball: Some(n_ball),
            ..Metadata::default()
        },
    )
}
