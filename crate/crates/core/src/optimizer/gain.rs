use serde::{Deserialize, Serialize};

use super::greedy::difference_se;
use crate::air::AirReport;
use crate::error::{Error, Result};

/// Rate difference with its propagated standard error, bits/4D.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapingGain {
    pub gain: f64,
    pub se: f64,
}

/// `a - b`. Reports measured on the same seed are compared pairwise over
/// their sub-batches; otherwise the errors add in quadrature.
pub fn shaping_gain(a: &AirReport, b: &AirReport) -> Result<ShapingGain> {
    if a.channel_fingerprint != b.channel_fingerprint {
        return Err(Error::InvalidComparison(format!(
            "channel fingerprints differ ({} vs {})",
            a.channel_fingerprint, b.channel_fingerprint
        )));
    }
    Ok(ShapingGain {
        gain: a.mi_bits_per_4d - b.mi_bits_per_4d,
        se: difference_se(a, b),
    })
}
