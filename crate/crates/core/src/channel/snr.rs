use super::SymbolBatch;
use crate::air::{fit_gain, GainModel};
use crate::error::{Error, Result};
use crate::numeric::{energy, ksum};

/// Reported in place of an infinite SNR.
pub const SNR_CAP_DB: f64 = 200.0;

/// Effective SNR after a least-squares complex scalar gain:
/// `10 log10(E‖h·tx‖² / E‖rx − h·tx‖²)`.
pub fn effective_snr(batch: &SymbolBatch) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let h = fit_gain(&batch.tx, &batch.rx, GainModel::Complex)?;
    let signal = ksum(batch.tx.iter().map(|x| energy(&h.apply(x))));
    let noise = ksum(batch.tx.iter().zip(&batch.rx).map(|(x, y)| {
        let hx = h.apply(x);
        energy(&std::array::from_fn(|d| y[d] - hx[d]))
    }));
    if noise <= signal * 10f64.powf(-SNR_CAP_DB / 10.0) {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal / noise).log10()).min(SNR_CAP_DB))
}
