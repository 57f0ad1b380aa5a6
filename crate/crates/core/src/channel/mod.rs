//! Symbol sources, the AWGN fast path and the split-step WDM fiber link.

mod awgn;
mod batch;
mod config;
pub mod dsp;
mod snr;
mod source;
pub mod ssfm;
mod wdm;

pub use awgn::{awgn_channel_fingerprint, simulate_awgn};
pub use batch::{Fingerprint, SymbolBatch};
pub use config::{LaunchPowerMode, LinkConfig, LIGHT_SPEED, PLANCK};
pub use snr::{effective_snr, SNR_CAP_DB};
pub use source::{sample_symbols, sample_symbols_from, substream, CENTRAL_STREAM, NOISE_STREAM};
pub use wdm::{ase_limited_snr_db, ase_psd, simulate_wdm, wdm_config_fingerprint};
