use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constellation::Constellation4D;
use crate::error::{Error, Result};

/// Substream carrying the central channel's symbols.
pub const CENTRAL_STREAM: u64 = 0;
/// Substream carrying amplifier or AWGN noise.
pub const NOISE_STREAM: u64 = 1 << 32;

/// Deterministic generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// I.i.d. draws from the PMF of `c` by inverse CDF.
pub fn sample_symbols(c: &Constellation4D, n: usize, seed: u64) -> Result<Vec<u32>> {
    sample_symbols_from(c, n, &mut substream(seed, CENTRAL_STREAM))
}

pub fn sample_symbols_from<R: Rng>(c: &Constellation4D, n: usize, rng: &mut R) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::InvalidArgument("symbol count must be positive".into()));
    }
    let mut cdf = Vec::with_capacity(c.len());
    let mut acc = 0.0;
    for p in c.pmf() {
        acc += p;
        cdf.push(acc);
    }
    let last = c
        .pmf()
        .iter()
        .rposition(|p| *p > 0.0)
        .ok_or(Error::DegeneratePmf)?;
    let top = cdf[last];
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * top;
            cdf.partition_point(|&v| v <= u).min(last) as u32
        })
        .collect())
}
