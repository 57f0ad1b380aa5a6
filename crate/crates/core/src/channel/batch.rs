//! Paired transmit/receive 4D symbol sequences and their binary file form.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic       8 bytes   "SHPBATCH"
//! version     u32       1
//! reserved    u32       0
//! n_symbols   u64
//! seed        u64
//! tx_scale    f64
//! config_fp   32 bytes
//! channel_fp  32 bytes
//! tx_indices  n × u32
//! tx          n × 4 × f64
//! rx          n × 4 × f64
//! ```

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::constellation::{Constellation4D, Point4};
use crate::error::{Error, Result};

pub const BATCH_MAGIC: &[u8; 8] = b"SHPBATCH";
pub const BATCH_VERSION: u32 = 1;

/// SHA-256 digest identifying a configuration.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fingerprint(pub [u8; 32]);

impl Fingerprint {
    pub fn of(parts: &[&[u8]]) -> Self {
        let mut h = Sha256::new();
        for p in parts {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p);
        }
        Self(h.finalize().into())
    }

    pub fn parse(hex: &str) -> Option<Self> {
        if hex.len() != 64 {
            return None;
        }
        let mut out = [0u8; 32];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(hex.get(2 * i..2 * i + 2)?, 16).ok()?;
        }
        Some(Self(out))
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::numeric::hex(&self.0))
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({})", &crate::numeric::hex(&self.0)[..12])
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Fingerprint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Fingerprint::parse(&s).ok_or_else(|| serde::de::Error::custom("bad fingerprint"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolBatch {
    /// Transmitted constellation indices (central channel).
    pub tx_indices: Vec<u32>,
    /// Transmitted values, `tx_scale` times the constellation points.
    pub tx: Vec<Point4>,
    /// Received values after DSP, one per symbol.
    pub rx: Vec<Point4>,
    pub tx_scale: f64,
    pub seed: u64,
    /// Channel configuration together with the source constellation.
    pub config_fingerprint: Fingerprint,
    /// Channel configuration alone, without seed or constellation.
    pub channel_fingerprint: Fingerprint,
}

impl SymbolBatch {
    pub fn len(&self) -> usize {
        self.tx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tx.is_empty()
    }

    /// Checks lengths and that indices and values agree with `c`.
    pub fn check_against(&self, c: &Constellation4D) -> Result<()> {
        if self.tx.len() != self.rx.len() || self.tx.len() != self.tx_indices.len() {
            return Err(Error::InvalidArgument("tx/rx length mismatch".into()));
        }
        if let Some(&bad) = self.tx_indices.iter().find(|&&i| i as usize >= c.len()) {
            return Err(Error::InvalidArgument(format!("tx index {bad} out of range")));
        }
        Ok(())
    }

    /// Same batch with every received value multiplied by `factor`.
    pub fn with_rx_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.rx {
            for v in p.iter_mut() {
                *v *= factor;
            }
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BATCH_MAGIC)?;
        w.write_all(&BATCH_VERSION.to_le_bytes())?;
        w.write_all(&0u32.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.tx_scale.to_le_bytes())?;
        w.write_all(&self.config_fingerprint.0)?;
        w.write_all(&self.channel_fingerprint.0)?;
        let mut buf = Vec::with_capacity(self.len() * 68);
        for i in &self.tx_indices {
            buf.extend_from_slice(&i.to_le_bytes());
        }
        for p in self.tx.iter().chain(&self.rx) {
            for v in p {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BATCH_MAGIC {
            return Err(Error::Parse {
                line: 0,
                message: "not a symbol batch file".into(),
            });
        }
        let version = read_u32(&mut r)?;
        if version != BATCH_VERSION {
            return Err(Error::Parse {
                line: 0,
                message: format!("unsupported batch version {version}"),
            });
        }
        let _reserved = read_u32(&mut r)?;
        let n = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        let tx_scale = f64::from_le_bytes(read_array(&mut r)?);
        let config_fingerprint = Fingerprint(read_array(&mut r)?);
        let channel_fingerprint = Fingerprint(read_array(&mut r)?);
        let mut tx_indices = Vec::with_capacity(n);
        for _ in 0..n {
            tx_indices.push(read_u32(&mut r)?);
        }
        let read_points = |r: &mut R| -> Result<Vec<Point4>> {
            let mut pts = Vec::with_capacity(n);
            for _ in 0..n {
                let mut p = [0.0; 4];
                for v in &mut p {
                    *v = f64::from_le_bytes(read_array(r)?);
                }
                pts.push(p);
            }
            Ok(pts)
        };
        let tx = read_points(&mut r)?;
        let rx = read_points(&mut r)?;
        Ok(Self {
            tx_indices,
            tx,
            rx,
            tx_scale,
            seed,
            config_fingerprint,
            channel_fingerprint,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(f)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SymbolBatch {
        SymbolBatch {
            tx_indices: vec![0, 3, 2],
            tx: vec![[1.0, -1.0, 0.5, 0.25], [0.0; 4], [-0.0, 1e-300, f64::MAX, 3.5]],
            rx: vec![[0.1, 0.2, 0.3, 0.4], [1.0; 4], [-2.0; 4]],
            tx_scale: 0.125,
            seed: 42,
            config_fingerprint: Fingerprint::of(&[b"a"]),
            channel_fingerprint: Fingerprint::of(&[b"b"]),
        }
    }

    #[test]
    fn binary_round_trip() {
        let b = sample();
        let mut buf = Vec::new();
        b.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..8], BATCH_MAGIC);
        assert_eq!(buf.len(), 8 + 4 + 4 + 8 + 8 + 8 + 64 + 3 * 4 + 2 * 3 * 32);
        let back = SymbolBatch::read_from(&buf[..]).unwrap();
        assert_eq!(back.tx[2][0].to_bits(), (-0.0f64).to_bits());
        assert_eq!(back, b);
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let mut buf = Vec::new();
        sample().write_to(&mut buf).unwrap();
        buf[0] = b'X';
        assert!(SymbolBatch::read_from(&buf[..]).is_err());
    }

    #[test]
    fn fingerprint_hex_round_trip() {
        let f = Fingerprint::of(&[b"x", b"y"]);
        assert_eq!(Fingerprint::parse(&f.to_string()), Some(f));
        assert_ne!(Fingerprint::of(&[b"xy"]), Fingerprint::of(&[b"x", b"y"]));
    }
}
