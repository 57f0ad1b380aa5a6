//! Constellation exchange files.
//!
//! JSON object with the fields `format` (`"shapeopt-constellation"`),
//! `version` (1), `points` (N×4 array), `pmf` (N array) and `metadata`
//! (`name`, `base`, optional `lambda`, `n_ball`, `scales`). Floats are written
//! in shortest round-trip decimal form, so a write/read cycle is lossless.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Constellation4D, Metadata, Point4};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "shapeopt-constellation";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstellationFile {
    pub format: String,
    pub version: u32,
    pub points: Vec<Point4>,
    pub pmf: Vec<f64>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl From<&Constellation4D> for ConstellationFile {
    fn from(c: &Constellation4D) -> Self {
        Self {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            points: c.points().to_vec(),
            pmf: c.pmf().to_vec(),
            metadata: c.metadata().clone(),
        }
    }
}

impl Constellation4D {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ConstellationFile::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConstellationFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if file.format != FORMAT_TAG || file.version != FORMAT_VERSION {
            return Err(Error::Parse {
                line: 1,
                message: format!("unsupported format {:?} version {}", file.format, file.version),
            });
        }
        if let Some(s) = &file.metadata.scales {
            if s.len() != file.points.len() {
                return Err(Error::Parse {
                    line: 1,
                    message: "metadata.scales length differs from points".into(),
                });
            }
        }
        Constellation4D::with_metadata(file.points, file.pmf, file.metadata)
    }
}

pub fn write_constellation(path: impl AsRef<Path>, c: &Constellation4D) -> Result<()> {
    std::fs::write(path, c.to_json() + "\n")?;
    Ok(())
}

pub fn read_constellation(path: impl AsRef<Path>) -> Result<Constellation4D> {
    Constellation4D::from_json(&std::fs::read_to_string(path)?)
}
