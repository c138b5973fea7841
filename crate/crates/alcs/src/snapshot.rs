//! Binary snapshot files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "ALCS" | version u32 = 1 | d u32 | N u32 | L f64 | t f64 | nfields u32
//! then per field: name [u8; 16] (ASCII, zero padded) | N^d f64 row-major
//! ```

use std::path::{Path, PathBuf};

use alcs_core::dynamics::StateFields;
use alcs_core::spectral::{Grid2D, QTensorField, ScalarField, VelocityField};

pub const MAGIC: [u8; 4] = *b"ALCS";
pub const VERSION: u32 = 1;
pub const NAME_LEN: usize = 16;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 8 + 4;

/// Field names of a state snapshot, in file order.
pub const STATE_FIELDS: [&str; 4] = ["q11", "q12", "ux", "uy"];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SnapshotError {
    #[error("not a snapshot: bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("snapshot written with foreign byte order")]
    ForeignEndian,
    #[error("unsupported snapshot version {0} (expected {VERSION})")]
    Version(u32),
    #[error("truncated snapshot: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("snapshot has {actual} bytes but its header declares {expected}")]
    TrailingBytes { expected: usize, actual: usize },
    #[error("unsupported dimension d = {0}")]
    Dimension(u32),
    #[error("invalid header: {0}")]
    Header(String),
    #[error("field name {0:?} is not zero-padded ASCII of at most 16 bytes")]
    BadName(String),
    #[error("snapshot lacks field '{0}'")]
    MissingField(String),
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        source: SnapshotError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub d: u32,
    pub n: u32,
    pub l: f64,
    pub t: f64,
    pub fields: Vec<(String, Vec<f64>)>,
}

impl Snapshot {
    pub fn from_state(s: &StateFields) -> Snapshot {
        let g = s.grid();
        let data = [&s.q.q11, &s.q.q12, &s.u.ux, &s.u.uy];
        Snapshot {
            d: 2,
            n: g.n() as u32,
            l: g.l(),
            t: s.t,
            fields: STATE_FIELDS
                .iter()
                .zip(data)
                .map(|(n, f)| (n.to_string(), f.data.clone()))
                .collect(),
        }
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn grid(&self) -> Result<Grid2D, SnapshotError> {
        Grid2D::new(self.n as usize, self.l).map_err(|e| SnapshotError::Header(e.to_string()))
    }

    pub fn to_state(&self) -> Result<StateFields, SnapshotError> {
        let g = self.grid()?;
        let get = |name: &str| -> Result<ScalarField, SnapshotError> {
            let v = self
                .field(name)
                .ok_or_else(|| SnapshotError::MissingField(name.into()))?;
            Ok(ScalarField {
                grid: g,
                data: v.to_vec(),
            })
        };
        Ok(StateFields {
            t: self.t,
            q: QTensorField {
                q11: get("q11")?,
                q12: get("q12")?,
            },
            u: VelocityField {
                ux: get("ux")?,
                uy: get("uy")?,
            },
        })
    }

    pub fn encode(&self) -> Result<Vec<u8>, SnapshotError> {
        let per = self.values_per_field()?;
        let mut out = Vec::with_capacity(HEADER_LEN + self.fields.len() * (NAME_LEN + 8 * per));
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.d.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.l.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&(self.fields.len() as u32).to_le_bytes());
        for (name, values) in &self.fields {
            if name.len() > NAME_LEN || !name.is_ascii() || name.contains('\0') {
                return Err(SnapshotError::BadName(name.clone()));
            }
            if values.len() != per {
                return Err(SnapshotError::Header(format!(
                    "field '{name}' has {} values, expected {per}",
                    values.len()
                )));
            }
            let mut padded = [0u8; NAME_LEN];
            padded[..name.len()].copy_from_slice(name.as_bytes());
            out.extend_from_slice(&padded);
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    fn values_per_field(&self) -> Result<usize, SnapshotError> {
        if self.d == 0 || self.d > 3 {
            return Err(SnapshotError::Dimension(self.d));
        }
        (self.n as usize)
            .checked_pow(self.d)
            .ok_or_else(|| SnapshotError::Header(format!("N = {} too large", self.n)))
    }

    pub fn decode(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
        if bytes.len() < 4 {
            return Err(SnapshotError::Truncated {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != MAGIC {
            let mut rev = MAGIC;
            rev.reverse();
            return Err(if magic == rev {
                SnapshotError::ForeignEndian
            } else {
                SnapshotError::BadMagic(magic)
            });
        }
        if bytes.len() < HEADER_LEN {
            return Err(SnapshotError::Truncated {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(if version.swap_bytes() == VERSION {
                SnapshotError::ForeignEndian
            } else {
                SnapshotError::Version(version)
            });
        }
        let d = u32_at(8);
        let n = u32_at(12);
        let l = f64_at(16);
        let t = f64_at(24);
        let nfields = u32_at(32) as usize;
        let head = Snapshot {
            d,
            n,
            l,
            t,
            fields: Vec::new(),
        };
        let per = head.values_per_field()?;
        let expected = per
            .checked_mul(8)
            .and_then(|b| b.checked_add(NAME_LEN))
            .and_then(|b| b.checked_mul(nfields))
            .and_then(|b| b.checked_add(HEADER_LEN))
            .ok_or_else(|| SnapshotError::Header("declared size overflows".into()))?;
        if bytes.len() < expected {
            return Err(SnapshotError::Truncated {
                expected,
                actual: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(SnapshotError::TrailingBytes {
                expected,
                actual: bytes.len(),
            });
        }
        let mut fields = Vec::with_capacity(nfields);
        let mut o = HEADER_LEN;
        for _ in 0..nfields {
            let raw = &bytes[o..o + NAME_LEN];
            let end = raw.iter().position(|&b| b == 0).unwrap_or(NAME_LEN);
            let name_bytes = &raw[..end];
            if !name_bytes.is_ascii() || raw[end..].iter().any(|&b| b != 0) {
                return Err(SnapshotError::BadName(
                    String::from_utf8_lossy(raw).into_owned(),
                ));
            }
            let name = String::from_utf8(name_bytes.to_vec()).unwrap();
            o += NAME_LEN;
            let values = bytes[o..o + 8 * per]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            o += 8 * per;
            fields.push((name, values));
        }
        Ok(Snapshot { fields, ..head })
    }
}

pub fn write_snapshot(path: &Path, s: &Snapshot) -> Result<(), SnapshotIoError> {
    let bytes = s.encode().map_err(|source| SnapshotIoError::Format {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, bytes).map_err(|source| SnapshotIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_state(path: &Path, s: &StateFields) -> Result<(), SnapshotIoError> {
    write_snapshot(path, &Snapshot::from_state(s))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotIoError> {
    let bytes = std::fs::read(path).map_err(|source| SnapshotIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Snapshot::decode(&bytes).map_err(|source| SnapshotIoError::Format {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_state(path: &Path) -> Result<StateFields, SnapshotIoError> {
    read_snapshot(path)?
        .to_state()
        .map_err(|source| SnapshotIoError::Format {
            path: path.to_path_buf(),
            source,
        })
}
