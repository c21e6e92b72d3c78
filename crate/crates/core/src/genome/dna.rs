use serde::{Deserialize, Serialize};

use crate::ca::FuzzyState;
use crate::error::{Error, Result};
use crate::genome::features::CodingMeasureVector;

/// Uppercase DNA over `{A, C, G, T, N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnaSequence {
    pub id: String,
    bases: Vec<u8>,
}

impl DnaSequence {
    pub fn new(id: impl Into<String>, bases: impl AsRef<[u8]>) -> Result<Self> {
        let bases = bases
            .as_ref()
            .iter()
            .enumerate()
            .map(|(offset, &b)| {
                let up = b.to_ascii_uppercase();
                match up {
                    b'A' | b'C' | b'G' | b'T' | b'N' => Ok(up),
                    _ => Err(Error::InvalidBase {
                        base: b as char,
                        offset,
                    }),
                }
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(DnaSequence { id: id.into(), bases })
    }

    pub fn bases(&self) -> &[u8] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.bases).expect("validated ASCII")
    }

    pub fn reverse_complement(&self) -> DnaSequence {
        DnaSequence {
            id: self.id.clone(),
            bases: reverse_complement(&self.bases),
        }
    }
}

pub fn reverse_complement(bases: &[u8]) -> Vec<u8> {
    bases
        .iter()
        .rev()
        .map(|&b| match b {
            b'A' => b'T',
            b'T' => b'A',
            b'C' => b'G',
            b'G' => b'C',
            other => other,
        })
        .collect()
}

/// How a window of bases becomes a CA configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Encoding {
    /// One cell per base: A=0, C=1/3, G=2/3, T=1.
    Direct,
    /// The 8 coding measures repeated to fill `cells` cells.
    Features { cells: usize },
}

impl Encoding {
    pub fn cells(&self, window_length: usize) -> usize {
        match self {
            Encoding::Direct => window_length,
            Encoding::Features { cells } => *cells,
        }
    }
}

/// Standard window lengths.
pub const WINDOW_LENGTHS: [usize; 5] = [54, 108, 162, 252, 354];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub length: usize,
    pub stride: usize,
    pub encoding: Encoding,
}

impl WindowConfig {
    pub fn new(length: usize, encoding: Encoding) -> Result<Self> {
        let cfg = WindowConfig {
            length,
            stride: (length / 2).max(1),
            encoding,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 || !self.length.is_multiple_of(3) {
            return Err(Error::InvalidParameter(format!(
                "window length {} is not a positive multiple of 3",
                self.length
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if let Encoding::Features { cells: 0 } = self.encoding {
            return Err(Error::InvalidParameter("feature encoding needs >= 1 cell".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.encoding.cells(self.length)
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig::new(54, Encoding::Direct).expect("54 is valid")
    }
}

pub fn base_value(b: u8) -> Option<f64> {
    match b {
        b'A' => Some(0.0),
        b'C' => Some(1.0 / 3.0),
        b'G' => Some(2.0 / 3.0),
        b'T' => Some(1.0),
        _ => None,
    }
}

/// Nearest base to a direct-encoded value.
pub fn value_base(v: f64) -> u8 {
    match (v * 3.0).round() as i64 {
        i64::MIN..=0 => b'A',
        1 => b'C',
        2 => b'G',
        _ => b'T',
    }
}

/// Encodes a window; fails on `N` or a length other than `cfg.length`.
pub fn encode_window(w: &[u8], cfg: &WindowConfig) -> Result<FuzzyState> {
    if w.len() != cfg.length {
        return Err(Error::LengthMismatch {
            expected: cfg.length,
            actual: w.len(),
        });
    }
    if let Some(i) = w.iter().position(|&b| b == b'N') {
        return Err(Error::AmbiguousBase(i));
    }
    match cfg.encoding {
        Encoding::Direct => {
            let cells = w
                .iter()
                .enumerate()
                .map(|(offset, &b)| {
                    base_value(b).ok_or(Error::InvalidBase {
                        base: b as char,
                        offset,
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            FuzzyState::new(cells)
        }
        Encoding::Features { cells } => {
            let m = CodingMeasureVector::compute(w)?;
            let v = m.values();
            FuzzyState::new((0..cells).map(|i| v[i % v.len()]).collect())
        }
    }
}
