//! Netpbm graymap (PGM) reading and writing, plain (P2) and raw (P5).

use thiserror::Error;

use super::GrayImage;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("PGM parse error at byte {offset}: {kind}")]
pub struct PgmError {
    pub offset: usize,
    pub kind: PgmErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmErrorKind {
    #[error("bad magic number (expected P2 or P5)")]
    BadMagic,
    #[error("expected a decimal number in the header")]
    ExpectedNumber,
    #[error("{0} must be positive")]
    ZeroDimension(&'static str),
    #[error("maxval must be in 1..=65535, got {0}")]
    BadMaxval(u64),
    #[error("expected whitespace after the header")]
    MissingSeparator,
    #[error("sample data ends early")]
    Truncated,
    #[error("sample {value} exceeds maxval {maxval}")]
    SampleTooLarge { value: u64, maxval: u16 },
    #[error("image is too large")]
    TooLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P2`, ASCII decimal samples.
    Plain,
    /// `P5`, big-endian binary samples.
    Raw,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, kind: PgmErrorKind) -> PgmError {
        PgmError {
            offset: self.pos,
            kind,
        }
    }

    /// Skips whitespace and `#` comments running to end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u64, PgmError> {
        self.skip_separators();
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(&b) = self.data.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(b - b'0')))
                .ok_or(PgmError {
                    offset: start,
                    kind: PgmErrorKind::TooLarge,
                })?;
            self.pos += 1;
        }
        if self.pos == start {
            let kind = if self.pos >= self.data.len() {
                PgmErrorKind::Truncated
            } else {
                PgmErrorKind::ExpectedNumber
            };
            return Err(self.err(kind));
        }
        Ok(value)
    }
}

/// Decodes a P2 or P5 graymap, scaling samples by `1 / maxval`.
pub fn load_pgm<T: Scalar>(bytes: &[u8]) -> Result<GrayImage<T>, PgmError> {
    let mut cur = Cursor {
        data: bytes,
        pos: 0,
    };
    let format = match bytes.get(..2) {
        Some(b"P2") => PgmFormat::Plain,
        Some(b"P5") => PgmFormat::Raw,
        _ => return Err(cur.err(PgmErrorKind::BadMagic)),
    };
    cur.pos = 2;
    // the magic must be followed by a separator, e.g. "P25" is not valid
    match bytes.get(2) {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        Some(_) => return Err(cur.err(PgmErrorKind::BadMagic)),
        None => return Err(cur.err(PgmErrorKind::Truncated)),
    }

    let mut dim = |name: &'static str| -> Result<usize, PgmError> {
        let at = {
            cur.skip_separators();
            cur.pos
        };
        let v = cur.number()?;
        if v == 0 {
            return Err(PgmError {
                offset: at,
                kind: PgmErrorKind::ZeroDimension(name),
            });
        }
        usize::try_from(v).map_err(|_| PgmError {
            offset: at,
            kind: PgmErrorKind::TooLarge,
        })
    };
    let width = dim("width")?;
    let height = dim("height")?;
    cur.skip_separators();
    let maxval_at = cur.pos;
    let maxval = cur.number()?;
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError {
            offset: maxval_at,
            kind: PgmErrorKind::BadMaxval(maxval),
        });
    }
    let maxval = maxval as u16;
    let count = width.checked_mul(height).ok_or(PgmError {
        offset: maxval_at,
        kind: PgmErrorKind::TooLarge,
    })?;

    let scale = T::one() / T::from_usize_lossy(maxval as usize);
    let mut pixels = Vec::with_capacity(count.min(bytes.len()));
    let mut push = |at: usize, v: u64| -> Result<(), PgmError> {
        if v > u64::from(maxval) {
            return Err(PgmError {
                offset: at,
                kind: PgmErrorKind::SampleTooLarge { value: v, maxval },
            });
        }
        pixels.push(T::from_u64(v).expect("sample fits scalar") * scale);
        Ok(())
    };

    match format {
        PgmFormat::Plain => {
            for _ in 0..count {
                cur.skip_separators();
                let at = cur.pos;
                let v = cur.number()?;
                push(at, v)?;
            }
        }
        PgmFormat::Raw => {
            match bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                Some(_) => return Err(cur.err(PgmErrorKind::MissingSeparator)),
                None => return Err(cur.err(PgmErrorKind::Truncated)),
            }
            let wide = maxval > 255;
            let sample_len = if wide { 2 } else { 1 };
            let needed = count
                .checked_mul(sample_len)
                .ok_or(cur.err(PgmErrorKind::TooLarge))?;
            if bytes.len() - cur.pos < needed {
                return Err(PgmError {
                    offset: bytes.len(),
                    kind: PgmErrorKind::Truncated,
                });
            }
            for i in 0..count {
                let at = cur.pos + i * sample_len;
                let v = if wide {
                    u64::from(u16::from_be_bytes([bytes[at], bytes[at + 1]]))
                } else {
                    u64::from(bytes[at])
                };
                push(at, v)?;
            }
        }
    }

    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}

/// Encodes integer samples as a P2 or P5 graymap.
///
/// Panics if `samples.len() != width * height` or a sample exceeds `maxval`.
pub fn encode_pgm(
    width: usize,
    height: usize,
    maxval: u16,
    samples: &[u16],
    format: PgmFormat,
) -> Vec<u8> {
    assert_eq!(samples.len(), width * height, "sample count");
    assert!(maxval > 0 && samples.iter().all(|&s| s <= maxval));
    let magic = match format {
        PgmFormat::Plain => "P2",
        PgmFormat::Raw => "P5",
    };
    let mut out = format!("{magic}\n{width} {height}\n{maxval}\n").into_bytes();
    match format {
        PgmFormat::Plain => {
            for row in samples.chunks(width) {
                let line: Vec<String> = row.iter().map(u16::to_string).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        PgmFormat::Raw => {
            for &s in samples {
                if maxval > 255 {
                    out.extend_from_slice(&s.to_be_bytes());
                } else {
                    out.push(s as u8);
                }
            }
        }
    }
    out
}
