//! Netpbm graymap reader and writer (binary `P5` and plain `P2`), 8-bit only.
//!
//! Header tokens are separated by whitespace; `#` starts a comment running to
//! the end of the line. Comments are dropped on read. The writer always emits
//! the canonical header `P5\n<w> <h>\n255\n` so output is byte-reproducible.
//!
//! Samples are stored as-is: a file with `maxval < 255` is not rescaled.

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmFlavor {
    /// Binary raster.
    P5,
    /// ASCII raster.
    P2,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Pgm { offset: self.pos, reason: reason.into() }
    }

    fn skip_ws_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
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

    /// Next decimal token; `what` names it in error messages.
    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return Err(self.err(format!("unexpected end of data, expected {what}")));
        }
        let token = &self.bytes[start..self.pos];
        let parsed = std::str::from_utf8(token)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse::<u32>().ok());
        parsed.ok_or_else(|| Error::Pgm {
            offset: start,
            reason: format!("expected {what}, found {:?}", String::from_utf8_lossy(token)),
        })
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let flavor = match bytes.get(..2) {
        Some(b"P5") => PgmFlavor::P5,
        Some(b"P2") => PgmFlavor::P2,
        _ => return Err(cur.err("bad magic, expected P5 or P2")),
    };
    cur.pos = 2;
    if cur.bytes.get(2).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        return Err(cur.err("magic must be followed by whitespace"));
    }

    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval_offset = {
        cur.skip_ws_and_comments();
        cur.pos
    };
    let maxval = cur.number("maxval")?;
    if maxval > 255 {
        return Err(Error::UnsupportedMaxval { offset: maxval_offset, maxval });
    }
    if maxval == 0 {
        return Err(Error::Pgm { offset: maxval_offset, reason: "maxval must be positive".into() });
    }
    if width == 0 || height == 0 {
        return Err(Error::Pgm { offset: maxval_offset, reason: format!("empty image {width}x{height}") });
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm { offset: maxval_offset, reason: "image too large".into() })?;

    let pixels = match flavor {
        PgmFlavor::P5 => {
            // exactly one whitespace byte separates maxval from the raster
            match cur.bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                _ => return Err(cur.err("expected whitespace after maxval")),
            }
            let raster = cur.bytes.get(cur.pos..).filter(|r| r.len() >= count).ok_or_else(|| {
                cur.err(format!("truncated raster: need {count} bytes, have {}", bytes.len() - cur.pos))
            })?;
            let raster = &raster[..count];
            if let Some(i) = raster.iter().position(|&v| u32::from(v) > maxval) {
                return Err(Error::Pgm { offset: cur.pos + i, reason: format!("sample exceeds maxval {maxval}") });
            }
            raster.to_vec()
        }
        PgmFlavor::P2 => {
            let mut px = Vec::with_capacity(count);
            for _ in 0..count {
                cur.skip_ws_and_comments();
                let at = cur.pos;
                if at >= bytes.len() {
                    return Err(cur.err(format!("truncated raster: {} of {count} samples", px.len())));
                }
                let v = cur.number("sample")?;
                if v > maxval {
                    return Err(Error::Pgm { offset: at, reason: format!("sample {v} exceeds maxval {maxval}") });
                }
                px.push(v as u8);
            }
            px
        }
    };
    GrayImage::new(width, height, pixels)
}

pub fn write_pgm(img: &GrayImage, flavor: PgmFlavor) -> Vec<u8> {
    match flavor {
        PgmFlavor::P5 => {
            let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
            out.extend_from_slice(img.pixels());
            out
        }
        PgmFlavor::P2 => {
            let mut out = format!("P2\n{} {}\n255\n", img.width(), img.height());
            for row in img.pixels().chunks(img.width()) {
                // plain PGM lines should stay under 70 characters
                let mut line_len = 0;
                for (i, v) in row.iter().enumerate() {
                    let s = v.to_string();
                    if i > 0 {
                        if line_len + 1 + s.len() > 70 {
                            out.push('\n');
                            line_len = 0;
                        } else {
                            out.push(' ');
                            line_len += 1;
                        }
                    }
                    line_len += s.len();
                    out.push_str(&s);
                }
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}
