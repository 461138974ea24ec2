//! Reversible embedding into a boundary-free image, and the in-band framing
//! of side information.
//!
//! Any [`ReversibleEmbedder`] can be plugged into the pipeline. The crate
//! ships [`PeHistogramShift`], a single-pass prediction-error histogram
//! shifter.
//!
//! Frame layout (bits, MSB first):
//!
//! ```text
//! magic 0xB5 : 8 | version : 8 | T : 8 | t0 : 8 | t1 : 8
//! | map bit length : 32 | payload bit length : 32
//! | compressed map bits | payload bits
//! ```

use crate::bits::BitStream;
use crate::codec::CompressedMap;
use crate::error::{Error, Result};
use crate::image::{GrayImage, Parity};
use crate::predictor::predict;
use crate::preprocess::PreprocessParams;

pub const FRAME_MAGIC: u8 = 0xB5;
pub const FRAME_VERSION: u8 = 1;
pub const FRAME_HEADER_BITS: usize = 104;

/// A reversible data embedding scheme operating on images in `[T, 255 - T]`.
pub trait ReversibleEmbedder: Sync {
    /// Largest change the scheme makes to any single pixel.
    fn max_shift(&self) -> u8;

    /// Smallest `T` for which embedding into `[T, 255 - T]` cannot overflow.
    fn min_t(&self) -> u8;

    /// Number of bits `embed` can carry in `x`.
    fn capacity(&self, x: &GrayImage) -> usize;

    /// Hides `bits` in `x`. Unused capacity is filled with zeros.
    fn embed(&self, x: &GrayImage, bits: &BitStream) -> Result<GrayImage>;

    /// Recovers the full capacity's worth of bits and the original `x`.
    fn extract(&self, y: &GrayImage) -> Result<(BitStream, GrayImage)>;
}

/// Prediction-error histogram shifting on the even checkerboard class.
///
/// Odd-class pixels are never modified and serve as context. For an even
/// pixel with prediction `p` and error `e = x - p`:
///
/// | `e`    | marked error `e'` |
/// |--------|-------------------|
/// | `0`    | `b`               |
/// | `-1`   | `-1 - b`          |
/// | `>= 1` | `e + 1`           |
/// | `<= -2`| `e - 1`           |
#[derive(Clone, Copy, Debug, Default)]
pub struct PeHistogramShift;

impl PeHistogramShift {
    fn check_input(x: &GrayImage) -> Result<()> {
        x.ensure_min_size()?;
        if let Some(i) = x.pixels().iter().position(|&v| v == 0 || v == 255) {
            return Err(Error::InvalidParam(format!(
                "pixel ({}, {}) = {} would overflow; embed into a preprocessed image",
                i / x.width(),
                i % x.width(),
                x.pixels()[i]
            )));
        }
        Ok(())
    }

    /// Even-class positions in raster order.
    fn carriers(x: &GrayImage) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..x.height()).flat_map(move |r| (Parity::Even.first_col(r)..x.width()).step_by(2).map(move |c| (r, c)))
    }
}

impl ReversibleEmbedder for PeHistogramShift {
    fn max_shift(&self) -> u8 {
        1
    }

    fn min_t(&self) -> u8 {
        1
    }

    fn capacity(&self, x: &GrayImage) -> usize {
        if x.width() < 2 || x.height() < 2 {
            return 0;
        }
        Self::carriers(x)
            .filter(|&(r, c)| {
                let e = i32::from(x.get(r, c)) - predict(x, r, c);
                e == 0 || e == -1
            })
            .count()
    }

    fn embed(&self, x: &GrayImage, bits: &BitStream) -> Result<GrayImage> {
        Self::check_input(x)?;
        let available = self.capacity(x);
        if bits.len() > available {
            return Err(Error::InsufficientCapacity { needed: bits.len(), available });
        }
        let mut y = x.clone();
        let mut next = bits.as_slice().iter().copied();
        for (r, c) in Self::carriers(x) {
            let p = predict(x, r, c);
            let e = i32::from(x.get(r, c)) - p;
            let marked = match e {
                0 => i32::from(next.next().unwrap_or(false)),
                -1 => -1 - i32::from(next.next().unwrap_or(false)),
                e if e >= 1 => e + 1,
                e => e - 1,
            };
            y.set(r, c, (p + marked) as u8);
        }
        Ok(y)
    }

    fn extract(&self, y: &GrayImage) -> Result<(BitStream, GrayImage)> {
        y.ensure_min_size()?;
        let mut x = y.clone();
        let mut bits = BitStream::new();
        for (r, c) in Self::carriers(y) {
            let p = predict(y, r, c);
            let marked = i32::from(y.get(r, c)) - p;
            let e = match marked {
                0 | 1 => {
                    bits.push(marked == 1);
                    0
                }
                -1 | -2 => {
                    bits.push(marked == -2);
                    -1
                }
                m if m >= 2 => m - 1,
                m => m + 1,
            };
            let v = p + e;
            // only reachable for images that were not produced by `embed`
            let v = u8::try_from(v)
                .map_err(|_| Error::corrupt(format!("recovered pixel ({r}, {c}) = {v} is outside [0, 255]")))?;
            x.set(r, c, v);
        }
        Ok((bits, x))
    }
}

/// Side information parsed back out of an extracted bitstream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deframed {
    pub payload: BitStream,
    pub map: CompressedMap,
    pub params: PreprocessParams,
    /// Frame length in bits; anything after it is trailing data.
    pub frame_bits: usize,
}

/// `header || compressed map || payload`.
pub fn frame_payload(payload: &BitStream, map: &CompressedMap, params: PreprocessParams) -> Result<BitStream> {
    let map_bits = map.bit_length;
    if map_bits > u32::MAX as usize {
        return Err(Error::Oversize(format!("compressed map of {map_bits} bits")));
    }
    if payload.len() > u32::MAX as usize {
        return Err(Error::Oversize(format!("payload of {} bits", payload.len())));
    }
    let mut out = BitStream::with_capacity(FRAME_HEADER_BITS + map_bits + payload.len());
    out.push_uint(u64::from(FRAME_MAGIC), 8);
    out.push_uint(u64::from(FRAME_VERSION), 8);
    out.push_uint(u64::from(params.t()), 8);
    out.push_uint(u64::from(params.t0()), 8);
    out.push_uint(u64::from(params.t1()), 8);
    out.push_uint(map_bits as u64, 32);
    out.push_uint(payload.len() as u64, 32);
    out.extend(&BitStream::from_bytes_prefix(&map.bitstream, map_bits));
    out.extend(payload);
    Ok(out)
}

/// Inverse of [`frame_payload`]. The map's grid dimensions are not carried in
/// the frame; they are those of the marked image.
pub fn deframe_payload(bits: &BitStream, width: usize, height: usize) -> Result<Deframed> {
    let mut r = bits.reader();
    let short = || Error::corrupt("embedded bitstream shorter than its frame header");
    let magic = r.read_uint(8).ok_or_else(short)? as u8;
    if magic != FRAME_MAGIC {
        return Err(Error::corrupt(format!("bad frame magic {magic:#04x}")));
    }
    let version = r.read_uint(8).ok_or_else(short)? as u8;
    if version != FRAME_VERSION {
        return Err(Error::corrupt(format!("unsupported frame version {version}")));
    }
    let t = r.read_uint(8).ok_or_else(short)? as u8;
    let t0 = r.read_uint(8).ok_or_else(short)? as u8;
    let t1 = r.read_uint(8).ok_or_else(short)? as u8;
    let params = PreprocessParams::new(t, t0, t1).map_err(|e| Error::corrupt(format!("frame parameters: {e}")))?;
    let map_bits = r.read_uint(32).ok_or_else(short)? as usize;
    let payload_bits = r.read_uint(32).ok_or_else(short)? as usize;
    if map_bits.saturating_add(payload_bits) > r.remaining() {
        return Err(Error::corrupt(format!(
            "frame declares {map_bits} map bits and {payload_bits} payload bits but only {} remain",
            r.remaining()
        )));
    }
    let map_stream = r.read_bits(map_bits).expect("length checked");
    let payload = r.read_bits(payload_bits).expect("length checked");
    let map = CompressedMap {
        alphabet_size: 2 * usize::from(t) + 1,
        width,
        height,
        bitstream: map_stream.to_bytes(),
        bit_length: map_bits,
    };
    Ok(Deframed { payload, map, params, frame_bits: r.position() })
}
