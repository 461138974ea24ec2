//! Lossless location-map compression.
//!
//! Maps are scanned in raster order and coded with a 32-bit range coder
//! (carry-propagating, byte-wise output) driven by an adaptive order-0
//! frequency model: every count starts at 1, a coded symbol gains
//! [`INCREMENT`], and once any count reaches [`COUNT_CAP`] all counts are
//! halved (rounding up, so none drops to zero).
//!
//! Serialized container, big-endian:
//!
//! ```text
//! 0x4C 0x4D | alphabet_size - 1 : u8 | width : u32 | height : u32 | bit_length : u32 | ceil(bit_length / 8) bytes
//! ```

use crate::error::{Error, Result};
use crate::image::{is_boundary, GrayImage};
use crate::preprocess::LocationMap;

pub const INCREMENT: u32 = 32;
pub const COUNT_CAP: u32 = 1 << 16;

const TOP: u32 = 1 << 24;
const MAGIC: [u8; 2] = [0x4C, 0x4D];
pub const CONTAINER_HEADER_LEN: usize = 2 + 1 + 4 + 4 + 4;

/// Adaptive order-0 frequency table.
#[derive(Clone, Debug)]
struct FrequencyModel {
    counts: Vec<u32>,
    total: u32,
}

impl FrequencyModel {
    fn new(alphabet: usize) -> Self {
        FrequencyModel { counts: vec![1; alphabet], total: alphabet as u32 }
    }

    /// `(cumulative start, frequency)` of `symbol`.
    fn interval(&self, symbol: usize) -> (u32, u32) {
        let start = self.counts[..symbol].iter().sum();
        (start, self.counts[symbol])
    }

    /// Symbol whose interval contains `target`, with that interval.
    fn lookup(&self, target: u32) -> (usize, u32, u32) {
        let mut start = 0;
        for (s, &c) in self.counts.iter().enumerate() {
            if target < start + c {
                return (s, start, c);
            }
            start += c;
        }
        unreachable!("target {target} beyond total {}", self.total)
    }

    fn update(&mut self, symbol: usize) {
        self.counts[symbol] += INCREMENT;
        self.total += INCREMENT;
        if self.counts[symbol] >= COUNT_CAP {
            self.total = 0;
            for c in &mut self.counts {
                *c = c.div_ceil(2);
                self.total += *c;
            }
        }
    }
}

struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    pending: u64,
    started: bool,
    out: Vec<u8>,
}

impl RangeEncoder {
    fn new() -> Self {
        RangeEncoder { low: 0, range: u32::MAX, cache: 0, pending: 1, started: false, out: Vec::new() }
    }

    fn encode(&mut self, start: u32, freq: u32, total: u32) {
        let r = self.range / total;
        self.low += u64::from(start) * u64::from(r);
        self.range = freq * r;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn shift_low(&mut self) {
        if self.low < 0xFF00_0000 || self.low > 0xFFFF_FFFF {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                // the very first cached byte is always zero and is not stored
                if self.started {
                    self.out.push(byte.wrapping_add(carry));
                } else {
                    debug_assert_eq!(carry, 0);
                }
                self.started = true;
                byte = 0xFF;
                self.pending -= 1;
                if self.pending == 0 {
                    break;
                }
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.pending += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    code: u32,
    range: u32,
}

impl<'a> RangeDecoder<'a> {
    fn new(data: &'a [u8]) -> Result<Self> {
        let mut d = RangeDecoder { data, pos: 0, code: 0, range: u32::MAX };
        for _ in 0..4 {
            d.code = (d.code << 8) | u32::from(d.next_byte()?);
        }
        Ok(d)
    }

    fn next_byte(&mut self) -> Result<u8> {
        let b = *self
            .data
            .get(self.pos)
            .ok_or_else(|| Error::corrupt(format!("compressed map exhausted after {} bytes", self.data.len())))?;
        self.pos += 1;
        Ok(b)
    }

    fn target(&mut self, total: u32) -> Result<u32> {
        if self.code >= self.range {
            return Err(Error::corrupt("range decoder lost synchronisation"));
        }
        self.range /= total;
        let v = self.code / self.range;
        if v >= total {
            return Err(Error::corrupt("range decoder lost synchronisation"));
        }
        Ok(v)
    }

    /// Consumes the interval; `range` has already been divided by `total`.
    fn consume(&mut self, start: u32, freq: u32) -> Result<()> {
        self.code -= start * self.range;
        self.range *= freq;
        while self.range < TOP {
            self.code = (self.code << 8) | u32::from(self.next_byte()?);
            self.range <<= 8;
        }
        Ok(())
    }
}

/// Codes a symbol sequence over `0..alphabet`.
pub fn encode_symbols(symbols: &[u8], alphabet: usize) -> Vec<u8> {
    if symbols.is_empty() {
        return Vec::new();
    }
    let mut model = FrequencyModel::new(alphabet);
    let mut enc = RangeEncoder::new();
    for &s in symbols {
        let s = usize::from(s);
        debug_assert!(s < alphabet);
        let (start, freq) = model.interval(s);
        enc.encode(start, freq, model.total);
        model.update(s);
    }
    enc.finish()
}

/// Inverse of [`encode_symbols`]; every byte of `data` must be consumed.
pub fn decode_symbols(data: &[u8], alphabet: usize, count: usize) -> Result<Vec<u8>> {
    if count == 0 {
        if !data.is_empty() {
            return Err(Error::corrupt("trailing bytes after an empty map"));
        }
        return Ok(Vec::new());
    }
    let mut model = FrequencyModel::new(alphabet);
    let mut dec = RangeDecoder::new(data)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let target = dec.target(model.total)?;
        let (s, start, freq) = model.lookup(target);
        dec.consume(start, freq)?;
        model.update(s);
        out.push(s as u8);
    }
    if dec.pos != data.len() {
        return Err(Error::corrupt(format!("{} unused bytes after the compressed map", data.len() - dec.pos)));
    }
    Ok(out)
}

/// A coded symbol grid, self-describing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedMap {
    pub alphabet_size: usize,
    pub width: usize,
    pub height: usize,
    pub bitstream: Vec<u8>,
    pub bit_length: usize,
}

impl CompressedMap {
    fn from_symbols(symbols: &[u8], alphabet_size: usize, width: usize, height: usize) -> Self {
        let bitstream = encode_symbols(symbols, alphabet_size);
        let bit_length = bitstream.len() * 8;
        CompressedMap { alphabet_size, width, height, bitstream, bit_length }
    }

    /// Decodes the raw symbol grid without interpreting the alphabet.
    pub fn decode_symbols(&self) -> Result<Vec<u8>> {
        if self.bit_length > self.bitstream.len() * 8 || self.bitstream.len() != self.bit_length.div_ceil(8) {
            return Err(Error::corrupt("bit_length disagrees with the bitstream size"));
        }
        if !(2..=256).contains(&self.alphabet_size) {
            return Err(Error::corrupt(format!("alphabet size {} out of range", self.alphabet_size)));
        }
        let count = self.width.checked_mul(self.height).ok_or_else(|| Error::corrupt("map dimensions overflow"))?;
        decode_symbols(&self.bitstream, self.alphabet_size, count)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(CONTAINER_HEADER_LEN + self.bitstream.len());
        out.extend_from_slice(&MAGIC);
        out.push((self.alphabet_size - 1) as u8);
        out.extend_from_slice(&(self.width as u32).to_be_bytes());
        out.extend_from_slice(&(self.height as u32).to_be_bytes());
        out.extend_from_slice(&(self.bit_length as u32).to_be_bytes());
        out.extend_from_slice(&self.bitstream);
        out
    }

    /// Parses a container; returns the map and the number of bytes used.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, usize)> {
        if bytes.len() < CONTAINER_HEADER_LEN {
            return Err(Error::corrupt("location map container truncated"));
        }
        if bytes[..2] != MAGIC {
            return Err(Error::corrupt("bad location map container magic"));
        }
        let be32 = |at: usize| u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        let alphabet_size = usize::from(bytes[2]) + 1;
        let (width, height, bit_length) = (be32(3), be32(7), be32(11));
        let n = bit_length.div_ceil(8);
        let end = CONTAINER_HEADER_LEN + n;
        let bitstream = bytes
            .get(CONTAINER_HEADER_LEN..end)
            .ok_or_else(|| Error::corrupt("location map bitstream truncated"))?
            .to_vec();
        Ok((CompressedMap { alphabet_size, width, height, bitstream, bit_length }, end))
    }
}

pub fn compress(map: &LocationMap) -> CompressedMap {
    CompressedMap::from_symbols(map.symbols(), map.alphabet_size(), map.width(), map.height())
}

pub fn decompress(c: &CompressedMap) -> Result<LocationMap> {
    if c.alphabet_size.is_multiple_of(2) || c.alphabet_size < 3 {
        return Err(Error::corrupt(format!("alphabet size {} is not 2T+1", c.alphabet_size)));
    }
    let symbols = c.decode_symbols()?;
    LocationMap::new(c.width, c.height, ((c.alphabet_size - 1) / 2) as u8, symbols)
}

/// One bit per pixel: 1 where `img` has a boundary value for `T`.
pub fn binary_boundary_map(img: &GrayImage, t: u8) -> Vec<u8> {
    img.pixels().iter().map(|&v| u8::from(is_boundary(v, t))).collect()
}

/// The conventional binary location map of `img`, compressed with the same
/// coder (alphabet 2).
pub fn compress_binary_baseline(img: &GrayImage, t: u8) -> CompressedMap {
    CompressedMap::from_symbols(&binary_boundary_map(img, t), 2, img.width(), img.height())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize, t: u8) -> LocationMap {
        let symbols = (0..w * h).map(|_| rng.random_range(0..=2 * t)).collect();
        LocationMap::new(w, h, t, symbols).unwrap()
    }

    #[test]
    fn round_trip_alphabets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in [1u8, 2, 16] {
            let m = random_map(&mut rng, 40, 31, t);
            let c = compress(&m);
            assert_eq!(c.alphabet_size, 2 * t as usize + 1);
            assert_eq!(decompress(&c).unwrap(), m);
        }
    }

    #[test]
    fn skewed_streams_round_trip() {
        // long runs drive counts to the cap and exercise halving + carries
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut symbols = vec![4u8; 300_000];
        for _ in 0..200 {
            let i = rng.random_range(0..symbols.len());
            symbols[i] = rng.random_range(0..4);
        }
        let m = LocationMap::new(600, 500, 2, symbols).unwrap();
        assert_eq!(decompress(&compress(&m)).unwrap(), m);
    }

    #[test]
    fn empty_map() {
        let m = LocationMap::new(0, 0, 1, vec![]).unwrap();
        let c = compress(&m);
        assert!(c.bitstream.is_empty());
        assert_eq!(c.bit_length, 0);
        assert_eq!(decompress(&c).unwrap(), m);
        let (back, used) = CompressedMap::from_bytes(&c.to_bytes()).unwrap();
        assert_eq!((back, used), (c, CONTAINER_HEADER_LEN));
    }

    #[test]
    fn truncation_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_map(&mut rng, 20, 20, 1);
        let c = compress(&m);
        for cut in 1..=c.bitstream.len() {
            let mut t = c.clone();
            t.bitstream.truncate(c.bitstream.len() - cut);
            t.bit_length = t.bitstream.len() * 8;
            assert!(decompress(&t).is_err(), "cut {cut}");
        }
    }

    #[test]
    fn trailing_garbage_is_an_error() {
        let m = LocationMap::new(4, 4, 1, vec![2; 16]).unwrap();
        let mut c = compress(&m);
        c.bitstream.push(0);
        c.bit_length += 8;
        assert!(decompress(&c).is_err());
    }

    #[test]
    fn container_layout() {
        let m = LocationMap::new(3, 2, 1, vec![2, 2, 0, 2, 2, 2]).unwrap();
        let c = compress(&m);
        let bytes = c.to_bytes();
        assert_eq!(&bytes[..3], &[0x4C, 0x4D, 2]);
        assert_eq!(&bytes[3..7], &3u32.to_be_bytes());
        assert_eq!(&bytes[7..11], &2u32.to_be_bytes());
        assert_eq!(&bytes[11..15], &(c.bit_length as u32).to_be_bytes());
        assert_eq!(bytes.len(), 15 + c.bitstream.len());
        let (back, used) = CompressedMap::from_bytes(&bytes).unwrap();
        assert_eq!(used, bytes.len());
        assert_eq!(back, c);
        assert!(CompressedMap::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = 0;
        assert!(CompressedMap::from_bytes(&bad).is_err());
    }

    #[test]
    fn binary_baseline() {
        let img = GrayImage::new(2, 2, vec![0, 255, 128, 1]).unwrap();
        assert_eq!(binary_boundary_map(&img, 1), vec![1, 1, 0, 0]);
        let c = compress_binary_baseline(&img, 1);
        assert_eq!(c.alphabet_size, 2);
        assert_eq!(c.decode_symbols().unwrap(), vec![1, 1, 0, 0]);
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_map(&mut rng, 50, 50, 3);
        assert_eq!(compress(&m), compress(&m.clone()));
    }
}
