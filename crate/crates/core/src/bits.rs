use std::fmt;

/// An ordered sequence of bits; byte conversions are MSB-first.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitStream {
    bits: Vec<bool>,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        BitStream { bits: Vec::with_capacity(n) }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitStream { bits }
    }

    /// All `8 * bytes.len()` bits.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self::from_bytes_prefix(bytes, bytes.len() * 8)
    }

    /// The first `bit_len` bits of `bytes`.
    pub fn from_bytes_prefix(bytes: &[u8], bit_len: usize) -> Self {
        assert!(bit_len <= bytes.len() * 8);
        let bits = (0..bit_len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1 == 1).collect();
        BitStream { bits }
    }

    /// Packs into bytes, zero-padding the final byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            out[i / 8] |= 0x80 >> (i % 8);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_uint(&mut self, value: u64, width: u32) {
        for i in (0..width).rev() {
            self.bits.push((value >> i) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &BitStream) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn truncate(&mut self, len: usize) {
        self.bits.truncate(len);
    }

    pub fn slice(&self, start: usize, end: usize) -> BitStream {
        BitStream { bits: self.bits[start..end].to_vec() }
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: &self.bits, pos: 0 }
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitStream[{}; ", self.bits.len())?;
        for &b in self.bits.iter().take(64) {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.bits.len() > 64 {
            f.write_str("...")?;
        }
        f.write_str("]")
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitStream { bits: iter.into_iter().collect() }
    }
}

/// Sequential reader over a [`BitStream`].
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl BitReader<'_> {
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    /// Reads `width` bits as an unsigned integer, MSB first.
    pub fn read_uint(&mut self, width: u32) -> Option<u64> {
        let n = width as usize;
        if self.remaining() < n {
            return None;
        }
        let v = self.bits[self.pos..self.pos + n].iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        self.pos += n;
        Some(v)
    }

    pub fn read_bits(&mut self, n: usize) -> Option<BitStream> {
        if self.remaining() < n {
            return None;
        }
        let out = BitStream { bits: self.bits[self.pos..self.pos + n].to_vec() };
        self.pos += n;
        Some(out)
    }
}
