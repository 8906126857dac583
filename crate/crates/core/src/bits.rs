//! Fixed-width bit strings.
//!
//! Bits are stored MSB-first and left-aligned in `ceil(len / 8)` bytes; any
//! unused trailing bits of the last byte are always zero. This is the byte
//! encoding fed to hash functions and written (as hex) to trace files, so
//! "the leading m bits" of a digest is simply `BitString::from_bytes(d, m)`.

use std::fmt;

use rand::Rng;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    bytes: Vec<u8>,
}

fn byte_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

impl BitString {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self { len, bytes: vec![0; byte_len(len)] }
    }

    /// The leading `len` bits of `bytes`. Missing bytes are zero-filled.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        let mut out = Self::zeros(len);
        let n = out.bytes.len().min(bytes.len());
        out.bytes[..n].copy_from_slice(&bytes[..n]);
        out.clear_tail();
        out
    }

    /// The low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits, got {len}");
        let mut out = Self::zeros(len);
        for i in 0..len {
            if (value >> (len - 1 - i)) & 1 == 1 {
                out.set(i, true);
            }
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut out = Self::zeros(len);
        rng.fill_bytes(&mut out.bytes);
        out.clear_tail();
        out
    }

    /// Parse a hex string holding the left-aligned encoding of `len` bits.
    pub fn from_hex(hex_str: &str, len: usize) -> Result<Self, hex::FromHexError> {
        let bytes = hex::decode(hex_str)?;
        if bytes.len() != byte_len(len) {
            return Err(hex::FromHexError::InvalidStringLength);
        }
        let out = Self::from_bytes(&bytes, len);
        if out.bytes != bytes {
            // Non-zero padding bits.
            return Err(hex::FromHexError::InvalidStringLength);
        }
        Ok(out)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u8 << (7 - i % 8);
        if bit {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    /// Interpret the string as a big-endian unsigned integer.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits, got {}", self.len);
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | u64::from(self.get(i)))
    }

    pub fn count_ones(&self) -> u32 {
        self.bytes.iter().map(|b| b.count_ones()).sum()
    }

    pub fn hamming_distance(&self, other: &Self) -> u32 {
        assert_eq!(self.len, other.len, "hamming distance of unequal lengths");
        self.bytes.iter().zip(&other.bytes).map(|(a, b)| (a ^ b).count_ones()).sum()
    }

    /// The first `len` bits.
    pub fn prefix(&self, len: usize) -> Self {
        assert!(len <= self.len, "prefix of {len} bits from {} bits", self.len);
        Self::from_bytes(&self.bytes, len)
    }

    /// The bits in `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len, "bad slice {start}..{end} of {}", self.len);
        if start.is_multiple_of(8) {
            return Self::from_bytes(&self.bytes[start / 8..], end - start);
        }
        let mut out = Self::zeros(end - start);
        for i in start..end {
            if self.get(i) {
                out.set(i - start, true);
            }
        }
        out
    }

    /// Split into the leading `at` bits and the rest.
    pub fn split_at(&self, at: usize) -> (Self, Self) {
        (self.prefix(at), self.slice(at, self.len))
    }

    pub fn concat(&self, other: &Self) -> Self {
        if self.len.is_multiple_of(8) {
            let mut bytes = self.bytes.clone();
            bytes.extend_from_slice(&other.bytes);
            return Self { len: self.len + other.len, bytes };
        }
        let mut out = Self::zeros(self.len + other.len);
        out.bytes[..self.bytes.len()].copy_from_slice(&self.bytes);
        for i in 0..other.len {
            if other.get(i) {
                out.set(self.len + i, true);
            }
        }
        out
    }

    /// Left-pad with zeros to `len` bits (the value moves to the low end).
    pub fn left_pad(&self, len: usize) -> Self {
        assert!(len >= self.len, "cannot pad {} bits down to {len}", self.len);
        Self::zeros(len - self.len).concat(self)
    }

    fn clear_tail(&mut self) {
        let used = self.len % 8;
        if used != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - used);
            }
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}:{})", self.len, self.to_hex())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}
