//! Length-counted packed bit sequences with provenance metadata.
//!
//! Packing order is fixed for the on-disk format: bit `i` of the stream is
//! bit `i mod 8` of byte `i / 8`, least-significant bit first. In memory
//! the bits live in little-endian u64 words, whose byte serialization is
//! exactly that layout. Bits beyond `len` are always zero, so equal
//! streams serialize to equal bytes.

use serde::{Deserialize, Serialize};

/// Where a bit stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Produced by the device simulator.
    Simulated,
    /// Loaded from a file of unknown provenance.
    File,
    /// Output of an unbiasing extractor.
    Extracted,
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Origin::Simulated => "simulated",
            Origin::File => "file",
            Origin::Extracted => "extracted",
        };
        f.write_str(s)
    }
}

/// Provenance record carried by every stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamMeta {
    pub origin: Origin,
    /// Exact fraction of 1 bits, `ones / length`, when the stream is
    /// non-empty and the fraction has been computed.
    pub one_fraction: Option<f64>,
}

/// Packed bit sequence with explicit length and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct BitStream {
    words: Vec<u64>,
    len: u64,
    meta: StreamMeta,
}

impl BitStream {
    /// Empty stream.
    pub fn new(origin: Origin) -> Self {
        BitStream {
            words: Vec::new(),
            len: 0,
            meta: StreamMeta {
                origin,
                one_fraction: None,
            },
        }
    }

    /// Empty stream with room for `bits` pushed bits.
    pub fn with_capacity(origin: Origin, bits: u64) -> Self {
        BitStream {
            words: Vec::with_capacity((bits as usize).div_ceil(64)),
            len: 0,
            meta: StreamMeta {
                origin,
                one_fraction: None,
            },
        }
    }

    /// Build from boolean values.
    pub fn from_bits<I: IntoIterator<Item = bool>>(origin: Origin, bits: I) -> Self {
        let mut s = BitStream::new(origin);
        for b in bits {
            s.push(b);
        }
        s.finalize_meta();
        s
    }

    /// Build from an ASCII string of '0'/'1' characters (test convenience).
    pub fn from_ascii(origin: Origin, text: &str) -> crate::Result<Self> {
        let mut s = BitStream::new(origin);
        for (i, c) in text.chars().enumerate() {
            match c {
                '0' => s.push(false),
                '1' => s.push(true),
                _ => {
                    return Err(crate::Error::Format(format!(
                        "bit text contains non-binary character {c:?} at position {i}"
                    )))
                }
            }
        }
        s.finalize_meta();
        Ok(s)
    }

    /// Reconstruct from packed bytes plus an explicit bit length.
    ///
    /// Rejects byte buffers of the wrong size and nonzero padding bits past
    /// `len_bits`, so any byte-level corruption is caught on load.
    pub fn from_bytes(origin: Origin, bytes: &[u8], len_bits: u64) -> crate::Result<Self> {
        let expect = (len_bits as usize).div_ceil(8);
        if bytes.len() != expect {
            return Err(crate::Error::Format(format!(
                "bit file holds {} bytes but metadata declares {} bits ({} bytes)",
                bytes.len(),
                len_bits,
                expect
            )));
        }
        let mut words = vec![0u64; (len_bits as usize).div_ceil(64)];
        for (i, &b) in bytes.iter().enumerate() {
            words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        let tail = (len_bits % 64) as u32;
        if tail != 0 {
            let last = *words.last().unwrap();
            if last >> tail != 0 {
                return Err(crate::Error::Format(
                    "bit file has nonzero padding past the declared length".into(),
                ));
            }
        }
        let mut s = BitStream {
            words,
            len: len_bits,
            meta: StreamMeta {
                origin,
                one_fraction: None,
            },
        };
        s.finalize_meta();
        Ok(s)
    }

    /// Append one bit.
    #[inline]
    pub fn push(&mut self, bit: bool) {
        let word = (self.len / 64) as usize;
        if word == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[word] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
        self.meta.one_fraction = None;
    }

    /// Number of valid bits.
    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at index `i`. Panics if `i >= len`.
    #[inline]
    pub fn get(&self, i: u64) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    /// Count of 1 bits.
    pub fn ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Backing words; bits past `len()` are zero.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Provenance record.
    pub fn meta(&self) -> &StreamMeta {
        &self.meta
    }

    /// Recompute and store the exact one-fraction (when non-empty).
    pub fn finalize_meta(&mut self) {
        self.meta.one_fraction = if self.len == 0 {
            None
        } else {
            Some(self.ones() as f64 / self.len as f64)
        };
    }

    /// Replace the provenance origin.
    pub fn set_origin(&mut self, origin: Origin) {
        self.meta.origin = origin;
    }

    /// Iterate over all bits.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Serialize to the packed byte layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n_bytes = (self.len as usize).div_ceil(8);
        let mut out = Vec::with_capacity(n_bytes);
        for i in 0..n_bytes {
            out.push((self.words[i / 8] >> (8 * (i % 8))) as u8);
        }
        out
    }

    /// Render as an ASCII string of '0'/'1' characters.
    pub fn to_ascii(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

/// Fraction of 1 bits in a stream.
pub fn bit_fraction(stream: &BitStream) -> crate::Result<f64> {
    if stream.is_empty() {
        return Err(crate::Error::EmptyInput(
            "bit_fraction needs at least one bit".into(),
        ));
    }
    Ok(stream.ones() as f64 / stream.len() as f64)
}
