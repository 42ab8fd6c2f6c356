//! Fixed-length bit strings.
//!
//! Positions are 0-based in the API (`get(0)` is the leftmost bit, written
//! first in the text form). Bits are packed little-endian into `u64` words so
//! the leading-ones run is a `trailing_ones` scan.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut x = Self::zeros(len);
        for w in x.words.iter_mut() {
            *w = !0;
        }
        x.clear_padding();
        x
    }

    /// Uniform draw from `{0,1}^len`.
    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut x = Self::zeros(len);
        for w in x.words.iter_mut() {
            *w = rng.next_u64();
        }
        x.clear_padding();
        x
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut x = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            x.set(i, b);
        }
        x
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Length of the run of ones starting at position `start`.
    pub fn ones_run_from(&self, start: usize) -> usize {
        if start >= self.len {
            return 0;
        }
        let mut pos = start;
        let mut word = start / WORD;
        let mut w = self.words[word] >> (start % WORD);
        let mut avail = WORD - start % WORD;
        loop {
            let run = (w.trailing_ones() as usize).min(avail);
            pos += run;
            if run < avail || pos >= self.len {
                return pos.min(self.len) - start;
            }
            word += 1;
            if word == self.words.len() {
                return self.len - start;
            }
            w = self.words[word];
            avail = WORD;
        }
    }

    /// LeadingOnes value: the length of the maximal all-ones prefix.
    pub fn leading_ones(&self) -> usize {
        self.ones_run_from(0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    pub fn is_all_ones(&self) -> bool {
        self.leading_ones() == self.len
    }

    pub fn hamming_distance(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len, "hamming distance of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> BitString {
        let mut x = self.clone();
        for w in x.words.iter_mut() {
            *w = !*w;
        }
        x.clear_padding();
        x
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Interprets positions `start..len` as a binary number, leftmost bit most
    /// significant. Used to index suffix frequency tables.
    pub fn suffix_index(&self, start: usize) -> usize {
        assert!(self.len - start.min(self.len) <= usize::BITS as usize);
        (start..self.len).fold(0usize, |acc, i| (acc << 1) | self.get(i) as usize)
    }

    /// Bit string whose first `len` positions encode `index` as produced by
    /// [`BitString::suffix_index`] with `start = 0`.
    pub fn from_index(index: usize, len: usize) -> Self {
        let mut x = Self::zeros(len);
        for i in 0..len {
            x.set(i, (index >> (len - 1 - i)) & 1 == 1);
        }
        x
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::ParseBitString(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::ParseBitString(s.to_string()));
        }
        Ok(BitString::from_bits(&bits))
    }
}
