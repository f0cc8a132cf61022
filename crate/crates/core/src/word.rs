//! Finite 0-1 words, the elements of the free two-generator semigroup.
//!
//! Symbols are stored packed, 64 per limb, so that enumerating all words of
//! a given length is plain integer counting and words of a million symbols
//! (driving paths) stay compact.

use std::fmt;
use std::str::FromStr;

/// A finite 0-1 sequence `(w_0, w_1, ..., w_{n-1})`. The empty word is the
/// semigroup identity; concatenation is the semigroup operation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: usize,
    limbs: Vec<u64>,
}

impl Word {
    pub fn empty() -> Self {
        Word {
            len: 0,
            limbs: Vec::new(),
        }
    }

    pub fn from_symbols(symbols: &[u8]) -> Self {
        let mut w = Word::empty();
        for &s in symbols {
            w.push(s);
        }
        w
    }

    /// The word of length `len` whose symbol `w_i` is bit `i` of `index`.
    /// Counting `index` from 0 to `2^len - 1` enumerates all of `Sigma_len`.
    pub fn from_index(len: u32, index: u64) -> Self {
        assert!(len <= 64, "from_index supports lengths up to 64");
        let mut w = Word::empty();
        for i in 0..len {
            w.push(((index >> i) & 1) as u8);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, symbol: u8) {
        debug_assert!(symbol <= 1);
        let bit = self.len % 64;
        if bit == 0 {
            self.limbs.push(0);
        }
        if symbol == 1 {
            *self.limbs.last_mut().unwrap() |= 1u64 << bit;
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> u8 {
        assert!(i < self.len);
        ((self.limbs[i / 64] >> (i % 64)) & 1) as u8
    }

    pub fn symbols(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Number of 1-symbols (the `m` of the derivative formula `a^{n-m} b^m`).
    pub fn count_ones(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for s in other.symbols() {
            w.push(s);
        }
        w
    }

    pub fn reversed(&self) -> Word {
        let mut w = Word::empty();
        for i in (0..self.len).rev() {
            w.push(self.get(i));
        }
        w
    }

    /// Length-lexicographic rank across all of `G`: the empty word is 0,
    /// then "0", "1", "00", "01", "10", "11", "000", ...
    pub fn enumerate(rank: u64) -> Word {
        // Lengths 0..L hold 2^{L+1}-1 words in total.
        let mut len = 0u32;
        let mut first_of_len = 0u64;
        while rank - first_of_len >= 1u64 << len {
            first_of_len += 1u64 << len;
            len += 1;
        }
        let within = rank - first_of_len;
        // Lexicographic order within a length reads symbols left to right,
        // so w_0 is the most significant digit of `within`.
        let mut w = Word::empty();
        for i in (0..len).rev() {
            w.push(((within >> i) & 1) as u8);
        }
        w
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.symbols() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Serde helper: render a word as its 0/1 string.
pub fn serialize_word<S: serde::Serializer>(w: &Word, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(w)
}

impl FromStr for Word {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut w = Word::empty();
        for c in s.chars() {
            match c {
                '0' => w.push(0),
                '1' => w.push(1),
                _ => return Err(format!("invalid word symbol {c:?}")),
            }
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_get_roundtrip_across_limbs() {
        let symbols: Vec<u8> = (0..200).map(|i| ((i * 7) % 3 == 0) as u8).collect();
        let w = Word::from_symbols(&symbols);
        assert_eq!(w.len(), 200);
        for (i, &s) in symbols.iter().enumerate() {
            assert_eq!(w.get(i), s);
        }
        assert_eq!(w.count_ones(), symbols.iter().filter(|&&s| s == 1).count());
    }

    #[test]
    fn concat_is_associative_with_empty_identity() {
        let u: Word = "101".parse().unwrap();
        let v: Word = "0110".parse().unwrap();
        let w: Word = "11".parse().unwrap();
        assert_eq!(u.concat(&v).concat(&w), u.concat(&v.concat(&w)));
        assert_eq!(Word::empty().concat(&u), u);
        assert_eq!(u.concat(&Word::empty()), u);
    }

    #[test]
    fn from_index_counts_sigma_n() {
        let words: Vec<Word> = (0..8).map(|i| Word::from_index(3, i)).collect();
        let mut unique = words.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), 8);
        assert_eq!(Word::from_index(3, 1).to_string(), "100");
    }

    #[test]
    fn enumerate_is_length_lexicographic() {
        let expect = ["", "0", "1", "00", "01", "10", "11", "000", "001"];
        for (rank, s) in expect.iter().enumerate() {
            assert_eq!(Word::enumerate(rank as u64).to_string(), *s);
        }
    }

    #[test]
    fn reversed() {
        let w: Word = "10001".parse().unwrap();
        assert_eq!(w.reversed().to_string(), "10001");
        let w: Word = "1100".parse().unwrap();
        assert_eq!(w.reversed().to_string(), "0011");
    }
}
