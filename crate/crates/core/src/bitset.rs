//! Fixed-length bit vectors with word-level window extraction.
//!
//! Event evaluation builds one bitmap per atom by reading a shifted window of
//! a word's occurrence bitmap, so `window` is the hot path.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn zeros(len: usize) -> Self {
        Bitset {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut set = Bitset {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        set.clear_tail();
        set
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] |= 1 << (i & 63);
    }

    /// 64 bits starting at bit `start`; bits past the end read as zero.
    #[inline]
    fn word_at(&self, start: usize) -> u64 {
        let idx = start >> 6;
        let shift = start & 63;
        let lo = self.words.get(idx).copied().unwrap_or(0);
        if shift == 0 {
            lo
        } else {
            let hi = self.words.get(idx + 1).copied().unwrap_or(0);
            (lo >> shift) | (hi << (64 - shift))
        }
    }

    /// Copy of bits `[start, start + len)`. The range must lie inside the set.
    pub fn window(&self, start: usize, len: usize) -> Bitset {
        assert!(
            start + len <= self.len,
            "window {}..{} outside bitset of length {}",
            start,
            start + len,
            self.len
        );
        let mut out = Bitset::zeros(len);
        for (i, w) in out.words.iter_mut().enumerate() {
            *w = self.word_at(start + 64 * i);
        }
        out.clear_tail();
        out
    }

    pub fn and_assign(&mut self, other: &Bitset) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn or_assign(&mut self, other: &Bitset) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn negate(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.clear_tail();
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(64 * i + bit)
            })
        })
    }

    fn clear_tail(&mut self) {
        let rem = self.len & 63;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl FromIterator<bool> for Bitset {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let bits: Vec<bool> = iter.into_iter().collect();
        let mut set = Bitset::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                set.set(i);
            }
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ones_respects_length() {
        let s = Bitset::ones(70);
        assert_eq!(s.count_ones(), 70);
        let mut n = s.clone();
        n.negate();
        assert_eq!(n.count_ones(), 0);
    }

    #[test]
    fn iter_ones_lists_set_bits() {
        let s: Bitset = [true, false, false, true]
            .into_iter()
            .chain((0..100).map(|i| i == 97))
            .collect();
        assert_eq!(s.iter_ones().collect::<Vec<_>>(), vec![0, 3, 101]);
    }

    proptest! {
        #[test]
        fn window_matches_bitwise_copy(bits in proptest::collection::vec(any::<bool>(), 1..400), a in 0usize..400, l in 0usize..400) {
            let set: Bitset = bits.iter().copied().collect();
            let start = a % bits.len();
            let len = l % (bits.len() - start + 1);
            let w = set.window(start, len);
            prop_assert_eq!(w.len(), len);
            for i in 0..len {
                prop_assert_eq!(w.get(i), bits[start + i]);
            }
            let expected = bits[start..start + len].iter().filter(|b| **b).count() as u64;
            prop_assert_eq!(w.count_ones(), expected);
        }
    }
}
