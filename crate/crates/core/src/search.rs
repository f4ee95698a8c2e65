//! Knuth-Morris-Pratt matching over symbol slices, linear or cyclic.

/// Precomputed failure function for one pattern.
#[derive(Debug, Clone)]
pub struct Matcher<'p> {
    pattern: &'p [u8],
    fail: Vec<usize>,
}

impl<'p> Matcher<'p> {
    pub fn new(pattern: &'p [u8]) -> Self {
        assert!(!pattern.is_empty(), "empty pattern");
        let mut fail = vec![0usize; pattern.len()];
        let mut k = 0;
        for i in 1..pattern.len() {
            while k > 0 && pattern[i] != pattern[k] {
                k = fail[k - 1];
            }
            if pattern[i] == pattern[k] {
                k += 1;
            }
            fail[i] = k;
        }
        Matcher { pattern, fail }
    }

    pub fn pattern_len(&self) -> usize {
        self.pattern.len()
    }

    /// Feeds `stream` through the automaton, calling `hit(end)` with the index one
    /// past the end of every (possibly overlapping) match.
    fn run(&self, stream: impl Iterator<Item = u8>, mut hit: impl FnMut(usize)) {
        let m = self.pattern.len();
        let mut k = 0;
        for (i, c) in stream.enumerate() {
            while k > 0 && (k == m || self.pattern[k] != c) {
                k = self.fail[k - 1];
            }
            if self.pattern[k] == c {
                k += 1;
            }
            if k == m {
                hit(i + 1);
            }
        }
    }

    /// Start positions of all matches in `text`.
    pub fn find_all(&self, text: &[u8]) -> Vec<usize> {
        let mut out = Vec::new();
        let m = self.pattern.len();
        self.run(text.iter().copied(), |end| out.push(end - m));
        out
    }

    /// Start positions in `[0, text.len())` of matches in the bi-infinite
    /// periodic sequence `text^Z`, reading indices mod `text.len()`.
    pub fn find_all_cyclic(&self, text: &[u8]) -> Vec<usize> {
        let n = text.len();
        let m = self.pattern.len();
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let stream = (0..n + m - 1).map(|i| text[i % n]);
        self.run(stream, |end| out.push(end - m));
        out
    }

    /// Bitmap over start positions `0..=text.len()-m` marking matches in `text`.
    pub fn occurrence_bitmap(&self, text: &[u8]) -> crate::bitset::Bitset {
        let m = self.pattern.len();
        let mut set = crate::bitset::Bitset::zeros((text.len() + 1).saturating_sub(m));
        self.run(text.iter().copied(), |end| set.set(end - m));
        set
    }
}

/// Leftmost-greedy non-overlapping matches, as produced by a scan that resumes
/// after the end of each match.
pub fn non_overlapping(starts: &[usize], pattern_len: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut next_free = 0;
    for &s in starts {
        if s >= next_free {
            out.push(s);
            next_free = s + pattern_len;
        }
    }
    out
}
