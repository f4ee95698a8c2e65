//! The recursive block hierarchy.
//!
//! For parameters `1 <= a <= b-1`, `b >= 2`:
//!
//! ```text
//! B_0     = 0
//! B_{k+1} = (B_k)^(a*b^k) 1 (B_k)^((b-a)*b^k)
//! ```
//!
//! so `h_{k+1} = b^(k+1) h_k + 1`. The trailing factor repeats `B_k`, not `B_0`;
//! any other reading breaks the height recurrence.
//!
//! [`ShiftSystem`] memoizes heights and materialized blocks behind locks, so a
//! single system may be shared between threads.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;
use std::sync::{Arc, Mutex, RwLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::search::{self, Matcher};

/// Default cap on materialized block length, in symbols.
pub const DEFAULT_CAP: u64 = 1 << 26;

/// The pair `(a, b)` selecting one generalized del Junco-Rudolph map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemParams {
    a: u64,
    b: u64,
}

impl SystemParams {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidParams {
                a,
                b,
                reason: "b must be at least 2",
            });
        }
        if a < 1 {
            return Err(Error::InvalidParams {
                a,
                b,
                reason: "a must be at least 1",
            });
        }
        if a > b - 1 {
            return Err(Error::InvalidParams {
                a,
                b,
                reason: "a must be at most b - 1",
            });
        }
        Ok(SystemParams { a, b })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// Copies of `B_k` to the left of the level-(k+1) spacer.
    pub fn left_copies(&self, k: usize) -> BigUint {
        BigUint::from(self.a) * BigUint::from(self.b).pow(k as u32)
    }

    /// Copies of `B_k` to the right of the level-(k+1) spacer.
    pub fn right_copies(&self, k: usize) -> BigUint {
        BigUint::from(self.b - self.a) * BigUint::from(self.b).pow(k as u32)
    }
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a={}, b={})", self.a, self.b)
    }
}

/// `h_k`, computed from the recurrence without memoization.
pub fn height(params: SystemParams, k: usize) -> BigUint {
    let b = BigUint::from(params.b);
    let mut h = BigUint::one();
    let mut pow = BigUint::one();
    for _ in 0..k {
        pow *= &b;
        h = &pow * h + 1u32;
    }
    h
}

/// A nonempty finite word over `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() || symbols.iter().any(|&s| s > 1) {
            return Err(Error::InvalidWord(
                symbols.iter().map(|s| s.to_string()).collect(),
            ));
        }
        Ok(Word(symbols))
    }

    pub fn from_slice(symbols: &[u8]) -> Result<Self> {
        Word::new(symbols.to_vec())
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn spacer() -> Word {
        Word(vec![1])
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(Error::InvalidWord(s.to_string())),
            })
            .collect::<Result<Vec<u8>>>()?;
        Word::new(symbols)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_ascii(&self.0))
    }
}

pub fn to_ascii(symbols: &[u8]) -> String {
    symbols
        .iter()
        .map(|&s| if s == 0 { '0' } else { '1' })
        .collect()
}

#[derive(Debug, Clone)]
pub enum Storage {
    Materialized(Arc<[u8]>),
    Lazy,
}

/// Level `k` of the hierarchy together with `h_k`, optionally backed by symbols.
#[derive(Debug, Clone)]
pub struct BlockHandle {
    params: SystemParams,
    level: usize,
    height: BigUint,
    storage: Storage,
}

impl BlockHandle {
    pub fn params(&self) -> SystemParams {
        self.params
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn height(&self) -> &BigUint {
        &self.height
    }

    pub fn symbols(&self) -> Option<&[u8]> {
        match &self.storage {
            Storage::Materialized(s) => Some(s),
            Storage::Lazy => None,
        }
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.storage, Storage::Materialized(_))
    }

    pub fn as_word(&self) -> Result<Word> {
        let s = self.require_symbols()?;
        Ok(Word(s.to_vec()))
    }

    fn require_symbols(&self) -> Result<&[u8]> {
        self.symbols()
            .ok_or(Error::NotMaterialized { level: self.level })
    }

    /// Writes the block as one line of ASCII `0`/`1`.
    pub fn write_ascii<W: Write>(&self, mut out: W) -> Result<()> {
        let s = self.require_symbols()?;
        let text: Vec<u8> = s.iter().map(|&c| b'0' + c).collect();
        out.write_all(&text)
            .and_then(|_| out.write_all(b"\n"))
            .map_err(io_error)?;
        Ok(())
    }
}

fn io_error(e: io::Error) -> Error {
    Error::InvalidWord(format!("i/o error: {e}"))
}

/// Reads a block written by [`BlockHandle::write_ascii`].
pub fn read_ascii<R: BufRead>(mut input: R) -> Result<Word> {
    let mut line = String::new();
    input.read_line(&mut line).map_err(io_error)?;
    line.trim_end_matches(['\n', '\r']).parse()
}

/// Outcome of [`ShiftSystem::check_neighbor_copies`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborCopies {
    pub occurrences: u64,
    pub violations: u64,
    /// First violating position, when `B_M` was scanned directly.
    pub counterexample: Option<usize>,
}

impl NeighborCopies {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Membership verdict for a word, with the level it was decided at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordValidity {
    pub valid: bool,
    pub level: usize,
}

/// Memoizing view of one parameter pair.
#[derive(Debug)]
pub struct ShiftSystem {
    params: SystemParams,
    cap: u64,
    heights: RwLock<Vec<BigUint>>,
    blocks: Mutex<HashMap<usize, Arc<[u8]>>>,
}

impl ShiftSystem {
    pub fn new(params: SystemParams) -> Self {
        Self::with_cap(params, DEFAULT_CAP)
    }

    pub fn with_cap(params: SystemParams, cap: u64) -> Self {
        ShiftSystem {
            params,
            cap,
            heights: RwLock::new(vec![BigUint::one()]),
            blocks: Mutex::new(HashMap::new()),
        }
    }

    pub fn params(&self) -> SystemParams {
        self.params
    }

    pub fn a(&self) -> u64 {
        self.params.a
    }

    pub fn b(&self) -> u64 {
        self.params.b
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn height(&self, k: usize) -> BigUint {
        if let Some(h) = self.heights.read().unwrap().get(k) {
            return h.clone();
        }
        let mut table = self.heights.write().unwrap();
        let b = BigUint::from(self.params.b);
        while table.len() <= k {
            let j = table.len();
            let next = b.pow(j as u32) * &table[j - 1] + 1u32;
            table.push(next);
        }
        table[k].clone()
    }

    pub fn height_u64(&self, k: usize) -> Option<u64> {
        self.height(k).to_u64()
    }

    /// Smallest level whose height is at least `len`.
    pub fn level_covering(&self, len: u64) -> usize {
        let len = BigUint::from(len);
        (0..).find(|&k| self.height(k) >= len).unwrap()
    }

    pub fn is_materializable(&self, k: usize) -> bool {
        self.height_u64(k).is_some_and(|h| h <= self.cap)
    }

    pub fn max_materializable_level(&self) -> Option<usize> {
        (0..).take_while(|&k| self.is_materializable(k)).last()
    }

    /// The symbols of `B_k`, built bottom-up from the cache.
    pub fn symbols(&self, k: usize) -> Result<Arc<[u8]>> {
        if !self.is_materializable(k) {
            return Err(Error::CapExceeded {
                level: k,
                height: self.height(k),
                cap: self.cap,
            });
        }
        let mut cache = self.blocks.lock().unwrap();
        if let Some(s) = cache.get(&k) {
            return Ok(s.clone());
        }
        let start = (0..k).rev().find(|j| cache.contains_key(j));
        let (mut level, mut current): (usize, Arc<[u8]>) = match start {
            Some(j) => (j, cache[&j].clone()),
            None => {
                let b0: Arc<[u8]> = Arc::from(vec![0u8]);
                cache.insert(0, b0.clone());
                (0, b0)
            }
        };
        while level < k {
            let left = self.params.left_copies(level).to_usize().unwrap();
            let right = self.params.right_copies(level).to_usize().unwrap();
            let mut next = Vec::with_capacity((left + right) * current.len() + 1);
            for _ in 0..left {
                next.extend_from_slice(&current);
            }
            next.push(1);
            for _ in 0..right {
                next.extend_from_slice(&current);
            }
            level += 1;
            current = Arc::from(next);
            cache.insert(level, current.clone());
        }
        Ok(current)
    }

    pub fn materialize(&self, k: usize) -> Result<BlockHandle> {
        let symbols = self.symbols(k)?;
        Ok(BlockHandle {
            params: self.params,
            level: k,
            height: self.height(k),
            storage: Storage::Materialized(symbols),
        })
    }

    pub fn lazy(&self, k: usize) -> BlockHandle {
        BlockHandle {
            params: self.params,
            level: k,
            height: self.height(k),
            storage: Storage::Lazy,
        }
    }

    /// Symbol of `B_k` at `pos` by descending the recursion, never materializing.
    pub fn symbol_at(&self, k: usize, pos: &BigUint) -> Result<u8> {
        let h = self.height(k);
        if *pos >= h {
            return Err(Error::PositionOutOfRange {
                level: k,
                pos: pos.clone(),
                height: h,
            });
        }
        let mut pos = pos.clone();
        for level in (1..=k).rev() {
            let below = self.height(level - 1);
            let spacer = self.params.left_copies(level - 1) * &below;
            match pos.cmp(&spacer) {
                std::cmp::Ordering::Less => pos = pos.mod_floor(&below),
                std::cmp::Ordering::Equal => return Ok(1),
                std::cmp::Ordering::Greater => pos = (pos - spacer - 1u32).mod_floor(&below),
            }
        }
        debug_assert!(pos.is_zero());
        Ok(0)
    }

    /// Number of spacers in `B_k`: `ones_0 = 0`, `ones_{k+1} = b^(k+1) ones_k + 1`.
    pub fn ones(&self, k: usize) -> BigUint {
        let b = BigUint::from(self.params.b);
        (1..=k).fold(BigUint::zero(), |acc, j| b.pow(j as u32) * acc + 1u32)
    }

    /// Smallest level `K` with `h_K >= |w|`; membership is decided in `B_{K+2}`.
    pub fn word_validity(&self, w: &Word) -> Result<WordValidity> {
        let level = self.level_covering(w.len() as u64) + 2;
        let block = self.symbols(level)?;
        let valid = !Matcher::new(w.symbols()).find_all(&block).is_empty();
        Ok(WordValidity { valid, level })
    }

    pub fn is_valid_word(&self, w: &Word) -> Result<bool> {
        Ok(self.word_validity(w)?.valid)
    }

    /// Self-check behind [`Self::is_valid_word`]: the length-`len` factor sets of
    /// `B_{K+2}` and `B_{K+3}` coincide.
    pub fn factor_sets_stabilize(&self, len: usize) -> Result<bool> {
        let k = self.level_covering(len as u64) + 2;
        let lower = factor_set(&self.symbols(k)?, len);
        let upper = factor_set(&self.symbols(k + 1)?, len);
        Ok(lower == upper)
    }

    /// Neighbor-copy property: around every periodic occurrence of
    /// `B_k 1 B_k` in `B_M^Z`, the `h_k` symbols on either side read `B_k`.
    /// Blocks above the cap are handled by lifted window counts.
    pub fn check_neighbor_copies(&self, k: usize, m: usize) -> Result<NeighborCopies> {
        if k < 2 {
            return Err(Error::LevelOutOfRange {
                level: k,
                reason: "neighbor copies need k >= 2",
            });
        }
        if m < k + 2 {
            return Err(Error::ScanTooShallow { m, min: k + 2 });
        }
        if !self.is_materializable(m) {
            return crate::measure::neighbor_copies_lifted(self, k, m);
        }
        let bk = self.symbols(k)?;
        let bm = self.symbols(m)?;
        let h = bk.len();
        let n = bm.len();
        let mut pattern = bk.to_vec();
        pattern.push(1);
        pattern.extend_from_slice(&bk);
        let hits = Matcher::new(&pattern).find_all_cyclic(&bm);
        let reads_block = |start: usize| (0..h).all(|j| bm[(start + j) % n] == bk[j]);
        let bad: Vec<usize> = hits
            .iter()
            .copied()
            .filter(|&p| !(reads_block((p + n - h % n) % n) && reads_block((p + 2 * h + 1) % n)))
            .collect();
        Ok(NeighborCopies {
            occurrences: hits.len() as u64,
            violations: bad.len() as u64,
            counterexample: bad.first().copied(),
        })
    }
}

fn factor_set(text: &[u8], len: usize) -> HashSet<Vec<u8>> {
    if len > text.len() {
        return HashSet::new();
    }
    if len <= 63 {
        // Pack each window into a u64 with a leading marker bit.
        let mask = (1u64 << len) - 1;
        let mut acc = 0u64;
        let mut packed = HashSet::new();
        for (i, &s) in text.iter().enumerate() {
            acc = ((acc << 1) | u64::from(s)) & mask;
            if i + 1 >= len {
                packed.insert(acc);
            }
        }
        packed
            .into_iter()
            .map(|w| (0..len).rev().map(|j| ((w >> j) & 1) as u8).collect())
            .collect()
    } else {
        text.windows(len).map(<[u8]>::to_vec).collect()
    }
}

/// All start positions of `needle` in `haystack`; with `periodic`, positions in
/// `[0, h)` of matches in `haystack^Z`.
pub fn occurrences(haystack: &BlockHandle, needle: &Word, periodic: bool) -> Result<Vec<usize>> {
    let text = haystack.require_symbols()?;
    if needle.len() > text.len() {
        return Err(Error::NeedleTooLong {
            needle: needle.len(),
            level: haystack.level,
            height: text.len() as u64,
        });
    }
    let m = Matcher::new(needle.symbols());
    Ok(if periodic {
        m.find_all_cyclic(text)
    } else {
        m.find_all(text)
    })
}

/// Leftmost-greedy non-overlapping occurrences in the (non-periodic) block.
pub fn disjoint_occurrences(haystack: &BlockHandle, needle: &Word) -> Result<Vec<usize>> {
    Ok(search::non_overlapping(
        &occurrences(haystack, needle, false)?,
        needle.len(),
    ))
}

/// Minimum and maximum distance between cyclically consecutive occurrences in
/// `haystack^Z`. A single occurrence per period gives gap `h`.
pub fn occurrence_gaps(haystack: &BlockHandle, needle: &Word) -> Result<(u64, u64)> {
    let hits = occurrences(haystack, needle, true)?;
    let n = haystack.require_symbols()?.len() as u64;
    let (first, last) = match (hits.first(), hits.last()) {
        (Some(&f), Some(&l)) => (f as u64, l as u64),
        _ => {
            return Err(Error::NoOccurrences {
                level: haystack.level,
            })
        }
    };
    let wrap = first + n - last;
    let (lo, hi) = hits
        .windows(2)
        .map(|w| (w[1] - w[0]) as u64)
        .fold((wrap, wrap), |(lo, hi), g| (lo.min(g), hi.max(g)));
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(a: u64, b: u64) -> ShiftSystem {
        ShiftSystem::new(SystemParams::new(a, b).unwrap())
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn params_constraints() {
        assert!(SystemParams::new(1, 2).is_ok());
        assert!(SystemParams::new(2, 3).is_ok());
        for (a, b) in [(2, 2), (0, 3), (1, 1), (3, 3), (1, 0)] {
            assert!(
                matches!(SystemParams::new(a, b), Err(Error::InvalidParams { .. })),
                "({a},{b})"
            );
        }
    }

    #[test]
    fn heights_small() {
        let s = sys(1, 2);
        assert_eq!(s.height(0), BigUint::from(1u32));
        assert_eq!(s.height(1), BigUint::from(3u32));
        assert_eq!(s.height(4), BigUint::from(1681u32));
        assert_eq!(height(s.params(), 4), BigUint::from(1681u32));
        assert_eq!(sys(2, 3).height(3), BigUint::from(1000u32));
    }

    #[test]
    fn materialized_blocks() {
        let s = sys(1, 2);
        assert_eq!(s.materialize(1).unwrap().as_word().unwrap(), w("010"));
        assert_eq!(
            s.materialize(2).unwrap().as_word().unwrap(),
            w("0100101010010")
        );
        assert_eq!(
            sys(2, 3).materialize(1).unwrap().as_word().unwrap(),
            w("0010")
        );
    }

    #[test]
    fn cap_is_enforced() {
        let s = ShiftSystem::with_cap(SystemParams::new(1, 2).unwrap(), 100);
        assert!(s.materialize(3).is_err());
        match s.materialize(4) {
            Err(Error::CapExceeded { level, height, cap }) => {
                assert_eq!((level, cap), (4, 100));
                assert_eq!(height, BigUint::from(1681u32));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(s.max_materializable_level(), Some(2));
    }

    #[test]
    fn lazy_symbols() {
        let s = sys(1, 2);
        assert_eq!(s.symbol_at(2, &BigUint::from(6u32)).unwrap(), 1);
        assert_eq!(s.symbol_at(2, &BigUint::from(0u32)).unwrap(), 0);
        let last = s.height(10) - 1u32;
        assert_eq!(s.symbol_at(10, &last).unwrap(), 0);
        assert!(matches!(
            s.symbol_at(2, &BigUint::from(13u32)),
            Err(Error::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn occurrence_lists() {
        let s = sys(1, 2);
        let b1 = s.materialize(1).unwrap();
        let b2 = s.materialize(2).unwrap();
        assert_eq!(occurrences(&b1, &w("0"), false).unwrap(), vec![0, 2]);
        assert_eq!(
            occurrences(&b2, &b2.as_word().unwrap(), false).unwrap(),
            vec![0]
        );
        // The centered copy at 5 sits inside B_1 1 B_1 = 010 1 010.
        assert_eq!(
            occurrences(&b2, &w("010"), false).unwrap(),
            vec![0, 3, 5, 7, 10]
        );
        assert_eq!(
            disjoint_occurrences(&b2, &w("010")).unwrap(),
            vec![0, 3, 7, 10]
        );
        let lazy = s.lazy(2);
        assert!(matches!(
            occurrences(&lazy, &w("0"), false),
            Err(Error::NotMaterialized { level: 2 })
        ));
    }

    #[test]
    fn gaps() {
        let s = sys(1, 2);
        let b1 = s.materialize(1).unwrap();
        assert_eq!(occurrence_gaps(&b1, &w("0")).unwrap(), (1, 2));
        let b2 = s.materialize(2).unwrap();
        assert_eq!(
            occurrence_gaps(&b2, &b2.as_word().unwrap()).unwrap(),
            (13, 13)
        );
        let b3 = s.materialize(3).unwrap();
        let (lo, hi) = occurrence_gaps(&b3, &w("0101010")).unwrap();
        assert!(hi <= 13 && lo >= 7, "{lo} {hi}");
        assert!(matches!(
            occurrence_gaps(&b1, &w("11")),
            Err(Error::NoOccurrences { .. })
        ));
    }

    #[test]
    fn validity() {
        let s = sys(1, 2);
        assert!(!s.is_valid_word(&w("11")).unwrap());
        assert!(s.is_valid_word(&w("0")).unwrap());
        let b2 = s.materialize(2).unwrap().as_word().unwrap();
        assert!(s.is_valid_word(&b2.concat(&Word::spacer())).unwrap());
        assert!(s.factor_sets_stabilize(14).unwrap());
        let tiny = ShiftSystem::with_cap(s.params(), 20);
        assert!(matches!(
            tiny.is_valid_word(&w("0101")),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn neighbor_copies() {
        let s = sys(1, 2);
        assert!(s.check_neighbor_copies(2, 5).unwrap().holds());
        assert!(s.check_neighbor_copies(1, 5).is_err());
        assert!(s.check_neighbor_copies(3, 4).is_err());
        assert!(sys(2, 3).check_neighbor_copies(2, 4).unwrap().holds());
    }

    #[test]
    fn ascii_export_round_trip() {
        let s = sys(2, 3);
        let b = s.materialize(2).unwrap();
        let mut buf = Vec::new();
        b.write_ascii(&mut buf).unwrap();
        assert_eq!(buf.iter().filter(|c| **c == b'\n').count(), 1);
        assert_eq!(read_ascii(&buf[..]).unwrap(), b.as_word().unwrap());
    }

    #[test]
    fn word_parsing() {
        assert!("".parse::<Word>().is_err());
        assert!("012".parse::<Word>().is_err());
        assert_eq!(w("0110").to_string(), "0110");
    }
}
