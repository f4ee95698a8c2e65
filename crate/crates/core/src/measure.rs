//! Exact densities of events on periodic approximations `B_M^Z`, certified
//! intervals for the invariant measure, and the coding distance.
//!
//! # Counting at a level
//!
//! An event of span `L` is a predicate on length-`L` windows. Write `c_k` for
//! the number of anchors in `Z/h_k` where it holds on `B_k^Z`. Once
//! `h_k >= L - 1`, a window of `B_{k+1}^Z` crosses at most one junction
//! between copies of `B_k`, and the junction neighborhoods are fixed for all
//! larger `k` because each block begins and ends with the one below it. So
//!
//! ```text
//! c_{k+1} = b^(k+1) c_k + (J_spacer - J_plain)
//! ```
//!
//! where `J_plain` counts windows straddling `B_k | B_k` and `J_spacer` those
//! containing the spacer of `B_k 1 B_k`. Only the smallest block with
//! `h_K >= L` is ever scanned; `c_M` for larger `M` follows exactly. This is
//! what lets scan levels such as `B_7` (4.4e8 symbols at `b = 2`) be used.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::event::Event;
use crate::rational::{self, Rational, RationalJson};
use crate::search::Matcher;
use crate::words::{NeighborCopies, ShiftSystem, Word};

/// Evaluates events over a contiguous range of anchors on a finite text;
/// an atom `(o, w)` at anchor `p` reads `text[p + o ..]`.
struct Evaluator<'t> {
    text: &'t [u8],
    occurrences: HashMap<Word, Bitset>,
}

impl<'t> Evaluator<'t> {
    fn new(text: &'t [u8]) -> Self {
        Evaluator {
            text,
            occurrences: HashMap::new(),
        }
    }

    fn occurrence_bitmap(&mut self, word: &Word) -> &Bitset {
        let text = self.text;
        self.occurrences
            .entry(word.clone())
            .or_insert_with(|| Matcher::new(word.symbols()).occurrence_bitmap(text))
    }

    /// Bit `j` is set iff `e` holds at anchor `first + j`.
    fn eval(&mut self, e: &Event, first: i64, len: usize) -> Bitset {
        match e {
            Event::Atom { offset, word } => {
                let start = first + offset;
                debug_assert!(start >= 0);
                self.occurrence_bitmap(word).window(start as usize, len)
            }
            Event::And(parts) => {
                let mut acc = Bitset::ones(len);
                for p in parts {
                    acc.and_assign(&self.eval(p, first, len));
                }
                acc
            }
            Event::Or(parts) => {
                let mut acc = Bitset::zeros(len);
                for p in parts {
                    acc.or_assign(&self.eval(p, first, len));
                }
                acc
            }
            Event::Not(inner) => {
                let mut acc = self.eval(inner, first, len);
                acc.negate();
                acc
            }
            Event::ShiftUnion { event, step, count } => {
                self.eval_shift_union(event, *step, *count, first, len)
            }
        }
    }

    /// `OR_i e(p - step*i)` via, per residue class mod `|step|`, the nearest
    /// set position in the scan direction.
    fn eval_shift_union(
        &mut self,
        e: &Event,
        step: i64,
        count: u64,
        first: i64,
        len: usize,
    ) -> Bitset {
        if step == 0 || count == 1 {
            return self.eval(e, first, len);
        }
        let stride = step.unsigned_abs() as usize;
        let reach = stride * (count as usize - 1);
        let mut out = Bitset::zeros(len);
        if step > 0 {
            let inner = self.eval(e, first - reach as i64, len + reach);
            let mut last = vec![usize::MAX; stride.min(inner.len())];
            for x in 0..inner.len() {
                let r = x % stride;
                if inner.get(x) {
                    last[r] = x;
                }
                if x >= reach && last[r] != usize::MAX && last[r] + reach >= x {
                    out.set(x - reach);
                }
            }
        } else {
            let inner = self.eval(e, first, len + reach);
            let mut next = vec![usize::MAX; stride.min(inner.len())];
            for x in (0..inner.len()).rev() {
                let r = x % stride;
                if inner.get(x) {
                    next[r] = x;
                }
                if x < len && next[r] != usize::MAX && next[r] <= x + reach {
                    out.set(x);
                }
            }
        }
        out
    }
}

/// Anchors whose window `text[j .. j + span)` satisfies `e`, for `j < windows`.
fn window_hits(text: &[u8], windows: usize, e: &Event, min_offset: i64) -> Bitset {
    if windows == 0 {
        return Bitset::zeros(0);
    }
    Evaluator::new(text).eval(e, -min_offset, windows)
}

fn cyclic_text(block: &[u8], extra: usize) -> Vec<u8> {
    let n = block.len();
    (0..n + extra).map(|i| block[i % n]).collect()
}

fn span_and_origin(e: &Event) -> Result<(u64, i64)> {
    let (lo, hi) = e.offset_range().ok_or(Error::EmptyEvent)?;
    Ok(((hi - lo) as u64, lo))
}

/// The recurrence data for one event: `c_K` at the smallest scannable level and
/// the constant junction correction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelLift {
    pub span: u64,
    pub base_level: usize,
    pub base_count: u64,
    pub plain_junction: u64,
    pub spacer_junction: u64,
}

impl LevelLift {
    pub fn delta(&self) -> i64 {
        self.spacer_junction as i64 - self.plain_junction as i64
    }
}

pub fn level_lift(sys: &ShiftSystem, e: &Event) -> Result<LevelLift> {
    let (span, origin) = span_and_origin(e)?;
    let base_level = sys.level_covering(span);
    let block = sys.symbols(base_level)?;
    let l = span as usize;
    let base_count = window_hits(&cyclic_text(&block, l - 1), block.len(), e, origin).count_ones();

    let n = block.len();
    let mut plain = block[n - (l - 1)..].to_vec();
    plain.extend_from_slice(&block[..l - 1]);
    let plain_junction = window_hits(&plain, l - 1, e, origin).count_ones();

    let mut spaced = block[n - (l - 1)..].to_vec();
    spaced.push(1);
    spaced.extend_from_slice(&block[..l - 1]);
    let spacer_junction = window_hits(&spaced, l, e, origin).count_ones();

    Ok(LevelLift {
        span,
        base_level,
        base_count,
        plain_junction,
        spacer_junction,
    })
}

/// `c_k` for every `k` from the base level through `max_level`.
pub fn counts_by_level(
    sys: &ShiftSystem,
    e: &Event,
    max_level: usize,
) -> Result<Vec<(usize, BigUint)>> {
    let lift = level_lift(sys, e)?;
    let b = BigInt::from(sys.b());
    let delta = BigInt::from(lift.delta());
    let mut c = BigInt::from(lift.base_count);
    let mut out = vec![(lift.base_level, c.to_biguint().unwrap())];
    for k in lift.base_level..max_level {
        c = b.pow(k as u32 + 1) * c + &delta;
        debug_assert!(!c.is_negative());
        out.push((k + 1, c.to_biguint().unwrap()));
    }
    Ok(out)
}

fn check_span(sys: &ShiftSystem, m: usize, span: u64) -> Result<()> {
    let h = sys.height(m);
    if BigUint::from(span) > h {
        return Err(Error::SpanExceedsPeriod {
            span,
            level: m,
            height: h,
        });
    }
    Ok(())
}

/// Number of anchors in `Z/h_M` where `e` holds on `B_M^Z`.
pub fn count_in_level(sys: &ShiftSystem, m: usize, e: &Event) -> Result<BigUint> {
    let (span, _) = span_and_origin(e)?;
    check_span(sys, m, span)?;
    let counts = counts_by_level(sys, e, m)?;
    Ok(counts
        .into_iter()
        .find(|(k, _)| *k == m)
        .map(|(_, c)| c)
        .unwrap())
}

/// `d_M(e)`: the fraction of anchors of `B_M^Z` where `e` holds.
pub fn density_in_level(sys: &ShiftSystem, m: usize, e: &Event) -> Result<Rational> {
    let count = count_in_level(sys, m, e)?;
    Ok(Rational::new(count.into(), sys.height(m).into()))
}

/// Positions `p in [0, h_M)` where `e` holds, scanning a materialized `B_M`.
pub fn positions_in_level(sys: &ShiftSystem, m: usize, e: &Event) -> Result<Bitset> {
    let (span, origin) = span_and_origin(e)?;
    check_span(sys, m, span)?;
    let block = sys.symbols(m)?;
    Ok(window_hits(
        &cyclic_text(&block, span as usize - 1),
        block.len(),
        e,
        origin,
    ))
}

/// `d_M(e)` by scanning a materialized `B_M` directly.
pub fn density_by_scan(sys: &ShiftSystem, m: usize, e: &Event) -> Result<Rational> {
    let hits = positions_in_level(sys, m, e)?.count_ones();
    Ok(rational::ratio(hits, sys.height(m)))
}

/// Closed-form bound on `sum_{j >= M} 2 span / h_{j+1}`, using
/// `h_{j+2} >= b^(M+2) h_{j+1}`:
/// `(2 span / h_{M+1}) * b^(M+2) / (b^(M+2) - 1)`.
pub fn tail_radius(sys: &ShiftSystem, m: usize, span: u64) -> Rational {
    let g = BigUint::from(sys.b()).pow(m as u32 + 2);
    let num = BigUint::from(2 * span) * &g;
    let den = sys.height(m + 1) * (g - 1u32);
    Rational::new(num.into(), den.into())
}

/// `center ± radius`, with `center = d_M(e)`; the clipped interval contains `mu(e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedMeasure {
    pub center: Rational,
    pub radius: Rational,
    pub level: usize,
}

impl CertifiedMeasure {
    pub fn exact(value: Rational, level: usize) -> Self {
        CertifiedMeasure {
            center: value,
            radius: rational::zero(),
            level,
        }
    }

    pub fn lower(&self) -> Rational {
        rational::clamp_unit(&self.center - &self.radius)
    }

    pub fn upper(&self) -> Rational {
        rational::clamp_unit(&self.center + &self.radius)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lower() <= *x && *x <= self.upper()
    }

    pub fn intersects(&self, other: &CertifiedMeasure) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// Strictly inside the open interval `(lo, hi)`.
    pub fn strictly_within(&self, lo: &Rational, hi: &Rational) -> bool {
        self.lower() > *lo && self.upper() < *hi
    }
}

impl std::fmt::Display for CertifiedMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} ± {} (≈ {:.9} ± {:.3e}, level {})",
            self.center,
            self.radius,
            rational::to_f64(&self.center),
            rational::to_f64(&self.radius),
            self.level
        )
    }
}

#[derive(Serialize, Deserialize)]
struct CertifiedMeasureJson {
    num: String,
    den: String,
    radius_num: String,
    radius_den: String,
    level: usize,
}

impl Serialize for CertifiedMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CertifiedMeasureJson {
            num: self.center.numer().to_string(),
            den: self.center.denom().to_string(),
            radius_num: self.radius.numer().to_string(),
            radius_den: self.radius.denom().to_string(),
            level: self.level,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CertifiedMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = CertifiedMeasureJson::deserialize(d)?;
        let center = Rational::try_from(&RationalJson {
            num: j.num,
            den: j.den,
        })
        .map_err(D::Error::custom)?;
        let radius = Rational::try_from(&RationalJson {
            num: j.radius_num,
            den: j.radius_den,
        })
        .map_err(D::Error::custom)?;
        Ok(CertifiedMeasure {
            center,
            radius,
            level: j.level,
        })
    }
}

pub fn certified_measure(sys: &ShiftSystem, m: usize, e: &Event) -> Result<CertifiedMeasure> {
    let center = density_in_level(sys, m, e)?;
    let radius = tail_radius(sys, m, e.span()?);
    Ok(CertifiedMeasure {
        center,
        radius,
        level: m,
    })
}

/// Three levels above the smallest block that holds the event's span.
pub fn default_level(sys: &ShiftSystem, e: &Event) -> Result<usize> {
    Ok(sys.level_covering(e.span()?) + 3)
}

/// `S_k`: the points centered on the spacer configuration `B_k 1 B_k`.
pub fn spacer_event(sys: &ShiftSystem, k: usize) -> Result<Event> {
    if k < 1 {
        return Err(Error::LevelOutOfRange {
            level: k,
            reason: "spacer events start at k = 1",
        });
    }
    let block = sys.materialize(k)?.as_word()?;
    let h = block.len() as i64;
    Ok(Event::atom(
        -h,
        block.concat(&Word::spacer()).concat(&block),
    ))
}

pub fn shift_event(e: &Event, m: i64) -> Event {
    e.shift(m)
}

pub fn sym_diff_measure(
    sys: &ShiftSystem,
    m: usize,
    e1: &Event,
    e2: &Event,
) -> Result<CertifiedMeasure> {
    certified_measure(sys, m, &Event::sym_diff(e1.clone(), e2.clone()))
}

/// The event `x_0 != x_t`.
pub fn mismatch_event(t: u64) -> Event {
    let zero = Word::from_slice(&[0]).unwrap();
    let one = Word::spacer();
    let t = t as i64;
    Event::or(vec![
        Event::and(vec![
            Event::atom(0, zero.clone()),
            Event::atom(t, one.clone()),
        ]),
        Event::and(vec![Event::atom(0, one), Event::atom(t, zero)]),
    ])
}

/// `delta_k(T^t)`: the mismatch density between `B_k^Z` and its `t`-shift.
/// Shifts are taken mod `h_k`, so `t = h_k` gives 0.
pub fn coding_distance_level(sys: &ShiftSystem, k: usize, t: u64) -> Result<Rational> {
    let block = sys.symbols(k)?;
    let n = block.len();
    let t = (t % n as u64) as usize;
    let mismatches = (0..n).filter(|&i| block[(i + t) % n] != block[i]).count();
    Ok(rational::ratio(mismatches as u64, n as u64))
}

/// The finite-window form `delta^(N)_k(T^t)` on `xi = B_k^N`: positions
/// `i <= N h_k - t` compare `xi(i + t)` with `xi(i)`; the last `t` positions
/// count as mismatches.
pub fn coding_distance_window(
    sys: &ShiftSystem,
    k: usize,
    t: u64,
    copies: u64,
) -> Result<Rational> {
    let block = sys.symbols(k)?;
    let n = block.len() as u64;
    let total = copies * n;
    let compared = total.saturating_sub(t);
    let mismatches = (0..compared)
        .filter(|&i| block[((i + t) % n) as usize] != block[(i % n) as usize])
        .count() as u64;
    Ok(rational::ratio(mismatches + (total - compared), total))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodingDistanceResult {
    pub t: u64,
    #[serde(serialize_with = "serialize_levels")]
    pub levels: Vec<(usize, Rational)>,
    /// Every consecutive pair satisfies `|delta_k - delta_{k+1}| <= 2t / h_{k+1}`.
    pub steps_within_bound: bool,
    pub limit: CertifiedMeasure,
}

fn serialize_levels<S: serde::Serializer>(
    levels: &[(usize, Rational)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    #[derive(Serialize)]
    struct Entry {
        k: usize,
        num: String,
        den: String,
    }
    let mut seq = s.serialize_seq(Some(levels.len()))?;
    for (k, v) in levels {
        seq.serialize_element(&Entry {
            k: *k,
            num: v.numer().to_string(),
            den: v.denom().to_string(),
        })?;
    }
    seq.end()
}

pub fn coding_distance_certified(
    sys: &ShiftSystem,
    t: u64,
    k_lo: usize,
    k_hi: usize,
) -> Result<CodingDistanceResult> {
    if k_hi < k_lo {
        return Err(Error::LevelOutOfRange {
            level: k_hi,
            reason: "k_hi must be at least k_lo",
        });
    }
    let h_lo = sys.height(k_lo);
    if BigUint::from(t) >= h_lo {
        return Err(Error::ShiftTooLarge {
            t,
            level: k_lo,
            height: h_lo,
        });
    }
    let levels = (k_lo..=k_hi)
        .map(|k| Ok((k, coding_distance_level(sys, k, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let steps_within_bound = levels.windows(2).all(|w| {
        let bound = rational::ratio(2 * t, sys.height(w[1].0));
        (&w[0].1 - &w[1].1).abs() <= bound
    });
    let center = levels.last().unwrap().1.clone();
    let limit = CertifiedMeasure {
        center,
        radius: tail_radius(sys, k_hi, t),
        level: k_hi,
    };
    Ok(CodingDistanceResult {
        t,
        levels,
        steps_within_bound,
        limit,
    })
}

/// Counts behind [`ShiftSystem::check_neighbor_copies`] at any level `m`: the
/// occurrences of `B_k 1 B_k` and those not flanked by `B_k` on both sides.
pub fn neighbor_copies_lifted(sys: &ShiftSystem, k: usize, m: usize) -> Result<NeighborCopies> {
    let block = sys.materialize(k)?.as_word()?;
    let h = block.len() as i64;
    let center = Event::atom(0, block.concat(&Word::spacer()).concat(&block));
    let flanked = Event::and(vec![
        Event::atom(-h, block.clone()),
        Event::atom(2 * h + 1, block),
    ]);
    let occurrences = count_in_level(sys, m, &center)?;
    let violations = count_in_level(sys, m, &Event::and(vec![center, Event::not(flanked)]))?;
    let to_u64 = |n: BigUint| {
        n.to_u64().ok_or(Error::CapExceeded {
            level: m,
            height: sys.height(m),
            cap: sys.cap(),
        })
    };
    Ok(NeighborCopies {
        occurrences: to_u64(occurrences)?,
        violations: to_u64(violations)?,
        counterexample: None,
    })
}

/// Largest materializable level, but no more than `preferred`.
pub fn deepest_scan_level(sys: &ShiftSystem, preferred: usize) -> Option<usize> {
    sys.max_materializable_level().map(|m| m.min(preferred))
}

pub fn rational_to_u64_pair(x: &Rational) -> Option<(u64, u64)> {
    Some((x.numer().to_u64()?, x.denom().to_u64()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::SystemParams;

    fn sys(a: u64, b: u64) -> ShiftSystem {
        ShiftSystem::new(SystemParams::new(a, b).unwrap())
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn single_symbol_densities() {
        let s = sys(1, 2);
        assert_eq!(
            density_in_level(&s, 1, &Event::atom(0, w("0"))).unwrap(),
            rational::ratio(2, 3)
        );
        assert_eq!(
            density_in_level(&s, 2, &Event::atom(0, w("1"))).unwrap(),
            rational::ratio(5, 13)
        );
        let contradiction = Event::and(vec![Event::atom(0, w("0")), Event::atom(0, w("1"))]);
        for m in 0..8 {
            assert_eq!(
                density_in_level(&s, m, &contradiction).unwrap(),
                rational::zero()
            );
        }
    }

    #[test]
    fn span_must_fit_period() {
        let s = sys(1, 2);
        assert!(matches!(
            density_in_level(&s, 1, &Event::atom(0, w("0101"))),
            Err(Error::SpanExceedsPeriod { .. })
        ));
        assert_eq!(
            density_in_level(&s, 0, &Event::And(vec![])),
            Err(Error::EmptyEvent)
        );
    }

    #[test]
    fn tail_radius_closed_form() {
        let s = sys(1, 2);
        assert_eq!(tail_radius(&s, 2, 1), rational::ratio(32, 1575));
        assert_eq!(tail_radius(&s, 2, 0), rational::zero());
        for m in 0..10 {
            assert!(tail_radius(&s, m + 1, 5) < tail_radius(&s, m, 5));
        }
    }

    #[test]
    fn spacer_event_shape() {
        let s = sys(1, 2);
        let e = spacer_event(&s, 1).unwrap();
        assert_eq!(e, Event::atom(-3, w("0101010")));
        assert_eq!(e.span().unwrap(), 7);
        assert!(spacer_event(&s, 0).is_err());
    }

    #[test]
    fn certified_measure_json_shape() {
        let s = sys(1, 2);
        let m = certified_measure(&s, 2, &Event::atom(0, w("1"))).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"num": "5", "den": "13", "radius_num": "32", "radius_den": "1575", "level": 2})
        );
        let back: CertifiedMeasure = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn coding_distance_basics() {
        let s = sys(1, 2);
        assert_eq!(coding_distance_level(&s, 3, 0).unwrap(), rational::zero());
        assert_eq!(coding_distance_level(&s, 3, 105).unwrap(), rational::zero());
        assert_eq!(
            coding_distance_level(&s, 2, 1).unwrap(),
            rational::ratio(10, 13)
        );
        let r = coding_distance_certified(&s, 0, 2, 4).unwrap();
        assert_eq!(r.limit.center, rational::zero());
        assert_eq!(r.limit.radius, rational::zero());
        assert!(coding_distance_certified(&s, 13, 2, 4).is_err());
    }

    #[test]
    fn lifted_neighbor_copies_match_scan() {
        for (a, b, k, m) in [(1, 2, 2, 5), (2, 3, 2, 4), (1, 3, 2, 5)] {
            let s = sys(a, b);
            let scanned = s.check_neighbor_copies(k, m).unwrap();
            let lifted = neighbor_copies_lifted(&s, k, m).unwrap();
            assert_eq!(
                (scanned.occurrences, scanned.violations),
                (lifted.occurrences, lifted.violations)
            );
        }
    }

    #[test]
    fn shift_union_matches_expansion() {
        let s = sys(2, 3);
        let base = Event::and(vec![
            Event::atom(0, w("0010")),
            Event::not(Event::atom(5, w("1"))),
        ]);
        for step in [-3i64, -1, 1, 2, 5] {
            let u = Event::shift_union(base.clone(), step, 4);
            assert_eq!(
                density_by_scan(&s, 4, &u).unwrap(),
                density_by_scan(&s, 4, &u.expand()).unwrap(),
                "step {step}"
            );
            assert_eq!(
                density_in_level(&s, 6, &u).unwrap(),
                density_in_level(&s, 6, &u.expand()).unwrap()
            );
        }
    }
}
