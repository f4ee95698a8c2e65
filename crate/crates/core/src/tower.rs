//! The `T^q`-tower over `A*_N = B*_N ∩ T^{-h_N} B*_N ∩ ... ∩ T^{-(q-1)h_N} B*_N`
//! and the inequalities that make `T^q` rank one.
//!
//! Set identities are checked exactly on the period `B_M^Z`; measure
//! statements compare certified interval endpoints, never centers.

use num_bigint::{BigInt, BigUint};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::measure::{self, CertifiedMeasure};
use crate::modular;
use crate::rational::{self, Rational, RationalJson};
use crate::words::ShiftSystem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerSpec {
    pub q: u64,
    pub n: usize,
    pub m: usize,
    /// `1 - ((q-1)(q-2)/2) / b^(N-1) > 0`; otherwise the coverage bound says nothing.
    pub bound_positive: bool,
}

impl TowerSpec {
    pub fn new(sys: &ShiftSystem, q: u64, n: usize, m: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::PowerTooSmall { q });
        }
        if n < 1 {
            return Err(Error::LevelOutOfRange {
                level: n,
                reason: "tower level must be at least 1",
            });
        }
        let residue = modular::residue(&sys.height(n), q);
        if residue != 1 {
            return Err(Error::NotInNq { n, q, residue });
        }
        if m < n + 2 {
            return Err(Error::ScanTooShallow { m, min: n + 2 });
        }
        if !sys.is_materializable(n) {
            return Err(Error::CapExceeded {
                level: n,
                height: sys.height(n),
                cap: sys.cap(),
            });
        }
        let bound_positive = coverage_factor(sys, q, n, Coefficient::Printed) > rational::zero();
        Ok(TowerSpec {
            q,
            n,
            m,
            bound_positive,
        })
    }

    /// Scan level `N + 3`.
    pub fn with_default_depth(sys: &ShiftSystem, q: u64, n: usize) -> Result<Self> {
        TowerSpec::new(sys, q, n, n + 3)
    }
}

/// Which coefficient multiplies `mu(T^{h_N} B* Δ B*)` in the bound on `mu(B* \ A*)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    /// `(q-1)(q-2)/2`.
    Printed,
    /// `q(q-1)/2`, what the triangle inequality gives directly.
    Triangle,
}

impl Coefficient {
    pub fn value(self, q: u64) -> u64 {
        match self {
            Coefficient::Printed => (q - 1) * (q - 2) / 2,
            Coefficient::Triangle => q * (q - 1) / 2,
        }
    }
}

fn b_pow(sys: &ShiftSystem, e: usize) -> BigUint {
    BigUint::from(sys.b()).pow(e as u32)
}

/// `1 - c / b^(N-1)`.
fn coverage_factor(sys: &ShiftSystem, q: u64, n: usize, c: Coefficient) -> Rational {
    rational::one() - rational::ratio(c.value(q), b_pow(sys, n - 1))
}

fn h_u64(sys: &ShiftSystem, k: usize) -> Result<u64> {
    sys.height_u64(k).ok_or(Error::CapExceeded {
        level: k,
        height: sys.height(k),
        cap: sys.cap(),
    })
}

/// `B*_N`: the cylinder of `B_N` at the origin.
pub fn base_event(sys: &ShiftSystem, n: usize) -> Result<Event> {
    Ok(Event::atom(0, sys.materialize(n)?.as_word()?))
}

/// `B_N` at offsets `0, h_N, ..., (q-1) h_N`; `q = 1` gives the base.
pub fn a_star(sys: &ShiftSystem, n: usize, q: u64) -> Result<Event> {
    let word = sys.materialize(n)?.as_word()?;
    let h = word.len() as i64;
    if q <= 1 {
        return Ok(Event::atom(0, word));
    }
    Ok(Event::and(
        (0..q as i64)
            .map(|i| Event::atom(i * h, word.clone()))
            .collect(),
    ))
}

pub fn a_star_event(sys: &ShiftSystem, spec: &TowerSpec) -> Result<Event> {
    a_star(sys, spec.n, spec.q)
}

/// `∪_{i < h_N} (T^q)^i A*_N`.
pub fn tower_union(sys: &ShiftSystem, spec: &TowerSpec) -> Result<Event> {
    Ok(Event::shift_union(
        a_star_event(sys, spec)?,
        spec.q as i64,
        h_u64(sys, spec.n)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disjointness {
    pub disjoint: bool,
    /// `(i, j)` with `(T^q)^i A* ∩ (T^q)^j A*` nonempty, when one was located.
    pub collision: Option<(u64, u64)>,
}

/// Disjointness of the `T^q` levels. On `B_M^Z` every shifted copy of `A*` has the same count, so the
/// `h_N` copies are pairwise disjoint iff the union count is `h_N` times it.
pub fn check_level_disjointness(sys: &ShiftSystem, spec: &TowerSpec) -> Result<Disjointness> {
    let h = h_u64(sys, spec.n)?;
    let a = a_star_event(sys, spec)?;
    let single = measure::count_in_level(sys, spec.m, &a)?;
    let union = measure::count_in_level(sys, spec.m, &tower_union(sys, spec)?)?;
    if union == single * h {
        return Ok(Disjointness {
            disjoint: true,
            collision: None,
        });
    }
    Ok(Disjointness {
        disjoint: false,
        collision: find_collision(sys, spec, &a, h)?,
    })
}

/// Looks for `x, y` in the `A*` positions of the deepest scannable period with
/// `x - y = q d`, `0 < d < h_N`; then copies `0` and `d` meet.
fn find_collision(
    sys: &ShiftSystem,
    spec: &TowerSpec,
    a: &Event,
    h: u64,
) -> Result<Option<(u64, u64)>> {
    let span = a.span()?;
    let Some(level) = measure::deepest_scan_level(sys, spec.m) else {
        return Ok(None);
    };
    if BigUint::from(span) > sys.height(level) {
        return Ok(None);
    }
    let hits = measure::positions_in_level(sys, level, a)?;
    let period = hits.len() as u64;
    for y in hits.iter_ones() {
        for d in 1..h {
            if hits.get(((y as u64 + spec.q * d) % period) as usize) {
                return Ok(Some((0, d)));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauCheck {
    pub is_permutation: bool,
    /// `count((T^q)^i A* \ T^{tau(i)} B*) = 0` for every `i < h_N`.
    pub containment: bool,
}

/// `tau(i) = i q mod h_N`.
pub fn tau_permutation(sys: &ShiftSystem, spec: &TowerSpec) -> Result<Vec<u64>> {
    let h = h_u64(sys, spec.n)?;
    Ok((0..h)
        .map(|i| ((i as u128 * spec.q as u128) % h as u128) as u64)
        .collect())
}

pub fn is_permutation(map: &[u64]) -> bool {
    let mut seen = vec![false; map.len()];
    map.iter()
        .all(|&v| (v as usize) < seen.len() && !std::mem::replace(&mut seen[v as usize], true))
}

/// Bijectivity of `tau`, plus the containment `(T^q)^i A* ⊆ T^{tau(i)} B*`.
/// With `q i = tau(i) + r h_N`, the difference event is a shift of
/// `A* \ T^{-r h_N} B*`, so one count per `r < q` covers every `i`.
pub fn tau_check(sys: &ShiftSystem, spec: &TowerSpec) -> Result<TauCheck> {
    let tau = tau_permutation(sys, spec)?;
    let h = tau.len() as u64;
    let a = a_star_event(sys, spec)?;
    let base = base_event(sys, spec.n)?;
    let mut classes: Vec<u64> = (0..h).map(|i| (i * spec.q - tau[i as usize]) / h).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut containment = true;
    for r in classes {
        let outside = Event::and(vec![a.clone(), Event::not(base.shift(-((r * h) as i64)))]);
        if measure::count_in_level(sys, spec.m, &outside)? != BigUint::from(0u32) {
            containment = false;
        }
    }
    Ok(TauCheck {
        is_permutation: is_permutation(&tau),
        containment,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub lhs: CertifiedMeasure,
    #[serde(serialize_with = "serialize_rational")]
    pub bound: Rational,
    pub ok: bool,
}

fn serialize_rational<S: serde::Serializer>(
    x: &Rational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    RationalJson::from(x).serialize(s)
}

fn mu_base(sys: &ShiftSystem, spec: &TowerSpec) -> Result<CertifiedMeasure> {
    measure::certified_measure(sys, spec.m, &base_event(sys, spec.n)?)
}

/// Return estimate: `mu((T^q)^{h_N} A* Δ A*) < (q^2 - 2q + 2) / b^(N-1) * mu(B*)`,
/// using the lower endpoint of `mu(B*)` in the bound.
pub fn claim_two_check(sys: &ShiftSystem, spec: &TowerSpec) -> Result<BoundCheck> {
    let a = a_star_event(sys, spec)?;
    let h = h_u64(sys, spec.n)? as i64;
    let lhs = measure::sym_diff_measure(sys, spec.m, &a.shift(spec.q as i64 * h), &a)?;
    let q = spec.q;
    let bound =
        rational::ratio(q * q - 2 * q + 2, b_pow(sys, spec.n - 1)) * mu_base(sys, spec)?.lower();
    let ok = lhs.upper() < bound;
    Ok(BoundCheck { lhs, bound, ok })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageCheck {
    pub coverage: CertifiedMeasure,
    /// `(1 - ((q-1)(q-2)/2) / b^(N-1)) (1 - b / h_{N+1})`.
    #[serde(serialize_with = "serialize_rational")]
    pub bound: Rational,
    pub ok: bool,
    /// The same bound with coefficient `q(q-1)/2`.
    #[serde(serialize_with = "serialize_rational")]
    pub triangle_bound: Rational,
    pub triangle_ok: bool,
}

pub fn coverage_bound(sys: &ShiftSystem, q: u64, n: usize, c: Coefficient) -> Rational {
    coverage_factor(sys, q, n, c) * (rational::one() - rational::ratio(sys.b(), sys.height(n + 1)))
}

/// Coverage: the `T^q`-tower over `A*_N` covers more than the bound.
pub fn coverage_check(sys: &ShiftSystem, spec: &TowerSpec) -> Result<CoverageCheck> {
    let coverage = measure::certified_measure(sys, spec.m, &tower_union(sys, spec)?)?;
    let bound = coverage_bound(sys, spec.q, spec.n, Coefficient::Printed);
    let triangle_bound = coverage_bound(sys, spec.q, spec.n, Coefficient::Triangle);
    let ok = coverage.lower() > bound;
    let triangle_ok = coverage.lower() > triangle_bound;
    Ok(CoverageCheck {
        coverage,
        bound,
        ok,
        triangle_bound,
        triangle_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TowerCoverage {
    pub union: CertifiedMeasure,
    #[serde(serialize_with = "serialize_rational")]
    pub bound: Rational,
    /// `union > 1 - b^2 h_N / h_{N+1}`.
    pub union_ok: bool,
    /// `b^2 h_N / h_{N+1} < 1 / b^(N-1)`.
    pub arithmetic_ok: bool,
    /// `1 - union < 1 / b^(N-1)`.
    pub complement_ok: bool,
}

impl TowerCoverage {
    pub fn ok(&self) -> bool {
        self.union_ok && self.arithmetic_ok && self.complement_ok
    }
}

/// The level-`N` tower `∪_{i < h_N} T^i B*_N` against
/// `1 - b^2 h_N / h_{N+1} > 1 - 1 / b^(N-1)`.
pub fn eq_ineq3_check(sys: &ShiftSystem, n: usize, m: usize) -> Result<TowerCoverage> {
    if n < 2 {
        return Err(Error::LevelOutOfRange {
            level: n,
            reason: "the tower inequality needs N >= 2",
        });
    }
    let union = measure::certified_measure(
        sys,
        m,
        &Event::shift_union(base_event(sys, n)?, 1, h_u64(sys, n)?),
    )?;
    let gap = Rational::new(
        BigInt::from(b_pow(sys, 2) * sys.height(n)),
        BigInt::from(sys.height(n + 1)),
    );
    let limit = rational::ratio(1u32, b_pow(sys, n - 1));
    let bound = rational::one() - &gap;
    let union_ok = union.lower() > bound;
    let arithmetic_ok = gap < limit;
    let complement_ok = rational::one() - union.lower() < limit;
    Ok(TowerCoverage {
        union,
        bound,
        union_ok,
        arithmetic_ok,
        complement_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplementIdentity {
    /// `mu(∪_{i < h_N} T^i B*_N)`.
    pub column: CertifiedMeasure,
    pub spacer: CertifiedMeasure,
    /// The intervals for `mu(C_N)` and `1 - mu(S_N)` meet.
    pub ok: bool,
}

pub fn complement_identity(sys: &ShiftSystem, n: usize, m: usize) -> Result<ComplementIdentity> {
    let column = measure::certified_measure(
        sys,
        m,
        &Event::shift_union(base_event(sys, n)?, 1, h_u64(sys, n)?),
    )?;
    let spacer = measure::certified_measure(sys, m, &measure::spacer_event(sys, n)?)?;
    let one_minus = CertifiedMeasure {
        center: rational::one() - &spacer.center,
        radius: spacer.radius.clone(),
        level: m,
    };
    let ok = column.intersects(&one_minus);
    Ok(ComplementIdentity { column, spacer, ok })
}

/// Everything the rank-one argument for `T^q` at level `N` rests on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerReport {
    pub spec: TowerSpec,
    pub mu_base: CertifiedMeasure,
    pub mu_a: CertifiedMeasure,
    pub disjointness: Disjointness,
    pub claim2: BoundCheck,
    pub coverage: CoverageCheck,
    pub tau: TauCheck,
    /// `mu(T^{h_N} B* Δ B*)` against `mu(B*) / b^(N-1)`.
    pub ineq2: BoundCheck,
    pub ineq3: TowerCoverage,
    pub complement: ComplementIdentity,
}

impl TowerReport {
    pub fn disjoint_ok(&self) -> bool {
        self.disjointness.disjoint
    }

    pub fn tau_ok(&self) -> bool {
        self.tau.is_permutation && self.tau.containment
    }

    /// Disjointness, return estimate, coverage, `tau`, and both tower inequalities.
    pub fn all_ok(&self) -> bool {
        self.disjoint_ok()
            && self.claim2.ok
            && self.coverage.ok
            && self.tau_ok()
            && self.ineq2.ok
            && self.ineq3.ok()
    }

    pub fn csv_row(&self, sys: &ShiftSystem) -> TowerCsvRow {
        TowerCsvRow {
            a: sys.a(),
            b: sys.b(),
            q: self.spec.q,
            n: self.spec.n,
            m: self.spec.m,
            mu_base: self.mu_base.center.to_string(),
            mu_a: self.mu_a.center.to_string(),
            coverage: self.coverage.coverage.center.to_string(),
            coverage_bound: self.coverage.bound.to_string(),
            disjoint_ok: self.disjoint_ok(),
            claim2_ok: self.claim2.ok,
            coverage_ok: self.coverage.ok,
            coverage_triangle_ok: self.coverage.triangle_ok,
            tau_ok: self.tau_ok(),
            ineq2_ok: self.ineq2.ok,
            ineq3_ok: self.ineq3.ok(),
            complement_ok: self.complement.ok,
        }
    }
}

impl Serialize for TowerReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TowerReport", 8)?;
        st.serialize_field("mu_base", &self.mu_base)?;
        st.serialize_field("mu_A", &self.mu_a)?;
        st.serialize_field("disjoint_ok", &self.disjoint_ok())?;
        st.serialize_field("claim2", &self.claim2)?;
        st.serialize_field("coverage", &self.coverage)?;
        st.serialize_field("tau_ok", &self.tau_ok())?;
        st.serialize_field("ineq2_ok", &self.ineq2.ok)?;
        st.serialize_field("ineq3_ok", &self.ineq3.ok())?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TowerCsvRow {
    pub a: u64,
    pub b: u64,
    pub q: u64,
    pub n: usize,
    pub m: usize,
    pub mu_base: String,
    pub mu_a: String,
    pub coverage: String,
    pub coverage_bound: String,
    pub disjoint_ok: bool,
    pub claim2_ok: bool,
    pub coverage_ok: bool,
    pub coverage_triangle_ok: bool,
    pub tau_ok: bool,
    pub ineq2_ok: bool,
    pub ineq3_ok: bool,
    pub complement_ok: bool,
}

pub fn ineq2_check(sys: &ShiftSystem, n: usize, m: usize) -> Result<BoundCheck> {
    let base = base_event(sys, n)?;
    let h = h_u64(sys, n)? as i64;
    let lhs = measure::sym_diff_measure(sys, m, &base.shift(h), &base)?;
    let mu = measure::certified_measure(sys, m, &base)?;
    let bound = mu.lower() / Rational::from_integer(BigInt::from(b_pow(sys, n - 1)));
    let ok = lhs.upper() < bound;
    Ok(BoundCheck { lhs, bound, ok })
}

pub fn rank_one_report(sys: &ShiftSystem, spec: &TowerSpec) -> Result<TowerReport> {
    Ok(TowerReport {
        spec: spec.clone(),
        mu_base: mu_base(sys, spec)?,
        mu_a: measure::certified_measure(sys, spec.m, &a_star_event(sys, spec)?)?,
        disjointness: check_level_disjointness(sys, spec)?,
        claim2: claim_two_check(sys, spec)?,
        coverage: coverage_check(sys, spec)?,
        tau: tau_check(sys, spec)?,
        ineq2: ineq2_check(sys, spec.n, spec.m)?,
        ineq3: eq_ineq3_check(sys, spec.n.max(2), spec.m)?,
        complement: complement_identity(sys, spec.n, spec.m)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::SystemParams;

    fn sys(a: u64, b: u64) -> ShiftSystem {
        ShiftSystem::new(SystemParams::new(a, b).unwrap())
    }

    #[test]
    fn spec_validation() {
        let s = sys(1, 2);
        assert_eq!(
            TowerSpec::new(&s, 1, 2, 5),
            Err(Error::PowerTooSmall { q: 1 })
        );
        assert_eq!(
            TowerSpec::new(&s, 3, 1, 5),
            Err(Error::NotInNq {
                n: 1,
                q: 3,
                residue: 0
            })
        );
        assert_eq!(
            TowerSpec::new(&s, 3, 2, 3),
            Err(Error::ScanTooShallow { m: 3, min: 4 })
        );
        let spec = TowerSpec::new(&s, 3, 2, 5).unwrap();
        assert!(spec.bound_positive);
        assert!(coverage_factor(&s, 5, 2, Coefficient::Printed) < rational::zero());
    }

    #[test]
    fn events() {
        let s = sys(1, 2);
        assert_eq!(
            base_event(&s, 1).unwrap(),
            Event::atom(0, "010".parse().unwrap())
        );
        let spec = TowerSpec::new(&s, 2, 2, 5).unwrap();
        let a = a_star_event(&s, &spec).unwrap();
        assert_eq!(a.offset_range(), Some((0, 26)));
        assert_eq!(a_star(&s, 2, 1).unwrap(), base_event(&s, 2).unwrap());
    }

    #[test]
    fn tau_examples() {
        let s = sys(1, 2);
        let spec = TowerSpec::new(&s, 2, 1, 3).unwrap();
        assert_eq!(tau_permutation(&s, &spec).unwrap(), vec![0, 2, 1]);
        let spec = TowerSpec::new(&s, 3, 2, 4).unwrap();
        let tau = tau_permutation(&s, &spec).unwrap();
        assert!(is_permutation(&tau));
        assert_eq!(tau[5], 2);
        assert!(!is_permutation(&[0, 0, 1]));
    }

    #[test]
    fn claim_two_coefficient_identity() {
        for q in 2..20u64 {
            assert_eq!(2 * Coefficient::Printed.value(q) + q, q * q - 2 * q + 2);
        }
    }

    #[test]
    fn small_tower_is_disjoint() {
        let s = sys(1, 2);
        let spec = TowerSpec::new(&s, 3, 2, 5).unwrap();
        assert!(check_level_disjointness(&s, &spec).unwrap().disjoint);
        let spec = TowerSpec::new(&s, 2, 2, 5).unwrap();
        assert!(check_level_disjointness(&s, &spec).unwrap().disjoint);
    }

    #[test]
    fn tower_inequality_arithmetic() {
        for b in 2..6u64 {
            let s = sys(1, b);
            for n in 2..8 {
                let gap = Rational::new(
                    BigInt::from(b_pow(&s, 2) * s.height(n)),
                    BigInt::from(s.height(n + 1)),
                );
                assert!(gap < rational::ratio(1u32, b_pow(&s, n - 1)));
            }
        }
    }
}
