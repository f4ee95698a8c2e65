//! The full verification suite behind `djr verify`, one check per acceptance
//! criterion, evaluated for a single parameter family.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use djr_core::event::Event;
use djr_core::measure;
use djr_core::modular::{self, SkewState};
use djr_core::rational;
use djr_core::tower::{self, TowerSpec};
use djr_core::words::occurrences;
use djr_core::{ShiftSystem, Word};

use crate::SCHEMA;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub q_max: u64,
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub criterion: u8,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub checks: Vec<Check>,
}

impl SuiteResult {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name)
            .collect()
    }

    pub fn to_json(&self, sys: &ShiftSystem, options: &SuiteOptions) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "criterion": c.criterion, "pass": c.pass, "detail": c.detail }))
            .collect();
        json!({
            "schema": SCHEMA,
            "params": { "a": sys.a(), "b": sys.b(), "q_max": options.q_max, "k_max": options.k_max, "cap": sys.cap() },
            "checks": checks,
            "failed": self.failed(),
            "pass": self.pass(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "[{}] {:>2} {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.criterion,
                    c.name
                )
            })
            .collect();
        lines.push(format!(
            "{} of {} checks passed",
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len()
        ));
        lines.join("\n")
    }
}

type CheckFn = fn(&ShiftSystem, &SuiteOptions) -> (bool, Value);

const CHECKS: [(&str, u8, CheckFn); 9] = [
    ("c01_height_law", 1, height_law),
    ("c02_lazy_agreement", 2, lazy_agreement),
    ("c03_copy_structure", 3, copy_structure),
    ("c04_density_telescoping", 4, density_telescoping),
    ("c05_spacer_measure", 5, spacer_measure),
    ("c06_skew_identity", 6, skew_identity),
    ("c07_prime_relation", 7, prime_relation),
    ("c08_rigidity", 8, rigidity),
    ("c09_tower_claims", 9, tower_claims),
];

/// Runs every check in parallel; results are ordered by name.
pub fn run(sys: &ShiftSystem, options: &SuiteOptions) -> SuiteResult {
    let mut checks: Vec<Check> = CHECKS
        .par_iter()
        .map(|&(name, criterion, f)| {
            let (pass, detail) = f(sys, options);
            Check {
                name,
                criterion,
                pass,
                detail,
            }
        })
        .collect();
    checks.sort_by_key(|c| c.name);
    SuiteResult { checks }
}

fn error_detail(e: djr_core::Error) -> (bool, Value) {
    (false, json!({ "error": e.to_string() }))
}

fn height_law(sys: &ShiftSystem, _: &SuiteOptions) -> (bool, Value) {
    let b = BigUint::from(sys.b());
    let mut h = BigUint::from(1u32);
    let mut violations = Vec::new();
    for k in 0..=25usize {
        if sys.height(k) != h {
            violations.push(json!({ "k": k, "kind": "recurrence" }));
        }
        if k >= 1 {
            let e = (k * (k + 1) / 2) as u32;
            if !(b.pow(e) < h && h < b.pow(e + 1)) {
                violations.push(json!({ "k": k, "kind": "bounds" }));
            }
        }
        h = b.pow(k as u32 + 1) * h + 1u32;
    }
    (
        violations.is_empty(),
        json!({ "k_max": 25, "violations": violations }),
    )
}

/// Independent descent with `u128` heights; `None` once heights overflow.
fn u128_heights(sys: &ShiftSystem, k_max: usize) -> Option<Vec<u128>> {
    let b = sys.b() as u128;
    let mut h = vec![1u128];
    for k in 0..k_max {
        h.push(
            b.checked_pow(k as u32 + 1)?
                .checked_mul(h[k])?
                .checked_add(1)?,
        );
    }
    Some(h)
}

fn descend(sys: &ShiftSystem, h: &[u128], k: usize, pos: u128) -> u8 {
    if k == 0 {
        return 0;
    }
    let left = sys.a() as u128 * (sys.b() as u128).pow(k as u32 - 1) * h[k - 1];
    match pos.cmp(&left) {
        std::cmp::Ordering::Less => descend(sys, h, k - 1, pos % h[k - 1]),
        std::cmp::Ordering::Equal => 1,
        std::cmp::Ordering::Greater => descend(sys, h, k - 1, (pos - left - 1) % h[k - 1]),
    }
}

fn lazy_agreement(sys: &ShiftSystem, options: &SuiteOptions) -> (bool, Value) {
    let exhaustive = if sys.b() == 2 { 5 } else { 4 }.min(options.k_max.max(1));
    let mut mismatches = 0u64;
    for k in 0..=exhaustive {
        let block = match sys.symbols(k) {
            Ok(b) => b,
            Err(e) => return error_detail(e),
        };
        mismatches += block
            .iter()
            .enumerate()
            .filter(|&(i, &s)| sys.symbol_at(k, &BigUint::from(i)).ok() != Some(s))
            .count() as u64;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut sampled_top = 0;
    for k in 0..=12usize {
        let Some(h) = u128_heights(sys, k) else { break };
        sampled_top = k;
        for _ in 0..10_000 {
            let pos = rng.random_range(0..h[k]);
            if sys.symbol_at(k, &BigUint::from(pos)).ok() != Some(descend(sys, &h, k, pos)) {
                mismatches += 1;
            }
        }
    }
    (
        mismatches == 0,
        json!({ "exhaustive_k_max": exhaustive, "sampled_k_max": sampled_top, "samples_per_level": 10_000, "mismatches": mismatches }),
    )
}

fn copy_structure(sys: &ShiftSystem, options: &SuiteOptions) -> (bool, Value) {
    let mut counts = Vec::new();
    let mut pass = true;
    for k in 1..=options.k_max.min(4) {
        let r = (|| {
            let top = sys.materialize(k + 1)?;
            let needle = sys.materialize(k)?.as_word()?;
            occurrences(&top, &needle, false)
        })();
        match r {
            Ok(found) => {
                let expected = BigUint::from(sys.b()).pow(k as u32 + 1);
                let ok = BigUint::from(found.len()) == expected;
                pass &= ok;
                counts.push(json!({ "k": k, "found": found.len(), "expected": expected.to_string(), "ok": ok }));
            }
            Err(e) => return error_detail(e),
        }
    }
    let mut neighbors = Vec::new();
    for k in [2usize, 3] {
        let m = k + 3;
        match sys.check_neighbor_copies(k, m) {
            Ok(r) => {
                pass &= r.holds();
                neighbors.push(json!({ "k": k, "m": m, "occurrences": r.occurrences, "violations": r.violations }));
            }
            Err(e) => return error_detail(e),
        }
    }
    (pass, json!({ "copies": counts, "neighbors": neighbors }))
}

fn density_telescoping(sys: &ShiftSystem, options: &SuiteOptions) -> (bool, Value) {
    let top = options.k_max.clamp(2, 5);
    let source = match sys.symbols(top) {
        Ok(s) => s,
        Err(e) => return error_detail(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e1e);
    let mut steps = 0u64;
    let mut violations = Vec::new();
    for _ in 0..200 {
        let len = rng.random_range(1..=10usize);
        let start = rng.random_range(0..source.len() - len);
        let word = Word::from_slice(&source[start..start + len]).expect("factor of a block");
        let e = Event::atom(0, word.clone());
        let Ok(levels) = measure::counts_by_level(sys, &e, top) else {
            continue;
        };
        for pair in levels.windows(2) {
            let (k, ref c0) = pair[0];
            let (_, ref c1) = pair[1];
            let d0 = rational::ratio(c0.clone(), sys.height(k));
            let d1 = rational::ratio(c1.clone(), sys.height(k + 1));
            steps += 1;
            if (d1 - d0).abs() >= rational::ratio(2 * len as u64, sys.height(k + 1)) {
                violations.push(json!({ "word": word.to_string(), "k": k }));
            }
        }
    }
    (
        violations.is_empty(),
        json!({ "words": 200, "k_max": top, "steps": steps, "violations": violations }),
    )
}

fn spacer_measure(sys: &ShiftSystem, _: &SuiteOptions) -> (bool, Value) {
    let mut rows = Vec::new();
    let mut pass = true;
    for k in 1..=3 {
        let r =
            measure::spacer_event(sys, k).and_then(|e| measure::certified_measure(sys, k + 4, &e));
        match r {
            Ok(c) => {
                let h = sys.height(k + 1);
                let ok = c.strictly_within(
                    &rational::ratio(1u32, h.clone()),
                    &rational::ratio(sys.b(), h),
                );
                pass &= ok;
                rows.push(json!({ "k": k, "measure": c, "ok": ok }));
            }
            Err(e) => return error_detail(e),
        }
    }
    (pass, json!({ "levels": rows }))
}

fn skew_identity(sys: &ShiftSystem, options: &SuiteOptions) -> (bool, Value) {
    let b = sys.b();
    let exact: Vec<BigUint> = (0..=500).map(|k| sys.height(k)).collect();
    let failures: Vec<u64> = (2..=options.q_max.min(50))
        .into_par_iter()
        .filter(|q| q.gcd(&b) == 1)
        .filter(|&q| {
            let mut s = SkewState::origin(q, b).expect("coprime modulus");
            let mut pow = 1u64;
            !(1..=500usize).all(|k| {
                s = s.step();
                pow = pow * b % q;
                s.x() == pow && BigUint::from(s.y()) == &exact[k - 1] % q
            })
        })
        .collect();
    (
        failures.is_empty(),
        json!({ "q_max": options.q_max.min(50), "k_max": 500, "failures": failures }),
    )
}

fn prime_relation(sys: &ShiftSystem, options: &SuiteOptions) -> (bool, Value) {
    let params = sys.params();
    let rows: Vec<(u64, usize)> = (2..=options.q_max)
        .into_par_iter()
        .map(|q| {
            (
                q,
                modular::verify_prime_relation(params, q, 10_000)
                    .map(|w| w.len())
                    .unwrap_or(0),
            )
        })
        .collect();
    let short: Vec<u64> = rows
        .iter()
        .filter(|&&(_, n)| n < 3)
        .map(|&(q, _)| q)
        .collect();
    let fewest = rows.iter().map(|&(_, n)| n).min().unwrap_or(0);
    (
        short.is_empty(),
        json!({ "q_max": options.q_max, "k_max": 10_000, "fewest_witnesses": fewest, "too_few": short }),
    )
}

fn rigidity(sys: &ShiftSystem, options: &SuiteOptions) -> (bool, Value) {
    let deepest = sys.max_materializable_level().unwrap_or(0);
    let mut rows = Vec::new();
    let mut pass = true;
    for k in 2..=options.k_max.clamp(2, 5).min(deepest.saturating_sub(1)) {
        let t = sys.height_u64(k).expect("materializable height");
        match measure::coding_distance_certified(sys, t, k + 1, (k + 2).min(deepest)) {
            Ok(r) => {
                let ok = r.steps_within_bound
                    && r.limit.upper() < rational::ratio(1u32, BigUint::from(2u32).pow(k as u32));
                pass &= ok;
                rows.push(json!({ "k": k, "delta": r.limit, "ok": ok }));
            }
            Err(e) => return error_detail(e),
        }
    }
    (pass && !rows.is_empty(), json!({ "levels": rows }))
}

/// `(q, N)` pairs: the listed ones at `(1, 2)`, otherwise for `q` in `{2, 3}`
/// the largest `N` in `N_q ∩ [2, 3]`, else 4.
pub fn tower_specs(sys: &ShiftSystem) -> Vec<(u64, usize)> {
    if (sys.a(), sys.b()) == (1, 2) {
        return vec![(2, 3), (3, 4)];
    }
    let params = sys.params();
    [2u64, 3]
        .into_iter()
        .filter_map(|q| {
            let nq = modular::nq_set(params, q, 4).ok()?;
            let n = [3, 2, 4].into_iter().find(|n| nq.contains(n))?;
            Some((q, n))
        })
        .collect()
}

fn tower_claims(sys: &ShiftSystem, _: &SuiteOptions) -> (bool, Value) {
    let mut rows = Vec::new();
    let mut pass = true;
    for (q, n) in tower_specs(sys) {
        let r = TowerSpec::with_default_depth(sys, q, n)
            .and_then(|spec| tower::rank_one_report(sys, &spec));
        match r {
            Ok(r) => {
                let ok = r.disjoint_ok() && r.claim2.ok && r.coverage.ok;
                pass &= ok;
                rows.push(json!({
                    "q": q,
                    "n": n,
                    "m": r.spec.m,
                    "ok": ok,
                    "report": r,
                    "coverage_triangle_ok": r.coverage.triangle_ok,
                    "complement_ok": r.complement.ok,
                }));
            }
            Err(e) => return error_detail(e),
        }
    }
    (pass && !rows.is_empty(), json!({ "specs": rows }))
}
