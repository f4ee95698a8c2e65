//! The skew product `T_{q,b}(x, y) = (bx, xy + 1)` on `Z_q* x Z_q` and the
//! residues of `h_k` it encodes: `T^k(1, 0) = (b^k, h_{k-1}) mod q`.
//!
//! Residues are canonical, in `[0, q)`.

use num_bigint::BigUint;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::words::SystemParams;

/// Above this many states the full permutation order is not enumerated.
const MAX_ENUMERATED_STATES: u64 = 1 << 22;

#[inline]
fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

/// The canonical residue of `n` modulo `m`.
pub fn residue(n: &BigUint, m: u64) -> u64 {
    (n % m).try_into().unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SkewState {
    q: u64,
    b: u64,
    x: u64,
    y: u64,
}

impl SkewState {
    pub fn new(q: u64, b: u64, x: u64, y: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::ModulusTooSmall { q, min: 2 });
        }
        if b.gcd(&q) != 1 {
            return Err(Error::NotCoprime { b, q });
        }
        if x >= q || y >= q || x.gcd(&q) != 1 {
            return Err(Error::InvalidState { x, y, q });
        }
        Ok(SkewState { q, b: b % q, x, y })
    }

    /// `(1, 0)`.
    pub fn origin(q: u64, b: u64) -> Result<Self> {
        SkewState::new(q, b, 1, 0)
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn y(&self) -> u64 {
        self.y
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn step(self) -> SkewState {
        SkewState {
            x: mul_mod(self.b, self.x, self.q),
            y: (mul_mod(self.x, self.y, self.q) + 1) % self.q,
            ..self
        }
    }

    fn index(&self) -> usize {
        (self.x * self.q + self.y) as usize
    }
}

pub fn skew_step(s: SkewState) -> SkewState {
    s.step()
}

/// `h_0, ..., h_k_max` reduced mod `q`, by modular recurrence only.
pub fn h_mod_sequence(params: SystemParams, q: u64, k_max: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k_max + 1);
    if q == 1 {
        out.resize(k_max + 1, 0);
        return out;
    }
    let b = params.b() % q;
    let mut h = 1 % q;
    let mut pow = 1 % q;
    out.push(h);
    for _ in 0..k_max {
        pow = mul_mod(pow, b, q);
        h = (mul_mod(pow, h, q) + 1) % q;
        out.push(h);
    }
    out
}

pub fn h_mod(params: SystemParams, q: u64, k: usize) -> u64 {
    h_mod_sequence(params, q, k)[k]
}

/// Checks `T^k(1, 0) = (b^k mod q, h_{k-1} mod q)` for `1 <= k <= k_max`.
pub fn verify_orbit_identity(params: SystemParams, q: u64, k_max: usize) -> Result<bool> {
    let mut s = SkewState::origin(q, params.b())?;
    let hs = h_mod_sequence(params, q, k_max);
    let mut pow = 1 % q;
    for k in 1..=k_max {
        s = s.step();
        pow = mul_mod(pow, params.b(), q);
        if (s.x, s.y) != (pow, hs[k - 1]) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkewOrder {
    /// Least `n >= 1` with `T^n(1, 0) = (1, 0)`.
    pub orbit_period: u64,
    /// Least `n >= 1` with `T^n = Id` on all of `Z_q* x Z_q`.
    #[serde(serialize_with = "crate::modular::serialize_biguint")]
    pub permutation_order: BigUint,
}

pub(crate) fn serialize_biguint<S: serde::Serializer>(
    n: &BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

pub fn orbit_period(q: u64, b: u64) -> Result<u64> {
    let start = SkewState::origin(q, b)?;
    let mut s = start.step();
    let mut n = 1;
    while s != start {
        s = s.step();
        n += 1;
    }
    Ok(n)
}

/// Orbit period of `(1, 0)` and the order of `T` as a permutation (lcm of all
/// cycle lengths).
pub fn skew_order(q: u64, b: u64) -> Result<SkewOrder> {
    let orbit_period = orbit_period(q, b)?;
    let mut visited = vec![false; (q * q) as usize];
    let mut order = BigUint::from(1u32);
    for x in (1..q).filter(|x| x.gcd(&q) == 1) {
        for y in 0..q {
            let start = SkewState::new(q, b, x, y)?;
            if visited[start.index()] {
                continue;
            }
            let mut len = 0u64;
            let mut s = start;
            loop {
                visited[s.index()] = true;
                s = s.step();
                len += 1;
                if s == start {
                    break;
                }
            }
            order = order.lcm(&BigUint::from(len));
        }
    }
    Ok(SkewOrder {
        orbit_period,
        permutation_order: order,
    })
}

/// `N_q ∩ [0, k_max]`: levels with `h_k = 1 mod q`.
pub fn nq_set(params: SystemParams, q: u64, k_max: usize) -> Result<Vec<usize>> {
    if q < 2 {
        return Err(Error::ModulusTooSmall { q, min: 2 });
    }
    Ok(h_mod_sequence(params, q, k_max)
        .into_iter()
        .enumerate()
        .filter(|&(_, r)| r == 1)
        .map(|(k, _)| k)
        .collect())
}

/// Every `k <= k_max` with `h_{k+1} = 1 mod q`; empty results are an error.
pub fn verify_prime_relation(params: SystemParams, q: u64, k_max: usize) -> Result<Vec<usize>> {
    if q < 2 {
        return Err(Error::ModulusTooSmall { q, min: 2 });
    }
    let hs = h_mod_sequence(params, q, k_max + 1);
    let witnesses: Vec<usize> = (0..=k_max).filter(|&k| hs[k + 1] == 1).collect();
    if witnesses.is_empty() {
        return Err(Error::NoWitness {
            q,
            k_max: k_max as u64,
        });
    }
    Ok(witnesses)
}

/// `q = d * q'` with `q'` the largest divisor of `q` coprime to `b`; every prime
/// factor of `d` divides `b`.
pub fn coprime_split(b: u64, q: u64) -> (u64, u64) {
    let mut coprime = q;
    loop {
        let g = coprime.gcd(&b);
        if g == 1 {
            break;
        }
        while coprime.is_multiple_of(g) {
            coprime /= g;
        }
    }
    (q / coprime, coprime)
}

/// Least `e` with `d | b^e`.
fn divisibility_exponent(b: u64, d: u64) -> usize {
    let mut pow = 1 % d;
    let mut e = 0;
    while pow != 0 {
        pow = mul_mod(pow, b, d);
        e += 1;
    }
    e
}

/// Witnesses produced by the factored argument: with `n'` the orbit period of
/// `(1, 0)` mod `q'`, `h_{s n' - 1} = 0 mod q'`, and `d | b^(k+1)` once
/// `k + 1 >= e`. Always a subset of [`verify_prime_relation`].
pub fn factored_witnesses(params: SystemParams, q: u64, k_max: usize) -> Result<Vec<usize>> {
    if q < 2 {
        return Err(Error::ModulusTooSmall { q, min: 2 });
    }
    let (d, coprime) = coprime_split(params.b(), q);
    let e = if d == 1 {
        0
    } else {
        divisibility_exponent(params.b(), d)
    };
    let first = e.saturating_sub(1);
    if coprime == 1 {
        return Ok((first..=k_max).collect());
    }
    let period = orbit_period(coprime, params.b())? as usize;
    Ok((period - 1..=k_max)
        .step_by(period)
        .filter(|&k| k >= first)
        .collect())
}

/// `10 q * ord(T_{q', b})` when the state space is small enough to enumerate,
/// else `10^4`.
pub fn default_search_bound(b: u64, q: u64) -> u64 {
    let (_, coprime) = coprime_split(b, q);
    if coprime == 1 {
        return 10 * q;
    }
    if coprime * coprime > MAX_ENUMERATED_STATES {
        return 10_000;
    }
    match skew_order(coprime, b)
        .ok()
        .and_then(|o| u64::try_from(o.permutation_order).ok())
    {
        Some(order) => order.saturating_mul(10 * q),
        None => 10_000,
    }
}

/// One CSV row of a residue sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub q: u64,
    pub b: u64,
    pub k: usize,
    pub h_k_mod_q: u64,
    #[serde(rename = "in_Nq")]
    pub in_nq: u8,
}

pub fn residue_sweep(
    params: SystemParams,
    qs: impl IntoIterator<Item = u64>,
    k_max: usize,
) -> Vec<SweepRow> {
    qs.into_iter()
        .flat_map(|q| {
            h_mod_sequence(params, q, k_max)
                .into_iter()
                .enumerate()
                .map(move |(k, r)| SweepRow {
                    q,
                    b: params.b(),
                    k,
                    h_k_mod_q: r,
                    in_nq: u8::from(r == 1 % q),
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: u64, b: u64) -> SystemParams {
        SystemParams::new(a, b).unwrap()
    }

    #[test]
    fn skew_steps() {
        let s = SkewState::origin(5, 2).unwrap().step();
        assert_eq!((s.x(), s.y()), (2, 1));
        let s = s.step();
        assert_eq!((s.x(), s.y()), (4, 3));
        let s = SkewState::origin(3, 2).unwrap().step();
        assert_eq!((s.x(), s.y()), (2, 1));
        assert_eq!(
            SkewState::origin(4, 2),
            Err(Error::NotCoprime { b: 2, q: 4 })
        );
        assert!(SkewState::new(6, 5, 2, 0).is_err());
    }

    #[test]
    fn heights_mod_q() {
        assert_eq!(h_mod_sequence(p(1, 2), 3, 4), vec![1, 0, 1, 0, 1]);
        assert_eq!(h_mod(p(1, 2), 5, 2), 3);
        assert_eq!(h_mod(p(1, 2), 1, 7), 0);
    }

    #[test]
    fn orbit_identity() {
        assert!(verify_orbit_identity(p(1, 2), 5, 100).unwrap());
        assert!(verify_orbit_identity(p(1, 3), 7, 100).unwrap());
        assert!(verify_orbit_identity(p(1, 2), 4, 10).is_err());
    }

    #[test]
    fn orders() {
        let o = skew_order(2, 3).unwrap();
        assert_eq!(o.orbit_period, 2);
        for q in 2..=50u64 {
            for b in [2u64, 3] {
                if b.gcd(&q) != 1 {
                    continue;
                }
                let o = skew_order(q, b).unwrap();
                assert!(
                    (&o.permutation_order % o.orbit_period) == BigUint::from(0u32),
                    "q={q} b={b}"
                );
                assert_eq!(h_mod(p(1, b), q, o.orbit_period as usize - 1), 0);
            }
        }
    }

    #[test]
    fn nq_examples() {
        assert_eq!(nq_set(p(1, 2), 3, 6).unwrap(), vec![0, 2, 4, 6]);
        assert_eq!(
            nq_set(p(1, 2), 2, 30).unwrap(),
            (0..=30).collect::<Vec<_>>()
        );
        assert!(nq_set(p(1, 2), 1, 3).is_err());
    }

    #[test]
    fn prime_relation_examples() {
        assert!(!verify_prime_relation(p(1, 2), 6, 100).unwrap().is_empty());
        assert_eq!(
            verify_prime_relation(p(1, 2), 2, 20).unwrap(),
            (0..=20).collect::<Vec<_>>()
        );
        let w = verify_prime_relation(p(1, 3), 9, 50).unwrap();
        assert!((1..=50).all(|k| w.contains(&k)));
        assert_eq!(coprime_split(2, 12), (4, 3));
        assert_eq!(coprime_split(6, 12), (12, 1));
        assert_eq!(coprime_split(3, 10), (1, 10));
    }

    #[test]
    fn sweep_rows() {
        let rows = residue_sweep(p(1, 2), [3], 2);
        assert_eq!(rows.len(), 3);
        assert_eq!(
            rows[1],
            SweepRow {
                q: 3,
                b: 2,
                k: 1,
                h_k_mod_q: 0,
                in_nq: 0
            }
        );
        assert_eq!(rows[2].in_nq, 1);
    }
}
