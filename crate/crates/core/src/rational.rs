//! Exact rationals and their JSON form (decimal strings, never floats).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    BigRational::new(num.into(), den.into())
}

pub fn from_uint(n: &BigUint) -> Rational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn clamp_unit(x: Rational) -> Rational {
    if x.is_negative() {
        zero()
    } else if x > one() {
        one()
    } else {
        x
    }
}

/// Lossy decimal rendering for human-facing output.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Huge numerators and denominators: scale both down first.
        let shift = x.denom().bits().max(x.numer().bits()).saturating_sub(1000);
        let n = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `{"num": "...", "den": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalJson {
    fn from(x: &Rational) -> Self {
        RationalJson {
            num: x.numer().to_string(),
            den: x.denom().to_string(),
        }
    }
}

impl TryFrom<&RationalJson> for Rational {
    type Error = String;

    fn try_from(j: &RationalJson) -> Result<Self, String> {
        let num: BigInt = j
            .num
            .parse()
            .map_err(|e| format!("bad numerator {:?}: {e}", j.num))?;
        let den: BigInt = j
            .den
            .parse()
            .map_err(|e| format!("bad denominator {:?}: {e}", j.den))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(BigRational::new(num, den))
    }
}
