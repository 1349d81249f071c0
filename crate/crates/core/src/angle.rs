//! Points of Q/Z in lowest terms, i.e. rational angles theta with
//! e(theta) on the unit circle.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// theta in Q/Z, reduced, with 0 <= num < den.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalAngle {
    num: BigUint,
    den: BigUint,
}

// angles serialize as "num/den"
impl Serialize for RationalAngle {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RationalAngle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let (n, d) = s
            .split_once('/')
            .ok_or_else(|| D::Error::custom("expected num/den"))?;
        let n: BigInt = n.trim().parse().map_err(D::Error::custom)?;
        let d: BigInt = d.trim().parse().map_err(D::Error::custom)?;
        if d.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(RationalAngle::new(&n, &d))
    }
}

impl RationalAngle {
    pub fn new(num: &BigInt, den: &BigInt) -> Self {
        assert!(!den.is_zero(), "angle denominator must be nonzero");
        let mut r = BigRational::new(num.clone(), den.clone());
        // reduce mod 1 into [0, 1)
        let fl = r.floor();
        r -= fl;
        debug_assert!(!r.is_negative());
        let num = r.numer().magnitude().clone();
        let den = r.denom().magnitude().clone();
        RationalAngle { num, den }
    }

    pub fn from_u64(num: u64, den: u64) -> Self {
        Self::new(&BigInt::from(num), &BigInt::from(den))
    }

    pub fn zero() -> Self {
        RationalAngle {
            num: BigUint::zero(),
            den: BigUint::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numer(&self) -> &BigUint {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    /// -theta in Q/Z; an involution with 0 -> 0.
    pub fn negated(&self) -> Self {
        if self.num.is_zero() {
            return self.clone();
        }
        RationalAngle {
            num: &self.den - &self.num,
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let a = BigRational::new(self.num.clone().into(), self.den.clone().into());
        let b = BigRational::new(other.num.clone().into(), other.den.clone().into());
        let s = a + b;
        Self::new(s.numer(), s.denom())
    }

    pub fn as_rational(&self) -> BigRational {
        BigRational::new(self.num.clone().into(), self.den.clone().into())
    }

    /// Minimal n >= 0 with base^n * theta integral.
    pub fn weight(&self, base: &BigUint) -> Result<u32> {
        assert!(base >= &BigUint::from(2u8));
        let mut d = self.den.clone();
        let mut n = 0u32;
        while !d.is_one() {
            let g = d.gcd(base);
            if g.is_one() {
                return Err(Error::DenominatorNotMPower {
                    angle: self.to_string(),
                    base: base.to_string(),
                });
            }
            d /= g;
            n += 1;
        }
        Ok(n)
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl PartialOrd for RationalAngle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalAngle {
    fn cmp(&self, other: &Self) -> Ordering {
        // order by value in [0, 1)
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}
