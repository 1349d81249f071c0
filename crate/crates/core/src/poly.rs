//! Primitive integer polynomials, rational polynomial division, and the
//! cyclotomic divisibility test for zeros at roots of unity.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;

/// Integer polynomial a_d x^d + ... + a_1 x + a_0 with a_d, a_0 nonzero and
/// content 1. Stored degree-descending, matching the text interface.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    /// Validates invariants. With `divide_content` set, a non-primitive input
    /// is divided through by its content; the returned flag reports whether
    /// that happened.
    pub fn new(coeffs: Vec<BigInt>, divide_content: bool) -> Result<(Self, bool)> {
        if coeffs.len() < 2 {
            return Err(Error::EmptyInput);
        }
        if coeffs[0].is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        if coeffs[coeffs.len() - 1].is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let content = coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
            .magnitude()
            .clone();
        if content.is_one() {
            return Ok((IntPolynomial { coeffs }, false));
        }
        if !divide_content {
            return Err(Error::NonPrimitive {
                content: content.to_string(),
            });
        }
        let c: BigInt = content.into();
        let coeffs = coeffs.into_iter().map(|x| x / &c).collect();
        Ok((IntPolynomial { coeffs }, true))
    }

    /// Parses comma-separated decimal integers, degree-descending.
    pub fn parse(text: &str, divide_content: bool) -> Result<(Self, bool)> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(Error::EmptyInput);
        }
        let coeffs: Result<Vec<BigInt>> = trimmed
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::InvalidInput(format!("bad coefficient {tok:?}")))
            })
            .collect();
        Self::new(coeffs?, divide_content)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        let v: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
        IntPolynomial::new(v, false).expect("valid test polynomial").0
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// a_d
    pub fn leading(&self) -> &BigInt {
        &self.coeffs[0]
    }

    /// a_0
    pub fn constant(&self) -> &BigInt {
        &self.coeffs[self.coeffs.len() - 1]
    }

    /// M = |a_0|, the group order base.
    pub fn modulus(&self) -> BigUint {
        self.constant().magnitude().clone()
    }

    /// a_j, ascending index (a_0 is the constant term).
    pub fn coeff(&self, j: usize) -> &BigInt {
        &self.coeffs[self.coeffs.len() - 1 - j]
    }

    pub fn coeffs_descending(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// gcd(a_1, a_0) = 1, the hypothesis making every quotient group cyclic
    /// with 1 as a generator.
    pub fn is_cyclic_case(&self) -> bool {
        self.coeff(0).gcd(self.coeff(1)).is_one()
    }

    /// x^d f(1/x): roots are the inverses of the roots of f.
    pub fn reversed(&self) -> IntPolynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        IntPolynomial { coeffs }
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in &self.coeffs {
            acc = acc * x + BigRational::from(c.clone());
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in &self.coeffs {
            acc = acc * x + bigint_to_f64(c);
        }
        acc
    }
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    x.to_string().parse().unwrap_or(f64::NAN)
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            let pow = d - i;
            if c.is_zero() {
                continue;
            }
            if first {
                write!(f, "{}", term(c, pow))?;
                first = false;
            } else if c.is_negative() {
                write!(f, " - {}", term(&c.abs(), pow))?;
            } else {
                write!(f, " + {}", term(c, pow))?;
            }
        }
        Ok(())
    }
}

fn term(c: &BigInt, pow: usize) -> String {
    let cs = if c.is_one() && pow > 0 {
        String::new()
    } else {
        c.to_string()
    };
    match pow {
        0 => c.to_string(),
        1 => format!("{cs}x"),
        _ => format!("{cs}x^{pow}"),
    }
}

/// Dense rational polynomial, ascending coefficients. Internal helper for
/// exact division; not part of the public surface.
#[derive(Clone, Debug, PartialEq)]
pub struct RatPoly {
    pub coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Remainder of self divided by a monic integer polynomial (ascending).
    pub fn rem_by_monic(&self, divisor: &[BigInt]) -> RatPoly {
        let dd = divisor.len() - 1;
        debug_assert!(divisor[dd].is_one());
        let mut rem = self.coeffs.clone();
        while rem.len() > dd {
            let k = rem.len() - 1;
            let q = rem[k].clone();
            if !q.is_zero() {
                for (i, dc) in divisor.iter().enumerate() {
                    let idx = k - dd + i;
                    let sub = &q * BigRational::from(dc.clone());
                    rem[idx] -= sub;
                }
            }
            rem.pop();
        }
        RatPoly::new(rem)
    }
}

/// The q-th cyclotomic polynomial, ascending integer coefficients, computed
/// by the recursive quotient (z^q - 1) / prod_{d | q, d < q} Phi_d.
pub fn cyclotomic(q: u64, cache: &mut HashMap<u64, Vec<BigInt>>) -> Vec<BigInt> {
    if let Some(p) = cache.get(&q) {
        return p.clone();
    }
    let result = if q == 1 {
        vec![BigInt::from(-1), BigInt::one()]
    } else {
        // z^q - 1
        let mut num = vec![BigInt::zero(); (q + 1) as usize];
        num[0] = BigInt::from(-1);
        num[q as usize] = BigInt::one();
        for d in 1..q {
            if q.is_multiple_of(d) {
                let phi_d = cyclotomic(d, cache);
                num = div_exact_by_monic(&num, &phi_d);
            }
        }
        num
    };
    cache.insert(q, result.clone());
    result
}

/// Exact integer division by a monic divisor (both ascending).
fn div_exact_by_monic(num: &[BigInt], divisor: &[BigInt]) -> Vec<BigInt> {
    let dd = divisor.len() - 1;
    let mut rem: Vec<BigInt> = num.to_vec();
    let qd = rem.len() - 1 - dd;
    let mut quot = vec![BigInt::zero(); qd + 1];
    for k in (0..=qd).rev() {
        let c = rem[k + dd].clone();
        quot[k] = c.clone();
        if !c.is_zero() {
            for (i, dc) in divisor.iter().enumerate() {
                let prod = &c * dc;
                rem[k + i] -= prod;
            }
        }
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()), "division was not exact");
    quot
}

pub fn euler_phi(mut q: u64) -> u64 {
    let mut result = q;
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            while q.is_multiple_of(p) {
                q /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if q > 1 {
        result -= result / q;
    }
    result
}

/// Whether Phi_q divides P in Q[z]. A primitive q-th root of unity is a zero
/// of a rational-coefficient P exactly when this holds.
pub fn cyclotomic_divides(p: &RatPoly, q: u64, cache: &mut HashMap<u64, Vec<BigInt>>) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    assert!(q >= 1);
    if euler_phi(q) > p.degree() as u64 {
        return Ok(false);
    }
    let phi = cyclotomic(q, cache);
    Ok(p.rem_by_monic(&phi).is_zero())
}
