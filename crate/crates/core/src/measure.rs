//! Finitely supported measures on the integers, their Fourier polynomial
//! P(z) = E[z^xi], and the zero-angle sets at denominators M^n.
//!
//! Weights are either exact rationals or extended-precision reals; the two
//! modes never mix inside one measure. The numeric zero test is heuristic by
//! nature and every result derived from it carries a flag saying so.

use crate::angle::RationalAngle;
use crate::error::{Error, Result};
use crate::numeric::{below_pow2, to_f64, Complex, Ctx};
use crate::poly::{cyclotomic_divides, euler_phi, RatPoly};
use astro_float::BigFloat;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureWeights {
    Rational(BTreeMap<BigInt, BigRational>),
    Real {
        atoms: BTreeMap<BigInt, BigFloat>,
        bits: usize,
    },
}

#[derive(Clone, Debug)]
pub struct FiniteMeasure {
    weights: MeasureWeights,
}

impl FiniteMeasure {
    pub fn from_rational_atoms(atoms: BTreeMap<BigInt, BigRational>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let mut sum = BigRational::zero();
        for w in atoms.values() {
            if !w.is_positive() {
                return Err(Error::InvalidMeasure(format!(
                    "weight {w} is not positive; zero weights are rejected, not dropped"
                )));
            }
            sum += w;
        }
        if !sum.is_one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {sum}, not 1")));
        }
        Ok(FiniteMeasure {
            weights: MeasureWeights::Rational(atoms),
        })
    }

    pub fn from_real_atoms(atoms: BTreeMap<BigInt, BigFloat>, bits: usize) -> Result<Self> {
        if bits < 128 {
            return Err(Error::InvalidMeasure(
                "extended-real mode needs at least 128 bits".into(),
            ));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let ctx = Ctx::new(bits);
        let mut sum = ctx.zero();
        for w in atoms.values() {
            if w.is_negative() || w.is_zero() {
                return Err(Error::InvalidMeasure(
                    "weight is not positive; zero weights are rejected, not dropped".into(),
                ));
            }
            sum = ctx.add(&sum, w);
        }
        let dev = ctx.sub(&sum, &ctx.one()).abs();
        if !below_pow2(&dev, bits as i64 - 8) {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to 1 + {:.3e}, outside the 2^-(bits-8) tolerance",
                to_f64(&dev)
            )));
        }
        Ok(FiniteMeasure {
            weights: MeasureWeights::Real { atoms, bits },
        })
    }

    pub fn uniform(lo: i64, hi: i64) -> Self {
        assert!(hi >= lo);
        let n = (hi - lo + 1) as u64;
        let w = BigRational::new(BigInt::one(), BigInt::from(n));
        let atoms = (lo..=hi).map(|a| (BigInt::from(a), w.clone())).collect();
        FiniteMeasure::from_rational_atoms(atoms).expect("uniform is a probability measure")
    }

    pub fn bernoulli() -> Self {
        Self::uniform(0, 1)
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.weights, MeasureWeights::Rational(_))
    }

    pub fn bits(&self) -> Option<usize> {
        match &self.weights {
            MeasureWeights::Rational(_) => None,
            MeasureWeights::Real { bits, .. } => Some(*bits),
        }
    }

    pub fn weights(&self) -> &MeasureWeights {
        &self.weights
    }

    pub fn support(&self) -> Vec<BigInt> {
        match &self.weights {
            MeasureWeights::Rational(m) => m.keys().cloned().collect(),
            MeasureWeights::Real { atoms, .. } => atoms.keys().cloned().collect(),
        }
    }

    pub fn atom_count(&self) -> usize {
        match &self.weights {
            MeasureWeights::Rational(m) => m.len(),
            MeasureWeights::Real { atoms, .. } => atoms.len(),
        }
    }

    pub fn support_min(&self) -> BigInt {
        self.support().first().cloned().expect("nonempty")
    }

    pub fn support_max(&self) -> BigInt {
        self.support().last().cloned().expect("nonempty")
    }

    /// |I| = max atom - min atom.
    pub fn interval_length(&self) -> BigUint {
        (self.support_max() - self.support_min()).magnitude().clone()
    }

    /// E|xi| as f64, for truncation bounds.
    pub fn mean_abs_f64(&self) -> f64 {
        match &self.weights {
            MeasureWeights::Rational(m) => m
                .iter()
                .map(|(a, w)| {
                    rational_to_f64(w) * a.magnitude().to_f64().unwrap_or(f64::MAX)
                })
                .sum(),
            MeasureWeights::Real { atoms, .. } => atoms
                .iter()
                .map(|(a, w)| to_f64(w).abs() * a.magnitude().to_f64().unwrap_or(f64::MAX))
                .sum(),
        }
    }

    /// Shift the support minimum to 0 and divide the atom gcd out. Returns
    /// the affine parameters (shift, scale); entropy-relevant structure is
    /// unchanged.
    pub fn normalize_support(&self) -> (FiniteMeasure, BigInt, BigUint) {
        let shift = self.support_min();
        let shifted: Vec<BigInt> = self.support().iter().map(|a| a - &shift).collect();
        let gcd = shifted
            .iter()
            .fold(BigUint::zero(), |acc, a| acc.gcd(a.magnitude()));
        let scale = if gcd.is_zero() { BigUint::one() } else { gcd };
        let scale_int = BigInt::from(scale.clone());
        let rebuild = |a: &BigInt| (a - &shift) / &scale_int;
        let weights = match &self.weights {
            MeasureWeights::Rational(m) => MeasureWeights::Rational(
                m.iter().map(|(a, w)| (rebuild(a), w.clone())).collect(),
            ),
            MeasureWeights::Real { atoms, bits } => MeasureWeights::Real {
                atoms: atoms.iter().map(|(a, w)| (rebuild(a), w.clone())).collect(),
                bits: *bits,
            },
        };
        (FiniteMeasure { weights }, shift, scale)
    }

    /// The coefficient list of z^(-min) P(z), ascending from the support
    /// minimum; degree equals |I|.
    pub fn fourier_polynomial(&self) -> FourierPolynomial {
        FourierPolynomial {
            measure: self.clone(),
            shift: self.support_min(),
        }
    }

    /// P(e(theta)) for rational theta, with e(x) = exp(-2 pi i x). Each
    /// term's angle is reduced exactly in Q/Z before any trig.
    pub fn char_value_at_angle(&self, theta: &RationalAngle, ctx: &mut Ctx) -> Complex {
        let mut re = ctx.zero();
        let mut im = ctx.zero();
        let t = theta.as_rational();
        let mut term = |a: &BigInt, w: &BigFloat, ctx: &mut Ctx| {
            let prod = BigRational::from(a.clone()) * &t;
            let frac = &prod - prod.floor();
            let frac_f = ctx.from_rational(&frac);
            let (c, s) = ctx.cos_sin_2pi(&frac_f);
            re = ctx.add(&re, &ctx.mul(w, &c));
            im = ctx.sub(&im, &ctx.mul(w, &s));
        };
        match &self.weights {
            MeasureWeights::Rational(m) => {
                for (a, w) in m {
                    let wf = ctx.from_rational(w);
                    term(a, &wf, ctx);
                }
            }
            MeasureWeights::Real { atoms, .. } => {
                for (a, w) in atoms {
                    term(a, w, ctx);
                }
            }
        }
        Complex { re, im }
    }

    /// P(e(theta)) for real theta.
    pub fn char_value_at_real(&self, theta: &BigFloat, ctx: &mut Ctx) -> Complex {
        let mut re = ctx.zero();
        let mut im = ctx.zero();
        let mut term = |a: &BigInt, w: &BigFloat, ctx: &mut Ctx| {
            let af = ctx.from_bigint(a);
            let arg = ctx.mul(&af, theta);
            let (c, s) = ctx.cos_sin_2pi(&arg);
            re = ctx.add(&re, &ctx.mul(w, &c));
            im = ctx.sub(&im, &ctx.mul(w, &s));
        };
        match &self.weights {
            MeasureWeights::Rational(m) => {
                for (a, w) in m {
                    let wf = ctx.from_rational(w);
                    term(a, &wf, ctx);
                }
            }
            MeasureWeights::Real { atoms, .. } => {
                for (a, w) in atoms {
                    term(a, w, ctx);
                }
            }
        }
        Complex { re, im }
    }

    /// Pushforward to Z/qZ.
    pub fn pushforward_mod_rational(&self, q: &BigUint) -> Option<Vec<BigRational>> {
        let MeasureWeights::Rational(m) = &self.weights else {
            return None;
        };
        let qq = BigInt::from(q.clone());
        let mut classes = vec![BigRational::zero(); q.to_usize()?];
        for (a, w) in m {
            let r = a.mod_floor(&qq).to_usize()?;
            classes[r] += w;
        }
        Some(classes)
    }

    pub fn gcd_of_denominators(&self) -> Option<BigUint> {
        let MeasureWeights::Rational(m) = &self.weights else {
            return None;
        };
        Some(
            m.values()
                .fold(BigUint::one(), |acc, w| acc.lcm(w.denom().magnitude())),
        )
    }

    /// (atom, numerator) pairs over the common denominator, rational mode.
    pub fn scaled_numerators(&self) -> Option<(Vec<(BigInt, BigUint)>, BigUint)> {
        let MeasureWeights::Rational(m) = &self.weights else {
            return None;
        };
        let q = self.gcd_of_denominators()?;
        let qi = BigInt::from(q.clone());
        let pairs = m
            .iter()
            .map(|(a, w)| {
                let num = (w.numer() * &qi) / w.denom();
                (a.clone(), num.magnitude().clone())
            })
            .collect();
        Some((pairs, q))
    }

    pub fn real_atoms(&self) -> Option<(Vec<(BigInt, BigFloat)>, usize)> {
        match &self.weights {
            MeasureWeights::Real { atoms, bits } => Some((
                atoms.iter().map(|(a, w)| (a.clone(), w.clone())).collect(),
                *bits,
            )),
            MeasureWeights::Rational(_) => None,
        }
    }
}

fn rational_to_f64(w: &BigRational) -> f64 {
    w.numer().to_f64().unwrap_or(f64::NAN) / w.denom().to_f64().unwrap_or(f64::NAN)
}

/// True when the pushforward of mu to Z/qZ is uniform; exact in rational
/// mode, within 2^(-bits/2) per class in numeric mode.
pub fn is_equidistributed_mod(mu: &FiniteMeasure, q: &BigUint) -> bool {
    if q.is_one() {
        return true;
    }
    match mu.weights() {
        MeasureWeights::Rational(_) => {
            let Some(classes) = mu.pushforward_mod_rational(q) else {
                return false;
            };
            let target = BigRational::new(BigInt::one(), BigInt::from(q.clone()));
            classes.iter().all(|c| c == &target)
        }
        MeasureWeights::Real { atoms, bits } => {
            let ctx = Ctx::new(*bits + 32);
            let qi = BigInt::from(q.clone());
            let qu = q.to_usize().expect("modulus fits");
            let mut classes = vec![ctx.zero(); qu];
            for (a, w) in atoms {
                let r = a.mod_floor(&qi).to_usize().expect("class fits");
                classes[r] = ctx.add(&classes[r], w);
            }
            let target = ctx.div(&ctx.one(), &ctx.from_u64(qu as u64));
            classes.iter().all(|c| {
                let dev = ctx.sub(c, &target).abs();
                below_pow2(&dev, (*bits / 2) as i64)
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct FourierPolynomial {
    measure: FiniteMeasure,
    shift: BigInt,
}

impl FourierPolynomial {
    /// Degree equals the support interval length |I|.
    pub fn degree(&self) -> BigUint {
        self.measure.interval_length()
    }

    /// Shifted coefficient vector as a rational polynomial (rational mode).
    pub fn as_rat_poly(&self) -> Option<RatPoly> {
        let MeasureWeights::Rational(m) = self.measure.weights() else {
            return None;
        };
        let deg = self.degree().to_usize()?;
        let mut coeffs = vec![BigRational::zero(); deg + 1];
        for (a, w) in m {
            let idx = (a - &self.shift).to_usize()?;
            coeffs[idx] = w.clone();
        }
        Some(RatPoly::new(coeffs))
    }
}

/// Exact zero test of P at e(theta): true iff the cyclotomic polynomial of
/// theta's denominator divides P in Q[z]. Rational weights only.
pub fn is_zero_angle_exact(
    mu: &FiniteMeasure,
    theta: &RationalAngle,
    cache: &mut HashMap<u64, Vec<BigInt>>,
) -> Result<bool> {
    if theta.is_zero() {
        return Ok(false); // P(1) = 1
    }
    let poly = mu
        .fourier_polynomial()
        .as_rat_poly()
        .ok_or_else(|| Error::InvalidMeasure("exact zero test needs rational weights".into()))?;
    let q = theta
        .denom()
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("angle denominator too large".into()))?;
    cyclotomic_divides(&poly, q, cache)
}

/// Heuristic zero test: |P(e(theta))| < 2^(-bits/2) at working precision,
/// re-checked once at doubled precision before a zero is declared.
pub fn is_zero_angle_numeric(mu: &FiniteMeasure, theta: &RationalAngle, bits: usize) -> bool {
    let threshold = bits as i64; // compares |P|^2 against 2^-bits
    let mut ctx = Ctx::new(bits + 64);
    let v = mu.char_value_at_angle(theta, &mut ctx);
    if !below_pow2(&v.abs2(&ctx), threshold) {
        return false;
    }
    let mut ctx2 = Ctx::new(bits * 2 + 64);
    let v2 = mu.char_value_at_angle(theta, &mut ctx2);
    below_pow2(&v2.abs2(&ctx2), threshold)
}

/// Zero membership dispatching on the weight mode.
pub fn is_zero_angle(
    mu: &FiniteMeasure,
    theta: &RationalAngle,
    cache: &mut HashMap<u64, Vec<BigInt>>,
) -> Result<bool> {
    match mu.weights() {
        MeasureWeights::Rational(_) => is_zero_angle_exact(mu, theta, cache),
        MeasureWeights::Real { bits, .. } => Ok(is_zero_angle_numeric(mu, theta, *bits)),
    }
}

#[derive(Clone, Debug)]
pub struct ZeroAngleSet {
    pub angles: BTreeSet<RationalAngle>,
    pub base: BigUint,
    pub max_level: u32,
    /// Set when any membership came from the numeric test.
    pub heuristic: bool,
}

impl ZeroAngleSet {
    pub fn contains(&self, theta: &RationalAngle) -> bool {
        self.angles.contains(theta)
    }

    pub fn sorted_strings(&self) -> Vec<String> {
        self.angles.iter().map(|a| a.to_string()).collect()
    }
}

const CANDIDATE_BUDGET: usize = 1 << 21;

/// The zero angles of P with denominator dividing base^max_level.
///
/// Rational mode: for every divisor q > 1 of base^max_level, all angles k/q
/// with gcd(k, q) = 1 are included iff Phi_q divides P. Numeric mode: every
/// candidate angle is probed with the heuristic zero test.
pub fn zero_angles(mu: &FiniteMeasure, base: &BigUint, max_level: u32) -> Result<ZeroAngleSet> {
    assert!(base >= &BigUint::from(2u8), "base must be at least 2");
    assert!(max_level >= 1);
    match mu.weights() {
        MeasureWeights::Rational(_) => {
            let mut cache = HashMap::new();
            let mut angles = BTreeSet::new();
            let deg = mu.interval_length().to_u64().unwrap_or(u64::MAX);
            for q in divisors_of_power(base, max_level)? {
                if q == 1 || euler_phi(q) > deg {
                    continue;
                }
                let theta = RationalAngle::from_u64(1, q);
                if is_zero_angle_exact(mu, &theta, &mut cache)? {
                    for k in 1..q {
                        if k.gcd(&q) == 1 {
                            angles.insert(RationalAngle::from_u64(k, q));
                        }
                    }
                }
            }
            Ok(ZeroAngleSet {
                angles,
                base: base.clone(),
                max_level,
                heuristic: false,
            })
        }
        MeasureWeights::Real { bits, .. } => {
            let modulus = base.pow(max_level);
            let count = modulus
                .to_usize()
                .filter(|&c| c <= CANDIDATE_BUDGET)
                .ok_or(Error::CombinatorialBudgetExceeded {
                    nodes: usize::MAX,
                    budget: CANDIDATE_BUDGET,
                })?;
            let bits = *bits;
            use rayon::prelude::*;
            let found: Vec<RationalAngle> = (1..count)
                .into_par_iter()
                .filter_map(|k| {
                    let theta = RationalAngle::new(
                        &BigInt::from(k),
                        &BigInt::from(modulus.clone()),
                    );
                    if is_zero_angle_numeric(mu, &theta, bits) {
                        Some(theta)
                    } else {
                        None
                    }
                })
                .collect();
            Ok(ZeroAngleSet {
                angles: found.into_iter().collect(),
                base: base.clone(),
                max_level,
                heuristic: true,
            })
        }
    }
}

/// Divisors of base^level (base factored by trial division).
fn divisors_of_power(base: &BigUint, level: u32) -> Result<Vec<u64>> {
    let b = base
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("modulus too large to enumerate divisors".into()))?;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut rem = b;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rem {
        if rem % p == 0 {
            let mut e = 0;
            while rem % p == 0 {
                rem /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += 1;
    }
    if rem > 1 {
        factors.push((rem, 1));
    }
    let mut divisors = vec![1u64];
    for (p, e) in factors {
        let total = e * level;
        let mut next = Vec::with_capacity(divisors.len() * (total as usize + 1));
        for d in &divisors {
            let mut pk = 1u64;
            for _ in 0..=total {
                match d.checked_mul(pk) {
                    Some(v) => next.push(v),
                    None => {
                        return Err(Error::InvalidInput(
                            "divisor enumeration overflowed".into(),
                        ))
                    }
                }
                pk = match pk.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
        }
        next.sort_unstable();
        next.dedup();
        divisors = next;
    }
    Ok(divisors)
}

/// Measure file format: an object with an "atoms" map from decimal integers
/// to weight strings. Weights are either all "p/q" rationals or all decimal
/// floats; an optional "bits" field sets the numeric precision (default 256).
pub fn parse_measure_json(text: &str) -> Result<FiniteMeasure> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidMeasure(format!("bad JSON: {e}")))?;
    let atoms = value
        .get("atoms")
        .and_then(|a| a.as_object())
        .ok_or_else(|| Error::InvalidMeasure("missing \"atoms\" object".into()))?;
    if atoms.is_empty() {
        return Err(Error::InvalidMeasure("empty support".into()));
    }
    let bits = value
        .get("bits")
        .and_then(|b| b.as_u64())
        .map(|b| b as usize)
        .unwrap_or(256);
    let rational = atoms.values().all(|w| w.as_str().is_some_and(|s| s.contains('/')));
    let any_rational = atoms.values().any(|w| w.as_str().is_some_and(|s| s.contains('/')));
    if rational != any_rational {
        return Err(Error::InvalidMeasure(
            "weight modes cannot mix: use all p/q or all decimals".into(),
        ));
    }
    let mut parsed_atoms: Vec<(BigInt, &str)> = Vec::new();
    for (k, v) in atoms {
        let atom = k
            .trim()
            .parse::<BigInt>()
            .map_err(|_| Error::InvalidMeasure(format!("bad atom {k:?}")))?;
        let w = v
            .as_str()
            .ok_or_else(|| Error::InvalidMeasure("weights must be strings".into()))?;
        parsed_atoms.push((atom, w));
    }
    if rational {
        let mut map = BTreeMap::new();
        for (atom, w) in parsed_atoms {
            let (num, den) = w
                .split_once('/')
                .ok_or_else(|| Error::InvalidMeasure(format!("bad weight {w:?}")))?;
            let num = num.trim().parse::<BigInt>();
            let den = den.trim().parse::<BigInt>();
            let (Ok(num), Ok(den)) = (num, den) else {
                return Err(Error::InvalidMeasure(format!("bad weight {w:?}")));
            };
            if den.is_zero() {
                return Err(Error::InvalidMeasure("zero denominator".into()));
            }
            map.insert(atom, BigRational::new(num, den));
        }
        FiniteMeasure::from_rational_atoms(map)
    } else {
        let mut ctx = Ctx::new(bits);
        let mut map = BTreeMap::new();
        for (atom, w) in parsed_atoms {
            let parsed = astro_float::BigFloat::parse(
                w.trim(),
                astro_float::Radix::Dec,
                bits,
                astro_float::RoundingMode::ToEven,
                ctx.consts(),
            );
            if parsed.is_nan() {
                return Err(Error::InvalidMeasure(format!("bad weight {w:?}")));
            }
            map.insert(atom, parsed);
        }
        FiniteMeasure::from_real_atoms(map, bits)
    }
}
