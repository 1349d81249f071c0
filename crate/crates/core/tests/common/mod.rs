//! Shared helpers for integration tests: the golden-ratio weight family at
//! a chosen precision, and brute-force law builders kept independent of the
//! production convolution kernels.

#![allow(dead_code)]

use garsia::entropy::EntropyValue;
use garsia::measure::FiniteMeasure;
use garsia::numeric::{BigFloat, Ctx};
use garsia::{FiniteAbelianGroup, GroupElement, IntPolynomial};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

pub fn example_cubic() -> IntPolynomial {
    IntPolynomial::from_i64(&[3, 4, 3, 5])
}

pub fn golden_poly() -> IntPolynomial {
    IntPolynomial::from_i64(&[1, -1, -1])
}

pub fn dyadic_poly() -> IntPolynomial {
    IntPolynomial::from_i64(&[1, -2])
}

pub fn three_halves_poly() -> IntPolynomial {
    IntPolynomial::from_i64(&[2, -3])
}

/// phi = (1 + sqrt 5)/2 at the context precision.
pub fn phi(ctx: &mut Ctx) -> BigFloat {
    let five = ctx.from_u64(5);
    let s = ctx.sqrt(&five);
    let one = ctx.one();
    let two = ctx.from_u64(2);
    ctx.div(&ctx.add(&one, &s), &two)
}

/// The measure on {0..12} with weights 1/(5 phi^2) at 0,2,10,12; 1/(5 phi)
/// at 1,5,7,11; 1/5 at 6. Its zero set at denominators 5^2 is exactly the
/// family {±2/5} + {±(2+5j)/25}.
pub fn golden_measure(bits: usize) -> FiniteMeasure {
    let mut ctx = Ctx::new(bits + 32);
    let phi = phi(&mut ctx);
    let five = ctx.from_u64(5);
    let one = ctx.one();
    let w1 = ctx.div(&one, &ctx.mul(&five, &phi));
    let phi2 = ctx.mul(&phi, &phi);
    let w2 = ctx.div(&one, &ctx.mul(&five, &phi2));
    let w0 = ctx.div(&one, &five);
    let mut atoms = BTreeMap::new();
    for j in [0i64, 2, 10, 12] {
        atoms.insert(BigInt::from(j), w2.clone());
    }
    for j in [1i64, 5, 7, 11] {
        atoms.insert(BigInt::from(j), w1.clone());
    }
    atoms.insert(BigInt::from(6), w0);
    FiniteMeasure::from_real_atoms(atoms, bits).expect("golden weights sum to 1")
}

/// Remainder of sum_j coeffs[j] X^j modulo f over Q, as coordinates in the
/// power basis (independent of the field-element arithmetic).
pub fn poly_remainder_coords(coeffs: &[BigRational], f: &IntPolynomial) -> Vec<BigRational> {
    let d = f.degree();
    let lead = BigRational::from(f.leading().clone());
    let mut rem: Vec<BigRational> = coeffs.to_vec();
    while rem.len() > d {
        let k = rem.len() - 1;
        let q = &rem[k] / &lead;
        if !q.is_zero() {
            for j in 0..=d {
                let idx = k - d + j;
                let s = &q * BigRational::from(f.coeff(j).clone());
                rem[idx] -= s;
            }
        }
        rem.pop();
    }
    rem.resize(d, BigRational::zero());
    rem
}

/// Law of sum_{j<n} xi_j beta^j by direct tuple enumeration; the oracle for
/// the convolution path.
pub fn xn_law_bruteforce(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    n: usize,
) -> BTreeMap<Vec<BigRational>, BigRational> {
    let garsia::measure::MeasureWeights::Rational(atoms) = mu.weights() else {
        panic!("brute-force oracle needs rational weights");
    };
    let entries: Vec<(BigInt, BigRational)> =
        atoms.iter().map(|(a, w)| (a.clone(), w.clone())).collect();
    let mut law = BTreeMap::new();
    let mut tuple = vec![0usize; n];
    loop {
        let coeffs: Vec<BigRational> = tuple
            .iter()
            .map(|&i| BigRational::from(entries[i].0.clone()))
            .collect();
        let coords = poly_remainder_coords(&coeffs, f);
        let weight: BigRational = tuple
            .iter()
            .map(|&i| entries[i].1.clone())
            .fold(BigRational::one(), |acc, w| acc * w);
        *law.entry(coords).or_insert_with(BigRational::zero) += weight;
        // odometer
        let mut pos = 0;
        loop {
            if pos == n {
                return law;
            }
            tuple[pos] += 1;
            if tuple[pos] < entries.len() {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

/// Law of Y_n by direct tuple enumeration through the group embedding.
pub fn yn_law_bruteforce(
    group: &FiniteAbelianGroup,
    mu: &FiniteMeasure,
) -> BTreeMap<GroupElement, BigRational> {
    let garsia::measure::MeasureWeights::Rational(atoms) = mu.weights() else {
        panic!("brute-force oracle needs rational weights");
    };
    let entries: Vec<(BigInt, BigRational)> =
        atoms.iter().map(|(a, w)| (a.clone(), w.clone())).collect();
    let n = group.level();
    let mut law = BTreeMap::new();
    let mut tuple = vec![0usize; n];
    loop {
        let coeffs: Vec<BigInt> = tuple.iter().map(|&i| entries[i].0.clone()).collect();
        let g = group.embed(&coeffs);
        let weight: BigRational = tuple
            .iter()
            .map(|&i| entries[i].1.clone())
            .fold(BigRational::one(), |acc, w| acc * w);
        *law.entry(g).or_insert_with(BigRational::zero) += weight;
        let mut pos = 0;
        loop {
            if pos == n {
                return law;
            }
            tuple[pos] += 1;
            if tuple[pos] < entries.len() {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

/// Shannon entropy of an exact law, straight from the definition.
pub fn entropy_bruteforce<K: Ord>(law: &BTreeMap<K, BigRational>) -> f64 {
    let mut ctx = Ctx::new(192);
    let mut acc = ctx.zero();
    for w in law.values() {
        if w.is_zero() {
            continue;
        }
        let wf = ctx.from_rational(w);
        let l = ctx.ln(&wf);
        let term = ctx.mul(&wf, &l);
        acc = ctx.sub(&acc, &term);
    }
    garsia::numeric::to_f64(&acc)
}

pub fn ent(v: &EntropyValue) -> f64 {
    v.to_f64()
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn ln_of(m: &BigUint) -> f64 {
    let mut ctx = Ctx::new(192);
    let f = ctx.from_biguint(m);
    garsia::numeric::to_f64(&ctx.ln(&f))
}
