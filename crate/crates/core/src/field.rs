//! Exact arithmetic in Q(beta) in the power basis 1, beta, ..., beta^(d-1).

use crate::poly::IntPolynomial;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// x = sum_j coords[j] * beta^j; the representation is unique, so derived
/// equality and ordering are canonical.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct FieldElement {
    coords: Vec<BigRational>,
}

impl FieldElement {
    pub fn zero(degree: usize) -> Self {
        FieldElement {
            coords: vec![BigRational::zero(); degree],
        }
    }

    pub fn from_coords(coords: Vec<BigRational>) -> Self {
        FieldElement { coords }
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn add(&self, other: &Self) -> Self {
        FieldElement {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn add_integer(&self, a: &BigInt) -> Self {
        let mut coords = self.coords.clone();
        coords[0] += BigRational::from(a.clone());
        FieldElement { coords }
    }
}

/// beta * x, using beta^d = -(a_{d-1} beta^{d-1} + ... + a_0) / a_d.
pub fn mul_by_beta(x: &FieldElement, f: &IntPolynomial) -> FieldElement {
    let d = f.degree();
    let top = x.coords()[d - 1].clone();
    let mut coords = vec![BigRational::zero(); d];
    if !top.is_zero() {
        let lead = BigRational::from(f.leading().clone());
        let factor = top / lead;
        for (j, c) in coords.iter_mut().enumerate() {
            *c = -&factor * BigRational::from(f.coeff(j).clone());
        }
    }
    for (j, c) in coords.iter_mut().enumerate().skip(1) {
        *c += &x.coords()[j - 1];
    }
    FieldElement { coords }
}
