//! The finite abelian quotients G_n = Z[X]/(f, X^n) in Smith-normal-form
//! coordinates, with element and character arithmetic, the level projection,
//! images of the beta powers, and the cyclic identification when 1 generates.

use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use crate::snf::{smith_normal_form, Matrix};
use crate::RationalAngle;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct GroupElement {
    coords: Vec<BigUint>,
}

impl GroupElement {
    pub fn coords(&self) -> &[BigUint] {
        &self.coords
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Character {
    coords: Vec<BigUint>,
}

impl Character {
    pub fn coords(&self) -> &[BigUint] {
        &self.coords
    }

    pub fn is_trivial(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

pub struct FiniteAbelianGroup {
    f: IntPolynomial,
    level: usize,
    radices: Vec<BigUint>,
    u: Matrix,
    u_inv: Matrix,
    #[allow(dead_code)]
    v: Matrix,
    order: BigUint,
}

impl FiniteAbelianGroup {
    /// SNF of the relation lattice spanned by X^j * f mod X^n. The order is
    /// checked against |a_0|^n; a mismatch would mean an SNF bug.
    pub fn build(f: &IntPolynomial, n: usize) -> Result<Self> {
        assert!(n >= 1, "level must be at least 1");
        let d = f.degree();
        let mut relation = vec![vec![BigInt::zero(); n]; n];
        for (i, row) in relation.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate().take(i + 1) {
                if i - j <= d {
                    *cell = f.coeff(i - j).clone();
                }
            }
        }
        let snf = smith_normal_form(&relation);
        let radices: Vec<BigUint> = snf
            .diag
            .iter()
            .map(|x| x.magnitude().clone())
            .collect();
        let order: BigUint = radices.iter().product();
        let expected = f.modulus().pow(n as u32);
        if order != expected {
            return Err(Error::OrderMismatch {
                got: order.to_string(),
                expected: expected.to_string(),
            });
        }
        Ok(FiniteAbelianGroup {
            f: f.clone(),
            level: n,
            radices,
            u: snf.u,
            u_inv: snf.u_inv,
            v: snf.v,
            order,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn polynomial(&self) -> &IntPolynomial {
        &self.f
    }

    /// Invariant factors d_1 | d_2 | ... | d_n (ones included).
    pub fn invariant_factors(&self) -> &[BigUint] {
        &self.radices
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: vec![BigUint::zero(); self.level],
        }
    }

    pub fn trivial_character(&self) -> Character {
        Character {
            coords: vec![BigUint::zero(); self.level],
        }
    }

    /// Image of sum_j coeffs[j] X^j (missing trailing coefficients are zero).
    pub fn embed(&self, coeffs: &[BigInt]) -> GroupElement {
        assert!(coeffs.len() <= self.level);
        let coords = (0..self.level)
            .map(|i| {
                let mut acc = BigInt::zero();
                for (j, c) in coeffs.iter().enumerate() {
                    acc += &self.u[i][j] * c;
                }
                reduce_mod(&acc, &self.radices[i])
            })
            .collect();
        GroupElement { coords }
    }

    /// Class of X^k; the identity for k >= n.
    pub fn beta_power(&self, k: usize) -> GroupElement {
        if k >= self.level {
            return self.identity();
        }
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = BigInt::one();
        self.embed(&coeffs)
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.radices)
            .map(|((x, y), d)| {
                if d.is_one() {
                    BigUint::zero()
                } else {
                    (x + y) % d
                }
            })
            .collect();
        GroupElement { coords }
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        let coords = a
            .coords
            .iter()
            .zip(&self.radices)
            .map(|(x, d)| if x.is_zero() { BigUint::zero() } else { d - x })
            .collect();
        GroupElement { coords }
    }

    pub fn element_order(&self, a: &GroupElement) -> BigUint {
        let mut ord = BigUint::one();
        for (x, d) in a.coords.iter().zip(&self.radices) {
            if d.is_one() {
                continue;
            }
            let g = x.gcd(d);
            ord = ord.lcm(&(d / g));
        }
        ord
    }

    /// An integer-coefficient representative c_0..c_{n-1} of a.
    pub fn poly_representative(&self, a: &GroupElement) -> Vec<BigInt> {
        (0..self.level)
            .map(|j| {
                let mut acc = BigInt::zero();
                for (i, c) in a.coords.iter().enumerate() {
                    acc += &self.u_inv[j][i] * BigInt::from(c.clone());
                }
                acc
            })
            .collect()
    }

    /// Projection to a lower level (truncate the polynomial representative).
    pub fn project(&self, a: &GroupElement, target: &FiniteAbelianGroup) -> GroupElement {
        assert!(target.level <= self.level);
        assert_eq!(target.f, self.f);
        let rep = self.poly_representative(a);
        target.embed(&rep[..target.level])
    }

    /// <psi, g> = sum_i psi_i g_i / d_i in Q/Z.
    pub fn pairing(&self, psi: &Character, g: &GroupElement) -> RationalAngle {
        let mut acc = BigRational::zero();
        for ((p, x), d) in psi.coords.iter().zip(&g.coords).zip(&self.radices) {
            if d.is_one() || p.is_zero() || x.is_zero() {
                continue;
            }
            acc += BigRational::new(BigInt::from(p * x), BigInt::from(d.clone()));
        }
        RationalAngle::new(acc.numer(), acc.denom())
    }

    /// All characters, lexicographic on SNF coordinates (last coordinate
    /// varies fastest). Streaming: nothing is materialized.
    pub fn characters(&self) -> CharacterIter<'_> {
        CharacterIter {
            radices: &self.radices,
            current: Some(vec![BigUint::zero(); self.level]),
        }
    }

    /// The characters of G_n not lying in the dual of G_{n-1}: exactly those
    /// pairing nontrivially with the class of X^(n-1), which generates
    /// ker(G_n -> G_{n-1}).
    pub fn characters_new_at_level(&self) -> impl Iterator<Item = Character> + '_ {
        let kernel_gen = self.beta_power(self.level - 1);
        self.characters()
            .filter(move |psi| !self.pairing(psi, &kernel_gen).is_zero())
    }

    pub fn is_cyclic(&self) -> bool {
        self.radices[..self.level.saturating_sub(1)]
            .iter()
            .all(|d| d.is_one())
    }

    /// The identification Phi: G_n -> Z/M^n with Phi(1) = 1, available when
    /// the group is cyclic and the class of 1 generates. gcd(a_0, a_1) = 1 is
    /// the standard sufficient condition for that.
    pub fn cyclic_isomorphism(&self) -> Result<CyclicIso> {
        if !self.is_cyclic() {
            return Err(Error::NotCyclic);
        }
        let modulus = self.order.clone();
        if modulus.is_one() {
            return Ok(CyclicIso {
                modulus,
                t: BigUint::zero(),
                one_last: BigUint::zero(),
                one_last_inv: BigUint::zero(),
                beta_images: vec![BigUint::zero(); self.level],
            });
        }
        let one = self.embed(&[BigInt::one()]);
        let g = one.coords[self.level - 1].gcd(&modulus);
        if !g.is_one() {
            return Err(Error::CyclicButOneNotGenerator);
        }
        let one_last = one.coords[self.level - 1].clone();
        let one_last_inv = mod_inverse(&one_last, &modulus).expect("coprime");
        let beta_images: Vec<BigUint> = (0..self.level)
            .map(|k| {
                let bk = self.beta_power(k);
                (&bk.coords[self.level - 1] * &one_last_inv) % &modulus
            })
            .collect();
        Ok(CyclicIso {
            modulus,
            t: beta_images.get(1).cloned().unwrap_or_else(BigUint::zero),
            one_last,
            one_last_inv,
            beta_images,
        })
    }

    /// Mixed-radix indexing for dense distributions; available when the
    /// order fits the budget.
    pub fn dense_indexer(&self, budget: usize) -> Result<DenseIndexer> {
        let order = self.order.to_usize().filter(|&o| o <= budget).ok_or(
            Error::AtomBudgetExceeded {
                atoms: self.order.to_usize().unwrap_or(usize::MAX),
                budget,
            },
        )?;
        let radices: Vec<u64> = self
            .radices
            .iter()
            .map(|d| d.to_u64().expect("radix fits"))
            .collect();
        let mut places = vec![1u64; radices.len()];
        for i in (0..radices.len().saturating_sub(1)).rev() {
            places[i] = places[i + 1] * radices[i + 1];
        }
        Ok(DenseIndexer {
            radices,
            places,
            order,
        })
    }
}

#[derive(Clone, Debug)]
pub struct CyclicIso {
    /// M^n
    pub modulus: BigUint,
    /// Phi(X)
    pub t: BigUint,
    one_last: BigUint,
    one_last_inv: BigUint,
    /// Phi(beta^k) for 0 <= k < n.
    pub beta_images: Vec<BigUint>,
}

impl CyclicIso {
    pub fn phi(&self, group: &FiniteAbelianGroup, g: &GroupElement) -> BigUint {
        if self.modulus.is_one() {
            return BigUint::zero();
        }
        (&g.coords[group.level() - 1] * &self.one_last_inv) % &self.modulus
    }

    /// Psi(psi): the integer x with psi(y) = e(x Phi(y) / M^n).
    pub fn psi_of(&self, group: &FiniteAbelianGroup, psi: &Character) -> BigUint {
        if self.modulus.is_one() {
            return BigUint::zero();
        }
        (&psi.coords()[group.level() - 1] * &self.one_last) % &self.modulus
    }

    pub fn character_of_psi(&self, group: &FiniteAbelianGroup, x: &BigUint) -> Character {
        let mut coords = vec![BigUint::zero(); group.level()];
        if !self.modulus.is_one() {
            coords[group.level() - 1] = (x * &self.one_last_inv) % &self.modulus;
        }
        Character { coords }
    }

    /// k_j with Phi(beta^j) = k_j M^j and gcd(k_j, M) = 1, as an element of
    /// Z/M^(n-j).
    pub fn unit_factor(&self, base: &BigUint, j: usize) -> BigUint {
        let mj = base.pow(j as u32);
        let img = &self.beta_images[j];
        debug_assert!((img % &mj).is_zero());
        let k = img / &mj;
        let rem_mod = &self.modulus / &mj;
        if rem_mod.is_one() {
            BigUint::zero()
        } else {
            k % rem_mod
        }
    }
}

pub struct CharacterIter<'a> {
    radices: &'a [BigUint],
    current: Option<Vec<BigUint>>,
}

impl Iterator for CharacterIter<'_> {
    type Item = Character;

    fn next(&mut self) -> Option<Character> {
        let coords = self.current.clone()?;
        // odometer increment, last coordinate fastest
        let mut next = coords.clone();
        let mut idx = self.radices.len();
        loop {
            if idx == 0 {
                self.current = None;
                break;
            }
            idx -= 1;
            next[idx] += BigUint::one();
            if next[idx] < self.radices[idx] {
                self.current = Some(next);
                break;
            }
            next[idx] = BigUint::zero();
        }
        Some(Character { coords })
    }
}

#[derive(Clone, Debug)]
pub struct DenseIndexer {
    pub radices: Vec<u64>,
    pub places: Vec<u64>,
    pub order: usize,
}

impl DenseIndexer {
    pub fn rank_of(&self, g: &GroupElement) -> usize {
        g.coords
            .iter()
            .zip(&self.places)
            .map(|(c, p)| c.to_u64().expect("coord fits") as usize * *p as usize)
            .sum()
    }

    pub fn digits_of(&self, mut rank: usize) -> Vec<u64> {
        let mut digits = vec![0u64; self.radices.len()];
        for (i, p) in self.places.iter().enumerate() {
            digits[i] = (rank / *p as usize) as u64;
            rank %= *p as usize;
        }
        digits
    }

    pub fn element_of(&self, rank: usize) -> GroupElement {
        GroupElement {
            coords: self.digits_of(rank).iter().map(|&d| BigUint::from(d)).collect(),
        }
    }

    /// rank(a + b) given digit vectors.
    pub fn add_digits(&self, a: &[u64], b: &[u64]) -> usize {
        let mut rank = 0usize;
        for i in 0..self.radices.len() {
            let d = self.radices[i];
            let mut s = a[i] + b[i];
            if s >= d {
                s -= d;
            }
            rank += s as usize * self.places[i] as usize;
        }
        rank
    }
}

fn reduce_mod(x: &BigInt, d: &BigUint) -> BigUint {
    if d.is_one() {
        return BigUint::zero();
    }
    let dd = BigInt::from(d.clone());
    let r = x.mod_floor(&dd);
    r.magnitude().clone()
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    let inv = ext.x.mod_floor(&m);
    Some(inv.magnitude().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(coeffs: &[i64], n: usize) -> FiniteAbelianGroup {
        FiniteAbelianGroup::build(&IntPolynomial::from_i64(coeffs), n).unwrap()
    }

    #[test]
    fn linear_level_two() {
        let g = group(&[2, -3], 2);
        assert_eq!(
            g.invariant_factors(),
            &[BigUint::one(), BigUint::from(9u8)]
        );
        assert_eq!(g.order(), &BigUint::from(9u8));
    }

    #[test]
    fn example_cubic_level_two_is_cyclic_25() {
        let g = group(&[3, 4, 3, 5], 2);
        assert_eq!(g.order(), &BigUint::from(25u8));
        assert!(g.is_cyclic());
        let iso = g.cyclic_isomorphism().unwrap();
        assert_eq!(iso.t, BigUint::from(15u8));
    }

    #[test]
    fn golden_is_trivial() {
        let g = group(&[1, -1, -1], 4);
        assert_eq!(g.order(), &BigUint::one());
        let iso = g.cyclic_isomorphism().unwrap();
        assert_eq!(iso.t, BigUint::zero());
    }

    #[test]
    fn orders_match_modulus_power() {
        for coeffs in [&[3i64, 4, 3, 5][..], &[2, -3][..], &[1, -2][..]] {
            let f = IntPolynomial::from_i64(coeffs);
            for n in 1..=6 {
                let g = FiniteAbelianGroup::build(&f, n).unwrap();
                assert_eq!(g.order(), &f.modulus().pow(n as u32));
            }
        }
    }

    #[test]
    fn embed_beta_is_fifteen_times_one() {
        let g = group(&[3, 4, 3, 5], 2);
        let beta = g.beta_power(1);
        let one = g.embed(&[BigInt::one()]);
        let mut acc = g.identity();
        for _ in 0..15 {
            acc = g.add(&acc, &one);
        }
        assert_eq!(acc, beta);
    }

    #[test]
    fn embed_kills_ideal_members() {
        // a_0 X^(n-1) lies in the ideal
        let g = group(&[3, 4, 3, 5], 3);
        let mut coeffs = vec![BigInt::zero(); 3];
        coeffs[2] = BigInt::from(5);
        assert_eq!(g.embed(&coeffs), g.identity());
        assert_eq!(g.beta_power(7), g.identity());
    }

    #[test]
    fn beta_power_orders() {
        // cyclic case: order of beta^k is exactly M^(n-k)
        let g = group(&[3, 4, 3, 5], 3);
        for k in 0..3 {
            let ord = g.element_order(&g.beta_power(k));
            assert_eq!(ord, BigUint::from(5u8).pow((3 - k) as u32));
        }
        let g = group(&[2, -3], 3);
        assert_eq!(g.element_order(&g.beta_power(0)), BigUint::from(27u8));
    }

    #[test]
    fn projection_compatibility() {
        let f = IntPolynomial::from_i64(&[3, 4, 3, 5]);
        let g3 = FiniteAbelianGroup::build(&f, 3).unwrap();
        let g2 = FiniteAbelianGroup::build(&f, 2).unwrap();
        let coeffs = vec![BigInt::from(7), BigInt::from(-2), BigInt::from(11)];
        let a = g3.embed(&coeffs);
        let projected = g3.project(&a, &g2);
        assert_eq!(projected, g2.embed(&coeffs[..2]));
        // kernel of the projection has exactly |a_0| elements
        let indexer = g3.dense_indexer(1 << 20).unwrap();
        let kernel = (0..indexer.order)
            .filter(|&r| g3.project(&indexer.element_of(r), &g2) == g2.identity())
            .count();
        assert_eq!(kernel, 5);
    }

    #[test]
    fn new_character_counts() {
        let g = group(&[3, 4, 3, 5], 1);
        assert_eq!(g.characters_new_at_level().count(), 4);
        let g = group(&[3, 4, 3, 5], 2);
        assert_eq!(g.characters_new_at_level().count(), 20);
        let g = group(&[1, -1, -1], 2);
        assert_eq!(g.characters_new_at_level().count(), 0);
    }

    #[test]
    fn pairing_nondegenerate() {
        let g = group(&[2, -3], 2);
        let indexer = g.dense_indexer(1 << 10).unwrap();
        for psi in g.characters() {
            if psi.is_trivial() {
                continue;
            }
            let hit = (0..indexer.order)
                .any(|r| !g.pairing(&psi, &indexer.element_of(r)).is_zero());
            assert!(hit, "character {psi:?} pairs trivially with everything");
        }
    }

    #[test]
    fn linear_cyclic_iso() {
        let g = group(&[2, -3], 2);
        let iso = g.cyclic_isomorphism().unwrap();
        // 2t = 3 mod 9
        assert_eq!(iso.t, BigUint::from(6u8));
        let g3 = group(&[2, -3], 3);
        let iso3 = g3.cyclic_isomorphism().unwrap();
        assert_eq!((BigUint::from(2u8) * &iso3.t) % BigUint::from(27u8), BigUint::from(3u8));
    }

    #[test]
    fn generator_subsets() {
        // 1, X, ..., X^(r-1) generate where r = min{j: gcd(a_0..a_j) = 1}
        let f = IntPolynomial::from_i64(&[1, 0, 2, 2]); // a_0=2, a_1=2, a_2=0, a_3=1 -> r=3
        for n in 1..=4 {
            let g = FiniteAbelianGroup::build(&f, n).unwrap();
            let indexer = g.dense_indexer(1 << 16).unwrap();
            let mut reached = std::collections::BTreeSet::new();
            let mut frontier = vec![g.identity()];
            reached.insert(indexer.rank_of(&g.identity()));
            let gens: Vec<GroupElement> = (0..3.min(n)).map(|k| g.beta_power(k)).collect();
            while let Some(x) = frontier.pop() {
                for gen in &gens {
                    let y = g.add(&x, gen);
                    if reached.insert(indexer.rank_of(&y)) {
                        frontier.push(y);
                    }
                }
            }
            assert_eq!(reached.len(), indexer.order);
        }
    }
}
