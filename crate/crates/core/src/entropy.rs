//! Exact laws of the partial sums X'_n = sum xi_j beta^j in Q(beta) and of
//! their reductions Y_n in G_n, Shannon entropy, conditional entropy steps,
//! and the two-sided bound schedule.
//!
//! Rational distributions are carried as integer numerators over one common
//! denominator, so convolution never reduces a fraction; entropies are
//! evaluated from grouped counts at high precision.

use crate::conjugates::{conjugate_profile, Classification};
use crate::error::{Error, Result};
use crate::field::{mul_by_beta, FieldElement};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::measure::{FiniteMeasure, MeasureWeights};
use crate::numeric::{to_f64, Ctx};
use crate::poly::IntPolynomial;
use astro_float::BigFloat;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

pub const DEFAULT_ATOM_BUDGET: usize = 1 << 26;
const ENTROPY_BITS: usize = 192;

/// Entropy in nats with an absolute error bound.
#[derive(Clone, Debug)]
pub struct EntropyValue {
    pub nats: BigFloat,
    pub error_bound: f64,
    pub atoms: usize,
}

impl EntropyValue {
    pub fn exact_zero() -> Self {
        EntropyValue {
            nats: Ctx::new(ENTROPY_BITS).zero(),
            error_bound: 0.0,
            atoms: 1,
        }
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.nats)
    }

    pub fn log2(&self) -> f64 {
        self.to_f64() / std::f64::consts::LN_2
    }
}

/// A probability distribution over canonical atoms; the weight mode is
/// inherited from the source measure.
#[derive(Clone, Debug)]
pub enum AtomDistribution<A: Ord> {
    Rational {
        numerators: BTreeMap<A, BigUint>,
        denominator: BigUint,
    },
    Real {
        weights: BTreeMap<A, BigFloat>,
        bits: usize,
    },
}

impl<A: Ord + Clone> AtomDistribution<A> {
    pub fn len(&self) -> usize {
        match self {
            AtomDistribution::Rational { numerators, .. } => numerators.len(),
            AtomDistribution::Real { weights, .. } => weights.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn atoms(&self) -> Vec<A> {
        match self {
            AtomDistribution::Rational { numerators, .. } => {
                numerators.keys().cloned().collect()
            }
            AtomDistribution::Real { weights, .. } => weights.keys().cloned().collect(),
        }
    }

    pub fn rational_weight(&self, atom: &A) -> Option<num_rational::BigRational> {
        match self {
            AtomDistribution::Rational {
                numerators,
                denominator,
            } => numerators.get(atom).map(|n| {
                num_rational::BigRational::new(
                    BigInt::from(n.clone()),
                    BigInt::from(denominator.clone()),
                )
            }),
            AtomDistribution::Real { .. } => None,
        }
    }

    /// All weights equal (exact for rationals).
    pub fn is_uniform(&self) -> bool {
        match self {
            AtomDistribution::Rational { numerators, .. } => {
                let mut it = numerators.values();
                let Some(first) = it.next() else { return true };
                it.all(|n| n == first)
            }
            AtomDistribution::Real { weights, bits } => {
                let ctx = Ctx::new(*bits);
                let mut it = weights.values();
                let Some(first) = it.next() else { return true };
                it.all(|w| {
                    crate::numeric::below_pow2(&ctx.sub(w, first).abs(), (*bits / 2) as i64)
                })
            }
        }
    }

    /// -sum p log p in nats.
    pub fn entropy(&self) -> EntropyValue {
        match self {
            AtomDistribution::Rational {
                numerators,
                denominator,
            } => entropy_from_counts(numerators.values(), numerators.len(), denominator),
            AtomDistribution::Real { weights, bits } => {
                entropy_from_reals(weights.values(), weights.len(), *bits)
            }
        }
    }
}

/// Distinct-count ceiling for the high-precision path; larger spectra fall
/// back to compensated f64, whose certified bound still clears every stated
/// tolerance by two orders of magnitude.
const HIGH_PREC_GROUP_LIMIT: usize = 4096;

/// H = log Q - (1/Q) sum c_i log c_i, grouping repeated counts so uniform
/// blocks cost one logarithm.
fn entropy_from_counts<'a, I>(counts: I, atoms: usize, denominator: &BigUint) -> EntropyValue
where
    I: Iterator<Item = &'a BigUint>,
{
    if atoms <= 1 {
        return EntropyValue::exact_zero();
    }
    let mut grouped: BTreeMap<&BigUint, u64> = BTreeMap::new();
    for c in counts {
        *grouped.entry(c).or_insert(0) += 1;
    }
    if grouped.len() > HIGH_PREC_GROUP_LIMIT {
        if let Some(v) = entropy_from_counts_f64(&grouped, atoms, denominator) {
            return v;
        }
    }
    let mut ctx = Ctx::new(ENTROPY_BITS);
    let q = ctx.from_biguint(denominator);
    let log_q = ctx.ln(&q);
    let mut acc = ctx.zero();
    for (c, mult) in grouped {
        if c.is_one() {
            continue; // 1 * ln 1 = 0
        }
        let cf = ctx.from_biguint(c);
        let ln_c = ctx.ln(&cf);
        let term = ctx.mul(&cf, &ln_c);
        let m = ctx.from_u64(mult);
        let scaled = ctx.mul(&m, &term);
        acc = ctx.add(&acc, &scaled);
    }
    let nats = ctx.sub(&log_q, &ctx.div(&acc, &q));
    let h = to_f64(&nats);
    // covers the f64 projection as well: callers compare to_f64 values
    let error_bound = (atoms as f64 + 4.0) * 2f64.powi(-(ENTROPY_BITS as i32 - 8)) * (1.0 + h.abs())
        + 4.0 * f64::EPSILON * (1.0 + h.abs());
    EntropyValue {
        nats,
        error_bound,
        atoms,
    }
}

/// Compensated f64 evaluation for wide count spectra. Counts convert to f64
/// with relative error <= 2^-53, each ln contributes <= 2 ulp, and Neumaier
/// summation keeps the accumulation error at a few ulps of the total, so
/// H carries an absolute error below ~1e-13 * (1 + |H|); the reported bound
/// is ten times that.
fn entropy_from_counts_f64(
    grouped: &BTreeMap<&BigUint, u64>,
    atoms: usize,
    denominator: &BigUint,
) -> Option<EntropyValue> {
    if denominator.bits() > 62 {
        return None;
    }
    let q = denominator.to_u64()? as f64;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (c, mult) in grouped {
        let cf = c.to_u64()? as f64;
        let term = (*mult as f64) * cf * cf.ln();
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    let h = q.ln() - (sum + comp) / q;
    let error_bound = 1e-12 * (1.0 + h.abs());
    let ctx = Ctx::new(ENTROPY_BITS);
    Some(EntropyValue {
        nats: ctx.from_f64(h),
        error_bound,
        atoms,
    })
}

fn entropy_from_reals<'a, I>(weights: I, atoms: usize, bits: usize) -> EntropyValue
where
    I: Iterator<Item = &'a BigFloat>,
{
    if atoms <= 1 {
        return EntropyValue::exact_zero();
    }
    let prec = bits.max(ENTROPY_BITS);
    let mut ctx = Ctx::new(prec);
    let mut acc = ctx.zero();
    for w in weights {
        if w.is_zero() {
            continue;
        }
        let ln_w = ctx.ln(w);
        let term = ctx.mul(w, &ln_w);
        acc = ctx.sub(&acc, &term);
    }
    let h = to_f64(&acc);
    // evaluation error, the input weights' own precision, and the f64 cast
    let error_bound = (atoms as f64 + 4.0)
        * (2f64.powi(-(prec as i32 - 8)) + 2f64.powi(-(bits as i32 - 8)))
        * (1.0 + h.abs())
        + 4.0 * f64::EPSILON * (1.0 + h.abs());
    EntropyValue {
        nats: acc,
        error_bound,
        atoms,
    }
}

/// Exact law of sum_{j<n} xi_j beta^j by iterated convolution
/// D_{k+1}(beta x + a) += D_k(x) mu(a).
pub fn distribution_xn(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    n: usize,
    budget: usize,
) -> Result<AtomDistribution<FieldElement>> {
    assert!(n >= 1);
    let d = f.degree();
    match mu.weights() {
        MeasureWeights::Rational(_) => {
            let (atoms, q) = mu.scaled_numerators().expect("rational");
            let mut cur: BTreeMap<FieldElement, BigUint> = BTreeMap::new();
            cur.insert(FieldElement::zero(d), BigUint::one());
            let mut denom = BigUint::one();
            for _ in 0..n {
                let mut next: BTreeMap<FieldElement, BigUint> = BTreeMap::new();
                for (x, c) in &cur {
                    let bx = mul_by_beta(x, f);
                    for (a, w) in &atoms {
                        let y = bx.add_integer(a);
                        let add = c * w;
                        *next.entry(y).or_insert_with(BigUint::zero) += add;
                    }
                    if next.len() > budget {
                        return Err(Error::AtomBudgetExceeded {
                            atoms: next.len(),
                            budget,
                        });
                    }
                }
                cur = next;
                denom *= &q;
            }
            Ok(AtomDistribution::Rational {
                numerators: cur,
                denominator: denom,
            })
        }
        MeasureWeights::Real { .. } => {
            let (atoms, bits) = mu.real_atoms().expect("real");
            let ctx = Ctx::new(bits);
            let mut cur: BTreeMap<FieldElement, BigFloat> = BTreeMap::new();
            cur.insert(FieldElement::zero(d), ctx.one());
            for _ in 0..n {
                let mut next: BTreeMap<FieldElement, BigFloat> = BTreeMap::new();
                for (x, c) in &cur {
                    let bx = mul_by_beta(x, f);
                    for (a, w) in &atoms {
                        let y = bx.add_integer(a);
                        let add = ctx.mul(c, w);
                        match next.get_mut(&y) {
                            Some(t) => *t = ctx.add(t, &add),
                            None => {
                                next.insert(y, add);
                            }
                        }
                    }
                    if next.len() > budget {
                        return Err(Error::AtomBudgetExceeded {
                            atoms: next.len(),
                            budget,
                        });
                    }
                }
                cur = next;
            }
            Ok(AtomDistribution::Real { weights: cur, bits })
        }
    }
}

/// Dense law of Y_n on the group, as numerators over mu's common denominator
/// to the n-th power (rational mode) or extended reals.
pub enum DenseDistribution {
    Rational {
        numerators: Vec<BigUint>,
        denominator: BigUint,
    },
    Real {
        weights: Vec<BigFloat>,
        bits: usize,
    },
}

impl DenseDistribution {
    pub fn support_size(&self) -> usize {
        match self {
            DenseDistribution::Rational { numerators, .. } => {
                numerators.iter().filter(|c| !c.is_zero()).count()
            }
            DenseDistribution::Real { weights, .. } => {
                weights.iter().filter(|w| !w.is_zero()).count()
            }
        }
    }

    pub fn entropy(&self) -> EntropyValue {
        match self {
            DenseDistribution::Rational {
                numerators,
                denominator,
            } => {
                let nonzero: Vec<&BigUint> = numerators.iter().filter(|c| !c.is_zero()).collect();
                entropy_from_counts(nonzero.iter().copied(), nonzero.len(), denominator)
            }
            DenseDistribution::Real { weights, bits } => {
                let nonzero: Vec<&BigFloat> = weights.iter().filter(|w| !w.is_zero()).collect();
                entropy_from_reals(nonzero.iter().copied(), nonzero.len(), *bits)
            }
        }
    }
}

/// Law of sum_{j in [start, start+steps)} xi_j beta^j mod beta^n Z[beta],
/// computed densely over group ranks. `start = 0, steps = n` gives Y_n.
pub fn dense_group_distribution(
    group: &FiniteAbelianGroup,
    mu: &FiniteMeasure,
    start: usize,
    steps: usize,
    budget: usize,
) -> Result<DenseDistribution> {
    let indexer = group.dense_indexer(budget)?;
    let order = indexer.order;
    // shift digit vectors a * beta^(start + j) for each step j and atom a
    let support = mu.support();
    let step_shifts: Vec<Vec<Vec<u64>>> = (0..steps)
        .map(|j| {
            let power = group.beta_power(start + j);
            support
                .iter()
                .map(|a| {
                    let g = scalar_mul(group, &power, a);
                    indexer.digits_of(indexer.rank_of(&g))
                })
                .collect()
        })
        .collect();

    match mu.weights() {
        MeasureWeights::Rational(_) => {
            let (atoms, q) = mu.scaled_numerators().expect("rational");
            let nums: Vec<BigUint> = atoms.iter().map(|(_, w)| w.clone()).collect();
            // u64 fast path when every intermediate numerator fits
            let qbits = q.bits() as usize;
            if qbits * steps <= 62 {
                let nums64: Vec<u64> = nums.iter().map(|x| x.to_u64().unwrap()).collect();
                let mut cur = vec![0u64; order];
                cur[indexer.rank_of(&group.identity())] = 1;
                for shifts in &step_shifts {
                    let mut next = vec![0u64; order];
                    let mut digits = vec![0u64; indexer.radices.len()];
                    for c in cur.iter() {
                        if *c != 0 {
                            for (a, shift) in shifts.iter().enumerate() {
                                let t = indexer.add_digits(&digits, shift);
                                next[t] += *c * nums64[a];
                            }
                        }
                        increment_digits(&mut digits, &indexer.radices);
                    }
                    cur = next;
                }
                let denominator = q.pow(steps as u32);
                return Ok(DenseDistribution::Rational {
                    numerators: cur.into_iter().map(BigUint::from).collect(),
                    denominator,
                });
            }
            let mut cur = vec![BigUint::zero(); order];
            cur[indexer.rank_of(&group.identity())] = BigUint::one();
            for shifts in &step_shifts {
                let mut next = vec![BigUint::zero(); order];
                let mut digits = vec![0u64; indexer.radices.len()];
                for (r, c) in cur.iter().enumerate() {
                    let _ = r;
                    if !c.is_zero() {
                        for (a, shift) in shifts.iter().enumerate() {
                            let t = indexer.add_digits(&digits, shift);
                            next[t] += c * &nums[a];
                        }
                    }
                    increment_digits(&mut digits, &indexer.radices);
                }
                cur = next;
            }
            Ok(DenseDistribution::Rational {
                numerators: cur,
                denominator: q.pow(steps as u32),
            })
        }
        MeasureWeights::Real { .. } => {
            let (atoms, bits) = mu.real_atoms().expect("real");
            let ctx = Ctx::new(bits);
            let weights: Vec<BigFloat> = atoms.iter().map(|(_, w)| w.clone()).collect();
            let mut cur = vec![ctx.zero(); order];
            cur[indexer.rank_of(&group.identity())] = ctx.one();
            for shifts in &step_shifts {
                let mut next = vec![ctx.zero(); order];
                let mut digits = vec![0u64; indexer.radices.len()];
                for c in cur.iter() {
                    if !c.is_zero() {
                        for (a, shift) in shifts.iter().enumerate() {
                            let t = indexer.add_digits(&digits, shift);
                            let add = ctx.mul(c, &weights[a]);
                            next[t] = ctx.add(&next[t], &add);
                        }
                    }
                    increment_digits(&mut digits, &indexer.radices);
                }
                cur = next;
            }
            Ok(DenseDistribution::Real {
                weights: cur,
                bits,
            })
        }
    }
}

fn increment_digits(digits: &mut [u64], radices: &[u64]) {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radices[i] {
            return;
        }
        digits[i] = 0;
    }
}

fn scalar_mul(group: &FiniteAbelianGroup, g: &GroupElement, scalar: &BigInt) -> GroupElement {
    // embed(scalar * poly_rep) keeps this O(n^2) instead of repeated adds
    let rep = group.poly_representative(g);
    let scaled: Vec<BigInt> = rep.iter().map(|c| c * scalar).collect();
    group.embed(&scaled)
}

/// Exact pushforward law of Y_n on G_n.
pub fn distribution_yn(
    group: &FiniteAbelianGroup,
    mu: &FiniteMeasure,
    budget: usize,
) -> Result<AtomDistribution<GroupElement>> {
    let dense = dense_group_distribution(group, mu, 0, group.level(), budget)?;
    let indexer = group.dense_indexer(budget)?;
    Ok(match dense {
        DenseDistribution::Rational {
            numerators,
            denominator,
        } => AtomDistribution::Rational {
            numerators: numerators
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(r, c)| (indexer.element_of(r), c))
                .collect(),
            denominator,
        },
        DenseDistribution::Real { weights, bits } => AtomDistribution::Real {
            weights: weights
                .into_iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(r, w)| (indexer.element_of(r), w))
                .collect(),
            bits,
        },
    })
}

/// H(Y_n) for n = 1..=n_max, with the entry None when a level exceeds the
/// atom budget.
pub fn yn_entropies(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    n_max: usize,
    budget: usize,
) -> Result<Vec<Option<EntropyValue>>> {
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let group = FiniteAbelianGroup::build(f, n)?;
        match dense_group_distribution(&group, mu, 0, n, budget) {
            Ok(d) => out.push(Some(d.entropy())),
            Err(Error::AtomBudgetExceeded { .. }) => out.push(None),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// H(Y_n) - H(Y_{n-1}), with H(Y_0) = 0.
pub fn conditional_entropy_step(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    n: usize,
    budget: usize,
) -> Result<EntropyValue> {
    assert!(n >= 1);
    let h_n = {
        let group = FiniteAbelianGroup::build(f, n)?;
        dense_group_distribution(&group, mu, 0, n, budget)?.entropy()
    };
    let h_prev = if n == 1 {
        EntropyValue::exact_zero()
    } else {
        let group = FiniteAbelianGroup::build(f, n - 1)?;
        dense_group_distribution(&group, mu, 0, n - 1, budget)?.entropy()
    };
    let ctx = Ctx::new(ENTROPY_BITS);
    Ok(EntropyValue {
        nats: ctx.sub(&h_n.nats, &h_prev.nats),
        error_bound: h_n.error_bound + h_prev.error_bound,
        atoms: h_n.atoms,
    })
}

#[derive(Clone, Debug)]
pub struct ScheduleRow {
    pub n: usize,
    pub lower_nats: f64,
    pub upper_nats: f64,
    pub gap: f64,
    pub atoms_x: usize,
    pub atoms_y: usize,
    pub error_bound: f64,
}

#[derive(Clone, Debug)]
pub struct BoundSchedule {
    pub rows: Vec<ScheduleRow>,
    /// Lower bounds converge to the entropy only when every conjugate of
    /// beta lies outside the unit circle; otherwise they are diagnostics.
    pub lower_valid: bool,
    pub skipped_levels: Vec<usize>,
}

impl BoundSchedule {
    pub fn csv(&self) -> String {
        let mut out = String::from("n,lower_nats,upper_nats,gap,atoms_X,atoms_Y,lower_valid\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.15},{:.15},{:.15},{},{},{}\n",
                r.n, r.lower_nats, r.upper_nats, r.gap, r.atoms_x, r.atoms_y, self.lower_valid
            ));
        }
        out
    }
}

/// Rows (n, H(Y_n)/n, H(X_n)/n) for 1 <= n <= n_max; levels whose
/// distributions exceed the budget are skipped, not fatal.
pub fn bound_schedule(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    n_max: usize,
    budget: usize,
) -> Result<BoundSchedule> {
    let profile = conjugate_profile(f, 128);
    let lower_valid = profile.classification == Classification::AllOutsideUnitCircle;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for n in 1..=n_max {
        let x = match distribution_xn(f, mu, n, budget) {
            Ok(d) => d,
            Err(Error::AtomBudgetExceeded { .. }) => {
                skipped.push(n);
                continue;
            }
            Err(e) => return Err(e),
        };
        let group = FiniteAbelianGroup::build(f, n)?;
        let y = match dense_group_distribution(&group, mu, 0, n, budget) {
            Ok(d) => d,
            Err(Error::AtomBudgetExceeded { .. }) => {
                skipped.push(n);
                continue;
            }
            Err(e) => return Err(e),
        };
        let hx = x.entropy();
        let hy = y.entropy();
        let lower = hy.to_f64() / n as f64;
        let upper = hx.to_f64() / n as f64;
        rows.push(ScheduleRow {
            n,
            lower_nats: lower,
            upper_nats: upper,
            gap: upper - lower,
            atoms_x: x.len(),
            atoms_y: y.support_size(),
            error_bound: (hx.error_bound + hy.error_bound) / n as f64,
        });
    }
    Ok(BoundSchedule {
        rows,
        lower_valid,
        skipped_levels: skipped,
    })
}
