//! Complete vanishing at a level: every character of G_m new at level m is
//! annihilated by some factor P(psi(beta^k)), k < m. This is the finite,
//! decidable certificate of maximal entropy; the searches, the three-way
//! cross-check, and the dual spectrum support all live here.

use crate::conjugates::{conjugate_profile, Classification};
use crate::entropy::{conditional_entropy_step, dense_group_distribution, DenseDistribution};
use crate::error::{Error, Result};
use crate::group::{Character, FiniteAbelianGroup};
use crate::measure::{is_zero_angle, zero_angles, FiniteMeasure, ZeroAngleSet};
use crate::numeric::{below_pow2, Ctx};
use crate::poly::IntPolynomial;
use crate::RationalAngle;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;

pub const DEFAULT_GROUP_BUDGET: usize = 1 << 26;

#[derive(Clone, Debug)]
pub struct Witness {
    pub character: Character,
    pub k: u32,
    pub angle: RationalAngle,
}

#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub level: u32,
    pub verdict: bool,
    /// One witness per new character, kept only on request.
    pub witnesses: Option<Vec<Witness>>,
    pub first_unkilled: Option<Character>,
    pub characters_checked: usize,
    /// Set when zero membership came from the numeric test.
    pub heuristic: bool,
}

fn require_all_outside(f: &IntPolynomial) -> Result<()> {
    let profile = conjugate_profile(f, 128);
    if profile.classification != Classification::AllOutsideUnitCircle {
        return Err(Error::WrongConjugateProfile {
            profile: profile.classification.to_string(),
        });
    }
    Ok(())
}

/// Decide complete vanishing at level m by streaming the new-at-level
/// characters and scanning k = 0..m-1 for a zero angle; short-circuits on
/// the first unkilled character.
pub fn is_complete_vanishing(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    m: u32,
    full_witnesses: bool,
) -> Result<VanishingReport> {
    assert!(m >= 1);
    require_all_outside(f)?;
    let zeros = zero_angles(mu, &f.modulus(), m)?;
    vanishing_against_zero_set(f, &zeros, m, full_witnesses)
}

/// The same scan against a precomputed zero set (angles with denominator
/// dividing M^m suffice: the pairing with beta^k has denominator M^(m-k)).
pub fn vanishing_against_zero_set(
    f: &IntPolynomial,
    zeros: &ZeroAngleSet,
    m: u32,
    full_witnesses: bool,
) -> Result<VanishingReport> {
    let group = FiniteAbelianGroup::build(f, m as usize)?;
    let powers: Vec<_> = (0..m as usize).map(|k| group.beta_power(k)).collect();
    let mut witnesses = if full_witnesses { Some(Vec::new()) } else { None };
    let mut checked = 0usize;
    for psi in group.characters_new_at_level() {
        checked += 1;
        let mut killed = None;
        for (k, power) in powers.iter().enumerate() {
            let angle = group.pairing(&psi, power);
            if zeros.contains(&angle) {
                killed = Some(Witness {
                    character: psi.clone(),
                    k: k as u32,
                    angle,
                });
                break;
            }
        }
        match killed {
            Some(w) => {
                if let Some(ws) = witnesses.as_mut() {
                    ws.push(w);
                }
            }
            None => {
                return Ok(VanishingReport {
                    level: m,
                    verdict: false,
                    witnesses: None,
                    first_unkilled: Some(psi),
                    characters_checked: checked,
                    heuristic: zeros.heuristic,
                });
            }
        }
    }
    Ok(VanishingReport {
        level: m,
        verdict: true,
        witnesses,
        first_unkilled: None,
        characters_checked: checked,
        heuristic: zeros.heuristic,
    })
}

/// Default search ceiling in the cyclic case, from the interval-length
/// threshold: floor((|I|/(M-1) + 1)/2) for M odd, floor(|I|/(2(M-1)) + 1)
/// for M even.
pub fn default_search_bound(f: &IntPolynomial, interval_len: &BigUint) -> Result<u32> {
    if !f.is_cyclic_case() {
        return Err(Error::NoBoundAvailable);
    }
    let m = f.modulus();
    let m_minus_1 = &m - 1u8;
    let bound = if (&m % 2u8).is_zero() {
        interval_len / (BigUint::from(2u8) * &m_minus_1) + 1u8
    } else {
        (interval_len + &m_minus_1) / (BigUint::from(2u8) * &m_minus_1)
    };
    Ok(bound.to_u32().unwrap_or(u32::MAX))
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub level: u32,
    pub report: VanishingReport,
    /// Affine normalization applied before the search.
    pub shift: num_bigint::BigInt,
    pub scale: BigUint,
    pub m_max: u32,
}

/// Smallest m <= m_max with complete vanishing for the support-normalized
/// measure, or None. Without an explicit m_max the cyclic-case interval
/// bound is used; outside the cyclic case an explicit bound is mandatory.
pub fn search_vanishing(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    m_max: Option<u32>,
) -> Result<Option<SearchOutcome>> {
    require_all_outside(f)?;
    let (normalized, shift, scale) = mu.normalize_support();
    let m_max = match m_max {
        Some(m) => m,
        None => default_search_bound(f, &normalized.interval_length())?,
    };
    for m in 1..=m_max {
        let report = is_complete_vanishing(f, &normalized, m, true)?;
        if report.verdict {
            return Ok(Some(SearchOutcome {
                level: m,
                report,
                shift,
                scale,
                m_max,
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct CharEquiReport {
    pub level: u32,
    pub entropy_cond: bool,
    pub equidist_cond: bool,
    pub character_cond: bool,
    pub entropy_step_nats: f64,
    pub entropy_step_log2: f64,
    pub entropy_target_nats: f64,
    pub tolerance: f64,
    pub heuristic: bool,
}

impl CharEquiReport {
    pub fn all(&self) -> bool {
        self.entropy_cond && self.equidist_cond && self.character_cond
    }
}

/// Evaluates the three equivalent conditions independently:
/// 1. H(Y_n | Y_{n-1}) = log M, via the entropy difference;
/// 2. Y_n | Y_{n-1} = x equidistributed on every fiber, by direct inspection;
/// 3. E[psi(Y_n)] = prod_k P(psi(beta^k)) = 0 for every new character.
///
/// Their disagreement is an implementation bug, reported as an error.
pub fn charequi_check(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    n: u32,
    budget: usize,
) -> Result<CharEquiReport> {
    assert!(n >= 1);
    let n_us = n as usize;
    let m_big = f.modulus();

    // condition 1: entropy step
    let step = conditional_entropy_step(f, mu, n_us, budget)?;
    let mut ctx = Ctx::new(192);
    let target = if m_big.is_one() {
        0.0
    } else {
        let mf = ctx.from_biguint(&m_big);
        crate::numeric::to_f64(&ctx.ln(&mf))
    };
    let tolerance = match mu.bits() {
        None => 1e-9,
        Some(_) => 1e-12 * n as f64,
    };
    let entropy_cond = (step.to_f64() - target).abs() <= tolerance + step.error_bound;

    // condition 2: fiber inspection of the dense law
    let group = FiniteAbelianGroup::build(f, n_us)?;
    let dense = dense_group_distribution(&group, mu, 0, n_us, budget)?;
    let equidist_cond = fibers_equidistributed(f, &group, &dense, budget)?;

    // condition 3: character sums over the new characters
    let zeros_heuristic = !mu.is_rational();
    let mut cache = HashMap::new();
    let powers: Vec<_> = (0..n_us).map(|k| group.beta_power(k)).collect();
    let mut character_cond = true;
    let mut angle_results: HashMap<RationalAngle, bool> = HashMap::new();
    'outer: for psi in group.characters_new_at_level() {
        let mut vanishes = false;
        for power in &powers {
            let angle = group.pairing(&psi, power);
            let is_zero = match angle_results.get(&angle) {
                Some(&b) => b,
                None => {
                    let b = is_zero_angle(mu, &angle, &mut cache)?;
                    angle_results.insert(angle.clone(), b);
                    b
                }
            };
            if is_zero {
                vanishes = true;
                break;
            }
        }
        if !vanishes {
            character_cond = false;
            break 'outer;
        }
    }

    let report = CharEquiReport {
        level: n,
        entropy_cond,
        equidist_cond,
        character_cond,
        entropy_step_nats: step.to_f64(),
        entropy_step_log2: step.log2(),
        entropy_target_nats: target,
        tolerance,
        heuristic: zeros_heuristic,
    };
    if !(entropy_cond == equidist_cond && equidist_cond == character_cond) {
        return Err(Error::EquivalenceViolation {
            entropy: entropy_cond,
            equidist: equidist_cond,
            character: character_cond,
        });
    }
    Ok(report)
}

/// Every fiber of G_n -> G_{n-1} carries equal conditional weights. For
/// n = 1 the single fiber is the whole group.
fn fibers_equidistributed(
    f: &IntPolynomial,
    group: &FiniteAbelianGroup,
    dense: &DenseDistribution,
    budget: usize,
) -> Result<bool> {
    let n = group.level();
    let indexer = group.dense_indexer(budget)?;
    let parent_count;
    let parent_of: Vec<usize> = if n == 1 {
        parent_count = 1;
        vec![0; indexer.order]
    } else {
        let target = FiniteAbelianGroup::build(f, n - 1)?;
        let tindexer = target.dense_indexer(budget)?;
        parent_count = tindexer.order;
        (0..indexer.order)
            .map(|r| tindexer.rank_of(&group.project(&indexer.element_of(r), &target)))
            .collect()
    };
    match dense {
        DenseDistribution::Rational { numerators, .. } => {
            let mut first: Vec<Option<&BigUint>> = vec![None; parent_count];
            for (r, c) in numerators.iter().enumerate() {
                let p = parent_of[r];
                match first[p] {
                    None => first[p] = Some(c),
                    Some(f0) => {
                        if f0 != c {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
        DenseDistribution::Real { weights, bits } => {
            let ctx = Ctx::new(*bits);
            let mut first: Vec<Option<&astro_float::BigFloat>> = vec![None; parent_count];
            for (r, c) in weights.iter().enumerate() {
                let p = parent_of[r];
                match first[p] {
                    None => first[p] = Some(c),
                    Some(f0) => {
                        let dev = ctx.sub(f0, c).abs();
                        if !below_pow2(&dev, (*bits / 2) as i64) {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

/// The dual support {psi in G_n^: E[psi(Y_n)] != 0}, decided factor by
/// factor against the zero set. Requires complete vanishing verified at
/// level m <= n; the support is then checked to lie in the dual of G_{m-1},
/// i.e. every member is trivial on ker(G_n -> G_{m-1}).
pub fn spectrum_support(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    n: u32,
    m: u32,
    budget: usize,
) -> Result<Vec<Character>> {
    assert!(m >= 1 && m <= n);
    let report = is_complete_vanishing(f, mu, m, false)?;
    if !report.verdict {
        return Err(Error::VanishingNotVerified { level: m });
    }
    let group = FiniteAbelianGroup::build(f, n as usize)?;
    let order = group
        .order()
        .to_usize()
        .filter(|&o| o <= budget)
        .ok_or(Error::AtomBudgetExceeded {
            atoms: usize::MAX,
            budget,
        })?;
    let _ = order;
    let zeros = zero_angles(mu, &f.modulus(), n)?;
    let powers: Vec<_> = (0..n as usize).map(|k| group.beta_power(k)).collect();
    let kernel_gens: Vec<_> = ((m - 1) as usize..n as usize)
        .map(|j| group.beta_power(j))
        .collect();
    let mut support = Vec::new();
    for psi in group.characters() {
        let vanishes = powers
            .iter()
            .any(|p| zeros.contains(&group.pairing(&psi, p)));
        if !vanishes {
            for g in &kernel_gens {
                if !group.pairing(&psi, g).is_zero() {
                    return Err(Error::Internal(format!(
                        "spectrum member {:?} is nontrivial on ker(G_{} -> G_{})",
                        psi.coords(),
                        n,
                        m - 1
                    )));
                }
            }
            support.push(psi);
        }
    }
    Ok(support)
}
