//! Cyclic-case classification of maximal-entropy measures: the weight
//! stratification of zero angles, kill-cosets of new characters, the
//! enumeration of inclusion-minimal symmetric zero-set families per level,
//! interval-length thresholds, and measure-vs-family matching.

use crate::error::{Error, Result};
use crate::group::{CyclicIso, FiniteAbelianGroup};
use crate::measure::{zero_angles, FiniteMeasure};
use crate::poly::IntPolynomial;
use crate::RationalAngle;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// w(theta) = min{n >= 0 : M^n theta integral}.
pub fn angle_weight(theta: &RationalAngle, base: &BigUint) -> Result<u32> {
    theta.weight(base)
}

/// The set of new-at-level-m characters killed by the angle e: under the
/// cyclic identification it is the coset x = base mod M^w(e) inside
/// {x mod M^m : M does not divide x}, of size M^(m - w(e)).
#[derive(Clone, Debug)]
pub struct KillCoset {
    pub angle: RationalAngle,
    pub weight: u32,
    pub level: u32,
    /// x0 with the coset {x : x = x0 mod M^weight}.
    pub base: BigUint,
    pub modulus: BigUint,
    pub size: BigUint,
}

impl KillCoset {
    pub fn members(&self, group_modulus: &BigUint) -> Vec<BigUint> {
        let mut out = Vec::new();
        let mut x = self.base.clone();
        while &x < group_modulus {
            out.push(x.clone());
            x += &self.modulus;
        }
        out
    }

    pub fn contains(&self, x: &BigUint) -> bool {
        (x % &self.modulus) == self.base
    }
}

fn modular_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    Some(ext.x.mod_floor(&m).magnitude().clone())
}

/// The angle e = a/M^w in lowest M-power form; M never divides a.
fn angle_numerator(theta: &RationalAngle, base: &BigUint, w: u32) -> BigUint {
    let mw = base.pow(w);
    (theta.numer() * (&mw / theta.denom())) % &mw
}

/// Solve x * k_{m - w} = a (mod M^w) for the character parameter x.
pub fn kill_coset(f: &IntPolynomial, m: u32, e: &RationalAngle) -> Result<KillCoset> {
    let base = f.modulus();
    let w = e.weight(&base)?;
    if w == 0 || w > m {
        return Ok(KillCoset {
            angle: e.clone(),
            weight: w,
            level: m,
            base: BigUint::zero(),
            modulus: BigUint::one(),
            size: BigUint::zero(),
        });
    }
    let group = FiniteAbelianGroup::build(f, m as usize)?;
    let iso = group.cyclic_isomorphism()?;
    coset_from_iso(&iso, &base, m, e, w)
}

fn coset_from_iso(
    iso: &CyclicIso,
    base: &BigUint,
    m: u32,
    e: &RationalAngle,
    w: u32,
) -> Result<KillCoset> {
    let mw = base.pow(w);
    let a = angle_numerator(e, base, w);
    let j = (m - w) as usize;
    let k = iso.unit_factor(base, j) % &mw;
    let k_inv = modular_inverse(&k, &mw).ok_or_else(|| {
        Error::Internal(format!("unit factor {k} not invertible mod {mw}"))
    })?;
    let x0 = (&a * &k_inv) % &mw;
    debug_assert!(!(&x0 % base).is_zero(), "coset base divisible by modulus");
    Ok(KillCoset {
        angle: e.clone(),
        weight: w,
        level: m,
        base: x0,
        modulus: mw,
        size: base.pow(m - w),
    })
}

/// A negation-symmetric set of zero angles achieving complete vanishing at
/// level exactly `level`, minimal under inclusion.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroSetFamily {
    pub level: u32,
    /// Canonical order: by (weight, numerator).
    pub angles: Vec<RationalAngle>,
    /// One line per depth describing the coset choices that produced it.
    pub provenance: Vec<String>,
}

impl ZeroSetFamily {
    pub fn angle_set(&self) -> std::collections::BTreeSet<RationalAngle> {
        self.angles.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angle_strings(&self) -> Vec<String> {
        self.angles.iter().map(|a| a.to_string()).collect()
    }
}

fn canonical_sort(angles: &mut [RationalAngle], base: &BigUint) {
    angles.sort_by_key(|a| {
        (
            a.weight(base).unwrap_or(u32::MAX),
            a.numer().clone(),
            a.denom().clone(),
        )
    });
}

/// One symmetric orbit {c, -c} of coset labels at some depth; self-paired
/// only for the label M/2 at depth 1 (even M).
#[derive(Clone, Debug)]
struct PairNode {
    rep: BigUint,
    neg: BigUint,
    self_paired: bool,
}

struct Enumerator<'a> {
    base: BigUint,
    m: u32,
    iso: &'a CyclicIso,
    node_budget: usize,
    nodes: usize,
    results: Vec<ZeroSetFamily>,
    seen: std::collections::BTreeSet<Vec<RationalAngle>>,
}

impl Enumerator<'_> {
    fn angle_of(&self, label: &BigUint, depth: u32) -> RationalAngle {
        let mj = self.base.pow(depth);
        let j = (self.m - depth) as usize;
        let k = self.iso.unit_factor(&self.base, j) % &mj;
        let num = (label * &k) % &mj;
        RationalAngle::new(&BigInt::from(num), &BigInt::from(mj))
    }

    fn pair_angles(&self, pair: &PairNode, depth: u32, out: &mut Vec<RationalAngle>) {
        out.push(self.angle_of(&pair.rep, depth));
        if !pair.self_paired {
            out.push(self.angle_of(&pair.neg, depth));
        }
    }

    fn children(&self, pair: &PairNode, depth: u32) -> Vec<PairNode> {
        // children of rep at depth+1 pair with children of neg
        let mj = self.base.pow(depth);
        let mj1 = self.base.pow(depth + 1);
        let count = self.base.to_u64().expect("modulus fits u64");
        if pair.self_paired {
            // children pair internally: t with count-1-t
            let mut out = Vec::new();
            for t in 0..count {
                if t > count - 1 - t {
                    break;
                }
                let c = (&pair.rep + &mj * BigUint::from(t)) % &mj1;
                let neg = (&mj1 - &c) % &mj1;
                out.push(PairNode {
                    self_paired: c == neg,
                    rep: c,
                    neg,
                });
            }
            out
        } else {
            (0..count)
                .map(|t| {
                    let c = (&pair.rep + &mj * BigUint::from(t)) % &mj1;
                    let neg = (&mj1 - &c) % &mj1;
                    PairNode {
                        self_paired: false,
                        rep: c,
                        neg,
                    }
                })
                .collect()
        }
    }

    fn recurse(
        &mut self,
        depth: u32,
        frontier: Vec<PairNode>,
        chosen: Vec<RationalAngle>,
        provenance: Vec<String>,
    ) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Err(Error::CombinatorialBudgetExceeded {
                nodes: self.nodes,
                budget: self.node_budget,
            });
        }
        if depth == self.m {
            // final level: every remaining coset must be killed here
            let mut angles = chosen;
            for pair in &frontier {
                self.pair_angles(pair, depth, &mut angles);
            }
            let mut provenance = provenance;
            provenance.push(format!(
                "level {depth}: kill all {} remaining cosets",
                frontier.len()
            ));
            canonical_sort(&mut angles, &self.base);
            if self.seen.insert(angles.clone()) {
                self.results.push(ZeroSetFamily {
                    level: self.m,
                    angles,
                    provenance,
                });
            }
            return Ok(());
        }
        // choose a nonempty proper symmetric subset of the frontier to kill
        // at this depth; the rest expands one level deeper. Taking all pairs
        // would finish at a smaller level; taking none makes the measure a
        // rescaling of a smaller-level one.
        let p = frontier.len();
        if p > 24 {
            return Err(Error::CombinatorialBudgetExceeded {
                nodes: self.nodes,
                budget: self.node_budget,
            });
        }
        for mask in 1..((1u32 << p) - 1) {
            let mut angles = chosen.clone();
            let mut expanded = Vec::new();
            let mut kept = Vec::new();
            for (i, pair) in frontier.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    self.pair_angles(pair, depth, &mut angles);
                    kept.push(self.angle_of(&pair.rep, depth).to_string());
                } else {
                    expanded.extend(self.children(pair, depth));
                }
            }
            let mut provenance = provenance.clone();
            provenance.push(format!(
                "level {depth}: kill cosets of {} orbit(s) [{}], expand {}",
                kept.len(),
                kept.join(", "),
                expanded.len()
            ));
            self.recurse(depth + 1, expanded, angles, provenance)?;
        }
        Ok(())
    }
}

/// All inclusion-minimal, negation-symmetric zero-set families achieving
/// complete vanishing at level exactly m and at no smaller level, in
/// deterministic order (family size, then angles).
pub fn enumerate_minimal_families(
    f: &IntPolynomial,
    m: u32,
    node_budget: usize,
) -> Result<Vec<ZeroSetFamily>> {
    assert!(m >= 1);
    let base = f.modulus();
    if base.to_u64().is_none() {
        return Err(Error::InvalidInput(
            "modulus too large for family enumeration".into(),
        ));
    }
    if base.is_one() {
        return Ok(Vec::new()); // trivial groups have nothing to kill
    }
    let group = FiniteAbelianGroup::build(f, m as usize)?;
    let iso = group.cyclic_isomorphism()?;

    // depth-1 orbits {c, M - c} for 0 < c < M
    let count = base.to_u64().unwrap();
    let mut frontier = Vec::new();
    for c in 1..count {
        let neg = count - c;
        if c > neg {
            break;
        }
        frontier.push(PairNode {
            rep: BigUint::from(c),
            neg: BigUint::from(neg),
            self_paired: c == neg,
        });
    }

    let mut en = Enumerator {
        base: base.clone(),
        m,
        iso: &iso,
        node_budget,
        nodes: 0,
        results: Vec::new(),
        seen: std::collections::BTreeSet::new(),
    };
    en.recurse(1, frontier, Vec::new(), Vec::new())?;
    let mut results = en.results;
    results.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.angles.cmp(&b.angles)));
    Ok(results)
}

/// Smallest support-interval length admitting a level-m family:
/// (2m-1)(M-1) for odd M and for m = 1; (2m-2)(M-1) for even M at m >= 2.
pub fn min_interval_for_level(base: &BigUint, m: u32) -> BigUint {
    assert!(base >= &BigUint::from(2u8) && m >= 1);
    let m_minus_1 = base - 1u8;
    if (base % 2u8).is_zero() && m >= 2 {
        BigUint::from(2 * m as u64 - 2) * m_minus_1
    } else {
        BigUint::from(2 * m as u64 - 1) * m_minus_1
    }
}

/// Families of every level whose interval threshold fits in a support of
/// length k.
pub fn classify_interval(
    f: &IntPolynomial,
    k: &BigUint,
    node_budget: usize,
) -> Result<Vec<ZeroSetFamily>> {
    if !f.is_cyclic_case() {
        return Err(Error::NotCyclic);
    }
    let base = f.modulus();
    let mut out = Vec::new();
    let mut m = 1u32;
    while min_interval_for_level(&base, m) <= *k {
        out.extend(enumerate_minimal_families(f, m, node_budget)?);
        m += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureClassification {
    pub family: ZeroSetFamily,
    pub level: u32,
    pub certificate: String,
    pub heuristic: bool,
}

/// Match a measure against the families available on its support interval:
/// the first family (smallest level, then enumeration order) contained in
/// the zero-angle set of the normalized measure.
pub fn classify_measure(
    f: &IntPolynomial,
    mu: &FiniteMeasure,
    node_budget: usize,
) -> Result<Option<MeasureClassification>> {
    if !f.is_cyclic_case() {
        return Err(Error::NotCyclic);
    }
    let (normalized, _, _) = mu.normalize_support();
    let interval = normalized.interval_length();
    let families = classify_interval(f, &interval, node_budget)?;
    if families.is_empty() {
        return Ok(None);
    }
    let max_level = families.iter().map(|fam| fam.level).max().unwrap();
    let zeros = zero_angles(&normalized, &f.modulus(), max_level)?;
    for family in families {
        if family.angles.iter().all(|a| zeros.contains(a)) {
            let level = family.level;
            let m = f.modulus();
            let certificate = format!(
                "complete vanishing at level {level}: the Garsia entropy equals log {m} \
                 (maximal), the associated self-similar measure is absolutely continuous \
                 with bounded density, and its Fourier transform has power decay"
            );
            return Ok(Some(MeasureClassification {
                family,
                level,
                certificate,
                heuristic: zeros.heuristic,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_poly() -> IntPolynomial {
        IntPolynomial::from_i64(&[3, 4, 3, 5])
    }

    fn five() -> BigUint {
        BigUint::from(5u8)
    }

    fn strings(fams: &[ZeroSetFamily]) -> Vec<Vec<String>> {
        fams.iter().map(|f| f.angle_strings()).collect()
    }

    #[test]
    fn weights() {
        assert_eq!(
            angle_weight(&RationalAngle::from_u64(1, 5), &five()).unwrap(),
            1
        );
        assert_eq!(
            angle_weight(&RationalAngle::from_u64(7, 25), &five()).unwrap(),
            2
        );
        assert_eq!(angle_weight(&RationalAngle::zero(), &five()).unwrap(), 0);
    }

    #[test]
    fn kill_coset_sizes() {
        let f = example_poly();
        // level 2, weight-1 angle: coset of size 5
        let c = kill_coset(&f, 2, &RationalAngle::from_u64(1, 5)).unwrap();
        assert_eq!(c.size, BigUint::from(5u8));
        assert_eq!(c.members(&BigUint::from(25u8)).len(), 5);
        // weight-2 angle: singleton
        let c = kill_coset(&f, 2, &RationalAngle::from_u64(1, 25)).unwrap();
        assert_eq!(c.size, BigUint::one());
        // level 1 pairing is direct
        let c = kill_coset(&f, 1, &RationalAngle::from_u64(2, 5)).unwrap();
        assert_eq!(c.size, BigUint::one());
        assert_eq!(c.base, BigUint::from(2u8));
    }

    #[test]
    fn kill_coset_matches_direct_scan() {
        // membership in W(e) agrees with scanning all new characters
        let f = example_poly();
        let m = 2u32;
        let group = FiniteAbelianGroup::build(&f, m as usize).unwrap();
        let iso = group.cyclic_isomorphism().unwrap();
        for e in [
            RationalAngle::from_u64(1, 5),
            RationalAngle::from_u64(2, 5),
            RationalAngle::from_u64(7, 25),
        ] {
            let coset = kill_coset(&f, m, &e).unwrap();
            for psi in group.characters_new_at_level() {
                let x = iso.psi_of(&group, &psi);
                let killed_scan = (0..m as usize).any(|k| {
                    group.pairing(&psi, &group.beta_power(k)) == e
                });
                assert_eq!(killed_scan, coset.contains(&x), "angle {e}, x = {x}");
            }
        }
    }

    #[test]
    fn coset_nesting_or_disjoint() {
        let f = example_poly();
        let m = 3u32;
        let angles = [
            RationalAngle::from_u64(1, 5),
            RationalAngle::from_u64(2, 5),
            RationalAngle::from_u64(3, 25),
            RationalAngle::from_u64(8, 25),
            RationalAngle::from_u64(7, 125),
        ];
        let modulus = BigUint::from(125u8);
        for e in &angles {
            let we = kill_coset(&f, m, e).unwrap();
            assert_eq!(we.size, BigUint::from(5u8).pow(m - we.weight));
            for g in &angles {
                let wg = kill_coset(&f, m, g).unwrap();
                if we.weight <= wg.weight {
                    let members: Vec<_> = wg.members(&modulus);
                    let inside = members.iter().filter(|x| we.contains(x)).count();
                    assert!(
                        inside == 0 || inside == members.len(),
                        "W({g}) neither nested in nor disjoint from W({e})"
                    );
                }
            }
        }
    }

    #[test]
    fn level_one_family_is_all_fifths() {
        let fams = enumerate_minimal_families(&example_poly(), 1, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strings(&fams), vec![vec!["1/5", "2/5", "3/5", "4/5"]]);
    }

    #[test]
    fn level_two_families_match_hand_computation() {
        let fams = enumerate_minimal_families(&example_poly(), 2, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(fams.len(), 2);
        // both keep one symmetric pair of fifths and expand the other
        let e21: Vec<String> = vec![
            "1/5", "4/5", "1/25", "6/25", "11/25", "16/25", "21/25", "4/25", "9/25", "14/25",
            "19/25", "24/25",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        let mut e21_sorted: Vec<RationalAngle> = e21
            .iter()
            .map(|s| {
                let (n, d) = s.split_once('/').unwrap();
                RationalAngle::from_u64(n.parse().unwrap(), d.parse().unwrap())
            })
            .collect();
        canonical_sort(&mut e21_sorted, &five());
        let got: Vec<Vec<RationalAngle>> = fams.iter().map(|f| f.angles.clone()).collect();
        assert!(got.contains(&e21_sorted), "expected the 1/5-kept family");
    }

    #[test]
    fn thresholds() {
        assert_eq!(min_interval_for_level(&five(), 1), BigUint::from(4u8));
        assert_eq!(min_interval_for_level(&five(), 2), BigUint::from(12u8));
        assert_eq!(min_interval_for_level(&five(), 3), BigUint::from(20u8));
        assert_eq!(
            min_interval_for_level(&BigUint::from(4u8), 2),
            BigUint::from(6u8)
        );
        assert_eq!(
            min_interval_for_level(&BigUint::from(2u8), 1),
            BigUint::one()
        );
    }

    #[test]
    fn interval_classification_counts() {
        let f = example_poly();
        assert!(classify_interval(&f, &BigUint::from(3u8), DEFAULT_NODE_BUDGET)
            .unwrap()
            .is_empty());
        assert_eq!(
            classify_interval(&f, &BigUint::from(10u8), DEFAULT_NODE_BUDGET)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            classify_interval(&f, &BigUint::from(12u8), DEFAULT_NODE_BUDGET)
                .unwrap()
                .len(),
            3
        );
    }

    #[test]
    fn uniform_measure_classifies_at_level_one() {
        let got = classify_measure(&example_poly(), &FiniteMeasure::uniform(0, 4), DEFAULT_NODE_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!(got.level, 1);
        assert_eq!(got.family.angle_strings(), vec!["1/5", "2/5", "3/5", "4/5"]);
        assert!(!got.heuristic);
    }

    #[test]
    fn uniform4_has_no_classification() {
        let got =
            classify_measure(&example_poly(), &FiniteMeasure::uniform(0, 3), DEFAULT_NODE_BUDGET)
                .unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn family_sizes_respect_counting_bound() {
        let f = example_poly();
        for m in 1..=3 {
            for fam in enumerate_minimal_families(&f, m, DEFAULT_NODE_BUDGET).unwrap() {
                let bound = min_interval_for_level(&five(), m).to_u64().unwrap() as usize;
                assert!(
                    fam.len() >= bound,
                    "family of size {} at level {m} below bound {bound}",
                    fam.len()
                );
            }
        }
    }

    #[test]
    fn families_are_symmetric() {
        for m in 1..=3 {
            for fam in
                enumerate_minimal_families(&example_poly(), m, DEFAULT_NODE_BUDGET).unwrap()
            {
                let set = fam.angle_set();
                for a in &set {
                    assert!(set.contains(&a.negated()), "family not symmetric at {a}");
                }
            }
        }
    }

    #[test]
    fn non_cyclic_rejected() {
        let f = IntPolynomial::from_i64(&[1, 0, 2, 2]);
        assert!(matches!(
            classify_interval(&f, &BigUint::from(4u8), DEFAULT_NODE_BUDGET),
            Err(Error::NotCyclic)
        ));
    }
}
