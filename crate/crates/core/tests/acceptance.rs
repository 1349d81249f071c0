//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities. Run with `cargo test --test acceptance`.

mod common;

use common::*;
use garsia::classify::{classify_interval, classify_measure, DEFAULT_NODE_BUDGET};
use garsia::entropy::{
    bound_schedule, conditional_entropy_step, distribution_xn, yn_entropies,
};
use garsia::fourier::{decay_scan, nu_hat, select_lambda};
use garsia::measure::{zero_angles, FiniteMeasure};
use garsia::numeric::{below_pow2, to_f64, Ctx};
use garsia::vanishing::{search_vanishing, spectrum_support};
use garsia::{FiniteAbelianGroup, RationalAngle};
use num_bigint::BigUint;
use std::collections::BTreeSet;
use std::time::Instant;

const BUDGET: usize = 1 << 26;

fn angle(n: u64, d: u64) -> RationalAngle {
    RationalAngle::from_u64(n, d)
}

fn angle_set(pairs: &[(u64, u64)]) -> BTreeSet<RationalAngle> {
    pairs.iter().map(|&(n, d)| angle(n, d)).collect()
}

/// The three zero-set families of the k < 20 classification for the cubic.
fn family_e1() -> BTreeSet<RationalAngle> {
    angle_set(&[(1, 5), (2, 5), (3, 5), (4, 5)])
}

fn family_e2_1() -> BTreeSet<RationalAngle> {
    let mut s = angle_set(&[(1, 5), (4, 5)]);
    for j in 0..5u64 {
        s.insert(angle(1 + 5 * j, 25));
        s.insert(angle(25 - (1 + 5 * j), 25));
    }
    s
}

fn family_e2_2() -> BTreeSet<RationalAngle> {
    let mut s = angle_set(&[(2, 5), (3, 5)]);
    for j in 0..5u64 {
        s.insert(angle(2 + 5 * j, 25));
        s.insert(angle(25 - (2 + 5 * j), 25));
    }
    s
}

#[test]
fn criterion_1_interval_classification() {
    let t0 = Instant::now();
    let f = example_cubic();

    for k in 0..4u64 {
        let fams = classify_interval(&f, &BigUint::from(k), DEFAULT_NODE_BUDGET).unwrap();
        assert!(fams.is_empty(), "k = {k} must have no families");
    }
    for k in 4..12u64 {
        let fams = classify_interval(&f, &BigUint::from(k), DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(fams.len(), 1, "k = {k}");
        assert_eq!(fams[0].angle_set(), family_e1(), "k = {k}");
        assert_eq!(fams[0].level, 1);
    }
    let fams = classify_interval(&f, &BigUint::from(12u8), DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(fams.len(), 3);
    assert_eq!(fams[0].angle_set(), family_e1());
    let level2: Vec<BTreeSet<RationalAngle>> =
        fams[1..].iter().map(|f| f.angle_set()).collect();
    assert!(level2.contains(&family_e2_1()), "missing the 1/5-kept family");
    assert!(level2.contains(&family_e2_2()), "missing the 2/5-kept family");
    assert!(fams[1..].iter().all(|f| f.level == 2));

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 60 s");
    println!("ACCEPTANCE 1: PASS - interval classification reproduces the three families ({elapsed:?})");
}

#[test]
fn criterion_2_group_golden_values() {
    let t0 = Instant::now();
    let f = example_cubic();

    let g2 = FiniteAbelianGroup::build(&f, 2).unwrap();
    assert_eq!(g2.order(), &BigUint::from(25u8));
    assert!(g2.is_cyclic());
    let iso = g2.cyclic_isomorphism().unwrap();
    assert_eq!(iso.t, BigUint::from(15u8));

    for n in 1..=6u32 {
        let g = FiniteAbelianGroup::build(&f, n as usize).unwrap();
        assert_eq!(
            g.order(),
            &BigUint::from(5u8).pow(n),
            "group order at level {n}"
        );
    }

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs() < 5, "took {elapsed:?}, budget 5 s");
    println!("ACCEPTANCE 2: PASS - G_2 cyclic of order 25 with Phi(beta) = 15, |G_n| = 5^n for n <= 6 ({elapsed:?})");
}

#[test]
fn criterion_3_golden_ratio_measure() {
    let t0 = Instant::now();
    let f = example_cubic();
    let mu = golden_measure(256);

    // numeric zero set at level 2 is exactly the 2/5-family, threshold 2^-128
    let zeros = zero_angles(&mu, &BigUint::from(5u8), 2).unwrap();
    assert!(zeros.heuristic);
    assert_eq!(zeros.angles, family_e2_2());

    // not equidistributed mod 5 (so level 1 fails), yet level 2 holds
    assert!(!garsia::measure::is_equidistributed_mod(
        &mu,
        &BigUint::from(5u8)
    ));
    let out = search_vanishing(&f, &mu, None).unwrap().unwrap();
    assert_eq!(out.level, 2);
    assert_eq!(out.m_max, 2);

    // entropy steps equal log 5 from level 2 on
    let log5 = ln_of(&BigUint::from(5u8));
    for n in [3usize, 4, 5] {
        let step = conditional_entropy_step(&f, &mu, n, BUDGET).unwrap();
        let diff = (step.to_f64() - log5).abs();
        assert!(
            diff < 1e-12,
            "step at n = {n}: |{} - log 5| = {diff:.3e}",
            step.to_f64()
        );
    }

    let elapsed = t0.elapsed();
    println!("ACCEPTANCE 3: PASS - golden-ratio measure: zero set = 2/5-family, vanishing level 2, steps = log 5 within 1e-12 ({elapsed:?})");
}

#[test]
fn criterion_4_entropy_sandwich_equidistributed() {
    let t0 = Instant::now();
    let cases: [(garsia::IntPolynomial, FiniteMeasure, u64); 3] = [
        (dyadic_poly(), FiniteMeasure::bernoulli(), 2),
        (three_halves_poly(), FiniteMeasure::uniform(0, 2), 3),
        (example_cubic(), FiniteMeasure::uniform(0, 4), 5),
    ];
    for (f, mu, m) in &cases {
        let log_m = ln_of(&BigUint::from(*m));
        let schedule = bound_schedule(f, mu, 6, BUDGET).unwrap();
        assert!(schedule.lower_valid);
        assert_eq!(schedule.rows.len(), 6);
        let mut prev_upper = f64::INFINITY;
        for row in &schedule.rows {
            assert!(
                (row.lower_nats - log_m).abs() < 1e-9,
                "M = {m}, n = {}: lower = {}",
                row.n,
                row.lower_nats
            );
            assert!(row.upper_nats >= row.lower_nats - row.error_bound);
            assert!(
                row.upper_nats <= prev_upper + 2.0 * row.error_bound,
                "upper not nonincreasing at n = {}",
                row.n
            );
            prev_upper = row.upper_nats;
        }
        // every lower sits below every upper: the two sequences sandwich
        // the same limit from opposite sides
        for a in &schedule.rows {
            for b in &schedule.rows {
                assert!(
                    a.lower_nats <= b.upper_nats + a.error_bound + b.error_bound,
                    "lower at n = {} above upper at n = {}",
                    a.n,
                    b.n
                );
            }
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget 2 min");
    println!("ACCEPTANCE 4: PASS - lower = log M within 1e-9 and monotone upper for the three equidistributed cases ({elapsed:?})");
}

#[test]
fn criterion_5_collision_entropy() {
    let t0 = Instant::now();
    let f = golden_poly();
    let mu = FiniteMeasure::bernoulli();

    let d3 = distribution_xn(&f, &mu, 3, BUDGET).unwrap();
    let h3 = d3.entropy();
    let target = 2.75 * std::f64::consts::LN_2;
    assert!(
        (h3.to_f64() - target).abs() < 1e-12,
        "H(X_3) = {}, want (11/4) log 2",
        h3.to_f64()
    );

    // against the enumeration oracle as well
    let law = xn_law_bruteforce(&f, &mu, 3);
    assert_eq!(law.len(), 7);
    assert!((entropy_bruteforce(&law) - target).abs() < 1e-12);

    let mut rates = Vec::new();
    for n in 3..=16usize {
        let h = distribution_xn(&f, &mu, n, BUDGET).unwrap().entropy();
        rates.push((n, h.to_f64() / n as f64, h.error_bound / n as f64));
    }
    for w in rates.windows(2) {
        let (n, r1, e1) = w[0];
        let (_, r2, e2) = w[1];
        assert!(
            r2 < r1 - e1 - e2,
            "H(X_n)/n not strictly decreasing at n = {n}: {r1} -> {r2}"
        );
    }

    let elapsed = t0.elapsed();
    println!("ACCEPTANCE 5: PASS - H(X_3) = (11/4) log 2 within 1e-12; H(X_n)/n strictly decreasing for 3 <= n <= 16 ({elapsed:?})");
}

mod random_suite {
    use super::*;
    use garsia::vanishing::{charequi_check, is_complete_vanishing};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    /// Random measure with <= 8 atoms and one common denominator <= 60.
    fn random_measure(rng: &mut ChaCha8Rng) -> FiniteMeasure {
        let support_size = rng.gen_range(1..=8usize);
        let q = rng.gen_range(support_size.max(2)..=60usize) as i64;
        // split q into support_size positive parts
        let mut cuts: Vec<i64> = (1..q).collect();
        for i in (1..cuts.len()).rev() {
            let j = rng.gen_range(0..=i);
            cuts.swap(i, j);
        }
        let mut parts: Vec<i64> = cuts[..support_size - 1].to_vec();
        parts.push(0);
        parts.push(q);
        parts.sort_unstable();
        let mut atoms = BTreeMap::new();
        let mut positions: Vec<i64> = Vec::new();
        while positions.len() < support_size {
            let p = rng.gen_range(-6..=6i64);
            if !positions.contains(&p) {
                positions.push(p);
            }
        }
        positions.sort_unstable();
        for (i, pos) in positions.iter().enumerate() {
            let w = parts[i + 1] - parts[i];
            atoms.insert(BigInt::from(*pos), rational(w, q));
        }
        FiniteMeasure::from_rational_atoms(atoms).expect("random weights sum to 1")
    }

    /// rho * uniform{0..m-1}: equidistributed mod m by construction.
    fn random_vanishing_measure(rng: &mut ChaCha8Rng, m: i64) -> FiniteMeasure {
        let rho_size = rng.gen_range(1..=3usize);
        let q = rng.gen_range(rho_size.max(2)..=20usize) as i64;
        let mut cuts: Vec<i64> = (1..q).collect();
        for i in (1..cuts.len()).rev() {
            let j = rng.gen_range(0..=i);
            cuts.swap(i, j);
        }
        let mut parts: Vec<i64> = cuts[..rho_size - 1].to_vec();
        parts.push(0);
        parts.push(q);
        parts.sort_unstable();
        let mut atoms: BTreeMap<BigInt, BigRational> = BTreeMap::new();
        for i in 0..rho_size {
            let w = rational(parts[i + 1] - parts[i], q * m);
            for r in 0..m {
                let key = BigInt::from(i as i64 + r);
                *atoms
                    .entry(key)
                    .or_insert_with(|| rational(0, 1).clone()) += w.clone();
            }
        }
        let atoms: BTreeMap<BigInt, BigRational> = atoms
            .into_iter()
            .filter(|(_, w)| !num_traits::Zero::is_zero(w))
            .collect();
        FiniteMeasure::from_rational_atoms(atoms).expect("convolution is a probability measure")
    }

    #[test]
    fn criterion_6_property_suite() {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6a75_1e5d);
        let polys = [example_cubic(), three_halves_poly()];
        let mut tested = 0usize;
        let mut vanishing_seen = 0usize;

        for case in 0..200usize {
            let f = &polys[case % 2];
            let m_int = if case % 2 == 0 { 5i64 } else { 3 };
            let log_m = ln_of(&f.modulus());
            let mu = if case % 10 == 0 {
                random_vanishing_measure(&mut rng, m_int)
            } else {
                random_measure(&mut rng)
            };

            // super-additivity of H(Y_n) for n + m <= 8, and the log M cap
            let ys = yn_entropies(f, &mu, 8, BUDGET).unwrap();
            let y: Vec<(f64, f64)> = ys
                .iter()
                .map(|e| {
                    let e = e.as_ref().expect("within budget");
                    (e.to_f64(), e.error_bound)
                })
                .collect();
            for n in 1..=7usize {
                for m in n..=(8 - n) {
                    let (h_nm, e_nm) = y[n + m - 1];
                    let (h_n, e_n) = y[n - 1];
                    let (h_m, e_m) = y[m - 1];
                    assert!(
                        h_nm >= h_n + h_m - e_nm - e_n - e_m,
                        "case {case}: H(Y_{}) < H(Y_{n}) + H(Y_{m})",
                        n + m
                    );
                }
            }
            for (n, (h, e)) in y.iter().enumerate() {
                assert!(
                    *h <= (n + 1) as f64 * log_m + e,
                    "case {case}: H(Y_{}) above n log M",
                    n + 1
                );
            }

            // sub-additivity of H(X_n) and the data-processing bound, n <= 4
            let xs: Vec<(f64, f64)> = (1..=4usize)
                .map(|n| {
                    let h = distribution_xn(f, &mu, n, BUDGET).unwrap().entropy();
                    (h.to_f64(), h.error_bound)
                })
                .collect();
            for n in 1..=3usize {
                for m in n..=(4 - n) {
                    let (h_nm, e_nm) = xs[n + m - 1];
                    let (h_n, e_n) = xs[n - 1];
                    let (h_m, e_m) = xs[m - 1];
                    assert!(
                        h_nm <= h_n + h_m + e_nm + e_n + e_m,
                        "case {case}: H(X_{}) > H(X_{n}) + H(X_{m})",
                        n + m
                    );
                }
            }
            for n in 1..=4usize {
                let (hy, ey) = y[n - 1];
                let (hx, ex) = xs[n - 1];
                assert!(hy <= hx + ey + ex, "case {case}: H(Y_{n}) > H(X_{n})");
            }

            // three-way agreement of the characterizations at n <= 4
            for n in 1..=4u32 {
                let r = charequi_check(f, &mu, n, BUDGET)
                    .unwrap_or_else(|e| panic!("case {case}, level {n}: {e}"));
                let _ = r;
            }

            // vanishing monotonicity in the level
            if let Some(out) = search_vanishing(f, &mu, None).unwrap() {
                vanishing_seen += 1;
                for extra in 1..=2u32 {
                    let r = is_complete_vanishing(f, &mu.normalize_support().0, out.level + extra, false)
                        .unwrap();
                    assert!(
                        r.verdict,
                        "case {case}: vanishing at {} but not at {}",
                        out.level,
                        out.level + extra
                    );
                }
            }
            tested += 1;
        }
        assert_eq!(tested, 200);
        assert!(
            vanishing_seen >= 10,
            "suite should include vanishing measures, saw {vanishing_seen}"
        );

        // kill-coset size and nesting laws on the cyclic example
        kill_coset_laws();

        let elapsed = t0.elapsed();
        assert!(elapsed.as_secs() < 600, "took {elapsed:?}, budget 10 min");
        println!("ACCEPTANCE 6: PASS - 200 randomized measures: super/sub-additivity, data processing, log M cap, three-way agreement, vanishing monotonicity ({vanishing_seen} vanishing cases), coset laws ({elapsed:?})");
    }

    fn kill_coset_laws() {
        use garsia::classify::kill_coset;
        let f = example_cubic();
        let m = 3u32;
        let modulus = BigUint::from(125u8);
        let angles: Vec<RationalAngle> = vec![
            angle(1, 5),
            angle(2, 5),
            angle(4, 5),
            angle(2, 25),
            angle(13, 25),
            angle(21, 25),
            angle(3, 125),
            angle(44, 125),
        ];
        for e in &angles {
            let we = kill_coset(&f, m, e).unwrap();
            assert_eq!(
                we.size,
                BigUint::from(5u8).pow(m - we.weight),
                "size law at {e}"
            );
            for g in &angles {
                let wg = kill_coset(&f, m, g).unwrap();
                if we.weight <= wg.weight {
                    let members = wg.members(&modulus);
                    let inside = members.iter().filter(|x| we.contains(x)).count();
                    assert!(
                        inside == 0 || inside == members.len(),
                        "W({g}) neither nested in nor disjoint from W({e})"
                    );
                }
            }
        }
    }
}

#[test]
fn criterion_7_fourier_decay() {
    let t0 = Instant::now();
    let mu = FiniteMeasure::bernoulli();

    // lambda = 1/2: exact zero at v = 1, fitted exponent 1
    let mut ctx = Ctx::new(192);
    let half = ctx.from_f64(0.5);
    let one = ctx.one();
    let (at_one, _) = nu_hat(&half, &mu, &one, 1e-30, &mut ctx);
    let mag2 = at_one.abs2(&ctx);
    // |.|^2 < 2^-133 < 1e-40 implies |nu_hat(1)| < 1e-20
    assert!(below_pow2(&mag2, 133), "nu_hat(1)^2 = {:e}", to_f64(&mag2));

    let scan = decay_scan(&half, &mu, 1.0, 65536.0, 400, 192, 1e-25);
    assert!(
        scan.delta > 0.9 && scan.delta < 1.1,
        "delta = {} for the dyadic case",
        scan.delta
    );

    // lambda = 1/phi along v = phi^n: no decay; the floor 0.0066 was
    // measured with an independent high-precision evaluation beforehand
    let lam = select_lambda(&golden_poly(), None, 256).unwrap();
    let mut ctx = Ctx::new(256);
    let one = ctx.one();
    let phi_val = ctx.div(&one, &lam);
    let mut v = ctx.one();
    for _ in 0..9 {
        v = ctx.mul(&v, &phi_val);
    }
    let mut min_mag = f64::INFINITY;
    for n in 10..=30 {
        v = ctx.mul(&v, &phi_val);
        let (val, _) = nu_hat(&lam, &mu, &v, 1e-30, &mut ctx);
        let mag = to_f64(&val.abs(&ctx));
        min_mag = min_mag.min(mag);
        let _ = n;
    }
    assert!(
        min_mag > 0.0066,
        "Pisot non-decay floor violated: min = {min_mag}"
    );

    // functional equation nu_hat(v) = P(e(v)) nu_hat(lambda v)
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xf0_0d);
    for (lam_f, mu) in [
        (0.5f64, FiniteMeasure::bernoulli()),
        (0.618_033_988_749_894_8, FiniteMeasure::bernoulli()),
    ] {
        let mut ctx = Ctx::new(256);
        let lam = ctx.from_f64(lam_f);
        for _ in 0..50 {
            let v = rng.gen_range(0.1..1000.0f64);
            let vf = ctx.from_f64(v);
            let (lhs, _) = nu_hat(&lam, &mu, &vf, 1e-22, &mut ctx);
            let lv = ctx.mul(&lam, &vf);
            let (rhs_tail, _) = nu_hat(&lam, &mu, &lv, 1e-22, &mut ctx);
            let p = mu.char_value_at_real(&vf, &mut ctx);
            let rhs = p.mul(&rhs_tail, &ctx);
            let diff = lhs.sub(&rhs, &ctx).abs(&ctx);
            assert!(
                to_f64(&diff) < 1e-15,
                "functional equation off by {} at v = {v}, lambda = {lam_f}",
                to_f64(&diff)
            );
        }
    }

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget 2 min");
    println!("ACCEPTANCE 7: PASS - nu_hat(1) = 0 within 1e-20, delta = {:.3} in [0.9, 1.1], Pisot min {min_mag:.6} > 0.0066, functional equation within 1e-15 ({elapsed:?})", scan.delta);
}

#[test]
fn criterion_8_certificate_and_finite_shadows() {
    let t0 = Instant::now();
    let f = example_cubic();

    // the classification certificate names the analytic conclusions
    let got = classify_measure(&f, &golden_measure(256), DEFAULT_NODE_BUDGET)
        .unwrap()
        .expect("golden measure classifies");
    assert!(got.certificate.contains("absolutely continuous"));
    assert!(got.certificate.contains("power decay"));
    assert!(got.certificate.contains("maximal"));

    // finite shadow: the spectrum of Y_n sits inside the dual of G_{m-1}
    // (the containment is asserted inside spectrum_support)
    let support = spectrum_support(&f, &FiniteMeasure::uniform(0, 4), 3, 1, BUDGET).unwrap();
    assert_eq!(support.len(), 1, "uniform law leaves only the trivial character");

    // golden measure at n = 3, m = 2: survivors lie in the 5-element dual of
    // G_1, and only the factor P(e(x/5)) can be nonzero there; the zero set
    // kills x/5 for x = 2, 3, leaving three characters.
    let support = spectrum_support(&f, &golden_measure(256), 3, 2, BUDGET).unwrap();
    assert_eq!(support.len(), 3, "golden spectrum support");

    let elapsed = t0.elapsed();
    println!("ACCEPTANCE 8: PASS - certificate text present; spectrum supports contained in the level-(m-1) dual ({elapsed:?})");
}
