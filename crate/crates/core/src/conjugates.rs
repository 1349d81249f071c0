//! Certified classification of the Galois conjugates of beta relative to the
//! unit circle, and the Mahler measure.
//!
//! Roots are found by Aberth iteration at escalating precision (128 bits,
//! doubling up to a 4096-bit cap). Each approximation z_i carries the
//! a-posteriori inclusion radius d*|W_i| with W_i = g(z_i)/prod(z_i - z_j):
//! the union of the disks contains all roots and a connected component made
//! of k disks contains exactly k roots, counted with multiplicity.

use crate::numeric::{below_pow2, to_f64, Complex, Ctx};
use crate::poly::IntPolynomial;
use astro_float::BigFloat;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

pub const START_BITS: usize = 128;
pub const CAP_BITS: usize = 4096;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Classification {
    AllOutsideUnitCircle,
    AllInsideUnitCircle,
    Mixed,
    UnitCircleSuspected,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::AllOutsideUnitCircle => "AllOutsideUnitCircle",
            Classification::AllInsideUnitCircle => "AllInsideUnitCircle",
            Classification::Mixed => "Mixed",
            Classification::UnitCircleSuspected => "UnitCircleSuspected",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug)]
pub struct CertifiedRoot {
    pub re: BigFloat,
    pub im: BigFloat,
    /// Inclusion disk radius around (re, im).
    pub radius: BigFloat,
}

#[derive(Clone, Debug)]
pub struct ConjugateProfile {
    pub roots: Vec<CertifiedRoot>,
    pub classification: Classification,
    /// |a_d| * prod over certified-outside roots of |root|.
    pub mahler: BigFloat,
    /// Absolute error bound on `mahler`.
    pub mahler_error: BigFloat,
    /// Set when the Mahler measure is known to be an exact integer.
    pub mahler_integer: Option<BigUint>,
    /// Working precision of the accepted certification pass.
    pub precision_bits: usize,
}

impl ConjugateProfile {
    pub fn mahler_f64(&self) -> f64 {
        to_f64(&self.mahler)
    }
}

/// Classify the roots of f and compute the Mahler measure with error bound
/// at most 2^(-precision/2). Escalates internally; `precision` only sets the
/// error target, not the starting precision.
pub fn conjugate_profile(f: &IntPolynomial, precision: usize) -> ConjugateProfile {
    let target = precision.min(CAP_BITS);
    let mut bits = START_BITS;
    loop {
        let (profile, met_target) = certify_at(f, bits, target);
        let resolved = profile.classification != Classification::UnitCircleSuspected;
        if (resolved && met_target) || bits >= CAP_BITS {
            return profile;
        }
        bits = (bits * 2).min(CAP_BITS);
    }
}

fn certify_at(f: &IntPolynomial, bits: usize, target: usize) -> (ConjugateProfile, bool) {
    let mut ctx = Ctx::new(bits);
    let d = f.degree();

    // monic coefficients a_j / a_d, ascending
    let lead = ctx.from_bigint(f.leading());
    let monic: Vec<Complex> = (0..=d)
        .map(|j| {
            let c = ctx.from_bigint(f.coeff(j));
            Complex::real(ctx.div(&c, &lead), &ctx)
        })
        .collect();

    let roots = aberth(&monic, &mut ctx);
    let radii: Vec<BigFloat> = roots
        .iter()
        .enumerate()
        .map(|(i, _z)| {
            let w = weierstrass(&monic, &roots, i, &mut ctx);
            let df = ctx.from_u64(d as u64);
            ctx.mul(&df, &w.abs(&ctx))
        })
        .collect();

    // connected components of overlapping inclusion disks
    let mut comp: Vec<usize> = (0..d).collect();
    for i in 0..d {
        for j in (i + 1)..d {
            let dist = roots[i].sub(&roots[j], &ctx).abs(&ctx);
            let rsum = ctx.add(&radii[i], &radii[j]);
            if dist.partial_cmp(&rsum) != Some(std::cmp::Ordering::Greater) {
                let (a, b) = (find(&mut comp, i), find(&mut comp, j));
                if a != b {
                    comp[a] = b;
                }
            }
        }
    }

    let one = ctx.one();
    let mut any_inside = false;
    let mut any_outside = false;
    let mut suspected = false;
    let mut outside_product = ctx.one();
    // relative error accumulator for the outside product
    let mut rel_err = ctx.zero();

    let comps: Vec<usize> = (0..d).map(|i| find(&mut comp, i)).collect();
    let unique: std::collections::BTreeSet<usize> = comps.iter().copied().collect();
    for c in unique {
        let members: Vec<usize> = (0..d).filter(|&i| comps[i] == c).collect();
        let mut comp_min = None::<BigFloat>;
        let mut comp_max = None::<BigFloat>;
        for &i in &members {
            let m = roots[i].abs(&ctx);
            let lo = ctx.sub(&m, &radii[i]);
            let hi = ctx.add(&m, &radii[i]);
            comp_min = Some(match comp_min {
                None => lo,
                Some(x) => {
                    if lo.partial_cmp(&x) == Some(std::cmp::Ordering::Less) {
                        lo
                    } else {
                        x
                    }
                }
            });
            comp_max = Some(match comp_max {
                None => hi,
                Some(x) => {
                    if hi.partial_cmp(&x) == Some(std::cmp::Ordering::Greater) {
                        hi
                    } else {
                        x
                    }
                }
            });
        }
        let lo = comp_min.unwrap();
        let hi = comp_max.unwrap();
        if lo.partial_cmp(&one) == Some(std::cmp::Ordering::Greater) {
            any_outside = true;
            for &i in &members {
                let m = roots[i].abs(&ctx);
                outside_product = ctx.mul(&outside_product, &m);
                rel_err = ctx.add(&rel_err, &ctx.div(&radii[i], &m));
            }
        } else if hi.partial_cmp(&one) == Some(std::cmp::Ordering::Less) {
            any_inside = true;
        } else {
            suspected = true;
        }
    }

    let classification = if suspected {
        Classification::UnitCircleSuspected
    } else if any_outside && any_inside {
        Classification::Mixed
    } else if any_outside {
        Classification::AllOutsideUnitCircle
    } else {
        Classification::AllInsideUnitCircle
    };

    let lead_abs = lead.abs();
    let mut mahler = ctx.mul(&lead_abs, &outside_product);
    // absolute error: mahler * (e^rel - 1) ~ mahler * 2*rel for small rel
    let two = ctx.from_u64(2);
    let mut mahler_error = ctx.mul(&mahler, &ctx.mul(&two, &rel_err));
    let mut mahler_integer = None;

    if classification == Classification::AllOutsideUnitCircle {
        mahler = ctx.from_biguint(&f.modulus());
        mahler_error = ctx.zero();
        mahler_integer = Some(f.modulus());
    } else if classification == Classification::AllInsideUnitCircle {
        mahler = lead_abs;
        mahler_error = ctx.zero();
        mahler_integer = Some(f.leading().magnitude().clone());
    }

    let met_target =
        mahler_integer.is_some() || below_pow2(&mahler_error, (target / 2) as i64);

    (
        ConjugateProfile {
            roots: package_roots(roots, radii),
            classification,
            mahler,
            mahler_error,
            mahler_integer,
            precision_bits: bits,
        },
        met_target,
    )
}

fn package_roots(roots: Vec<Complex>, radii: Vec<BigFloat>) -> Vec<CertifiedRoot> {
    roots
        .into_iter()
        .zip(radii)
        .map(|(z, radius)| CertifiedRoot {
            re: z.re,
            im: z.im,
            radius,
        })
        .collect()
}

fn find(comp: &mut [usize], mut i: usize) -> usize {
    while comp[i] != i {
        comp[i] = comp[comp[i]];
        i = comp[i];
    }
    i
}

/// Horner evaluation of p (ascending complex coefficients) at z.
fn eval(p: &[Complex], z: &Complex, ctx: &Ctx) -> Complex {
    let mut acc = Complex::zero(ctx);
    for c in p.iter().rev() {
        acc = acc.mul(z, ctx).add(c, ctx);
    }
    acc
}

fn derivative(p: &[Complex], ctx: &Ctx) -> Vec<Complex> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c.scale(&ctx.from_u64(j as u64), ctx))
        .collect()
}

fn weierstrass(monic: &[Complex], roots: &[Complex], i: usize, ctx: &mut Ctx) -> Complex {
    let num = eval(monic, &roots[i], ctx);
    let mut den = Complex::one(ctx);
    for (j, r) in roots.iter().enumerate() {
        if j != i {
            den = den.mul(&roots[i].sub(r, ctx), ctx);
        }
    }
    num.div(&den, ctx)
}

/// Aberth iteration from deterministic initial guesses on a Cauchy-bound
/// circle. Returns approximations; certification happens via the radii.
fn aberth(monic: &[Complex], ctx: &mut Ctx) -> Vec<Complex> {
    let d = monic.len() - 1;
    let bits = ctx.bits();

    // Cauchy bound 1 + max |c_j|
    let mut bound = 1.0f64;
    for c in &monic[..d] {
        let m = to_f64(&c.abs(ctx));
        if m.is_finite() {
            bound = bound.max(1.0 + m);
        }
    }

    let mut roots: Vec<Complex> = (0..d)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (d as f64) + 0.41;
            Complex {
                re: ctx.from_f64(bound * theta.cos()),
                im: ctx.from_f64(bound * theta.sin()),
            }
        })
        .collect();

    let deriv = derivative(monic, ctx);
    let max_iter = 60 + 4 * bits / 10;
    for _ in 0..max_iter {
        let mut done = true;
        for i in 0..d {
            let pz = eval(monic, &roots[i], ctx);
            if pz.is_zero() {
                continue;
            }
            let dz = eval(&deriv, &roots[i], ctx);
            let newton = if dz.is_zero() {
                // nudge off a critical point
                Complex {
                    re: ctx.from_f64(1e-3),
                    im: ctx.from_f64(1e-3),
                }
            } else {
                pz.div(&dz, ctx)
            };
            let mut sum = Complex::zero(ctx);
            for (j, r) in roots.iter().enumerate() {
                if j != i {
                    let diff = roots[i].sub(r, ctx);
                    if diff.is_zero() {
                        continue;
                    }
                    sum = sum.add(&Complex::one(ctx).div(&diff, ctx), ctx);
                }
            }
            let denom = Complex::one(ctx).sub(&newton.mul(&sum, ctx), ctx);
            let corr = if denom.is_zero() {
                newton.clone()
            } else {
                newton.div(&denom, ctx)
            };
            let next = roots[i].sub(&corr, ctx);
            let step = corr.abs(ctx);
            let scale = next.abs(ctx);
            // relative step below ~2^(-bits+24) counts as converged
            let thresh = ctx.mul(&scale, &ctx.pow2(-(bits as i64) + 24));
            if step.partial_cmp(&thresh) == Some(std::cmp::Ordering::Greater) {
                done = false;
            }
            roots[i] = next;
        }
        if done {
            break;
        }
    }
    roots
}
