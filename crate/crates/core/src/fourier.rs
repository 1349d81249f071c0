//! Numerical evaluation of the real-line Fourier transform of the
//! self-similar measure through its convergent infinite product
//! prod_j P(e(v lambda^j)), log-log decay scans over a frequency grid,
//! and the power-exponent fit on the dyadic upper envelope.

use crate::conjugates::conjugate_profile;
use crate::error::{Error, Result};
use crate::measure::FiniteMeasure;
use crate::numeric::{to_f64, Complex, Ctx};
use crate::poly::IntPolynomial;
use astro_float::BigFloat;
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_FOURIER_BITS: usize = 192;
pub const DEFAULT_TAIL_EPS: f64 = 1e-25;

/// prod_{j < J} P(e(v lambda^j)) with J chosen so the neglected tail
/// perturbs the product by less than eps, via
/// |1 - P(e(theta))| <= 2 pi E|xi| |theta|.
pub fn nu_hat(
    lambda: &BigFloat,
    mu: &FiniteMeasure,
    v: &BigFloat,
    eps: f64,
    ctx: &mut Ctx,
) -> (Complex, f64) {
    let lam_abs = to_f64(&lambda.abs());
    assert!(
        lam_abs > 0.0 && lam_abs < 1.0,
        "|lambda| must lie in (0, 1)"
    );
    let v_abs = to_f64(&v.abs());
    let mean_abs = mu.mean_abs_f64().max(1e-300);
    // tail sum S(J) = 2 pi E|xi| |v| |lambda|^J / (1 - |lambda|); keep 2S < eps
    let c0 = 2.0 * std::f64::consts::PI * mean_abs / (1.0 - lam_abs);
    let need = (2.0 * c0 * v_abs.max(1e-300) / eps).ln() / (1.0 / lam_abs).ln();
    let j_max = need.ceil().max(1.0) as usize;
    let mut prod = Complex::one(ctx);
    let mut arg = v.clone();
    for _ in 0..j_max {
        let factor = mu.char_value_at_real(&arg, ctx);
        prod = prod.mul(&factor, ctx);
        arg = ctx.mul(&arg, lambda);
    }
    let rounding = (j_max as f64 + 4.0) * 2f64.powi(-(ctx.bits() as i32 - 8));
    (prod, eps + rounding)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub v: f64,
    pub magnitude: f64,
    pub truncation_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayScan {
    pub lambda: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub points: usize,
    pub rows: Vec<ScanRow>,
    /// Fitted exponent of |nu_hat(v)| <= C v^(-delta) on the dyadic upper
    /// envelope.
    pub delta: f64,
    pub residual: f64,
    pub windows_used: usize,
}

impl DecayScan {
    pub fn csv(&self) -> String {
        let mut out = String::from("v,magnitude,truncation_bound\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.3e}\n",
                r.v, r.magnitude, r.truncation_bound
            ));
        }
        out
    }
}

/// Log-spaced magnitude scan with the envelope fit. The envelope takes the
/// maximum inside each dyadic window [2^k, 2^(k+1)); windows holding fewer
/// than three grid points are dropped (a lone endpoint may sit on a zero).
pub fn decay_scan(
    lambda: &BigFloat,
    mu: &FiniteMeasure,
    v_min: f64,
    v_max: f64,
    points: usize,
    bits: usize,
    eps: f64,
) -> DecayScan {
    assert!(v_min > 0.0 && v_min < v_max && points >= 2);
    let lambda_f = to_f64(lambda);
    let ratio = v_max / v_min;
    let rows: Vec<ScanRow> = (0..points)
        .into_par_iter()
        .map(|i| {
            let mut ctx = Ctx::new(bits);
            let lam = lambda.clone();
            let t = i as f64 / (points - 1) as f64;
            let v = v_min * ratio.powf(t);
            let vf = ctx.from_f64(v);
            let (val, bound) = nu_hat(&lam, mu, &vf, eps, &mut ctx);
            ScanRow {
                v,
                magnitude: to_f64(&val.abs(&ctx)),
                truncation_bound: bound,
            }
        })
        .collect();

    let (delta, residual, windows_used) = fit_envelope(&rows);
    DecayScan {
        lambda: lambda_f,
        v_min,
        v_max,
        points,
        rows,
        delta,
        residual,
        windows_used,
    }
}

fn fit_envelope(rows: &[ScanRow]) -> (f64, f64, usize) {
    use std::collections::BTreeMap;
    let mut max_in_window: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for r in rows {
        let k = r.v.log2().floor() as i64;
        *counts.entry(k).or_insert(0) += 1;
        let entry = max_in_window.entry(k).or_insert((r.v, r.magnitude));
        if r.magnitude > entry.1 {
            *entry = (r.v, r.magnitude);
        }
    }
    let pts: Vec<(f64, f64)> = max_in_window
        .iter()
        .filter(|(k, (_, m))| counts[k] >= 3 && *m > 1e-300)
        .map(|(_, (v, m))| (v.ln(), m.ln()))
        .collect();
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN, pts.len());
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let rss: f64 = pts
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (-slope, (rss / n).sqrt(), pts.len())
}

/// Pick lambda from a polynomial: the real roots of the reversed polynomial
/// with modulus inside (0, 1), ordered by value. A unique candidate is
/// returned refined to `bits`; several demand an explicit index.
pub fn select_lambda(f: &IntPolynomial, root_index: Option<usize>, bits: usize) -> Result<BigFloat> {
    let reversed = f.reversed();
    let profile = conjugate_profile(&reversed, 128);
    let mut ctx = Ctx::new(bits.max(192));
    let one = ctx.one();
    let mut candidates: Vec<BigFloat> = Vec::new();
    for root in &profile.roots {
        let im_small = root
            .im
            .abs()
            .partial_cmp(&root.radius)
            .is_some_and(|o| o != std::cmp::Ordering::Greater);
        if !im_small {
            continue;
        }
        let mag = root.re.abs();
        let above_zero = !mag.is_zero();
        let below_one = mag.partial_cmp(&one) == Some(std::cmp::Ordering::Less);
        if above_zero && below_one {
            candidates.push(root.re.clone());
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if candidates.is_empty() {
        return Err(Error::InvalidInput(
            "the reversed polynomial has no real root of modulus in (0, 1)".into(),
        ));
    }
    let chosen = match (candidates.len(), root_index) {
        (1, None) => candidates.into_iter().next().unwrap(),
        (_, Some(i)) => candidates
            .into_iter()
            .nth(i)
            .ok_or_else(|| Error::InvalidInput(format!("root index {i} out of range")))?,
        (n, None) => {
            return Err(Error::InvalidInput(format!(
                "{n} real roots of modulus in (0, 1); pass an explicit root index"
            )))
        }
    };
    Ok(refine_real_root(&reversed, &chosen, &mut ctx))
}

/// Newton refinement of a simple real root at the context precision.
pub fn refine_real_root(f: &IntPolynomial, x0: &BigFloat, ctx: &mut Ctx) -> BigFloat {
    let coeffs: Vec<BigFloat> = f
        .coeffs_descending()
        .iter()
        .map(|c| ctx.from_bigint(c))
        .collect();
    let eval = |x: &BigFloat, ctx: &Ctx| {
        let mut acc = ctx.zero();
        for c in &coeffs {
            acc = ctx.add(&ctx.mul(&acc, x), c);
        }
        acc
    };
    let deriv_coeffs: Vec<BigFloat> = {
        let d = f.degree();
        f.coeffs_descending()
            .iter()
            .take(d)
            .enumerate()
            .map(|(i, c)| {
                let k = (d - i) as u64;
                let kf = ctx.from_u64(k);
                let cf = ctx.from_bigint(c);
                ctx.mul(&kf, &cf)
            })
            .collect()
    };
    let eval_d = |x: &BigFloat, ctx: &Ctx| {
        let mut acc = ctx.zero();
        for c in &deriv_coeffs {
            acc = ctx.add(&ctx.mul(&acc, x), c);
        }
        acc
    };
    let mut x = x0.clone();
    let iterations = 2 + (ctx.bits() as f64).log2().ceil() as usize;
    for _ in 0..iterations {
        let fx = eval(&x, ctx);
        let dx = eval_d(&x, ctx);
        if dx.is_zero() {
            break;
        }
        x = ctx.sub(&x, &ctx.div(&fx, &dx));
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::below_pow2;

    #[test]
    fn half_bernoulli_values() {
        let mut ctx = Ctx::new(192);
        let lambda = ctx.from_f64(0.5);
        let mu = FiniteMeasure::bernoulli();
        // v = 0 -> total mass 1
        let (val, _) = nu_hat(&lambda, &mu, &ctx.zero(), 1e-25, &mut ctx);
        assert!((to_f64(&val.re) - 1.0).abs() < 1e-30);
        // v = 1 -> exact zero of the sinc envelope
        let one = ctx.one();
        let (val, _) = nu_hat(&lambda, &mu, &one, 1e-25, &mut ctx);
        assert!(below_pow2(&val.abs2(&ctx), 160), "nu_hat(1) not ~ 0");
        // v = 1/4 -> 2/pi
        let quarter = ctx.from_f64(0.25);
        let (val, _) = nu_hat(&lambda, &mu, &quarter, 1e-30, &mut ctx);
        let mag = to_f64(&val.abs(&ctx));
        assert!((mag - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn magnitudes_bounded_by_one() {
        let mut ctx = Ctx::new(192);
        let lambda = ctx.from_f64(0.5);
        let mu = FiniteMeasure::uniform(0, 3);
        for i in 1..20 {
            let v = ctx.from_f64(i as f64 * 0.73);
            let (val, _) = nu_hat(&lambda, &mu, &v, 1e-20, &mut ctx);
            assert!(to_f64(&val.abs(&ctx)) <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let mut ctx = Ctx::new(192);
        let lambda = ctx.from_f64(0.5);
        let mu = FiniteMeasure::uniform(0, 2);
        let v = ctx.from_f64(0.37);
        let minus_v = v.neg();
        let (a, _) = nu_hat(&lambda, &mu, &v, 1e-25, &mut ctx);
        let (b, _) = nu_hat(&lambda, &mu, &minus_v, 1e-25, &mut ctx);
        assert!((to_f64(&a.re) - to_f64(&b.re)).abs() < 1e-25);
        assert!((to_f64(&a.im) + to_f64(&b.im)).abs() < 1e-25);
    }

    #[test]
    fn select_lambda_golden() {
        let f = IntPolynomial::from_i64(&[1, -1, -1]);
        let lam = select_lambda(&f, None, 256).unwrap();
        let inv_phi = 2.0 / (1.0 + 5.0f64.sqrt());
        assert!((to_f64(&lam) - inv_phi).abs() < 1e-15);
    }

    #[test]
    fn select_lambda_example_is_negative() {
        let f = IntPolynomial::from_i64(&[3, 4, 3, 5]);
        let lam = select_lambda(&f, None, 256).unwrap();
        let v = to_f64(&lam);
        assert!((-0.6936644 - v).abs() < 1e-6, "lambda = {v}");
    }

    #[test]
    fn dyadic_delta_is_one() {
        let ctx = Ctx::new(160);
        let lambda = ctx.from_f64(0.5);
        let scan = decay_scan(&lambda, &FiniteMeasure::bernoulli(), 1.0, 65536.0, 300, 160, 1e-22);
        assert!(
            (scan.delta - 1.0).abs() < 0.1,
            "delta = {} (residual {})",
            scan.delta,
            scan.residual
        );
    }
}
