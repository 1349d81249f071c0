//! Thin high-precision layer over `astro-float`.
//!
//! Everything downstream works through [`Ctx`], which carries the working
//! precision in bits and the shared constants cache. Rounding is ToEven
//! throughout; precision is a property of the context, not of the values.

pub use astro_float::BigFloat;

use astro_float::{Consts, Radix, RoundingMode};
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;

const RM: RoundingMode = RoundingMode::ToEven;

pub struct Ctx {
    bits: usize,
    cc: Consts,
}

impl Ctx {
    pub fn new(bits: usize) -> Self {
        let bits = bits.max(64);
        Ctx {
            bits,
            cc: Consts::new().expect("constants cache"),
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn consts(&mut self) -> &mut Consts {
        &mut self.cc
    }

    /// Parse a decimal literal at the context precision; None on junk.
    pub fn parse_decimal(&mut self, text: &str) -> Option<BigFloat> {
        let parsed = BigFloat::parse(text, Radix::Dec, self.bits, RM, &mut self.cc);
        if parsed.is_nan() {
            None
        } else {
            Some(parsed)
        }
    }

    pub fn zero(&self) -> BigFloat {
        BigFloat::from_u8(0, self.bits)
    }

    pub fn one(&self) -> BigFloat {
        BigFloat::from_u8(1, self.bits)
    }

    pub fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }

    pub fn from_u64(&self, x: u64) -> BigFloat {
        BigFloat::from_u64(x, self.bits)
    }

    /// 2^e, exactly.
    pub fn pow2(&self, e: i64) -> BigFloat {
        let mut x = BigFloat::from_u8(1, self.bits);
        // value is m*2^exp with m in [0.5, 1); 1 has exponent 1
        x.set_exponent((e + 1) as astro_float::Exponent);
        x
    }

    pub fn from_biguint(&mut self, x: &BigUint) -> BigFloat {
        let p = self.bits.max(x.bits() as usize + 2);
        let mut acc = BigFloat::from_u8(0, p);
        let shift = self.pow2(64);
        for digit in x.to_u64_digits().iter().rev() {
            acc = acc.mul(&shift, p, RM);
            acc = acc.add(&BigFloat::from_u64(*digit, p), p, RM);
        }
        self.round(&acc)
    }

    pub fn from_bigint(&mut self, x: &BigInt) -> BigFloat {
        let mag = self.from_biguint(x.magnitude());
        if x.sign() == Sign::Minus {
            mag.neg()
        } else {
            mag
        }
    }

    pub fn from_rational(&mut self, x: &BigRational) -> BigFloat {
        let n = self.from_bigint(x.numer());
        let d = self.from_bigint(x.denom());
        n.div(&d, self.bits, RM)
    }

    fn round(&self, x: &BigFloat) -> BigFloat {
        let mut y = x.clone();
        if y.precision().unwrap_or(0) > self.bits {
            y.set_precision(self.bits, RM).expect("set precision");
        }
        y
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.bits, RM)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, RM)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.bits, RM)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.bits, RM, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.bits, RM, &mut self.cc)
    }

    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.bits, RM, &mut self.cc)
    }

    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.bits, RM, &mut self.cc)
    }

    /// (cos, sin) of 2*pi*x.
    pub fn cos_sin_2pi(&mut self, x: &BigFloat) -> (BigFloat, BigFloat) {
        let two_pi = self.pi().mul(&BigFloat::from_u8(2, self.bits), self.bits, RM);
        let arg = x.mul(&two_pi, self.bits, RM);
        (self.cos(&arg), self.sin(&arg))
    }

    pub fn to_string(&mut self, x: &BigFloat) -> String {
        x.format(Radix::Dec, RM, &mut self.cc)
            .unwrap_or_else(|_| "NaN".to_string())
    }
}

/// |x| < 2^(-t), decided from the binary exponent alone.
pub fn below_pow2(x: &BigFloat, t: i64) -> bool {
    if x.is_zero() {
        return true;
    }
    match x.exponent() {
        Some(e) => (e as i64) <= -t,
        None => false,
    }
}

pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let mut y = x.clone();
    // 64 mantissa bits round-trip exactly through the decimal formatter
    let _ = y.set_precision(64, RM);
    let mut cc = Consts::new().expect("constants cache");
    y.format(Radix::Dec, RM, &mut cc)
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .unwrap_or(f64::NAN)
}

/// Complex number with high-precision parts. Operations borrow the context's
/// precision; nothing here owns a precision of its own.
#[derive(Clone, Debug)]
pub struct Complex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Complex {
    pub fn zero(ctx: &Ctx) -> Self {
        Complex {
            re: ctx.zero(),
            im: ctx.zero(),
        }
    }

    pub fn one(ctx: &Ctx) -> Self {
        Complex {
            re: ctx.one(),
            im: ctx.zero(),
        }
    }

    pub fn real(re: BigFloat, ctx: &Ctx) -> Self {
        Complex { re, im: ctx.zero() }
    }

    pub fn add(&self, o: &Complex, ctx: &Ctx) -> Complex {
        Complex {
            re: ctx.add(&self.re, &o.re),
            im: ctx.add(&self.im, &o.im),
        }
    }

    pub fn sub(&self, o: &Complex, ctx: &Ctx) -> Complex {
        Complex {
            re: ctx.sub(&self.re, &o.re),
            im: ctx.sub(&self.im, &o.im),
        }
    }

    pub fn mul(&self, o: &Complex, ctx: &Ctx) -> Complex {
        let ac = ctx.mul(&self.re, &o.re);
        let bd = ctx.mul(&self.im, &o.im);
        let ad = ctx.mul(&self.re, &o.im);
        let bc = ctx.mul(&self.im, &o.re);
        Complex {
            re: ctx.sub(&ac, &bd),
            im: ctx.add(&ad, &bc),
        }
    }

    pub fn div(&self, o: &Complex, ctx: &Ctx) -> Complex {
        let n2 = ctx.add(&ctx.mul(&o.re, &o.re), &ctx.mul(&o.im, &o.im));
        let conj = Complex {
            re: o.re.clone(),
            im: o.im.neg(),
        };
        let num = self.mul(&conj, ctx);
        Complex {
            re: ctx.div(&num.re, &n2),
            im: ctx.div(&num.im, &n2),
        }
    }

    pub fn scale(&self, s: &BigFloat, ctx: &Ctx) -> Complex {
        Complex {
            re: ctx.mul(&self.re, s),
            im: ctx.mul(&self.im, s),
        }
    }

    pub fn abs2(&self, ctx: &Ctx) -> BigFloat {
        ctx.add(&ctx.mul(&self.re, &self.re), &ctx.mul(&self.im, &self.im))
    }

    pub fn abs(&self, ctx: &Ctx) -> BigFloat {
        ctx.sqrt(&self.abs2(ctx))
    }

    pub fn conj(&self) -> Complex {
        Complex {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}
