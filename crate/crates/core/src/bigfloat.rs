//! Arbitrary-precision context for construction verification.
//!
//! The spiral constructions place points at coordinates up to ~1e50 while
//! the triangle slacks being certified can be of order 1 — dozens of
//! decimal digits below the distances themselves and far out of reach of
//! f64 (or double-double) arithmetic. Verification therefore runs on
//! astro-float big floats at a few hundred bits; 384 bits leaves ~50 guard
//! digits at the largest scales the default searches can produce.

use astro_float::{BigFloat, Consts, RoundingMode};

pub const DEFAULT_PRECISION_BITS: usize = 384;

const RM: RoundingMode = RoundingMode::ToEven;

/// Precision context: target mantissa bits plus the cached constants the
/// trigonometric routines need.
pub struct BigCtx {
    pub prec: usize,
    consts: Consts,
}

impl BigCtx {
    pub fn new(prec: usize) -> BigCtx {
        BigCtx {
            prec,
            consts: Consts::new().expect("constants cache"),
        }
    }

    pub fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.prec)
    }

    pub fn zero(&self) -> BigFloat {
        self.from_f64(0.0)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.prec, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.prec, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.prec, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.prec, RM)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.prec, RM)
    }

    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.prec, RM, &mut self.consts)
    }

    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.prec, RM, &mut self.consts)
    }

    /// Round-trip through the decimal representation; exact to f64
    /// resolution, used only for reporting.
    pub fn to_f64(&self, a: &BigFloat) -> f64 {
        format!("{a}").parse().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_differences_survive_at_large_scale() {
        let ctx = BigCtx::new(DEFAULT_PRECISION_BITS);
        let big = ctx.from_f64(1e50);
        let one = ctx.from_f64(1.0);
        let sum = ctx.add(&big, &one);
        let back = ctx.sub(&sum, &big);
        assert_eq!(ctx.to_f64(&back), 1.0);
    }

    #[test]
    fn sqrt_and_trig() {
        let mut ctx = BigCtx::new(DEFAULT_PRECISION_BITS);
        let two = ctx.from_f64(2.0);
        let r = ctx.sqrt(&two);
        let diff = ctx.sub(&ctx.mul(&r, &r), &two);
        assert!(ctx.to_f64(&diff).abs() < 1e-100);
        let x = ctx.from_f64(0.7);
        let (s, c) = (ctx.sin(&x), ctx.cos(&x));
        let one = ctx.add(&ctx.mul(&s, &s), &ctx.mul(&c, &c));
        assert!((ctx.to_f64(&one) - 1.0).abs() < 1e-15);
        assert!((ctx.to_f64(&s) - 0.7f64.sin()).abs() < 1e-15);
    }
}
