//! Extended precision floats backed by `astro-float`.
//!
//! Every operation rounds to the calling thread's working precision, set
//! with [`PrecisionGuard`]. Worker threads start at [`DEFAULT_PRECISION`].

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

use crate::real::Real;

pub const DEFAULT_PRECISION: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static PRECISION: Cell<usize> = const { Cell::new(DEFAULT_PRECISION) };
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

pub fn precision() -> usize {
    PRECISION.with(|p| p.get())
}

/// Sets the working precision of the current thread until dropped.
pub struct PrecisionGuard {
    previous: usize,
}

impl PrecisionGuard {
    pub fn set(bits: usize) -> Self {
        let previous = PRECISION.with(|p| p.replace(bits.max(64)));
        PrecisionGuard { previous }
    }
}

impl Drop for PrecisionGuard {
    fn drop(&mut self) {
        PRECISION.with(|p| p.set(self.previous));
    }
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct HpFloat(BigFloat);

impl HpFloat {
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    pub fn from_f64(x: f64) -> Self {
        HpFloat(BigFloat::from_f64(x, precision()))
    }

    /// Parses a decimal literal at the working precision.
    pub fn parse(s: &str) -> Option<Self> {
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, precision(), RM, cc));
        if v.is_nan() {
            None
        } else {
            Some(HpFloat(v))
        }
    }

    /// Decimal rendering with all significant digits.
    pub fn to_decimal(&self) -> String {
        with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }

    /// Nearest double, rounding the mantissa to 53 bits.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return 0.0;
        };
        let Some(&top) = words.last() else {
            return 0.0;
        };
        if top == 0 {
            return 0.0;
        }
        let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
        // round the leading 64 bits plus a sticky bit to 53 bits
        let lead = top.leading_zeros();
        let shifted = if lead == 0 { top } else { (top << lead) | (next >> (64 - lead)) };
        let sticky = (next << lead) != 0 || words[..words.len().saturating_sub(2)].iter().any(|&w| w != 0);
        let mut mant = shifted >> 11;
        let rest = shifted & 0x7ff;
        if rest > 0x400 || (rest == 0x400 && (sticky || mant & 1 == 1)) {
            mant += 1;
        }
        let e = exp as i32 - lead as i32 - 53;
        let v = ldexp(mant as f64, e);
        match sign {
            Sign::Neg => -v,
            Sign::Pos => v,
        }
    }
}

fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

impl fmt::Debug for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal())
    }
}

impl fmt::Display for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal())
    }
}

impl PartialEq for HpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for HpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:ident) => {
        impl $tr for HpFloat {
            type Output = HpFloat;
            fn $m(self, rhs: HpFloat) -> HpFloat {
                HpFloat(self.0.$op(&rhs.0, precision(), RM))
            }
        }
        impl<'a> $tr<&'a HpFloat> for HpFloat {
            type Output = HpFloat;
            fn $m(self, rhs: &'a HpFloat) -> HpFloat {
                HpFloat(self.0.$op(&rhs.0, precision(), RM))
            }
        }
        impl<'a, 'b> $tr<&'b HpFloat> for &'a HpFloat {
            type Output = HpFloat;
            fn $m(self, rhs: &'b HpFloat) -> HpFloat {
                HpFloat(self.0.$op(&rhs.0, precision(), RM))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for HpFloat {
    type Output = HpFloat;
    fn neg(self) -> HpFloat {
        HpFloat(self.0.neg())
    }
}

impl Real for HpFloat {
    fn from_f64(x: f64) -> Self {
        HpFloat::from_f64(x)
    }
    fn to_f64(&self) -> f64 {
        HpFloat::to_f64(self)
    }
    fn pi() -> Self {
        HpFloat(with_consts(|cc| cc.pi(precision(), RM)))
    }
    fn exp(&self) -> Self {
        HpFloat(with_consts(|cc| self.0.exp(precision(), RM, cc)))
    }
    fn sin(&self) -> Self {
        HpFloat(with_consts(|cc| self.0.sin(precision(), RM, cc)))
    }
    fn cos(&self) -> Self {
        HpFloat(with_consts(|cc| self.0.cos(precision(), RM, cc)))
    }
    fn sqrt(&self) -> Self {
        HpFloat(self.0.sqrt(precision(), RM))
    }
    fn abs(&self) -> Self {
        HpFloat(self.0.abs())
    }
    fn from_i64(n: i64) -> Self {
        HpFloat(BigFloat::from_i64(n, precision()))
    }
    fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }
    fn powi(&self, n: u32) -> Self {
        HpFloat(self.0.powi(n as usize, precision(), RM))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_roundtrip_is_exact() {
        for &x in &[1.0, -0.1, 3.0e-300, 1.7976931348623157e308, 0.0, 2.5e-5, -123456.789] {
            assert_eq!(HpFloat::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn rounding_to_double_is_nearest() {
        let third = HpFloat::from_f64(1.0) / HpFloat::from_f64(3.0);
        assert_eq!(third.to_f64(), 1.0 / 3.0);
        let pi = <HpFloat as Real>::pi();
        assert_eq!(pi.to_f64(), std::f64::consts::PI);
        let e = <HpFloat as Real>::exp(&HpFloat::from_f64(1.0));
        assert_eq!(e.to_f64(), std::f64::consts::E);
    }

    #[test]
    fn guard_restores_precision() {
        let before = precision();
        {
            let _g = PrecisionGuard::set(128);
            assert_eq!(precision(), 128);
        }
        assert_eq!(precision(), before);
    }

    #[test]
    fn parse_and_format() {
        let x = HpFloat::parse("0.1").unwrap();
        assert_eq!(x.to_f64(), 0.1);
        assert!(HpFloat::parse("not a number").is_none());
    }
}
