//! Scalar abstraction shared by every numeric routine.
//!
//! Hardware floats (`f32`, `f64`) are covered by a blanket implementation over
//! `num_traits::Float`; [`Mp`] wraps an MPFR float whose precision travels with
//! each value. Generic code creates constants through [`Real::lift`] so that
//! they inherit the precision of an existing operand.

use std::cmp::Ordering;
use std::fmt::{self, Debug, LowerExp};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigUint;
use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Real:
    Clone
    + PartialOrd
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Significand bits carried by `self`.
    fn precision(&self) -> u32;

    fn from_f64_prec(v: f64, bits: u32) -> Self;

    fn from_i64_prec(v: i64, bits: u32) -> Self;

    fn from_biguint_prec(v: &BigUint, bits: u32) -> Self;

    /// Rounds (or extends) to `bits` of precision. Hardware floats can only
    /// round down to fewer bits.
    fn round_to(&self, bits: u32) -> Self;

    fn to_f64(&self) -> f64;

    fn exp(&self) -> Self;

    fn ln(&self) -> Self;

    fn sqrt(&self) -> Self;

    fn abs(&self) -> Self;

    fn is_finite(&self) -> bool;

    fn is_zero(&self) -> bool;

    /// Largest binary exponent the format can hold.
    fn max_exponent2() -> i64;

    /// Scientific notation with `digits` significant digits.
    fn to_sci(&self, digits: usize) -> String;

    fn lift(&self, v: f64) -> Self {
        Self::from_f64_prec(v, self.precision())
    }

    fn lift_int(&self, v: i64) -> Self {
        Self::from_i64_prec(v, self.precision())
    }

    fn lift_biguint(&self, v: &BigUint) -> Self {
        Self::from_biguint_prec(v, self.precision())
    }
}

impl<F> Real for F
where
    F: Float
        + FromPrimitive
        + ToPrimitive
        + Debug
        + LowerExp
        + Send
        + Sync
        + 'static
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign,
{
    fn precision(&self) -> u32 {
        // eps = 2^(1 - p)
        (1.0 - F::epsilon().to_f64().unwrap().log2()).round() as u32
    }

    fn from_f64_prec(v: f64, _bits: u32) -> Self {
        F::from_f64(v).unwrap()
    }

    fn from_i64_prec(v: i64, _bits: u32) -> Self {
        F::from_i64(v).unwrap()
    }

    fn from_biguint_prec(v: &BigUint, _bits: u32) -> Self {
        F::from_f64(v.to_f64().unwrap_or(f64::INFINITY)).unwrap()
    }

    fn round_to(&self, bits: u32) -> Self {
        let prec = self.precision();
        if bits >= prec || *self == F::zero() || !Float::is_finite(*self) {
            return *self;
        }
        let (mant, exp, sign) = Float::integer_decode(*self);
        // mant carries `prec` significant bits when normal
        let drop = prec - bits.max(1);
        let half = 1u64 << (drop - 1);
        let mut kept = mant >> drop;
        let rest = mant & ((1u64 << drop) - 1);
        if rest > half || (rest == half && kept & 1 == 1) {
            kept += 1;
        }
        let v = (kept as f64) * 2f64.powi(exp as i32 + drop as i32) * sign as f64;
        F::from_f64(v).unwrap()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn exp(&self) -> Self {
        Float::exp(*self)
    }

    fn ln(&self) -> Self {
        Float::ln(*self)
    }

    fn sqrt(&self) -> Self {
        Float::sqrt(*self)
    }

    fn abs(&self) -> Self {
        Float::abs(*self)
    }

    fn is_finite(&self) -> bool {
        Float::is_finite(*self)
    }

    fn is_zero(&self) -> bool {
        *self == F::zero()
    }

    fn max_exponent2() -> i64 {
        // max = (2 - eps) * 2^emax
        F::max_value().to_f64().unwrap().log2().round() as i64 - 1
    }

    fn to_sci(&self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1), self)
    }
}

/// Arbitrary-precision binary float backed by MPFR.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Mp(rug::Float);

impl Mp {
    pub fn new(v: f64, bits: u32) -> Self {
        Mp(rug::Float::with_val(bits, v))
    }

    pub fn inner(&self) -> &rug::Float {
        &self.0
    }

    pub fn into_inner(self) -> rug::Float {
        self.0
    }

    /// Parses a decimal string at the given precision.
    pub fn parse(s: &str, bits: u32) -> Option<Self> {
        rug::Float::parse(s)
            .ok()
            .map(|v| Mp(rug::Float::with_val(bits, v)))
    }
}

impl From<rug::Float> for Mp {
    fn from(v: rug::Float) -> Self {
        Mp(v)
    }
}

impl Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(25))
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(f.precision().unwrap_or(20)))
    }
}

macro_rules! mp_binop {
    ($tr:ident, $method:ident, $atr:ident, $amethod:ident) => {
        impl $tr for Mp {
            type Output = Mp;
            fn $method(self, rhs: Mp) -> Mp {
                Mp($tr::$method(self.0, rhs.0))
            }
        }

        impl<'a> $tr<&'a Mp> for Mp {
            type Output = Mp;
            fn $method(self, rhs: &'a Mp) -> Mp {
                Mp($tr::$method(self.0, &rhs.0))
            }
        }

        impl $atr for Mp {
            fn $amethod(&mut self, rhs: Mp) {
                $atr::$amethod(&mut self.0, rhs.0);
            }
        }

        impl<'a> $atr<&'a Mp> for Mp {
            fn $amethod(&mut self, rhs: &'a Mp) {
                $atr::$amethod(&mut self.0, &rhs.0);
            }
        }
    };
}

mp_binop!(Add, add, AddAssign, add_assign);
mp_binop!(Sub, sub, SubAssign, sub_assign);
mp_binop!(Mul, mul, MulAssign, mul_assign);
mp_binop!(Div, div, DivAssign, div_assign);

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(-self.0)
    }
}

impl Real for Mp {
    fn precision(&self) -> u32 {
        self.0.prec()
    }

    fn from_f64_prec(v: f64, bits: u32) -> Self {
        Mp(rug::Float::with_val(bits, v))
    }

    fn from_i64_prec(v: i64, bits: u32) -> Self {
        Mp(rug::Float::with_val(bits, v))
    }

    fn from_biguint_prec(v: &BigUint, bits: u32) -> Self {
        let int = rug::Integer::from_digits(&v.to_u64_digits(), rug::integer::Order::Lsf);
        Mp(rug::Float::with_val(bits, int))
    }

    fn round_to(&self, bits: u32) -> Self {
        Mp(rug::Float::with_val(bits, &self.0))
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    fn exp(&self) -> Self {
        Mp(self.0.clone().exp())
    }

    fn ln(&self) -> Self {
        Mp(self.0.clone().ln())
    }

    fn sqrt(&self) -> Self {
        Mp(self.0.clone().sqrt())
    }

    fn abs(&self) -> Self {
        Mp(self.0.clone().abs())
    }

    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn max_exponent2() -> i64 {
        rug::float::exp_max() as i64
    }

    fn to_sci(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return format!("{:.*e}", digits.saturating_sub(1), 0.0);
        }
        if !self.0.is_finite() {
            return self.0.to_f64().to_string();
        }
        // digits of 0.ddd * 10^exp
        let (neg, digs, exp) = self.0.to_sign_string_exp(10, Some(digits.max(1)));
        let e = exp.unwrap_or(0) - 1;
        let sign = if neg { "-" } else { "" };
        let (head, tail) = digs.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{e}")
        } else {
            format!("{sign}{head}.{tail}e{e}")
        }
    }
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff<T: Real>(a: &T, b: &T) -> f64 {
    let (fa, fb) = (a.abs(), b.abs());
    let scale = match fa.partial_cmp(&fb) {
        Some(Ordering::Less) => fb,
        _ => fa,
    };
    if scale.is_zero() {
        return 0.0;
    }
    ((a.clone() - b.clone()).abs() / scale).to_f64()
}
