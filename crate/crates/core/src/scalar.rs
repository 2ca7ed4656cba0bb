//! Scalar abstractions.
//!
//! Two independent traits live here:
//!
//! * [`Coefficient`] is the coefficient ring of a truncated power series. It
//!   is implemented for exact rationals ([`BigRational`]) and for binary
//!   floats (`f64`, `f32`).
//! * [`Real`] is an evaluable real scalar with the elementary functions the
//!   expression evaluator and the root-finding oracle need. It is
//!   implemented for `f32`, `f64` and [`DoubleDouble`](crate::DoubleDouble).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Which coefficient ring a series lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingMode {
    Rational,
    Float,
}

impl RingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RingMode::Rational => "rational",
            RingMode::Float => "float",
        }
    }
}

impl fmt::Display for RingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(RingMode::Rational),
            "float" => Ok(RingMode::Float),
            other => Err(format!(
                "unknown ring mode `{other}` (expected rational|float)"
            )),
        }
    }
}

/// Primitive functions whose value at a constant may be needed when a
/// series argument has a nonzero constant term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementary {
    Exp,
    Sin,
    Cos,
    Atan,
    Log1p,
    Sqrt,
}

/// Coefficient ring of a [`TruncatedSeries`](crate::TruncatedSeries).
pub trait Coefficient:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    const MODE: RingMode;

    fn from_i64(v: i64) -> Self;

    fn from_rational(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    fn to_real<T: Real>(&self) -> T;

    /// Relative tolerance used by approximate comparisons; 0 for exact rings.
    fn default_tolerance() -> f64;

    /// Equality up to a relative tolerance. Exact rings ignore `rel_tol`.
    fn close_to(&self, other: &Self, rel_tol: f64) -> bool;

    /// Value of a primitive function at a constant, when representable in
    /// this ring.
    fn elementary(f: Elementary, c: &Self) -> Option<Self>;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self, String>;

    /// Truncated Cauchy product: the first `len` coefficients of `a * b`.
    fn convolve(a: &[Self], b: &[Self], len: usize) -> Vec<Self> {
        (0..len).map(|k| Self::convolution_at(a, b, k)).collect()
    }

    /// Coefficient `k` of `a * b`.
    fn convolution_at(a: &[Self], b: &[Self], k: usize) -> Self {
        let lo = k.saturating_sub(b.len().saturating_sub(1));
        let hi = k.min(a.len().saturating_sub(1));
        let mut acc = Self::zero();
        if a.is_empty() || b.is_empty() || lo > hi {
            return acc;
        }
        for i in lo..=hi {
            acc = acc + a[i].clone() * &b[k - i];
        }
        acc
    }
}

impl Coefficient for BigRational {
    const MODE: RingMode = RingMode::Rational;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_real<T: Real>(&self) -> T {
        T::from_rational(self)
    }

    fn default_tolerance() -> f64 {
        0.0
    }

    fn close_to(&self, other: &Self, _rel_tol: f64) -> bool {
        self == other
    }

    fn elementary(f: Elementary, c: &Self) -> Option<Self> {
        match f {
            Elementary::Exp | Elementary::Cos if c.is_zero() => Some(Self::one()),
            Elementary::Sin | Elementary::Atan | Elementary::Log1p if c.is_zero() => {
                Some(Self::zero())
            }
            Elementary::Sqrt => exact_rational_sqrt(c),
            _ => None,
        }
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(v: &Value) -> Result<Self, String> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() => Ok(Self::from_i64(n.as_i64().unwrap())),
            other => Err(format!("expected a rational string \"p/q\", found {other}")),
        }
    }

    fn convolve(a: &[Self], b: &[Self], len: usize) -> Vec<Self> {
        if a.is_empty() || b.is_empty() {
            return vec![Self::zero(); len];
        }
        let a = &a[..a.len().min(len)];
        let b = &b[..b.len().min(len)];
        let (na, da) = common_denominator(a);
        let (nb, db) = common_denominator(b);
        let den = da * db;
        (0..len)
            .map(|k| {
                let lo = k.saturating_sub(nb.len() - 1);
                let hi = k.min(na.len() - 1);
                let mut acc = BigInt::zero();
                if lo <= hi {
                    for i in lo..=hi {
                        acc += &na[i] * &nb[k - i];
                    }
                }
                BigRational::new(acc, den.clone())
            })
            .collect()
    }

    fn convolution_at(a: &[Self], b: &[Self], k: usize) -> Self {
        let lo = k.saturating_sub(b.len().saturating_sub(1));
        let hi = k.min(a.len().saturating_sub(1));
        if a.is_empty() || b.is_empty() || lo > hi {
            return Self::zero();
        }
        let a = &a[lo..=hi];
        let b = &b[k - hi..=k - lo];
        let (na, da) = common_denominator(a);
        let (nb, db) = common_denominator(b);
        let mut acc = BigInt::zero();
        for (i, x) in na.iter().enumerate() {
            acc += x * &nb[nb.len() - 1 - i];
        }
        BigRational::new(acc, da * db)
    }
}

/// Clears denominators: returns integer numerators over one shared
/// denominator (the lcm of the inputs' denominators).
fn common_denominator(xs: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    use num_integer::Integer;
    let mut den = BigInt::one();
    for x in xs {
        if !x.denom().is_one() {
            den = den.lcm(x.denom());
        }
    }
    let nums = xs
        .iter()
        .map(|x| {
            if x.denom() == &den {
                x.numer().clone()
            } else {
                x.numer() * (&den / x.denom())
            }
        })
        .collect();
    (nums, den)
}

fn exact_rational_sqrt(c: &BigRational) -> Option<BigRational> {
    if c.is_negative() {
        return None;
    }
    let n = c.numer().sqrt();
    let d = c.denom().sqrt();
    if &(&n * &n) == c.numer() && &(&d * &d) == c.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Parses `p`, `p/q` (optionally signed) into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| format!("invalid rational numerator in `{s}`"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| format!("invalid rational denominator in `{s}`"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(BigRational::new(num, den))
}

macro_rules! float_coefficient {
    ($t:ty, $tol:expr) => {
        impl Coefficient for $t {
            const MODE: RingMode = RingMode::Float;

            fn from_i64(v: i64) -> Self {
                v as $t
            }

            fn from_rational(r: &BigRational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn to_real<T: Real>(&self) -> T {
                T::from_f64(*self as f64)
            }

            fn default_tolerance() -> f64 {
                $tol
            }

            fn close_to(&self, other: &Self, rel_tol: f64) -> bool {
                let (a, b) = (*self as f64, *other as f64);
                a == b || (a - b).abs() <= rel_tol * a.abs().max(b.abs())
            }

            fn elementary(f: Elementary, c: &Self) -> Option<Self> {
                let c = *c;
                let v = match f {
                    Elementary::Exp => c.exp(),
                    Elementary::Sin => c.sin(),
                    Elementary::Cos => c.cos(),
                    Elementary::Atan => c.atan(),
                    Elementary::Log1p => c.ln_1p(),
                    Elementary::Sqrt => c.sqrt(),
                };
                v.is_finite().then_some(v)
            }

            fn to_json(&self) -> Value {
                serde_json::Number::from_f64(*self as f64)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            }

            fn from_json(v: &Value) -> Result<Self, String> {
                v.as_f64()
                    .map(|x| x as $t)
                    .ok_or_else(|| format!("expected a numeric coefficient, found {v}"))
            }
        }
    };
}

float_coefficient!(f64, 1e-12);
float_coefficient!(f32, 1e-5);

/// An evaluable real scalar.
///
/// Everything the expression evaluator and the inverse-function oracle do is
/// written against this trait, so the same code runs in binary64 and in
/// double-double precision.
pub trait Real:
    Copy
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Short human-readable name of the precision, used in reports.
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(self) -> f64;

    /// Unit roundoff of the format.
    fn epsilon() -> Self;

    /// Default absolute tolerance of the inverse-function oracle: 1e-13 in
    /// binary64, scaled by unit roundoff for other formats.
    fn default_abs_tol() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
    fn ln_1p(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn atan(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn is_finite(self) -> bool;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn is_zero(self) -> bool {
        self == Self::zero()
    }

    /// Midpoint of two values without overflow.
    fn midpoint(a: Self, b: Self) -> Self {
        a + (b - a) * Self::from_f64(0.5)
    }
}

macro_rules! native_real {
    ($t:ty, $name:expr, $tol:expr) => {
        impl Real for $t {
            const NAME: &'static str = $name;

            fn zero() -> Self {
                0.0
            }
            fn one() -> Self {
                1.0
            }
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn from_rational(r: &BigRational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn epsilon() -> Self {
                <$t>::EPSILON / 2.0
            }
            fn default_abs_tol() -> Self {
                $tol
            }
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            fn exp_m1(self) -> Self {
                <$t>::exp_m1(self)
            }
            fn ln_1p(self) -> Self {
                <$t>::ln_1p(self)
            }
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            fn tan(self) -> Self {
                <$t>::tan(self)
            }
            fn atan(self) -> Self {
                <$t>::atan(self)
            }
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

native_real!(f64, "binary64", 1e-13);
native_real!(f32, "binary32", 5e-5);
