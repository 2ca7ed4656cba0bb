//! Double-double scalar.
//!
//! Arithmetic comes from `twofloat` (error-free transformations). The
//! elementary functions are implemented here by argument reduction plus
//! Taylor summation or one Newton correction of the binary64 result, which
//! keeps them accurate to a few units in 2^-104 on the ranges the oracle
//! uses.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use twofloat::TwoFloat;

use crate::scalar::Real;

/// A real number carried as an unevaluated sum of two binary64 values.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DoubleDouble(TwoFloat);

const LN2: (f64, f64) = (std::f64::consts::LN_2, 2.3190468138462996e-17);
const PIO2: (f64, f64, f64) = (
    std::f64::consts::FRAC_PI_2,
    6.123233995736766e-17,
    -1.4973849048591698e-33,
);
/// 2^-104: relative spacing of double-double values.
const DD_EPS: f64 = 4.930380657631324e-32;

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble(TwoFloat::from_f64(0.0));
    pub const ONE: DoubleDouble = DoubleDouble(TwoFloat::from_f64(1.0));

    /// Builds `hi + lo`, renormalising the pair.
    pub fn new(hi: f64, lo: f64) -> Self {
        DoubleDouble(TwoFloat::new_add(hi, lo))
    }

    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }

    fn nan() -> Self {
        DoubleDouble(TwoFloat::from_f64(f64::NAN))
    }

    fn infinity() -> Self {
        DoubleDouble(TwoFloat::from_f64(f64::INFINITY))
    }

    /// Multiplies by an exact power of two.
    fn ldexp(self, k: i32) -> Self {
        // Split the scale so neither factor overflows or goes subnormal early.
        let half = k / 2;
        let s1 = 2f64.powi(half);
        let s2 = 2f64.powi(k - half);
        let (hi, lo) = (self.hi() * s1 * s2, self.lo() * s1 * s2);
        DoubleDouble::new(hi, lo)
    }

    /// expm1 for |x| <= ~0.35 by halving, Taylor, and repeated doubling in
    /// the form (1+s)^2 - 1 = s(s+2).
    fn expm1_reduced(x: Self) -> Self {
        const HALVINGS: i32 = 10;
        let r = x.ldexp(-HALVINGS);
        let mut term = r;
        let mut sum = r;
        for n in 2..40 {
            term = term * r / DoubleDouble::from_f64(n as f64);
            sum = sum + term;
            if term.hi().abs() <= 1e-36 * sum.hi().abs() {
                break;
            }
        }
        let two = DoubleDouble::from_f64(2.0);
        for _ in 0..HALVINGS {
            sum = sum * (sum + two);
        }
        sum
    }

    /// sin and cos of a reduced argument |r| <= pi/4 + tiny.
    fn sin_cos_reduced(r: Self) -> (Self, Self) {
        let r2 = r * r;
        let mut term = r;
        let mut sin = r;
        let mut n = 1.0;
        for _ in 0..30 {
            term = -(term * r2) / DoubleDouble::from_f64((n + 1.0) * (n + 2.0));
            n += 2.0;
            sin = sin + term;
            if term.hi().abs() <= 1e-36 * sin.hi().abs().max(1e-300) {
                break;
            }
        }
        let mut term = DoubleDouble::ONE;
        let mut cos = DoubleDouble::ONE;
        let mut n = 0.0;
        for _ in 0..30 {
            term = -(term * r2) / DoubleDouble::from_f64((n + 1.0) * (n + 2.0));
            n += 2.0;
            cos = cos + term;
            if term.hi().abs() <= 1e-36 {
                break;
            }
        }
        (sin, cos)
    }

    fn sin_cos(self) -> (Self, Self) {
        if !self.hi().is_finite() {
            return (Self::nan(), Self::nan());
        }
        let k = (self.hi() / PIO2.0).round();
        let r = self
            - DoubleDouble(TwoFloat::new_mul(k, PIO2.0))
            - DoubleDouble(TwoFloat::new_mul(k, PIO2.1))
            - DoubleDouble::from_f64(k * PIO2.2);
        let (s, c) = Self::sin_cos_reduced(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo() == 0.0 {
            write!(f, "{:e}", self.hi())
        } else {
            write!(f, "{:e}{:+e}", self.hi(), self.lo())
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for DoubleDouble {
            type Output = DoubleDouble;
            fn $m(self, rhs: DoubleDouble) -> DoubleDouble {
                DoubleDouble($tr::$m(self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

/// Long division with three quotient digits; `twofloat`'s own quotient is
/// only accurate to about 2^-60.
impl Div for DoubleDouble {
    type Output = DoubleDouble;
    fn div(self, rhs: DoubleDouble) -> DoubleDouble {
        let q1 = self.hi() / rhs.hi();
        if !q1.is_finite() || q1 == 0.0 {
            return DoubleDouble::from_f64(q1);
        }
        let r = self.0 - rhs.0 * q1;
        let q2 = r.hi() / rhs.hi();
        let r = r - rhs.0 * q2;
        let q3 = r.hi() / rhs.hi();
        DoubleDouble(TwoFloat::new_add(q1, q2) + q3)
    }
}

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    fn neg(self) -> DoubleDouble {
        DoubleDouble(-self.0)
    }
}

impl Real for DoubleDouble {
    const NAME: &'static str = "double-double";

    fn zero() -> Self {
        Self::ZERO
    }

    fn one() -> Self {
        Self::ONE
    }

    fn from_f64(v: f64) -> Self {
        DoubleDouble(TwoFloat::from_f64(v))
    }

    fn from_i64(v: i64) -> Self {
        let hi = v as f64;
        let rest = (v as i128 - hi as i128) as f64;
        DoubleDouble::new(hi, rest)
    }

    fn from_rational(r: &BigRational) -> Self {
        let hi = r.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() || hi == 0.0 {
            return Self::from_f64(hi);
        }
        let Some(hi_exact) = BigRational::from_float(hi) else {
            return Self::from_f64(hi);
        };
        let lo = (r - hi_exact).to_f64().unwrap_or(0.0);
        DoubleDouble::new(hi, lo)
    }

    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }

    fn epsilon() -> Self {
        Self::from_f64(DD_EPS)
    }

    fn default_abs_tol() -> Self {
        // 1e-13 relative to binary64 unit roundoff, carried over to 2^-104
        // and rounded up for the residual error of the elementary functions.
        Self::from_f64(1e-28)
    }

    fn abs(self) -> Self {
        if self.hi() < 0.0 || (self.hi() == 0.0 && self.lo() < 0.0) {
            -self
        } else {
            self
        }
    }

    fn sqrt(self) -> Self {
        if self.hi() < 0.0 {
            return Self::nan();
        }
        if self.hi() == 0.0 {
            return Self::ZERO;
        }
        if !self.hi().is_finite() {
            return self;
        }
        let y0 = self.hi().sqrt();
        let sq = DoubleDouble(TwoFloat::new_mul(y0, y0));
        Self::from_f64(y0) + (self - sq) / Self::from_f64(2.0 * y0)
    }

    fn exp(self) -> Self {
        let x = self.hi();
        if x.is_nan() {
            return Self::nan();
        }
        if x > 709.7 {
            return Self::infinity();
        }
        if x < -745.2 {
            return Self::ZERO;
        }
        let k = (x / LN2.0).round();
        let r =
            self - DoubleDouble(TwoFloat::new_mul(k, LN2.0)) - DoubleDouble::from_f64(k * LN2.1);
        let s = Self::expm1_reduced(r);
        (s + Self::ONE).ldexp(k as i32)
    }

    fn exp_m1(self) -> Self {
        if self.hi().abs() < 0.34 {
            Self::expm1_reduced(self)
        } else {
            self.exp() - Self::ONE
        }
    }

    fn ln_1p(self) -> Self {
        if self.hi() < -1.0 || (self.hi() == -1.0 && self.lo() <= 0.0) || self.hi().is_nan() {
            return Self::nan();
        }
        if self.hi() == 0.0 {
            return self;
        }
        let y0 = Self::from_f64(self.hi().ln_1p());
        // One Newton step on exp(y) - 1 - x = 0.
        let e = y0.exp_m1();
        y0 - (e - self) / (e + Self::ONE)
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn tan(self) -> Self {
        let (s, c) = self.sin_cos();
        s / c
    }

    fn atan(self) -> Self {
        if self.hi().is_nan() {
            return self;
        }
        let y0 = Self::from_f64(self.hi().atan());
        // One Newton step on sin(y) - x cos(y) = 0.
        let (s, c) = y0.sin_cos();
        y0 - (s - self * c) / (c + self * s)
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::ONE / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn is_finite(self) -> bool {
        self.hi().is_finite() && self.lo().is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Dd = DoubleDouble;

    fn rel_err(got: Dd, hi: f64, lo: f64) -> f64 {
        let want = Dd::new(hi, lo);
        ((got - want) / want).hi().abs()
    }

    // Reference values: 300-bit evaluations split into (hi, lo) pairs.
    #[test]
    fn elementary_functions_reach_double_double_accuracy() {
        let cases: &[(&str, f64, f64, f64)] = &[
            ("exp", 0.001, 1.0010005001667084, -4.290842058948394e-17),
            ("exp", 0.3, 1.3498588075760032, -9.447314673432387e-17),
            ("exp", -0.7, 0.4965853037914095, 9.827550225511106e-18),
            ("exp", 2.5, 12.182493960703473, 2.0334002173348147e-16),
            ("expm1", 0.001, 0.0010005001667083417, 2.598544094203749e-20),
            ("expm1", 0.3, 0.3498588075760031, 1.6549155728191776e-17),
            ("expm1", -0.7, -0.5034146962085905, 9.827550225511106e-18),
            ("sin", 0.001, 0.0009999998333333417, 5.670638989736153e-21),
            ("sin", 0.3, 0.29552020666133955, 1.8315357276792536e-17),
            ("sin", -0.7, -0.644217687237691, -2.8740567927338755e-18),
            ("sin", 2.5, 0.5984721441039565, -5.521403334082375e-17),
            ("cos", 0.001, 0.9999995000000417, -7.831485455398128e-18),
            ("cos", 2.5, -0.8011436155469337, -1.8674742705085553e-17),
            ("tan", 0.001, 0.0010000003333334668, -6.486837852282393e-20),
            ("tan", -0.7, -0.8422883804630794, 3.9128846706146343e-17),
            ("tan", 2.5, -0.7470222972386603, 3.6166133011893774e-17),
            (
                "atan",
                0.001,
                0.0009999996666668668,
                -1.0247543344088032e-19,
            ),
            ("atan", 0.3, 0.2914567944778671, -1.6448555435075034e-17),
            ("atan", 2.5, 1.1902899496825317, 7.683333629842069e-17),
            (
                "log1p",
                0.001,
                0.0009995003330835331,
                3.8971025988294614e-20,
            ),
            ("log1p", -0.7, -1.203972804325936, 5.2347781679865864e-17),
            ("log1p", 2.5, 1.252762968495368, -6.097690852192957e-17),
            ("sqrt", 0.001, 0.03162277660168379, 2.3070395267954534e-18),
            ("sqrt", 2.5, 1.5811388300841898, -9.539408485358302e-17),
        ];
        for &(name, x, hi, lo) in cases {
            let x = Dd::from_f64(x);
            let got = match name {
                "exp" => x.exp(),
                "expm1" => x.exp_m1(),
                "sin" => x.sin(),
                "cos" => x.cos(),
                "tan" => x.tan(),
                "atan" => x.atan(),
                "log1p" => x.ln_1p(),
                "sqrt" => x.sqrt(),
                _ => unreachable!(),
            };
            let err = rel_err(got, hi, lo);
            assert!(err < 1e-30, "{name}({}) rel err {err:e}", x.hi());
        }
    }

    #[test]
    fn division_is_correctly_rounded_in_low_word() {
        let a = Dd::new(0.3, 1.2345678e-18);
        let b = Dd::new(1.7, -3.3e-17);
        let err = rel_err(a / b, 0.17647058823529413, -9.197745621357852e-18);
        assert!(err < 1e-31, "{err:e}");
        let r = Dd::from_f64(3.0 / 4096.0);
        assert_eq!((r * r / Dd::from_f64(2.0)).lo(), 0.0);
    }

    #[test]
    fn exp_limits_do_not_produce_nan() {
        assert_eq!(Dd::from_f64(-1e6).exp(), Dd::ZERO);
        assert!(!Dd::from_f64(1e6).exp().is_finite());
        assert_eq!(Dd::from_f64(-1.0 / 1e-200).exp(), Dd::ZERO);
    }

    #[test]
    fn rational_conversion_keeps_low_word() {
        let third = BigRational::new(1.into(), 3.into());
        let t = Dd::from_rational(&third);
        let back = t * Dd::from_f64(3.0) - Dd::ONE;
        assert!(back.hi().abs() < 1e-31);
        assert_eq!(Dd::from_i64(i64::MAX).hi(), i64::MAX as f64);
    }

    #[test]
    fn domain_violations_are_nan() {
        assert!(Dd::from_f64(-1.0).sqrt().hi().is_nan());
        assert!(Dd::from_f64(-1.5).ln_1p().hi().is_nan());
        assert!(Dd::from_f64(-1.0).ln_1p().hi().is_nan());
    }
}
