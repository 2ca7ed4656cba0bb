//! Truncated formal power series.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::scalar::{Coefficient, Real, RingMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("ring mode mismatch: {left} vs {right}")]
    ModeMismatch { left: RingMode, right: RingMode },
    #[error("divisor has a zero constant term")]
    ZeroConstantTerm,
    #[error("inner series of a composition has a nonzero constant term")]
    InnerConstantNonzero,
    #[error("cannot differentiate an order-0 series")]
    OrderZero,
    #[error("coefficient index {index} out of range for order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("series must have at least one coefficient")]
    Empty,
    #[error("cannot divide by x: constant term is nonzero")]
    NotDivisibleByX,
    #[error("invalid series document: {0}")]
    Format(String),
}

/// Coefficients `c_0..=c_N` of a power series truncated at degree `N`
/// (inclusive).
///
/// Every binary operation truncates its result to the smaller operand order.
#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Coefficient> TruncatedSeries<C> {
    pub fn new(coeffs: Vec<C>) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::Empty);
        }
        Ok(TruncatedSeries { coeffs })
    }

    /// Builds a series from coefficients, padding with zeros (or truncating)
    /// to the requested order.
    pub fn from_coeffs(mut coeffs: Vec<C>, order: usize) -> Self {
        coeffs.resize(order + 1, C::zero());
        TruncatedSeries { coeffs }
    }

    pub fn from_i64s(values: &[i64], order: usize) -> Self {
        Self::from_coeffs(values.iter().map(|&v| C::from_i64(v)).collect(), order)
    }

    pub fn zero(order: usize) -> Self {
        Self::from_coeffs(Vec::new(), order)
    }

    pub fn constant(c: C, order: usize) -> Self {
        Self::from_coeffs(vec![c], order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(C::one(), order)
    }

    /// The series `x`. At order 0 this is the zero series.
    pub fn variable(order: usize) -> Self {
        Self::from_coeffs(vec![C::zero(), C::one()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mode(&self) -> RingMode {
        C::MODE
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// `[x^k]`.
    pub fn coeff_at(&self, k: usize) -> Result<&C, SeriesError> {
        self.coeffs.get(k).ok_or(SeriesError::IndexOutOfRange {
            index: k,
            order: self.order(),
        })
    }

    /// `f_0 == 0` and `f_1 != 0`.
    pub fn is_revertible(&self) -> bool {
        self.coeffs[0].is_zero() && self.coeffs.get(1).is_some_and(|c| !c.is_zero())
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs: Vec<C> = self.coeffs.iter().take(order + 1).cloned().collect();
        coeffs.resize(order + 1, C::zero());
        TruncatedSeries { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = self.coeffs[..=n]
            .iter()
            .zip(&other.coeffs[..=n])
            .map(|(a, b)| a.clone() + b)
            .collect();
        TruncatedSeries { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = self.coeffs[..=n]
            .iter()
            .zip(&other.coeffs[..=n])
            .map(|(a, b)| a.clone() - b)
            .collect();
        TruncatedSeries { coeffs }
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| c.clone() * s).collect(),
        }
    }

    /// Schoolbook Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        TruncatedSeries {
            coeffs: C::convolve(&self.coeffs[..=n], &other.coeffs[..=n], n + 1),
        }
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn recip(&self) -> Result<Self, SeriesError> {
        Self::one(self.order()).div(self)
    }

    /// Quotient `q` with `q * b == a` through the smaller order.
    pub fn div(&self, b: &Self) -> Result<Self, SeriesError> {
        let b0 = &b.coeffs[0];
        if b0.is_zero() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let n = self.order().min(b.order());
        let bs = &b.coeffs[..=n];
        let mut q: Vec<C> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            // q_k = (a_k - sum_{j=1..k} b_j q_{k-j}) / b_0
            let acc = if k == 0 {
                C::zero()
            } else {
                C::convolution_at(&bs[1..=k], &q, k - 1)
            };
            q.push((self.coeffs[k].clone() - acc) / b0);
        }
        Ok(TruncatedSeries { coeffs: q })
    }

    /// Divides by `x`, dropping the order by one. Requires a zero constant
    /// term.
    pub fn shift_down(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::NotDivisibleByX);
        }
        if self.order() == 0 {
            return Err(SeriesError::OrderZero);
        }
        Ok(TruncatedSeries {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    /// Multiplies by `x^k`, keeping the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.order();
        let mut coeffs = vec![C::zero(); k.min(n + 1)];
        coeffs.extend(self.coeffs.iter().take((n + 1).saturating_sub(k)).cloned());
        TruncatedSeries { coeffs }
    }

    /// `outer(inner(x))` through the smaller order, by Horner nesting.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        if !inner.coeffs[0].is_zero() {
            return Err(SeriesError::InnerConstantNonzero);
        }
        let n = self.order().min(inner.order());
        let inner = inner.truncate(n);
        // Terms of degree > n in outer cannot contribute below x^{n+1}.
        let mut acc = Self::constant(self.coeffs[n].clone(), n);
        for k in (0..n).rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] = acc.coeffs[0].clone() + &self.coeffs[k];
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Result<Self, SeriesError> {
        if self.order() == 0 {
            return Err(SeriesError::OrderZero);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| c.clone() * &C::from_i64(k as i64 + 1))
            .collect();
        Ok(TruncatedSeries { coeffs })
    }

    /// Antiderivative with the given constant term; the order grows by one.
    pub fn integral(&self, constant: C) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(constant);
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.clone() / &C::from_i64(k as i64 + 1));
        }
        TruncatedSeries { coeffs }
    }

    /// `a^n` by repeated squaring.
    pub fn pow_int(&self, n: u64) -> Self {
        let mut result = Self::one(self.order());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Horner evaluation of the degree-N polynomial at `t`.
    pub fn eval_at<T: Real>(&self, t: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * t + c.to_real::<T>())
    }

    /// Coefficientwise comparison through the smaller order: exact in the
    /// rational ring, relative tolerance `rel_tol` per coefficient in float
    /// rings.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .all(|(a, b)| a.close_to(b, rel_tol))
    }

    /// Largest relative coefficient difference (absolute where both sides
    /// are below 1 in magnitude).
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| {
                let (a, b) = (a.to_f64(), b.to_f64());
                if a == b {
                    0.0
                } else {
                    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> TruncatedSeries<D> {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn to_float(&self) -> TruncatedSeries<f64> {
        self.map(|c| c.to_f64())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order(),
            "mode": C::MODE,
            "coeffs": self.coeffs.iter().map(Coefficient::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, SeriesError> {
        let doc = SeriesDoc::parse(v)?;
        if doc.mode != C::MODE {
            return Err(SeriesError::ModeMismatch {
                left: C::MODE,
                right: doc.mode,
            });
        }
        doc.coeffs_as::<C>()
    }
}

struct SeriesDoc<'a> {
    order: usize,
    mode: RingMode,
    coeffs: &'a [Value],
}

impl<'a> SeriesDoc<'a> {
    fn parse(v: &'a Value) -> Result<Self, SeriesError> {
        let fmt_err = |m: &str| SeriesError::Format(m.to_string());
        let obj = v.as_object().ok_or_else(|| fmt_err("expected an object"))?;
        let order = obj
            .get("order")
            .and_then(Value::as_u64)
            .ok_or_else(|| fmt_err("missing or invalid \"order\""))? as usize;
        let mode = obj
            .get("mode")
            .and_then(Value::as_str)
            .ok_or_else(|| fmt_err("missing \"mode\""))?
            .parse::<RingMode>()
            .map_err(SeriesError::Format)?;
        let coeffs = obj
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| fmt_err("missing \"coeffs\" array"))?;
        if coeffs.len() != order + 1 {
            return Err(SeriesError::Format(format!(
                "order {order} requires {} coefficients, found {}",
                order + 1,
                coeffs.len()
            )));
        }
        Ok(SeriesDoc {
            order,
            mode,
            coeffs,
        })
    }

    fn coeffs_as<C: Coefficient>(&self) -> Result<TruncatedSeries<C>, SeriesError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(C::from_json)
            .collect::<Result<Vec<_>, _>>()
            .map_err(SeriesError::Format)?;
        debug_assert_eq!(coeffs.len(), self.order + 1);
        TruncatedSeries::new(coeffs)
    }
}

impl<C: Coefficient> Serialize for TruncatedSeries<C> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de, C: Coefficient> Deserialize<'de> for TruncatedSeries<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Self::from_json(&v).map_err(D::Error::custom)
    }
}

impl<C: Coefficient> fmt::Debug for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedSeries[{}; ", C::MODE)?;
        f.debug_list()
            .entries(self.coeffs.iter().map(|c| c.to_string()))
            .finish()?;
        write!(f, "]")
    }
}

impl<C: Coefficient> fmt::Display for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.order() + 1)
    }
}

impl<C: Coefficient> Add for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn add(self, rhs: Self) -> TruncatedSeries<C> {
        TruncatedSeries::add(self, rhs)
    }
}

impl<C: Coefficient> Sub for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn sub(self, rhs: Self) -> TruncatedSeries<C> {
        TruncatedSeries::sub(self, rhs)
    }
}

impl<C: Coefficient> Mul for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn mul(self, rhs: Self) -> TruncatedSeries<C> {
        TruncatedSeries::mul(self, rhs)
    }
}

impl<C: Coefficient> Neg for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn neg(self) -> TruncatedSeries<C> {
        TruncatedSeries::neg(self)
    }
}

/// A series whose coefficient ring is only known at run time (for example,
/// one read from a JSON document).
#[derive(Clone, Debug, PartialEq)]
pub enum DynSeries {
    Rational(TruncatedSeries<BigRational>),
    Float(TruncatedSeries<f64>),
}

impl DynSeries {
    pub fn mode(&self) -> RingMode {
        match self {
            DynSeries::Rational(_) => RingMode::Rational,
            DynSeries::Float(_) => RingMode::Float,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            DynSeries::Rational(s) => s.order(),
            DynSeries::Float(s) => s.order(),
        }
    }

    pub fn to_float(&self) -> TruncatedSeries<f64> {
        match self {
            DynSeries::Rational(s) => s.to_float(),
            DynSeries::Float(s) => s.clone(),
        }
    }

    fn mismatch(&self, other: &DynSeries) -> SeriesError {
        SeriesError::ModeMismatch {
            left: self.mode(),
            right: other.mode(),
        }
    }

    pub fn add(&self, other: &DynSeries) -> Result<DynSeries, SeriesError> {
        match (self, other) {
            (DynSeries::Rational(a), DynSeries::Rational(b)) => Ok(DynSeries::Rational(a + b)),
            (DynSeries::Float(a), DynSeries::Float(b)) => Ok(DynSeries::Float(a + b)),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn mul(&self, other: &DynSeries) -> Result<DynSeries, SeriesError> {
        match (self, other) {
            (DynSeries::Rational(a), DynSeries::Rational(b)) => Ok(DynSeries::Rational(a * b)),
            (DynSeries::Float(a), DynSeries::Float(b)) => Ok(DynSeries::Float(a * b)),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            DynSeries::Rational(s) => s.to_json(),
            DynSeries::Float(s) => s.to_json(),
        }
    }

    pub fn from_json(v: &Value) -> Result<DynSeries, SeriesError> {
        let doc = SeriesDoc::parse(v)?;
        match doc.mode {
            RingMode::Rational => doc.coeffs_as().map(DynSeries::Rational),
            RingMode::Float => doc.coeffs_as().map(DynSeries::Float),
        }
    }
}
