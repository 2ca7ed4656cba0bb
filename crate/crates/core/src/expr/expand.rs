use thiserror::Error;

use super::{ExpressionNode, Function};
use crate::scalar::{Coefficient, Elementary};
use crate::series::TruncatedSeries;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot expand `{subexpression}` at 0: {reason}")]
pub struct ExpandError {
    pub subexpression: String,
    pub reason: String,
}

/// Series of a formula at 0 with a flag for whether it came from analytic
/// pieces only.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion<C: Coefficient> {
    pub series: TruncatedSeries<C>,
    /// False when a flat primitive contributed its (zero) jet.
    pub analytic: bool,
}

/// Taylor series of `e` at 0 through order `n`, composed from the primitive
/// series with the ring operations of [`TruncatedSeries`].
///
/// For a call whose argument `u` has a nonzero constant term `c`, the value
/// of the primitive at `c` must be representable in the ring; in rational
/// mode that holds only for trivial constants, so e.g. `exp(1 + x)` is
/// [`ExpandError`] there but expands over floats.
pub fn series_expand<C: Coefficient>(
    e: &ExpressionNode,
    n: usize,
) -> Result<Expansion<C>, ExpandError> {
    let mut analytic = true;
    let series = expand(e, n, &mut analytic)?;
    Ok(Expansion { series, analytic })
}

fn fail<C: Coefficient>(
    e: &ExpressionNode,
    reason: impl Into<String>,
) -> Result<TruncatedSeries<C>, ExpandError> {
    Err(ExpandError {
        subexpression: e.to_string(),
        reason: reason.into(),
    })
}

fn expand<C: Coefficient>(
    e: &ExpressionNode,
    n: usize,
    analytic: &mut bool,
) -> Result<TruncatedSeries<C>, ExpandError> {
    match e {
        ExpressionNode::Constant(c) => Ok(TruncatedSeries::constant(C::from_rational(c), n)),
        ExpressionNode::Variable => Ok(TruncatedSeries::variable(n)),
        ExpressionNode::Add(a, b) => Ok(expand(a, n, analytic)?.add(&expand(b, n, analytic)?)),
        ExpressionNode::Sub(a, b) => Ok(expand(a, n, analytic)?.sub(&expand(b, n, analytic)?)),
        ExpressionNode::Mul(a, b) => Ok(expand(a, n, analytic)?.mul(&expand(b, n, analytic)?)),
        ExpressionNode::Div(a, b) => {
            let num = expand::<C>(a, n, analytic)?;
            let den = expand::<C>(b, n, analytic)?;
            match num.div(&den) {
                Ok(q) => Ok(q),
                Err(_) => fail(e, "denominator vanishes at 0"),
            }
        }
        ExpressionNode::Pow(a, k) => {
            let base = expand::<C>(a, n, analytic)?;
            if *k >= 0 {
                return Ok(base.pow_int(*k as u64));
            }
            match base.recip() {
                Ok(r) => Ok(r.pow_int(k.unsigned_abs())),
                Err(_) => fail(e, "negative power of a series vanishing at 0"),
            }
        }
        ExpressionNode::Call(f, a) => {
            let mut inner_analytic = true;
            let u = expand::<C>(a, n, &mut inner_analytic)?;
            *analytic &= inner_analytic;
            if *f == Function::Flatbump {
                *analytic = false;
            }
            call(e, *f, &u, n)
        }
    }
}

/// Splits `u = c + v` with `v(0) = 0`.
fn split<C: Coefficient>(u: &TruncatedSeries<C>) -> (C, TruncatedSeries<C>) {
    let c = u.coeffs()[0].clone();
    let mut coeffs = u.coeffs().to_vec();
    coeffs[0] = C::zero();
    (c, TruncatedSeries::from_coeffs(coeffs, u.order()))
}

fn value_at<C: Coefficient>(e: &ExpressionNode, f: Elementary, c: &C) -> Result<C, ExpandError> {
    C::elementary(f, c).ok_or_else(|| ExpandError {
        subexpression: e.to_string(),
        reason: format!(
            "{f:?} of the constant term {c} is not representable in {} mode",
            C::MODE
        ),
    })
}

/// `sum x^k / k!` (alternating `[0]`/`[1]` parity filters give cos and sin).
fn exp_coefficients<C: Coefficient>(n: usize) -> Vec<C> {
    let mut out = Vec::with_capacity(n + 1);
    let mut term = C::one();
    out.push(term.clone());
    for k in 1..=n {
        term = term / &C::from_i64(k as i64);
        out.push(term.clone());
    }
    out
}

fn sin_series<C: Coefficient>(n: usize) -> TruncatedSeries<C> {
    let coeffs = exp_coefficients::<C>(n)
        .into_iter()
        .enumerate()
        .map(|(k, c)| match k % 4 {
            1 => c,
            3 => -c,
            _ => C::zero(),
        })
        .collect();
    TruncatedSeries::from_coeffs(coeffs, n)
}

fn cos_series<C: Coefficient>(n: usize) -> TruncatedSeries<C> {
    let coeffs = exp_coefficients::<C>(n)
        .into_iter()
        .enumerate()
        .map(|(k, c)| match k % 4 {
            0 => c,
            2 => -c,
            _ => C::zero(),
        })
        .collect();
    TruncatedSeries::from_coeffs(coeffs, n)
}

/// `(1 + x)^{1/2}` by the binomial recurrence.
fn sqrt1p_series<C: Coefficient>(n: usize) -> TruncatedSeries<C> {
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut b = C::one();
    coeffs.push(b.clone());
    for k in 1..=n as i64 {
        // binom(1/2, k) = binom(1/2, k-1) * (3 - 2k) / (2k)
        b = b * &C::from_i64(3 - 2 * k) / &C::from_i64(2 * k);
        coeffs.push(b.clone());
    }
    TruncatedSeries::from_coeffs(coeffs, n)
}

fn compose<C: Coefficient>(
    outer: &TruncatedSeries<C>,
    v: &TruncatedSeries<C>,
) -> TruncatedSeries<C> {
    outer
        .compose(v)
        .expect("inner series has zero constant term")
}

/// `sin(u)` and `cos(u)` by the addition formulas at the constant term.
fn sin_cos<C: Coefficient>(
    e: &ExpressionNode,
    u: &TruncatedSeries<C>,
    n: usize,
) -> Result<(TruncatedSeries<C>, TruncatedSeries<C>), ExpandError> {
    let (c, v) = split(u);
    let sv = compose(&sin_series(n), &v);
    let cv = compose(&cos_series(n), &v);
    if c.is_zero() {
        return Ok((sv, cv));
    }
    let (sc, cc) = (
        value_at(e, Elementary::Sin, &c)?,
        value_at(e, Elementary::Cos, &c)?,
    );
    let sin = cv.scale(&sc).add(&sv.scale(&cc));
    let cos = cv.scale(&cc).sub(&sv.scale(&sc));
    Ok((sin, cos))
}

/// `c0 + integral(u' / d)` for primitives whose derivative is `u' / d(u)`.
fn integrate_quotient<C: Coefficient>(
    e: &ExpressionNode,
    u: &TruncatedSeries<C>,
    d: &TruncatedSeries<C>,
    c0: C,
    n: usize,
) -> Result<TruncatedSeries<C>, ExpandError> {
    if n == 0 {
        return Ok(TruncatedSeries::constant(c0, 0));
    }
    let du = u.derivative().expect("order is positive");
    let q = match du.div(&d.truncate(n - 1)) {
        Ok(q) => q,
        Err(_) => return fail(e, "derivative denominator vanishes at 0"),
    };
    Ok(q.integral(c0))
}

fn call<C: Coefficient>(
    e: &ExpressionNode,
    f: Function,
    u: &TruncatedSeries<C>,
    n: usize,
) -> Result<TruncatedSeries<C>, ExpandError> {
    let exp_of = |u: &TruncatedSeries<C>| -> Result<TruncatedSeries<C>, ExpandError> {
        let (c, v) = split(u);
        let ev = compose(&TruncatedSeries::from_coeffs(exp_coefficients(n), n), &v);
        if c.is_zero() {
            Ok(ev)
        } else {
            Ok(ev.scale(&value_at(e, Elementary::Exp, &c)?))
        }
    };
    match f {
        Function::Exp => exp_of(u),
        Function::Expm1 => {
            let ex = exp_of(u)?;
            Ok(ex.sub(&TruncatedSeries::one(n)))
        }
        Function::Sin => Ok(sin_cos(e, u, n)?.0),
        Function::Cos => Ok(sin_cos(e, u, n)?.1),
        Function::Tan => {
            let (s, c) = sin_cos(e, u, n)?;
            match s.div(&c) {
                Ok(t) => Ok(t),
                Err(_) => fail(e, "cos vanishes at the expansion point"),
            }
        }
        Function::Atan => {
            let c0 = value_at(e, Elementary::Atan, &u.coeffs()[0])?;
            let d = TruncatedSeries::one(n).add(&u.mul(u));
            integrate_quotient(e, u, &d, c0, n)
        }
        Function::Log1p => {
            let c = &u.coeffs()[0];
            if !(c.to_f64() > -1.0) {
                return fail(e, "log1p argument must exceed -1 at 0");
            }
            let c0 = value_at(e, Elementary::Log1p, c)?;
            let d = TruncatedSeries::one(n).add(u);
            integrate_quotient(e, u, &d, c0, n)
        }
        Function::Sqrt => {
            let (c, v) = split(u);
            if c.is_zero() {
                if v.coeffs().iter().all(|x| x.is_zero()) {
                    return Ok(TruncatedSeries::zero(n));
                }
                return fail(e, "sqrt of a series vanishing at 0 has no power series");
            }
            if !(c.to_f64() > 0.0) {
                return fail(e, "sqrt argument is negative at 0");
            }
            let root = value_at(e, Elementary::Sqrt, &c)?;
            let w = v.scale(&(C::one() / &c));
            Ok(compose(&sqrt1p_series(n), &w).scale(&root))
        }
        Function::Flatbump => {
            let (c, _) = split(u);
            if c.is_zero() {
                // Every derivative of the flat function vanishes at 0.
                return Ok(TruncatedSeries::zero(n));
            }
            // Away from 0 the function is exp(-1/u^2), which is analytic.
            let inv_sq = match u.mul(u).recip() {
                Ok(r) => r,
                Err(_) => return fail(e, "argument square vanishes"),
            };
            exp_of(&inv_sq.neg())
        }
    }
}
