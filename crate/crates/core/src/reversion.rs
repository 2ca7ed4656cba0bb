//! Series reversion: given `f` with `f(0) = 0`, `f'(0) != 0`, find the
//! truncated compositional inverse `g` with `g(f(x)) = x`.
//!
//! Three independent routes are provided:
//!
//! * [`lagrange_revert`]: the explicit coefficient formula
//!   `b_n = (1/n) [x^{n-1}] (x / f(x))^n`, each coefficient computed from a
//!   fresh power.
//! * [`newton_revert`]: Newton iteration `g <- g - (f(g) - x) / f'(g)` with
//!   doubling precision.
//! * [`triangular_revert`]: forward substitution on `[y^n] f(g(y)) = [n == 1]`.
//!
//! [`lagrange_burmann`] extends the explicit formula to `H(g(y))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Coefficient, RingMode};
use crate::series::{SeriesError, TruncatedSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lagrange,
    Newton,
    Triangular,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Lagrange, Method::Newton, Method::Triangular];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lagrange => "lagrange",
            Method::Newton => "newton",
            Method::Triangular => "triangular",
        }
    }

    pub fn revert<C: Coefficient>(
        self,
        f: &TruncatedSeries<C>,
        order: usize,
    ) -> Result<InversionResult<C>, ReversionError> {
        match self {
            Method::Lagrange => lagrange_revert(f, order),
            Method::Newton => newton_revert(f, order),
            Method::Triangular => triangular_revert(f, order),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReversionError {
    #[error("series is not revertible: need f(0) = 0 and f'(0) != 0")]
    NotRevertible,
    #[error("input series has order {have}, reversion to order {need} requested")]
    InsufficientOrder { have: usize, need: usize },
    #[error("newton iteration failed to double the trusted order at order {order}")]
    NonConvergence { order: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// The truncated inverse series together with how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct InversionResult<C: Coefficient> {
    pub series: TruncatedSeries<C>,
    pub method: Method,
    pub input_order: usize,
}

fn check_input<C: Coefficient>(f: &TruncatedSeries<C>, order: usize) -> Result<(), ReversionError> {
    if !f.is_revertible() {
        return Err(ReversionError::NotRevertible);
    }
    if f.order() < order {
        return Err(ReversionError::InsufficientOrder {
            have: f.order(),
            need: order,
        });
    }
    Ok(())
}

/// `x / f(x)` through order `order - 1`, cancelling the common factor of x
/// before dividing.
fn x_over_f<C: Coefficient>(
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<TruncatedSeries<C>, SeriesError> {
    f.truncate(order).shift_down()?.recip()
}

/// `[x^index] base^n`. The base is truncated to `index` and the last
/// multiplication only forms the one coefficient that is needed.
fn power_coefficient<C: Coefficient>(base: &TruncatedSeries<C>, n: u64, index: usize) -> C {
    let base = base.truncate(index);
    if n == 0 {
        return if index == 0 { C::one() } else { C::zero() };
    }
    let half = base.pow_int(n / 2);
    let other = if n.is_multiple_of(2) {
        half.clone()
    } else {
        half.mul(&base)
    };
    C::convolution_at(half.coeffs(), other.coeffs(), index)
}

fn zero_result<C: Coefficient>(method: Method, input_order: usize) -> InversionResult<C> {
    InversionResult {
        series: TruncatedSeries::zero(0),
        method,
        input_order,
    }
}

/// Reversion by the explicit Lagrange formula. Every coefficient is computed
/// independently from its own power of `x / f(x)`; the per-coefficient work
/// runs on the rayon pool.
pub fn lagrange_revert<C: Coefficient>(
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<InversionResult<C>, ReversionError> {
    check_input(f, order)?;
    if order == 0 {
        return Ok(zero_result(Method::Lagrange, f.order()));
    }
    let h = x_over_f(f, order)?;
    let tail: Vec<C> = (1..=order)
        .into_par_iter()
        .map(|n| power_coefficient(&h, n as u64, n - 1) / &C::from_i64(n as i64))
        .collect();
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(C::zero());
    coeffs.extend(tail);
    Ok(InversionResult {
        series: TruncatedSeries::new(coeffs)?,
        method: Method::Lagrange,
        input_order: f.order(),
    })
}

/// Lagrange formula with powers of `x / f(x)` built incrementally
/// (`h^n = h^{n-1} h`). Same output as [`lagrange_revert`].
pub fn lagrange_revert_incremental<C: Coefficient>(
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<InversionResult<C>, ReversionError> {
    check_input(f, order)?;
    if order == 0 {
        return Ok(zero_result(Method::Lagrange, f.order()));
    }
    let h = x_over_f(f, order)?;
    let mut coeffs = vec![C::zero(), h.coeffs()[0].clone()];
    let mut power = h.clone();
    for n in 2..=order {
        // Only coefficients up to n-1 of later powers are ever read.
        power = power.truncate(order - 1).mul(&h.truncate(order - 1));
        coeffs.push(power.coeffs()[n - 1].clone() / &C::from_i64(n as i64));
    }
    Ok(InversionResult {
        series: TruncatedSeries::new(coeffs)?,
        method: Method::Lagrange,
        input_order: f.order(),
    })
}

fn negligible<C: Coefficient>(c: &C, scale: f64) -> bool {
    match C::MODE {
        RingMode::Rational => c.is_zero(),
        RingMode::Float => c.to_f64().abs() <= 1e-6 * scale,
    }
}

fn max_abs<C: Coefficient>(s: &TruncatedSeries<C>) -> f64 {
    s.coeffs()
        .iter()
        .map(|c| c.to_f64().abs())
        .fold(0.0, f64::max)
}

/// Reversion by Newton iteration on `f(g) = x`, doubling the number of
/// trusted coefficients per step.
pub fn newton_revert<C: Coefficient>(
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<InversionResult<C>, ReversionError> {
    check_input(f, order)?;
    if order == 0 {
        return Ok(zero_result(Method::Newton, f.order()));
    }
    let f = f.truncate(order);
    let fprime = f.derivative()?;
    let b1 = C::one() / &f.coeffs()[1];
    let mut g = TruncatedSeries::from_coeffs(vec![C::zero(), b1], 1);
    let mut trusted = 1;
    let f_scale = 1.0 + max_abs(&f);
    while trusted < order {
        let m = (2 * trusted).min(order);
        let gm = g.truncate(m);
        let residual = f
            .truncate(m)
            .compose(&gm)?
            .sub(&TruncatedSeries::variable(m));
        let scale = f_scale * (1.0 + max_abs(&gm));
        if !residual.coeffs()[..=trusted]
            .iter()
            .all(|c| negligible(c, scale))
        {
            return Err(ReversionError::NonConvergence { order: trusted });
        }
        // residual = x^{trusted+1} r, so only m - trusted - 1 orders of f'(g)
        // are needed.
        let keep = m - trusted - 1;
        let mut r = residual;
        for _ in 0..=trusted {
            r = TruncatedSeries::new(r.coeffs()[1..].to_vec())?;
        }
        let slope = fprime.truncate(keep).compose(&gm.truncate(keep))?;
        let step = r.div(&slope)?;
        let mut coeffs = gm.into_coeffs();
        for (i, c) in step.into_coeffs().into_iter().enumerate() {
            let k = trusted + 1 + i;
            coeffs[k] = coeffs[k].clone() - c;
        }
        g = TruncatedSeries::new(coeffs)?;
        trusted = m;
    }
    Ok(InversionResult {
        series: g.truncate(order),
        method: Method::Newton,
        input_order: f.order(),
    })
}

/// Reversion by forward substitution on the lower-triangular system
/// `sum_k f_k [y^n] g^k = [n == 1]`, carrying the columns of the powers of
/// `g`. This is the brute-force reference the other two methods are checked
/// against.
pub fn triangular_revert<C: Coefficient>(
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<InversionResult<C>, ReversionError> {
    check_input(f, order)?;
    if order == 0 {
        return Ok(zero_result(Method::Triangular, f.order()));
    }
    let fc = &f.coeffs()[..=order];
    // powers[k - 1][n] = [y^n] g^k, filled one column n at a time
    let mut powers: Vec<Vec<C>> = vec![vec![C::zero(); order + 1]; order];
    let mut g = vec![C::zero(); order + 1];
    for n in 1..=order {
        // [y^n] g^k for k >= 2 only involves g_1 .. g_{n-1}.
        let column: Vec<C> = (2..=n)
            .into_par_iter()
            .map(|k| C::convolution_at(&g[..n], &powers[k - 2][..n], n))
            .collect();
        let mut rhs = if n == 1 { C::one() } else { C::zero() };
        for (k, p) in (2..=n).zip(column) {
            rhs = rhs - fc[k].clone() * &p;
            powers[k - 1][n] = p;
        }
        g[n] = rhs / &fc[1];
        powers[0][n] = g[n].clone();
    }
    Ok(InversionResult {
        series: TruncatedSeries::new(g)?,
        method: Method::Triangular,
        input_order: f.order(),
    })
}

/// Lagrange–Bürmann: coefficients of `H(g(y))` where `g` reverts `f`,
/// `[y^n] H(g) = (1/n) [x^{n-1}] H'(x) (x / f(x))^n`, constant term `H(0)`.
pub fn lagrange_burmann<C: Coefficient>(
    outer: &TruncatedSeries<C>,
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<TruncatedSeries<C>, ReversionError> {
    check_input(f, order)?;
    if outer.order() < order {
        return Err(ReversionError::InsufficientOrder {
            have: outer.order(),
            need: order,
        });
    }
    if order == 0 {
        return Ok(TruncatedSeries::constant(outer.coeffs()[0].clone(), 0));
    }
    let h = x_over_f(f, order)?;
    let dh = outer.truncate(order).derivative()?;
    let tail: Vec<C> = (1..=order)
        .into_par_iter()
        .map(|n| {
            let power = h.truncate(n - 1).pow_int(n as u64);
            C::convolution_at(dh.coeffs(), power.coeffs(), n - 1) / &C::from_i64(n as i64)
        })
        .collect();
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(outer.coeffs()[0].clone());
    coeffs.extend(tail);
    Ok(TruncatedSeries::new(coeffs)?)
}
