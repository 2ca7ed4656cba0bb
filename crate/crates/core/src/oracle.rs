//! Ground-truth local inverse values `f^{-1}(y)` by bracketing root finding.

use thiserror::Error;

use crate::scalar::Real;

/// Maximum number of radius doublings when searching for a bracket.
pub const MAX_DOUBLINGS: u32 = 60;
/// Iteration cap of the hybrid bisection/secant solver.
pub const MAX_ITERATIONS: u32 = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("no bracket for y = {y}: {reason}")]
    NoBracket { y: f64, reason: String },
    #[error("root finder exceeded {MAX_ITERATIONS} iterations for y = {y}")]
    MaxIterations { y: f64 },
    #[error("invalid oracle argument: {0}")]
    InvalidArgument(String),
}

/// Evaluation of a real function in a particular precision. Failing
/// evaluations (outside the domain) return `None`.
pub trait RealFunction<T: Real> {
    fn value(&self, x: T) -> Option<T>;
}

impl<T: Real, F: Fn(T) -> T> RealFunction<T> for F {
    fn value(&self, x: T) -> Option<T> {
        let v = self(x);
        v.is_finite().then_some(v)
    }
}

/// An interval `[lo, hi]` over which `f(x) - y` changes sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketingInterval<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

impl<T: Real> BracketingInterval<T> {
    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn encloses(&self, y: T) -> bool {
        self.lo < self.hi && sign_change(self.f_lo - y, self.f_hi - y)
    }
}

fn sign_change<T: Real>(a: T, b: T) -> bool {
    (a < T::zero() && b > T::zero()) || (a > T::zero() && b < T::zero())
}

/// Finds an interval around the origin enclosing `f^{-1}(y)`.
///
/// The symmetric interval `[-r, r]` is doubled from `r = seed_radius` and at
/// each radius the two halves `[-r, 0]` and `[0, r]` are checked, so the
/// first bracket found holds the root of smallest magnitude.
pub fn bracket_inverse<T: Real, F: RealFunction<T> + ?Sized>(
    fun: &F,
    y: T,
    seed_radius: T,
) -> Result<BracketingInterval<T>, OracleError> {
    let no_bracket = |reason: &str| OracleError::NoBracket {
        y: y.to_f64(),
        reason: reason.to_string(),
    };
    if !(seed_radius > T::zero()) || !seed_radius.is_finite() {
        return Err(OracleError::InvalidArgument(format!(
            "seed radius must be positive, got {seed_radius}"
        )));
    }
    let f0 = fun
        .value(T::zero())
        .ok_or_else(|| no_bracket("function is undefined at 0"))?;
    let two = T::from_f64(2.0);
    let mut r = seed_radius;
    for _ in 0..=MAX_DOUBLINGS {
        let (Some(fl), Some(fr)) = (fun.value(-r), fun.value(r)) else {
            return Err(no_bracket("left the function's domain while expanding"));
        };
        let increasing = fl < f0 && f0 < fr;
        let decreasing = fl > f0 && f0 > fr;
        if !increasing && !decreasing {
            return Err(no_bracket(
                "function is not monotone on the search interval",
            ));
        }
        if f0 == y {
            return Ok(BracketingInterval {
                lo: -r,
                hi: r,
                f_lo: fl,
                f_hi: fr,
            });
        }
        if sign_change(fl - y, f0 - y) {
            return Ok(BracketingInterval {
                lo: -r,
                hi: T::zero(),
                f_lo: fl,
                f_hi: f0,
            });
        }
        if sign_change(f0 - y, fr - y) {
            return Ok(BracketingInterval {
                lo: T::zero(),
                hi: r,
                f_lo: f0,
                f_hi: fr,
            });
        }
        r = r * two;
        if !r.is_finite() {
            break;
        }
    }
    Err(no_bracket("target out of range after maximum expansion"))
}

/// Outcome of [`solve_inverse`]: the root and the final bracket around it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseSolution<T> {
    pub x: T,
    pub lo: T,
    pub hi: T,
    pub iterations: u32,
}

/// `x` with `f(x) = y` near the origin; see [`solve_inverse`].
pub fn numeric_inverse<T: Real, F: RealFunction<T> + ?Sized>(
    fun: &F,
    y: T,
    abs_tol: T,
) -> Result<T, OracleError> {
    solve_inverse(fun, y, abs_tol).map(|s| s.x)
}

/// Hybrid bisection/secant solve of `f(x) = y` on the bracket from
/// [`bracket_inverse`].
///
/// Terminates once `|f(x) - y| <= abs_tol * max(1, |y|)` and the bracket is
/// no wider than `abs_tol`. A bisection step replaces the secant step whenever
/// the secant point leaves the bracket or the bracket failed to halve over the
/// previous step.
pub fn solve_inverse<T: Real, F: RealFunction<T> + ?Sized>(
    fun: &F,
    y: T,
    abs_tol: T,
) -> Result<InverseSolution<T>, OracleError> {
    if !(abs_tol > T::zero()) {
        return Err(OracleError::InvalidArgument(format!(
            "abs_tol must be positive, got {abs_tol}"
        )));
    }
    let seed = {
        let half = y.abs() * T::from_f64(0.5);
        if half > T::zero() {
            half
        } else {
            abs_tol
        }
    };
    let bracket = bracket_inverse(fun, y, seed)?;
    let residual_tol = abs_tol * T::one().max(y.abs());
    let eval = |x: T| {
        fun.value(x).ok_or_else(|| OracleError::NoBracket {
            y: y.to_f64(),
            reason: format!("function undefined at {x} inside the bracket"),
        })
    };

    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let (mut g_lo, mut g_hi) = (bracket.f_lo - y, bracket.f_hi - y);
    // Endpoints with exact zeros.
    if g_lo.is_zero() {
        return Ok(InverseSolution {
            x: lo,
            lo,
            hi: lo,
            iterations: 0,
        });
    }
    if g_hi.is_zero() {
        return Ok(InverseSolution {
            x: hi,
            lo: hi,
            hi,
            iterations: 0,
        });
    }
    let half = T::from_f64(0.5);
    let mut prev_width = hi - lo;
    let mut force_bisect = false;
    for iter in 1..=MAX_ITERATIONS {
        let width = hi - lo;
        let best_is_lo = g_lo.abs() <= g_hi.abs();
        let (best, g_best) = if best_is_lo { (lo, g_lo) } else { (hi, g_hi) };
        if width <= abs_tol && g_best.abs() <= residual_tol {
            return Ok(InverseSolution {
                x: best,
                lo,
                hi,
                iterations: iter - 1,
            });
        }

        let secant = lo - g_lo * (hi - lo) / (g_hi - g_lo);
        let mut x = if force_bisect || !(secant > lo && secant < hi) {
            T::midpoint(lo, hi)
        } else {
            secant
        };
        // Once the residual is small, step just past the root estimate by a
        // fraction of the tolerance to collapse the bracket from the far side.
        if !force_bisect && g_best.abs() <= residual_tol && width > abs_tol {
            let nudge = abs_tol * half;
            let base = if secant > lo && secant < hi {
                secant
            } else {
                best
            };
            let candidate = if best_is_lo {
                base + nudge
            } else {
                base - nudge
            };
            if candidate > lo && candidate < hi {
                x = candidate;
            }
        }
        let gx = eval(x)? - y;
        if gx.is_zero() {
            return Ok(InverseSolution {
                x,
                lo: x,
                hi: x,
                iterations: iter,
            });
        }
        if sign_change(g_lo, gx) {
            hi = x;
            g_hi = gx;
        } else {
            lo = x;
            g_lo = gx;
        }
        let new_width = hi - lo;
        force_bisect = new_width > prev_width * half;
        prev_width = new_width;
    }
    Err(OracleError::MaxIterations { y: y.to_f64() })
}
