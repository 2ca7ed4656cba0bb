//! Reversion of truncated power series by explicit Lagrange inversion, and
//! a numerical pipeline for the smooth (C-infinity, possibly non-analytic)
//! case: recover a jet, invert it, and measure how fast the inversion
//! remainder decays near the origin.
//!
//! The series machinery is generic over a [`Coefficient`] ring (exact
//! rationals or binary floats); the evaluator and the root-finding oracle are
//! generic over a [`Real`] scalar (`f64`, `f32`, or [`DoubleDouble`]).
//!
//! ```
//! use series_invert::{lagrange_revert, RationalSeries};
//!
//! // x - x^2 reverts to the Catalan generating function.
//! let f = RationalSeries::from_i64s(&[0, 1, -1], 6);
//! let g = lagrange_revert(&f, 6).unwrap().series;
//! let catalan: Vec<String> = g.coeffs().iter().map(|c| c.to_string()).collect();
//! assert_eq!(catalan, ["0", "1", "1", "2", "5", "14", "42"]);
//! ```

// `!(a > b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dd;
pub mod expr;
pub mod oracle;
pub mod reversion;
pub mod scalar;
pub mod series;
pub mod smooth;

pub use dd::DoubleDouble;
pub use expr::{
    corpus, corpus_lookup, eval_expression, parse_expression, series_expand, CorpusEntry,
    EvalError, ExpandError, Expansion, ExpressionNode, Function, ParseError, SmoothFunction,
    UnknownEntry,
};
pub use oracle::{
    bracket_inverse, numeric_inverse, solve_inverse, BracketingInterval, InverseSolution,
    OracleError, RealFunction,
};
pub use reversion::{
    lagrange_burmann, lagrange_revert, lagrange_revert_incremental, newton_revert,
    triangular_revert, InversionResult, Method, ReversionError,
};
pub use scalar::{Coefficient, Elementary, Real, RingMode};
pub use series::{DynSeries, SeriesError, TruncatedSeries};
pub use smooth::{
    classify_decay, estimate_remainder_order, estimate_remainder_order_in, extract_jet,
    inverse_taylor, Jet, JetSource, Precision, RemainderConfig, RemainderReport, RemainderSample,
    Side, SideFit, SmoothError, Verdict, DEFAULT_BASE_STEP,
};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Exact rational coefficients.
pub type Rational = BigRational;
/// Series over exact rationals.
pub type RationalSeries = TruncatedSeries<BigRational>;
/// Series over binary64 floats.
pub type FloatSeries = TruncatedSeries<f64>;
/// Series over binary32 floats.
pub type Float32Series = TruncatedSeries<f32>;
