//! The smooth-case pipeline: recover the jet of a C-infinity function at 0
//! numerically, invert it by the Lagrange formula, and measure how fast
//! `f^{-1}(y) - P_N(y)` decays as `y -> 0`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::DoubleDouble;
use crate::expr::SmoothFunction;
use crate::oracle::{numeric_inverse, OracleError};
use crate::reversion::{lagrange_revert, ReversionError};
use crate::scalar::{Coefficient, Real};
use crate::series::TruncatedSeries;
use crate::FloatSeries;

/// Richardson levels per derivative.
pub const RICHARDSON_LEVELS: u32 = 4;
/// Default finite-difference base step.
pub const DEFAULT_BASE_STEP: f64 = 0.125;
/// Smallest admissible finest step, `2^-40`.
pub const MIN_STEP: f64 = 9.094947017729282e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothError {
    #[error("function cannot be evaluated at x = {x} on the difference stencil")]
    DomainTooSmall { x: f64 },
    #[error("finest difference step {step} is below 2^-40")]
    StepUnderflow { step: f64 },
    #[error("jet is not revertible: {0}")]
    NotRevertible(String),
    #[error("jet is ill-conditioned: f'(0) = {c1} has error bar {error}; shrink the step")]
    IllConditionedJet { c1: f64, error: f64 },
    #[error("windows are not nested toward 0: {0}")]
    WindowsNotNested(String),
    #[error("reports mix polynomial orders {0} and {1}")]
    PolyOrderMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Reversion(#[from] ReversionError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JetSource {
    Exact,
    FiniteDifference,
}

/// Taylor coefficients `f^(k)(0)/k!` with an absolute error estimate each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub series: FloatSeries,
    pub per_coeff_error: Vec<f64>,
    pub source: JetSource,
}

impl Jet {
    pub fn exact(series: FloatSeries) -> Jet {
        let per_coeff_error = vec![0.0; series.order() + 1];
        Jet {
            series,
            per_coeff_error,
            source: JetSource::Exact,
        }
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }
}

/// Central stencil for the `k`-th difference: `(position, weight)` pairs on
/// the integer grid with `sum w f(p h) / h^k = f^(k)(0) + O(h^2)`.
///
/// Even orders use binomial weights centred at 0. Odd orders average the
/// two half-shifted binomial stencils, which keeps the positions integral and
/// the error expansion even in `h`.
fn stencil(k: usize) -> Vec<(i64, f64)> {
    let binom: Vec<f64> = {
        let mut row = vec![1.0f64];
        for i in 0..k {
            let next = row[i] * (k - i) as f64 / (i + 1) as f64;
            row.push(next);
        }
        row
    };
    let sign = |j: usize| if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut w = std::collections::BTreeMap::<i64, f64>::new();
    for (j, b) in binom.iter().enumerate() {
        let twice = k as i64 - 2 * j as i64;
        if k.is_multiple_of(2) {
            *w.entry(twice / 2).or_default() += sign(j) * b;
        } else {
            for s in [1, -1] {
                *w.entry((twice + s) / 2).or_default() += sign(j) * b / 2.0;
            }
        }
    }
    w.into_iter().filter(|(_, v)| *v != 0.0).collect()
}

fn factorial_f64(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// One Richardson tableau row entry: the difference quotient at step `h`
/// together with its rounding scale `sum |w f| / h^k / k!`.
fn difference(
    fun: &SmoothFunction,
    st: &[(i64, f64)],
    k: usize,
    h: f64,
) -> Result<(f64, f64), SmoothError> {
    let eval = |x: f64| fun.eval(x).map_err(|_| SmoothError::DomainTooSmall { x });
    let weight = |p: i64| st.iter().find(|(q, _)| *q == p).map_or(0.0, |(_, w)| *w);
    let m = st.iter().map(|(p, _)| p.abs()).max().unwrap_or(0);
    let (mut sum, mut scale) = (0.0, 0.0);
    // Symmetric points are paired so the parity that must cancel does so
    // before rounding.
    for p in 1..=m {
        let (a, b) = (weight(p), weight(-p));
        let (fp, fm) = (eval(p as f64 * h)?, eval(-p as f64 * h)?);
        let pair = if a == b { fp + fm } else { fp - fm };
        sum += a * pair;
        scale += a.abs() * (fp.abs() + fm.abs());
    }
    let w0 = weight(0);
    if w0 != 0.0 {
        let f0 = eval(0.0)?;
        sum += w0 * f0;
        scale += w0.abs() * f0.abs();
    }
    let denom = h.powi(k as i32) * factorial_f64(k);
    Ok((sum / denom, scale / denom))
}

/// Estimates `f^(k)(0)/k!` and its absolute error.
fn jet_coefficient(
    fun: &SmoothFunction,
    k: usize,
    base_step: f64,
) -> Result<(f64, f64), SmoothError> {
    if k == 0 {
        let f0 = fun
            .eval(0.0)
            .map_err(|_| SmoothError::DomainTooSmall { x: 0.0 })?;
        return Ok((f0, f64::EPSILON * f0.abs()));
    }
    let st = stencil(k);
    let reach = st.iter().map(|(p, _)| p.abs()).max().unwrap_or(1) as f64;
    // The outermost stencil point sits at base_step * sqrt(k).
    let h0 = base_step * (k as f64).sqrt() / reach;
    let levels = RICHARDSON_LEVELS as usize;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let mut rounding = Vec::with_capacity(levels);
    for l in 0..levels {
        let h = h0 / f64::powi(2.0, l as i32);
        let (d, scale) = difference(fun, &st, k, h)?;
        rounding.push(scale * f64::EPSILON * 4.0);
        let mut row = vec![d];
        for j in 1..=l {
            let fac = f64::powi(4.0, j as i32);
            let prev = row[j - 1];
            row.push(prev + (prev - table[l - 1][j - 1]) / (fac - 1.0));
        }
        table.push(row);
    }
    // Ridders-style choice of the entry with the smallest error estimate.
    let (mut best, mut best_err, mut best_level) = (table[0][0], f64::INFINITY, 0);
    for i in 1..levels {
        for j in 1..=i {
            let err = (table[i][j] - table[i][j - 1])
                .abs()
                .max((table[i][j] - table[i - 1][j - 1]).abs());
            if err <= best_err {
                best = table[i][j];
                best_err = err;
                best_level = i;
            }
        }
    }
    // Richardson weights amplify rounding by at most a factor of two here.
    let floor = 2.0 * rounding[..=best_level].iter().copied().fold(0.0, f64::max);
    Ok((best, best_err.max(floor)))
}

/// Taylor coefficients of `fun` at 0 through order `n`.
///
/// Returns the exact series when `fun` carries one. Otherwise each
/// coefficient comes from a central difference of its order, Richardson
/// extrapolated over [`RICHARDSON_LEVELS`] halvings of the step.
pub fn extract_jet(fun: &SmoothFunction, n: usize, base_step: f64) -> Result<Jet, SmoothError> {
    if n < 1 {
        return Err(SmoothError::InvalidArgument(
            "jet order must be at least 1".into(),
        ));
    }
    if !(base_step > 0.0) || !base_step.is_finite() {
        return Err(SmoothError::InvalidArgument(format!(
            "base step must be positive, got {base_step}"
        )));
    }
    if let Some(exact) = &fun.exact_series {
        if exact.order() >= n {
            return Ok(Jet::exact(exact.truncate(n).to_float()));
        }
    }
    let finest = base_step / f64::powi(2.0, RICHARDSON_LEVELS as i32);
    if finest < MIN_STEP {
        return Err(SmoothError::StepUnderflow { step: finest });
    }
    let coeffs: Vec<(f64, f64)> = (0..=n)
        .into_par_iter()
        .map(|k| jet_coefficient(fun, k, base_step))
        .collect::<Result<_, _>>()?;
    let (values, errors): (Vec<f64>, Vec<f64>) = coeffs.into_iter().unzip();
    Ok(Jet {
        series: FloatSeries::from_coeffs(values, n),
        per_coeff_error: errors,
        source: JetSource::FiniteDifference,
    })
}

/// Degree-`n` Taylor polynomial of the inverse, from the jet alone.
///
/// The constant term is clamped to 0 when it lies within ten error bars of
/// it; `f'(0)` must exceed ten error bars.
pub fn inverse_taylor(jet: &Jet, n: usize) -> Result<FloatSeries, SmoothError> {
    if jet.order() < n {
        return Err(ReversionError::InsufficientOrder {
            have: jet.order(),
            need: n,
        }
        .into());
    }
    let mut coeffs = jet.series.truncate(n).into_coeffs();
    let err = |k: usize| jet.per_coeff_error.get(k).copied().unwrap_or(0.0);
    if coeffs[0] != 0.0 {
        if coeffs[0].abs() > 10.0 * err(0) {
            return Err(SmoothError::NotRevertible(format!(
                "f(0) = {} is not 0",
                coeffs[0]
            )));
        }
        coeffs[0] = 0.0;
    }
    if n >= 1 {
        let c1 = coeffs[1];
        if c1 == 0.0 {
            return Err(SmoothError::NotRevertible("f'(0) = 0".into()));
        }
        if c1.abs() <= 10.0 * err(1) {
            return Err(SmoothError::IllConditionedJet { c1, error: err(1) });
        }
    }
    let f = FloatSeries::from_coeffs(coeffs, n);
    Ok(lagrange_revert(&f, n)?.series)
}

/// Outcome of a remainder-decay measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "consistent-with-order-(N+1)")]
    ConsistentWithOrder,
    #[serde(rename = "super-polynomial")]
    SuperPolynomial,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ConsistentWithOrder => "consistent-with-order-(N+1)",
            Verdict::SuperPolynomial => "super-polynomial",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Working precision of the root-finding oracle; it also sets the noise
/// floor below which remainders are discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    Binary64,
    DoubleDouble,
}

/// Verdict thresholds and measurement settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderConfig {
    /// Slack below `N + 1` still accepted as order `N + 1`.
    pub slope_slack: f64,
    /// Inner slopes must exceed `N + super_margin` for super-polynomial.
    pub super_margin: f64,
    /// Required slope increase from one window to the next closer to 0.
    pub min_increase: f64,
    /// Maximum slope spread across windows for a polynomial verdict.
    pub stability: f64,
    /// Points above the noise floor needed on each side.
    pub min_points: usize,
    pub precision: Precision,
}

impl Default for RemainderConfig {
    fn default() -> Self {
        RemainderConfig {
            slope_slack: 0.3,
            super_margin: 2.0,
            min_increase: 1.0,
            stability: 0.5,
            min_points: 4,
            precision: Precision::DoubleDouble,
        }
    }
}

impl RemainderConfig {
    /// Absolute noise floor at preimage `x`.
    pub fn noise_floor(&self, x: f64) -> f64 {
        let base = match self.precision {
            Precision::Binary64 => f64::default_abs_tol(),
            Precision::DoubleDouble => DoubleDouble::default_abs_tol().to_f64(),
        };
        base * x.abs().max(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

/// Fit details of one side of the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideFit {
    pub side: Side,
    pub points_used: usize,
    pub slope: f64,
    pub slope_stderr: f64,
    /// Slopes over the geometric half of the window nearer to 0 and the
    /// half farther from 0.
    pub inner_slope: f64,
    pub outer_slope: f64,
}

/// One sampled remainder `|f^{-1}(y) - P(y)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderSample {
    pub y: f64,
    pub remainder: f64,
    pub above_noise_floor: bool,
}

mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Measured decay of `f^{-1}(y) - P_N(y)` over a window. A slope that could
/// not be fitted is NaN (null in JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub poly_order: usize,
    pub window: [f64; 2],
    pub samples: usize,
    #[serde(with = "nullable_f64")]
    pub slope: f64,
    #[serde(with = "nullable_f64")]
    pub slope_stderr: f64,
    pub noise_floor_hit: bool,
    pub verdict: Verdict,
    #[serde(skip)]
    pub sides: Vec<SideFit>,
    /// Raw samples of both sides, ordered by `y`.
    #[serde(skip)]
    pub points: Vec<RemainderSample>,
}

/// Least-squares slope of `(u, v)` points and its standard error.
fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len();
    if n < 2 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mu = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mv = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mu).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
    let slope = sxy / sxx;
    if n < 3 {
        return (slope, 0.0);
    }
    let ssr: f64 = points
        .iter()
        .map(|p| (p.1 - mv - slope * (p.0 - mu)).powi(2))
        .sum();
    (slope, (ssr / (nf - 2.0) / sxx).sqrt())
}

fn log_spaced(window: [f64; 2], samples: usize) -> Vec<f64> {
    let (a, b) = (window[0].ln(), window[1].ln());
    (0..samples)
        .map(|j| (a + (b - a) * j as f64 / (samples - 1) as f64).exp())
        .collect()
}

fn fit_side(side: Side, points: &[(f64, f64)], split: f64, min_points: usize) -> Option<SideFit> {
    if points.len() < min_points {
        return None;
    }
    let (slope, slope_stderr) = fit_line(points);
    let (inner, outer): (Vec<_>, Vec<_>) = points.iter().partition(|p| p.0 <= split);
    let half = |pts: &[(f64, f64)]| {
        if pts.len() >= 3 {
            fit_line(pts).0
        } else {
            f64::NAN
        }
    };
    Some(SideFit {
        side,
        points_used: points.len(),
        slope,
        slope_stderr,
        inner_slope: half(&inner),
        outer_slope: half(&outer),
    })
}

/// Samples the remainder at log-spaced `y` in `window` and on the mirrored
/// negative window, in the working precision `T`.
pub fn estimate_remainder_order_in<T: Real, C: Coefficient>(
    fun: &SmoothFunction,
    p: &TruncatedSeries<C>,
    window: [f64; 2],
    samples: usize,
    config: &RemainderConfig,
) -> Result<RemainderReport, SmoothError> {
    if samples < 8 {
        return Err(SmoothError::InvalidArgument(format!(
            "need at least 8 samples, got {samples}"
        )));
    }
    let [y_min, y_max] = window;
    if !(y_min > 0.0 && y_min < y_max && y_max.is_finite()) {
        return Err(SmoothError::InvalidArgument(format!(
            "window must satisfy 0 < y_min < y_max, got [{y_min}, {y_max}]"
        )));
    }
    let n = p.order();
    let ys = log_spaced(window, samples);
    let tol = T::default_abs_tol();
    let measured: Vec<[RemainderSample; 2]> = ys
        .par_iter()
        .map(|&y| -> Result<_, SmoothError> {
            let sample = |sign: f64| -> Result<RemainderSample, SmoothError> {
                let yt = T::from_f64(sign * y);
                let x = numeric_inverse(fun, yt, tol)?;
                let remainder = (x - p.eval_at(yt)).abs().to_f64();
                Ok(RemainderSample {
                    y: sign * y,
                    remainder,
                    above_noise_floor: remainder > config.noise_floor(x.to_f64()),
                })
            };
            Ok([sample(1.0)?, sample(-1.0)?])
        })
        .collect::<Result<_, _>>()?;
    let split = (y_min * y_max).sqrt().ln();
    let fits: Vec<Option<SideFit>> = [Side::Positive, Side::Negative]
        .into_iter()
        .enumerate()
        .map(|(i, side)| {
            let pts: Vec<(f64, f64)> = measured
                .iter()
                .map(|m| m[i])
                .filter(|s| s.above_noise_floor)
                .map(|s| (s.y.abs().ln(), s.remainder.ln()))
                .collect();
            fit_side(side, &pts, split, config.min_points)
        })
        .collect();
    let noise_floor_hit = fits.iter().any(Option::is_none);
    let sides: Vec<SideFit> = fits.into_iter().flatten().collect();
    let worst = sides.iter().min_by(|a, b| a.slope.total_cmp(&b.slope));
    let (slope, slope_stderr) = worst.map_or((f64::NAN, f64::NAN), |s| (s.slope, s.slope_stderr));

    let nf = n as f64;
    let verdict = if noise_floor_hit {
        Verdict::Inconclusive
    } else if sides.iter().all(|s| {
        s.inner_slope - s.outer_slope >= config.min_increase
            && s.inner_slope > nf + config.super_margin
    }) {
        Verdict::SuperPolynomial
    } else if slope >= nf + 1.0 - config.slope_slack {
        Verdict::ConsistentWithOrder
    } else {
        Verdict::Inconclusive
    };
    Ok(RemainderReport {
        poly_order: n,
        window,
        samples,
        slope,
        slope_stderr,
        noise_floor_hit,
        verdict,
        sides,
        points: {
            let mut pts: Vec<RemainderSample> = measured.into_iter().flatten().collect();
            pts.sort_by(|a, b| a.y.total_cmp(&b.y));
            pts
        },
    })
}

/// [`estimate_remainder_order_in`] at the precision chosen by `config`.
pub fn estimate_remainder_order<C: Coefficient>(
    fun: &SmoothFunction,
    p: &TruncatedSeries<C>,
    window: [f64; 2],
    samples: usize,
    config: &RemainderConfig,
) -> Result<RemainderReport, SmoothError> {
    match config.precision {
        Precision::Binary64 => {
            estimate_remainder_order_in::<f64, C>(fun, p, window, samples, config)
        }
        Precision::DoubleDouble => {
            estimate_remainder_order_in::<DoubleDouble, C>(fun, p, window, samples, config)
        }
    }
}

/// Consolidates reports over windows that move toward 0 (both endpoints
/// strictly decreasing) into one verdict.
pub fn classify_decay(
    reports: &[RemainderReport],
    config: &RemainderConfig,
) -> Result<Verdict, SmoothError> {
    if reports.len() < 2 {
        return Err(SmoothError::WindowsNotNested(format!(
            "need at least 2 windows, got {}",
            reports.len()
        )));
    }
    let n = reports[0].poly_order;
    for pair in reports.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.poly_order != n {
            return Err(SmoothError::PolyOrderMismatch(n, b.poly_order));
        }
        if !(b.window[0] < a.window[0] && b.window[1] < a.window[1]) {
            return Err(SmoothError::WindowsNotNested(format!(
                "[{}, {}] does not move toward 0 from [{}, {}]",
                b.window[0], b.window[1], a.window[0], a.window[1]
            )));
        }
    }
    if reports
        .iter()
        .any(|r| r.noise_floor_hit || !r.slope.is_finite())
    {
        return Ok(Verdict::Inconclusive);
    }
    let nf = n as f64;
    let slopes: Vec<f64> = reports.iter().map(|r| r.slope).collect();
    let increasing = slopes
        .windows(2)
        .all(|w| w[1] - w[0] >= config.min_increase);
    let last = *slopes.last().unwrap();
    if increasing && last > nf + config.super_margin {
        return Ok(Verdict::SuperPolynomial);
    }
    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= config.stability && lo >= nf + 1.0 - config.slope_slack {
        return Ok(Verdict::ConsistentWithOrder);
    }
    Ok(Verdict::Inconclusive)
}
