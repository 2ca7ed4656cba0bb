use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{parse_expression, ExpressionNode};
use crate::RationalSeries;

/// Order of the exact reference series stored with corpus entries.
pub const EXACT_SERIES_ORDER: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown corpus entry `{0}`")]
pub struct UnknownEntry(pub String);

/// A named test function with reference metadata.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub text: &'static str,
    pub expression: ExpressionNode,
    /// Closed-form Taylor series at 0, computed independently of the
    /// expression expander.
    pub exact_series: Option<RationalSeries>,
    pub analytic: bool,
    /// Default `[y_min, y_max]` for remainder-decay sampling.
    pub default_window: [f64; 2],
    /// The function is strictly monotone on `(-r, r)`.
    pub monotone_radius: f64,
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn from_fn(f: impl Fn(usize) -> BigRational) -> RationalSeries {
    RationalSeries::from_coeffs(
        (0..=EXACT_SERIES_ORDER).map(f).collect(),
        EXACT_SERIES_ORDER,
    )
}

fn polynomial(coeffs: &[i64]) -> RationalSeries {
    RationalSeries::from_i64s(coeffs, EXACT_SERIES_ORDER)
}

/// Tangent numbers `T_k = t_{2k-1}` for `k = 1..=m` (1, 2, 16, 272, ...), by
/// the in-place recurrence of Brent and Zimmermann.
fn tangent_numbers(m: usize) -> Vec<BigInt> {
    let mut t = vec![BigInt::zero(); m + 1];
    if m == 0 {
        return t;
    }
    t[1] = BigInt::one();
    for k in 2..=m {
        t[k] = &t[k - 1] * BigInt::from(k - 1);
    }
    for k in 2..=m {
        for j in k..=m {
            t[j] = &t[j - 1] * BigInt::from(j - k) + &t[j] * BigInt::from(j - k + 2);
        }
    }
    t
}

fn tangent_series() -> RationalSeries {
    let t = tangent_numbers(EXACT_SERIES_ORDER.div_ceil(2));
    from_fn(|n| {
        if n % 2 == 0 {
            BigRational::zero()
        } else {
            BigRational::new(t[n.div_ceil(2)].clone(), factorial(n))
        }
    })
}

fn sine_series() -> RationalSeries {
    from_fn(|n| match n % 4 {
        1 => BigRational::new(BigInt::one(), factorial(n)),
        3 => BigRational::new(-BigInt::one(), factorial(n)),
        _ => BigRational::zero(),
    })
}

/// `x e^x = sum x^n / (n - 1)!`
fn lambert_series() -> RationalSeries {
    from_fn(|n| {
        if n == 0 {
            BigRational::zero()
        } else {
            BigRational::new(BigInt::one(), factorial(n - 1))
        }
    })
}

/// name, text, exact series, analytic, default window, monotone radius
type EntryFields = (
    &'static str,
    &'static str,
    Option<RationalSeries>,
    bool,
    [f64; 2],
    f64,
);

fn build() -> Vec<CorpusEntry> {
    let near_zero = [1e-3, 1e-1];
    let half_pi = std::f64::consts::FRAC_PI_2;
    let fields: Vec<EntryFields> = vec![
        (
            "identity",
            "x",
            Some(polynomial(&[0, 1])),
            true,
            near_zero,
            10.0,
        ),
        (
            "quadratic",
            "x - x^2",
            Some(polynomial(&[0, 1, -1])),
            true,
            near_zero,
            0.5,
        ),
        (
            "lambert",
            "x*exp(x)",
            Some(lambert_series()),
            true,
            near_zero,
            1.0,
        ),
        (
            "sine",
            "sin(x)",
            Some(sine_series()),
            true,
            near_zero,
            half_pi,
        ),
        (
            "tangent",
            "tan(x)",
            Some(tangent_series()),
            true,
            near_zero,
            half_pi,
        ),
        (
            "scaled",
            "2*x + x^2",
            Some(polynomial(&[0, 2, 1])),
            true,
            near_zero,
            1.0,
        ),
        (
            "flat-identity",
            "x + flatbump(x)",
            None,
            false,
            [0.28, 0.55],
            10.0,
        ),
    ];
    fields
        .into_iter()
        .map(
            |(name, text, exact_series, analytic, default_window, monotone_radius)| CorpusEntry {
                name,
                text,
                expression: parse_expression(text).expect("corpus formulas parse"),
                exact_series,
                analytic,
                default_window,
                monotone_radius,
            },
        )
        .collect()
}

/// All shipped entries, in a stable order.
pub fn corpus() -> &'static [CorpusEntry] {
    static CORPUS: OnceLock<Vec<CorpusEntry>> = OnceLock::new();
    CORPUS.get_or_init(build)
}

pub fn corpus_lookup(name: &str) -> Result<&'static CorpusEntry, UnknownEntry> {
    corpus()
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| UnknownEntry(name.to_string()))
}
