use std::path::Path;
use std::time::Instant;

use num_rational::BigRational;
use serde_json::{json, Value};
use series_invert::{
    classify_decay, corpus, corpus_lookup, estimate_remainder_order, extract_jet, inverse_taylor,
    lagrange_burmann, lagrange_revert, parse_expression, series_expand, Coefficient, CorpusEntry,
    DynSeries, ExpressionNode, FloatSeries, Method, RationalSeries, RemainderConfig, RingMode,
    SmoothFunction, TruncatedSeries,
};

use crate::config::{Command, FunctionSource, RunConfig, DEFAULT_ORDER};
use crate::error::CliError;
use crate::report::Report;

/// Relative agreement required between float reversions.
pub const FLOAT_AGREEMENT: f64 = 1e-10;

/// Runs the configured command and returns its report.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    match config.command {
        Command::Revert => cmd_revert(config),
        Command::Burmann => cmd_burmann(config),
        Command::Jet => cmd_jet(config),
        Command::Verify => cmd_verify(config),
        Command::Bench => cmd_bench(config),
        Command::Corpus => cmd_corpus(config),
    }
}

fn source_of(config: &RunConfig) -> &FunctionSource {
    config.source.as_ref().expect("validated")
}

fn function_json(source: &FunctionSource) -> Value {
    json!({"source": source.kind(), "value": source.value()})
}

fn lookup(name: &str) -> Result<&'static CorpusEntry, CliError> {
    corpus_lookup(name).map_err(|e| CliError::Input(e.to_string()))
}

fn read_coeffs(path: &Path) -> Result<DynSeries, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    DynSeries::from_json(&value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn float_to_rational(s: &FloatSeries) -> Result<RationalSeries, CliError> {
    let coeffs = s
        .coeffs()
        .iter()
        .map(|&c| {
            BigRational::from_float(c)
                .ok_or_else(|| CliError::Input(format!("coefficient {c} is not finite")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RationalSeries::from_coeffs(coeffs, s.order()))
}

fn to_mode(series: DynSeries, mode: Option<RingMode>) -> Result<DynSeries, CliError> {
    Ok(match (series, mode) {
        (DynSeries::Rational(s), Some(RingMode::Float)) => DynSeries::Float(s.to_float()),
        (DynSeries::Float(s), Some(RingMode::Rational)) => {
            DynSeries::Rational(float_to_rational(&s)?)
        }
        (s, _) => s,
    })
}

/// Expands a formula in the requested ring, or, with no request, exactly when
/// possible and in floats otherwise.
fn expand_dyn(
    expr: &ExpressionNode,
    order: usize,
    mode: Option<RingMode>,
) -> Result<DynSeries, CliError> {
    let rational =
        || series_expand::<BigRational>(expr, order).map(|e| DynSeries::Rational(e.series));
    let float = || series_expand::<f64>(expr, order).map(|e| DynSeries::Float(e.series));
    let result = match mode {
        Some(RingMode::Rational) => rational(),
        Some(RingMode::Float) => float(),
        None if expr.uses_flatbump() => float(),
        None => rational().or_else(|_| float()),
    };
    Ok(result?)
}

/// The input series of the source, with its order.
fn source_series(config: &RunConfig) -> Result<DynSeries, CliError> {
    match source_of(config) {
        FunctionSource::Expression(text) => {
            let expr = parse_expression(text)?;
            expand_dyn(&expr, config.order.unwrap_or(DEFAULT_ORDER), config.mode)
        }
        FunctionSource::Corpus(name) => {
            let entry = lookup(name)?;
            expand_dyn(
                &entry.expression,
                config.order.unwrap_or(DEFAULT_ORDER),
                config.mode,
            )
        }
        FunctionSource::CoeffsFile(path) => to_mode(read_coeffs(path)?, config.mode),
    }
}

fn order_for(config: &RunConfig, series: &DynSeries) -> usize {
    config.order.unwrap_or(series.order())
}

fn seconds(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

/// Largest coefficient difference: 0 only for identical series, relative
/// (absolute below magnitude 1) otherwise.
fn coeff_diff<C: Coefficient>(a: &TruncatedSeries<C>, b: &TruncatedSeries<C>) -> f64 {
    if a == b {
        return 0.0;
    }
    let d = a.max_rel_diff(b);
    if d == 0.0 {
        // Distinct rationals that round to the same float.
        f64::MIN_POSITIVE
    } else {
        d
    }
}

fn agrees<C: Coefficient>(diff: f64) -> bool {
    match C::MODE {
        RingMode::Rational => diff == 0.0,
        RingMode::Float => diff <= FLOAT_AGREEMENT,
    }
}

struct Reverted<C: Coefficient> {
    series: TruncatedSeries<C>,
    /// (method, seconds, difference from the triangular solve)
    runs: Vec<(Method, f64, f64)>,
}

fn revert_all<C: Coefficient>(
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<Reverted<C>, CliError> {
    let start = Instant::now();
    let reference = Method::Triangular.revert(f, order)?.series;
    let tri_time = seconds(start);
    let mut runs = Vec::new();
    for method in [Method::Lagrange, Method::Newton] {
        let start = Instant::now();
        let g = method.revert(f, order)?.series;
        let elapsed = seconds(start);
        let diff = coeff_diff(&g, &reference);
        if !agrees::<C>(diff) {
            return Err(CliError::Disagreement(format!(
                "{} differs from the triangular solve by {diff:e}",
                method.as_str()
            )));
        }
        runs.push((method, elapsed, diff));
    }
    runs.push((Method::Triangular, tri_time, 0.0));
    Ok(Reverted {
        series: reference,
        runs,
    })
}

fn coeff_rows<C: Coefficient>(s: &TruncatedSeries<C>) -> Vec<Vec<String>> {
    s.coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            vec![
                n.to_string(),
                c.to_json()
                    .as_str()
                    .map_or_else(|| c.to_json().to_string(), str::to_string),
            ]
        })
        .collect()
}

fn revert_report<C: Coefficient>(
    config: &RunConfig,
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<Report, CliError> {
    let r = revert_all(f, order)?;
    let agreement: serde_json::Map<String, Value> = r
        .runs
        .iter()
        .map(|(m, _, d)| (m.as_str().to_string(), json!(d)))
        .collect();
    let timing: serde_json::Map<String, Value> = r
        .runs
        .iter()
        .map(|(m, t, _)| (m.as_str().to_string(), json!(t)))
        .collect();
    let json = json!({
        "command": "revert",
        "function": function_json(source_of(config)),
        "order": order,
        "mode": C::MODE,
        "input": f.truncate(order.min(f.order())).to_json(),
        "inverse": r.series.to_json(),
        "agreement": agreement,
        "timing": timing,
    });
    Ok(Report::new(
        json,
        &["n", "coefficient"],
        coeff_rows(&r.series),
    ))
}

pub fn cmd_revert(config: &RunConfig) -> Result<Report, CliError> {
    let series = source_series(config)?;
    let order = order_for(config, &series);
    match &series {
        DynSeries::Rational(f) => revert_report(config, f, order),
        DynSeries::Float(f) => revert_report(config, f, order),
    }
}

fn burmann_report<C: Coefficient>(
    config: &RunConfig,
    outer: &TruncatedSeries<C>,
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<Report, CliError> {
    let start = Instant::now();
    let series = lagrange_burmann(outer, f, order)?;
    let elapsed = seconds(start);
    let g = lagrange_revert(f, order)?.series;
    let check = outer
        .truncate(order)
        .compose(&g)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let diff = coeff_diff(&series, &check);
    if !agrees::<C>(diff) {
        return Err(CliError::Disagreement(format!(
            "Lagrange-Bürmann differs from H composed with the inverse by {diff:e}"
        )));
    }
    let json = json!({
        "command": "burmann",
        "function": function_json(source_of(config)),
        "outer": outer.truncate(order).to_json(),
        "order": order,
        "mode": C::MODE,
        "series": series.to_json(),
        "max_coeff_diff_vs_composition": diff,
        "timing": {"lagrange_burmann": elapsed},
    });
    Ok(Report::new(
        json,
        &["n", "coefficient"],
        coeff_rows(&series),
    ))
}

pub fn cmd_burmann(config: &RunConfig) -> Result<Report, CliError> {
    let f = source_series(config)?;
    let order = order_for(config, &f);
    let outer_expr = parse_expression(config.outer.as_deref().expect("validated"))?;
    let outer = expand_dyn(&outer_expr, order, Some(f.mode()))?;
    match (&outer, &f) {
        (DynSeries::Rational(h), DynSeries::Rational(f)) => burmann_report(config, h, f, order),
        (DynSeries::Float(h), DynSeries::Float(f)) => burmann_report(config, h, f, order),
        _ => unreachable!("outer expanded in the mode of f"),
    }
}

/// The function as a real map, with exact Taylor data attached when the
/// source provides it.
fn smooth_function(config: &RunConfig, order: usize) -> Result<SmoothFunction, CliError> {
    let mut fun = match source_of(config) {
        FunctionSource::Expression(text) => {
            let expr = parse_expression(text)?;
            let exact = series_expand::<BigRational>(&expr, order)
                .ok()
                .map(|e| e.series);
            let fun = SmoothFunction::new(text.clone(), expr);
            match exact {
                Some(s) => fun.with_exact_series(s),
                None => fun,
            }
        }
        FunctionSource::Corpus(name) => SmoothFunction::from_entry(lookup(name)?),
        FunctionSource::CoeffsFile(path) => {
            let series = match read_coeffs(path)? {
                DynSeries::Rational(s) => s,
                DynSeries::Float(s) => float_to_rational(&s)?,
            };
            let expr = ExpressionNode::polynomial(series.coeffs());
            SmoothFunction::new(path.display().to_string(), expr).with_exact_series(series)
        }
    };
    if config.numeric_jet {
        fun.exact_series = None;
    }
    Ok(fun)
}

fn polynomial_order(config: &RunConfig) -> Result<usize, CliError> {
    let n = config.order.unwrap_or(DEFAULT_ORDER);
    if n < 1 {
        return Err(CliError::Input("--order must be at least 1".into()));
    }
    Ok(n)
}

pub fn cmd_jet(config: &RunConfig) -> Result<Report, CliError> {
    let n = polynomial_order(config)?;
    let fun = smooth_function(config, n)?;
    let start = Instant::now();
    let jet = extract_jet(&fun, n, config.base_step)?;
    let jet_time = seconds(start);
    let p = inverse_taylor(&jet, n)?;
    let json = json!({
        "command": "jet",
        "function": function_json(source_of(config)),
        "order": n,
        "base_step": config.base_step,
        "analytic": fun.analytic,
        "jet": jet,
        "inverse": p.to_json(),
        "timing": {"jet": jet_time},
    });
    let rows = (0..=n)
        .map(|k| {
            vec![
                k.to_string(),
                jet.series.coeffs()[k].to_string(),
                jet.per_coeff_error[k].to_string(),
                p.coeffs()[k].to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        json,
        &["k", "coefficient", "error", "inverse_coefficient"],
        rows,
    ))
}

/// Splits `[a, b]` at its geometric midpoint into an outer and an inner
/// window.
pub fn split_window(w: [f64; 2]) -> Vec<[f64; 2]> {
    let mid = (w[0] * w[1]).sqrt();
    vec![[mid, w[1]], [w[0], mid]]
}

fn verify_windows(config: &RunConfig) -> Result<Vec<[f64; 2]>, CliError> {
    match config.windows.len() {
        0 => {
            let base = match source_of(config) {
                FunctionSource::Corpus(name) => lookup(name)?.default_window,
                _ => [1e-3, 1e-1],
            };
            Ok(split_window(base))
        }
        1 => Ok(split_window(config.windows[0])),
        _ => Ok(config.windows.clone()),
    }
}

pub fn cmd_verify(config: &RunConfig) -> Result<Report, CliError> {
    let n = polynomial_order(config)?;
    let fun = smooth_function(config, n)?;
    let windows = verify_windows(config)?;
    let remainder_config = RemainderConfig {
        precision: config.precision,
        ..RemainderConfig::default()
    };
    let start = Instant::now();
    let jet = extract_jet(&fun, n, config.base_step)?;
    let p = inverse_taylor(&jet, n)?;
    let jet_time = seconds(start);
    let start = Instant::now();
    let reports = windows
        .iter()
        .map(|w| estimate_remainder_order(&fun, &p, *w, config.samples, &remainder_config))
        .collect::<Result<Vec<_>, _>>()?;
    let remainder_time = seconds(start);
    let verdict = classify_decay(&reports, &remainder_config)?;
    let samples_data: Vec<Value> = reports.iter().map(|r| json!(r.points)).collect();
    let json = json!({
        "command": "verify",
        "function": function_json(source_of(config)),
        "order": n,
        "analytic": fun.analytic,
        "precision": remainder_config.precision,
        "jet": jet,
        "polynomial": p.to_json(),
        "reports": reports,
        "samples_data": samples_data,
        "verdict": verdict,
        "timing": {"jet": jet_time, "remainder": remainder_time},
    });
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.window[0].to_string(),
                r.window[1].to_string(),
                r.poly_order.to_string(),
                r.samples.to_string(),
                r.slope.to_string(),
                r.slope_stderr.to_string(),
                r.noise_floor_hit.to_string(),
                r.verdict.to_string(),
                verdict.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        json,
        &[
            "window_min",
            "window_max",
            "poly_order",
            "samples",
            "slope",
            "slope_stderr",
            "noise_floor_hit",
            "verdict",
            "combined_verdict",
        ],
        rows,
    ))
}

/// One timed reversion of the benchmark.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BenchRow {
    pub algorithm: &'static str,
    pub mode: RingMode,
    pub order: usize,
    pub wall_time: f64,
    pub max_coeff_diff_vs_triangular: f64,
}

fn bench_mode<C: Coefficient>(
    f: &TruncatedSeries<C>,
    order: usize,
) -> Result<Vec<BenchRow>, CliError> {
    let start = Instant::now();
    let reference = Method::Triangular.revert(f, order)?.series;
    let tri_time = seconds(start);
    let mut rows = Vec::new();
    for method in Method::ALL {
        let (time, diff) = if method == Method::Triangular {
            (tri_time, 0.0)
        } else {
            let start = Instant::now();
            let g = method.revert(f, order)?.series;
            (seconds(start), coeff_diff(&g, &reference))
        };
        rows.push(BenchRow {
            algorithm: method.as_str(),
            mode: C::MODE,
            order,
            wall_time: time,
            max_coeff_diff_vs_triangular: diff,
        });
    }
    Ok(rows)
}

pub fn cmd_bench(config: &RunConfig) -> Result<Report, CliError> {
    let source = config
        .source
        .clone()
        .unwrap_or_else(|| FunctionSource::Corpus("quadratic".into()));
    let mut rows = Vec::new();
    for mode in [RingMode::Rational, RingMode::Float] {
        for &order in &config.bench_orders {
            let sub = RunConfig {
                source: Some(source.clone()),
                order: Some(order),
                mode: Some(mode),
                ..config.clone()
            };
            rows.extend(match source_series(&sub)? {
                DynSeries::Rational(f) => bench_mode(&f, order)?,
                DynSeries::Float(f) => bench_mode(&f, order)?,
            });
        }
    }
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.algorithm.to_string(),
                r.mode.to_string(),
                r.order.to_string(),
                format!("{:.6}", r.wall_time),
                r.max_coeff_diff_vs_triangular.to_string(),
            ]
        })
        .collect();
    let json = json!({
        "command": "bench",
        "function": function_json(&source),
        "rows": rows,
    });
    Ok(Report::new(
        json,
        &[
            "algorithm",
            "mode",
            "order",
            "wall_time",
            "max_coeff_diff_vs_triangular",
        ],
        table,
    ))
}

fn entry_json(e: &CorpusEntry, with_series: bool) -> Value {
    let mut v = json!({
        "name": e.name,
        "text": e.text,
        "analytic": e.analytic,
        "default_window": e.default_window,
        "monotone_radius": e.monotone_radius,
        "exact_series_order": e.exact_series.as_ref().map(|s| s.order()),
    });
    if with_series {
        v["exact_series"] = e.exact_series.as_ref().map_or(Value::Null, |s| s.to_json());
    }
    v
}

pub fn cmd_corpus(config: &RunConfig) -> Result<Report, CliError> {
    let (entries, detailed): (Vec<&CorpusEntry>, bool) = match &config.source {
        Some(FunctionSource::Corpus(name)) => (vec![lookup(name)?], true),
        Some(other) => {
            return Err(CliError::Input(format!(
                "`corpus` takes --corpus NAME, not {other}"
            )));
        }
        None => (corpus().iter().collect(), false),
    };
    let json = json!({
        "command": "corpus",
        "entries": entries.iter().map(|e| entry_json(e, detailed)).collect::<Vec<_>>(),
    });
    let rows = entries
        .iter()
        .map(|e| {
            vec![
                e.name.to_string(),
                e.text.to_string(),
                e.analytic.to_string(),
                e.default_window[0].to_string(),
                e.default_window[1].to_string(),
                e.monotone_radius.to_string(),
                e.exact_series
                    .as_ref()
                    .map_or(String::new(), |s| s.order().to_string()),
            ]
        })
        .collect();
    Ok(Report::new(
        json,
        &[
            "name",
            "text",
            "analytic",
            "window_min",
            "window_max",
            "monotone_radius",
            "exact_series_order",
        ],
        rows,
    ))
}
