//! End-to-end acceptance gate: one pass/fail line per criterion. Runs
//! without the libtest harness so the lines are never captured.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use serde_json::Value;
use series_invert::{
    corpus, extract_jet, inverse_taylor, lagrange_revert, parse_expression, series_expand,
    solve_inverse, BigRational, ExpressionNode as E, FloatSeries, Function, Method, ParseError,
    RationalSeries, SmoothFunction, Verdict, DEFAULT_BASE_STEP,
};
use series_invert_cli::{run, Command, FunctionSource, RunConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn coeff_strings(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap().to_string())
        .collect()
}

fn criterion_1() -> Outcome {
    // C_{n+1} = sum C_i C_{n-i}, independent of the library.
    let mut cat = vec![BigInt::from(1)];
    for n in 0..15 {
        let next: BigInt = (0..=n).map(|i| &cat[i] * &cat[n - i]).sum();
        cat.push(next);
    }
    let start = Instant::now();
    let config = RunConfig::new(Command::Revert)
        .with_source(FunctionSource::Expression("x - x^2".into()))
        .with_order(16)
        .with_mode(series_invert::RingMode::Rational);
    let report = run(&config).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let got = coeff_strings(&report.json["inverse"]["coeffs"]);
    let want: Vec<String> = std::iter::once("0".to_string())
        .chain(cat.iter().map(|c| c.to_string()))
        .collect();
    check(
        got == want && elapsed < Duration::from_secs(1),
        format!("b_1..b_16 = C_0..C_15 in {elapsed:.2?}"),
        format!("got {got:?} in {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    // (-n)^(n-1)/n! by direct integer arithmetic.
    let closed = |n: u32| {
        let num = BigInt::from(-(n as i64)).pow(n - 1);
        let den: BigInt = (1..=n as i64).map(BigInt::from).product();
        BigRational::new(num, den)
    };
    let jet = series_expand::<BigRational>(&parse_expression("x*exp(x)").unwrap(), 12)
        .unwrap()
        .series;
    let g = lagrange_revert(&jet, 12).map_err(|e| e.to_string())?.series;
    let bad: Vec<u32> = (1..=12)
        .filter(|&n| g.coeffs()[n as usize] != closed(n))
        .collect();
    check(
        bad.is_empty() && g.coeffs()[0] == big(0),
        "b_n = (-n)^(n-1)/n! for n = 1..12".into(),
        format!("mismatch at n = {bad:?}"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut runs = 0;
    for e in corpus() {
        for n in [8, 32, 128] {
            let exact = series_expand::<BigRational>(&e.expression, n)
                .unwrap()
                .series;
            let reference = Method::Triangular.revert(&exact, n).unwrap().series;
            for m in [Method::Lagrange, Method::Newton] {
                runs += 1;
                if m.revert(&exact, n).unwrap().series != reference {
                    failures.push(format!("{} rational {m:?} N={n}", e.name));
                }
            }
            let float = series_expand::<f64>(&e.expression, n).unwrap().series;
            let reference = Method::Triangular.revert(&float, n).unwrap().series;
            for m in [Method::Lagrange, Method::Newton] {
                runs += 1;
                let d = m.revert(&float, n).unwrap().series.max_rel_diff(&reference);
                if d > 1e-10 {
                    failures.push(format!("{} float {m:?} N={n}: {d:e}", e.name));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(30),
        format!("{runs} comparisons agree in {elapsed:.2?}"),
        format!("{failures:?} in {elapsed:.2?}"),
    )
}

fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    for e in corpus() {
        let f = series_expand::<BigRational>(&e.expression, 32)
            .unwrap()
            .series;
        let g = lagrange_revert(&f, 32).unwrap().series;
        if g.compose(&f).unwrap() != RationalSeries::variable(32) {
            failures.push(e.name);
        }
    }
    check(
        failures.is_empty(),
        "g(f(x)) = x through order 32 for all 7 entries".into(),
        format!("failed: {failures:?}"),
    )
}

fn criterion_5() -> Outcome {
    let poly = |text: &str| -> Result<FloatSeries, String> {
        let fun = SmoothFunction::parse(text).map_err(|e| e.to_string())?;
        let jet = extract_jet(&fun, 6, DEFAULT_BASE_STEP).map_err(|e| e.to_string())?;
        inverse_taylor(&jet, 6).map_err(|e| e.to_string())
    };
    let a = poly("x")?;
    let b = poly("x + flatbump(x)")?;
    let worst = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    check(
        worst <= 1e-8,
        format!("P_6 coefficients differ by at most {worst:.1e}"),
        format!("P_6 coefficients differ by {worst:e}"),
    )
}

fn verify(name: &str, order: usize, windows: Vec<[f64; 2]>) -> Result<Value, String> {
    let config = RunConfig::new(Command::Verify)
        .with_source(FunctionSource::Corpus(name.into()))
        .with_order(order)
        .with_windows(windows);
    run(&config).map(|r| r.json).map_err(|e| e.to_string())
}

fn slopes(report: &Value) -> Vec<f64> {
    report["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["slope"].as_f64().unwrap_or(f64::NAN))
        .collect()
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let v = verify("sine", 5, vec![[1e-2, 1e-1], [1e-3, 1e-2]])?;
    let elapsed = start.elapsed();
    let s = slopes(&v);
    check(
        s.iter().all(|x| (6.8..=7.2).contains(x)) && elapsed < Duration::from_secs(5),
        format!("slopes {:.3} and {:.3} in {elapsed:.2?}", s[0], s[1]),
        format!("slopes {s:?} in {elapsed:.2?}"),
    )
}

fn criterion_7() -> Outcome {
    let v = verify("flat-identity", 6, vec![[0.35, 0.55], [0.28, 0.40]])?;
    let s = slopes(&v);
    let verdict = v["verdict"].as_str().unwrap_or_default().to_string();
    check(
        s[1] > s[0] && s[0] > 8.0 && s[1] > 12.0 && verdict == Verdict::SuperPolynomial.as_str(),
        format!("slopes {:.2} then {:.2}, {verdict}", s[0], s[1]),
        format!("slopes {s:?}, {verdict}"),
    )
}

fn criterion_8() -> Outcome {
    let tol = 1e-13;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for e in corpus() {
        let fun = SmoothFunction::from_entry(e);
        let [a, b] = e.default_window;
        for i in 0..64 {
            let y = a * (b / a).powf(i as f64 / 63.0);
            let x = match solve_inverse(&fun, y, tol) {
                Ok(s) => s.x,
                Err(err) => {
                    failures.push(format!("{} y={y}: {err}", e.name));
                    continue;
                }
            };
            let r = (fun.eval::<f64>(x).unwrap() - y).abs() / y.abs().max(1.0);
            worst = worst.max(r);
            if r > tol {
                failures.push(format!("{} y={y}: {r:e}", e.name));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("448 residuals, worst {worst:.1e}"),
        format!("{failures:?}"),
    )
}

fn criterion_9() -> Outcome {
    let expr = parse_expression("x*exp(x)").unwrap();
    let float = series_expand::<f64>(&expr, 256).unwrap().series;
    let start = Instant::now();
    lagrange_revert(&float, 256).map_err(|e| e.to_string())?;
    let t_float = start.elapsed();
    let exact = series_expand::<BigRational>(&expr, 64).unwrap().series;
    let start = Instant::now();
    lagrange_revert(&exact, 64).map_err(|e| e.to_string())?;
    let t_exact = start.elapsed();
    check(
        t_float < Duration::from_secs(1) && t_exact < Duration::from_secs(10),
        format!("float N=256 in {t_float:.2?}, rational N=64 in {t_exact:.2?}"),
        format!("float N=256 in {t_float:.2?}, rational N=64 in {t_exact:.2?}"),
    )
}

enum Expect {
    Tree(E),
    SyntaxAt(usize),
    UnknownAt(usize),
}

fn criterion_10() -> Outcome {
    use Expect::*;
    let x = || E::Variable;
    let cases: Vec<(&str, Expect)> = vec![
        ("x", Tree(x())),
        ("x*exp(x)", Tree(E::mul(x(), E::call(Function::Exp, x())))),
        ("x - x^2", Tree(E::sub(x(), E::pow(x(), 2)))),
        (
            "1 - 2 - 3",
            Tree(E::sub(
                E::sub(E::constant(1), E::constant(2)),
                E::constant(3),
            )),
        ),
        (
            "x/2/3",
            Tree(E::div(E::div(x(), E::constant(2)), E::constant(3))),
        ),
        (
            "2*x + x^2",
            Tree(E::add(E::mul(E::constant(2), x()), E::pow(x(), 2))),
        ),
        ("3/4*x", Tree(E::mul(E::ratio(3, 4), x()))),
        ("0.25 + x", Tree(E::add(E::ratio(1, 4), x()))),
        ("-x", Tree(E::sub(E::constant(0), x()))),
        ("(x + 1)^3", Tree(E::pow(E::add(x(), E::constant(1)), 3))),
        ("  sin( x )  ", Tree(E::call(Function::Sin, x()))),
        (
            "log1p(x)/(1+x)",
            Tree(E::div(
                E::call(Function::Log1p, x()),
                E::add(E::constant(1), x()),
            )),
        ),
        (
            "x + flatbump(x)",
            Tree(E::add(x(), E::call(Function::Flatbump, x()))),
        ),
        (
            "sqrt(1 + x) - 1",
            Tree(E::sub(
                E::call(Function::Sqrt, E::add(E::constant(1), x())),
                E::constant(1),
            )),
        ),
        (
            "atan(tan(x))",
            Tree(E::call(Function::Atan, E::call(Function::Tan, x()))),
        ),
        (
            "expm1(x)*cos(x)",
            Tree(E::mul(
                E::call(Function::Expm1, x()),
                E::call(Function::Cos, x()),
            )),
        ),
        ("x +", SyntaxAt(3)),
        ("", SyntaxAt(0)),
        ("(x", SyntaxAt(2)),
        ("x)", SyntaxAt(1)),
        ("x^1.5", SyntaxAt(2)),
        ("x x", SyntaxAt(2)),
        ("sin x", SyntaxAt(4)),
        ("2 * * x", SyntaxAt(4)),
        ("x + foo(x)", UnknownAt(4)),
    ];
    let mut failures = Vec::new();
    for (text, expect) in &cases {
        let got = parse_expression(text);
        let ok = match (expect, &got) {
            (Tree(t), Ok(g)) => g == t,
            (SyntaxAt(at), Err(ParseError::SyntaxError { offset, .. })) => offset == at,
            (UnknownAt(at), Err(ParseError::UnknownFunction { offset, .. })) => offset == at,
            _ => false,
        };
        if !ok {
            failures.push(format!("{text:?} -> {got:?}"));
        }
    }
    check(
        failures.is_empty() && cases.len() == 25,
        format!("{} grammar cases", cases.len()),
        format!("{failures:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Catalan check", criterion_1),
        ("Lambert-type check", criterion_2),
        ("three-way agreement", criterion_3),
        ("round trip", criterion_4),
        ("jet-only dependence", criterion_5),
        ("analytic remainder order", criterion_6),
        ("super-polynomial remainder", criterion_7),
        ("oracle residual", criterion_8),
        ("performance floor", criterion_9),
        ("parser conformance", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
