use series_invert::{
    classify_decay, corpus_lookup, estimate_remainder_order, extract_jet, inverse_taylor,
    FloatSeries, Jet, JetSource, Precision, RemainderConfig, RemainderReport, SmoothError,
    SmoothFunction, Verdict, DEFAULT_BASE_STEP,
};

fn numeric(name: &str) -> SmoothFunction {
    let mut f = SmoothFunction::from_entry(corpus_lookup(name).unwrap());
    f.exact_series = None;
    f
}

/// The invariants every report must satisfy, whatever the scenario.
fn check_report_invariants(r: &RemainderReport, cfg: &RemainderConfig) {
    let n = r.poly_order as f64;
    if r.verdict == Verdict::ConsistentWithOrder {
        assert!(
            r.slope >= n + 1.0 - cfg.slope_slack && !r.noise_floor_hit,
            "{r:?}"
        );
    }
    if r.verdict == Verdict::SuperPolynomial {
        for side in &r.sides {
            assert!(
                side.inner_slope > side.outer_slope && side.inner_slope > n + cfg.super_margin,
                "{r:?}"
            );
        }
    }
    assert!(r.window[0] > 0.0 && r.window[0] < r.window[1]);
}

#[test]
fn sine_remainder_has_order_seven() {
    let cfg = RemainderConfig::default();
    let fun = numeric("sine");
    let jet = extract_jet(&fun, 5, DEFAULT_BASE_STEP).unwrap();
    let p = inverse_taylor(&jet, 5).unwrap();
    let expected = [0.0, 1.0, 0.0, 1.0 / 6.0, 0.0, 3.0 / 40.0];
    for (got, want) in p.coeffs().iter().zip(expected) {
        assert!((got - want).abs() <= 1e-7);
    }
    let whole = estimate_remainder_order(&fun, &p, [1e-3, 1e-1], 32, &cfg).unwrap();
    check_report_invariants(&whole, &cfg);
    assert!((whole.slope - 7.0).abs() <= 0.2, "{}", whole.slope);
    assert_eq!(whole.verdict, Verdict::ConsistentWithOrder);

    let reports: Vec<_> = [[1e-2, 1e-1], [1e-3, 1e-2]]
        .iter()
        .map(|w| estimate_remainder_order(&fun, &p, *w, 32, &cfg).unwrap())
        .collect();
    reports
        .iter()
        .for_each(|r| check_report_invariants(r, &cfg));
    assert_eq!(
        classify_decay(&reports, &cfg).unwrap(),
        Verdict::ConsistentWithOrder
    );
}

#[test]
fn identity_remainder_sits_on_the_noise_floor() {
    let cfg = RemainderConfig::default();
    let fun = numeric("identity");
    let p = FloatSeries::from_coeffs(vec![0.0, 1.0], 1);
    let r = estimate_remainder_order(&fun, &p, [1e-3, 1e-1], 32, &cfg).unwrap();
    assert!(r.noise_floor_hit);
    assert_eq!(r.verdict, Verdict::Inconclusive);
    check_report_invariants(&r, &cfg);
}

#[test]
fn flat_perturbation_decays_faster_than_any_power() {
    let cfg = RemainderConfig::default();
    let fun = numeric("flat-identity");
    let jet = extract_jet(&fun, 6, DEFAULT_BASE_STEP).unwrap();
    let p = inverse_taylor(&jet, 6).unwrap();
    for (k, c) in p.coeffs().iter().enumerate() {
        let want = if k == 1 { 1.0 } else { 0.0 };
        assert!((c - want).abs() <= 1e-8, "P[{k}] = {c}");
    }
    let outer = estimate_remainder_order(&fun, &p, [0.35, 0.55], 32, &cfg).unwrap();
    let inner = estimate_remainder_order(&fun, &p, [0.28, 0.40], 32, &cfg).unwrap();
    assert!(outer.slope > 8.0, "outer {}", outer.slope);
    assert!(inner.slope > 12.0, "inner {}", inner.slope);
    assert!(inner.slope > outer.slope);
    check_report_invariants(&outer, &cfg);
    check_report_invariants(&inner, &cfg);
    assert_eq!(
        classify_decay(&[outer, inner], &cfg).unwrap(),
        Verdict::SuperPolynomial
    );
}

#[test]
fn binary64_precision_still_sees_order_seven_on_sine() {
    let cfg = RemainderConfig {
        precision: Precision::Binary64,
        ..RemainderConfig::default()
    };
    let fun = SmoothFunction::from_entry(corpus_lookup("sine").unwrap());
    let p = inverse_taylor(&extract_jet(&fun, 5, DEFAULT_BASE_STEP).unwrap(), 5).unwrap();
    let r = estimate_remainder_order(&fun, &p, [1e-2, 1e-1], 32, &cfg).unwrap();
    assert!((r.slope - 7.0).abs() <= 0.2, "{}", r.slope);
}

#[test]
fn identical_jets_give_identical_polynomials() {
    let plain = inverse_taylor(
        &extract_jet(&numeric("identity"), 6, DEFAULT_BASE_STEP).unwrap(),
        6,
    )
    .unwrap();
    let flat = inverse_taylor(
        &extract_jet(&numeric("flat-identity"), 6, DEFAULT_BASE_STEP).unwrap(),
        6,
    )
    .unwrap();
    for (a, b) in plain.coeffs().iter().zip(flat.coeffs()) {
        assert!((a - b).abs() <= 1e-8);
    }
}

#[test]
fn jets_report_their_source() {
    let exact = extract_jet(
        &SmoothFunction::from_entry(corpus_lookup("lambert").unwrap()),
        4,
        0.125,
    )
    .unwrap();
    assert_eq!(exact.source, JetSource::Exact);
    assert!(exact.per_coeff_error.iter().all(|&e| e == 0.0));
    let measured = extract_jet(&numeric("lambert"), 4, 0.125).unwrap();
    assert_eq!(measured.source, JetSource::FiniteDifference);
    assert_eq!(measured.per_coeff_error.len(), measured.order() + 1);
}

#[test]
fn polynomial_jets_are_recovered() {
    let fun = SmoothFunction::parse("x + x^3").unwrap();
    let jet = extract_jet(&fun, 4, DEFAULT_BASE_STEP).unwrap();
    for (k, want) in [0.0, 1.0, 0.0, 1.0, 0.0].into_iter().enumerate() {
        assert!((jet.series.coeffs()[k] - want).abs() <= 1e-9);
        assert!(jet.per_coeff_error[k] <= 1e-9);
    }
}

#[test]
fn degenerate_jets_are_rejected() {
    let flat = Jet {
        series: FloatSeries::from_coeffs(vec![0.0, 0.0, 1.0], 2),
        per_coeff_error: vec![0.0; 3],
        source: JetSource::Exact,
    };
    assert!(matches!(
        inverse_taylor(&flat, 2),
        Err(SmoothError::NotRevertible(_))
    ));
    let noisy = Jet {
        series: FloatSeries::from_coeffs(vec![0.0, 1e-3, 1.0], 2),
        per_coeff_error: vec![0.0, 1e-3, 0.0],
        source: JetSource::FiniteDifference,
    };
    assert!(matches!(
        inverse_taylor(&noisy, 2),
        Err(SmoothError::IllConditionedJet { .. })
    ));
    assert!(matches!(
        extract_jet(&SmoothFunction::parse("sin(x)").unwrap(), 4, 1e-13),
        Err(SmoothError::StepUnderflow { .. })
    ));
}

#[test]
fn a_single_window_cannot_be_classified() {
    let cfg = RemainderConfig::default();
    let fun = numeric("sine");
    let p = inverse_taylor(&extract_jet(&fun, 5, DEFAULT_BASE_STEP).unwrap(), 5).unwrap();
    let r = estimate_remainder_order(&fun, &p, [1e-2, 1e-1], 16, &cfg).unwrap();
    assert!(matches!(
        classify_decay(&[r], &cfg),
        Err(SmoothError::WindowsNotNested(_))
    ));
}
