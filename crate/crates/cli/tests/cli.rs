use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_series-invert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn strip_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn revert_quadratic_gives_catalan_numbers() {
    let v = json_of(&bin(&[
        "revert",
        "--function",
        "x - x^2",
        "--order",
        "8",
        "--mode",
        "rational",
    ]));
    assert_eq!(
        v["inverse"]["coeffs"],
        json!(["0", "1", "1", "2", "5", "14", "42", "132", "429"])
    );
    assert_eq!(v["inverse"]["mode"], "rational");
    assert!(v["timing"]["lagrange"].is_number());
    assert_eq!(v["agreement"]["newton"], json!(0.0));
}

#[test]
fn revert_identity_defaults_to_exact_mode() {
    let v = json_of(&bin(&["revert", "--function", "x", "--order", "4"]));
    assert_eq!(v["inverse"]["coeffs"], json!(["0", "1", "0", "0", "0"]));
    assert_eq!(v["mode"], "rational");
}

#[test]
fn positional_expression_and_float_mode() {
    let v = json_of(&bin(&[
        "revert",
        "2*x + x^2",
        "--order",
        "3",
        "--mode",
        "float",
    ]));
    assert_eq!(v["inverse"]["coeffs"], json!([0.0, 0.5, -0.125, 0.0625]));
}

#[test]
fn irrational_literals_force_float_mode() {
    let v = json_of(&bin(&["revert", "x + flatbump(x)", "--order", "3"]));
    assert_eq!(v["mode"], "float");
}

#[test]
fn exit_codes() {
    let not_revertible = bin(&["revert", "--function", "x^2", "--order", "4"]);
    assert_eq!(not_revertible.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&not_revertible.stderr).contains("NotRevertible"));

    let ill = bin(&["jet", "--function", "x^3", "--order", "4", "--numeric-jet"]);
    assert_eq!(ill.status.code(), Some(2));

    assert_eq!(bin(&["revert", "--function", "x +"]).status.code(), Some(3));
    assert_eq!(
        bin(&["revert", "--function", "foo(x)"]).status.code(),
        Some(3)
    );
    assert_eq!(
        bin(&["revert", "--coeffs", "/nonexistent/series.json"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(bin(&["revert", "--corpus", "nope"]).status.code(), Some(3));
    assert_eq!(bin(&["revert"]).status.code(), Some(3));
    assert_eq!(
        bin(&["revert", "x", "--corpus", "sine"]).status.code(),
        Some(3)
    );
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));

    // The quadratic has no preimage above y = 1/4.
    let oracle = bin(&[
        "verify",
        "--function",
        "x - x^2",
        "--order",
        "3",
        "--window",
        "0.3",
        "0.5",
    ]);
    assert_eq!(oracle.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&oracle.stderr).contains("OracleFailure"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = bin(&["corpus", "--out", "/nonexistent/dir/report.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn coefficient_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    std::fs::write(
        &input,
        r#"{"order": 4, "mode": "rational", "coeffs": ["0", "1", "-1", "0", "0"]}"#,
    )
    .unwrap();
    let out = dir.path().join("g.json");
    let status = bin(&[
        "revert",
        "--coeffs",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["inverse"]["coeffs"], json!(["0", "1", "1", "2", "5"]));
    assert_eq!(
        v["function"],
        json!({"source": "coeffs", "value": input.to_str().unwrap()})
    );

    std::fs::write(
        &input,
        r#"{"order": 2, "mode": "float", "coeffs": [0.0, 2.0, 1.0]}"#,
    )
    .unwrap();
    let v = json_of(&bin(&["revert", "--coeffs", input.to_str().unwrap()]));
    assert_eq!(v["inverse"]["coeffs"], json!([0.0, 0.5, -0.125]));

    std::fs::write(
        &input,
        r#"{"order": 3, "mode": "rational", "coeffs": ["0", "1"]}"#,
    )
    .unwrap();
    assert_eq!(
        bin(&["revert", "--coeffs", input.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn csv_reports_have_a_header_and_trailing_newline() {
    let out = bin(&[
        "revert",
        "--function",
        "x - x^2",
        "--order",
        "3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "n,coefficient\n0,0\n1,1\n2,1\n3,2\n"
    );
}

#[test]
fn burmann_squares_the_inverse() {
    let v = json_of(&bin(&[
        "burmann",
        "--function",
        "x - x^2",
        "--outer",
        "x^2",
        "--order",
        "4",
    ]));
    assert_eq!(v["series"]["coeffs"], json!(["0", "0", "1", "2", "5"]));
    let needs_outer = bin(&["burmann", "--function", "x - x^2"]);
    assert_eq!(needs_outer.status.code(), Some(3));
}

#[test]
fn jet_command_reports_error_bars() {
    let v = json_of(&bin(&[
        "jet",
        "--corpus",
        "sine",
        "--order",
        "5",
        "--numeric-jet",
    ]));
    assert_eq!(v["jet"]["source"], "finite-difference");
    let errs = v["jet"]["per_coeff_error"].as_array().unwrap();
    assert_eq!(errs.len(), 6);
    let inv = v["inverse"]["coeffs"].as_array().unwrap();
    assert!((inv[5].as_f64().unwrap() - 0.075).abs() < 1e-7);
}

#[test]
fn verify_examples() {
    let sine = json_of(&bin(&["verify", "--corpus", "sine", "--order", "5"]));
    assert_eq!(sine["verdict"], "consistent-with-order-(N+1)");
    for r in sine["reports"].as_array().unwrap() {
        assert!((r["slope"].as_f64().unwrap() - 7.0).abs() <= 0.2);
        assert_eq!(r["samples"], 32);
    }
    assert_eq!(sine["samples_data"].as_array().unwrap().len(), 2);

    let identity = json_of(&bin(&["verify", "--corpus", "identity", "--order", "4"]));
    assert_eq!(identity["verdict"], "inconclusive");
    assert_eq!(identity["reports"][0]["noise_floor_hit"], true);
    assert!(identity["reports"][0]["slope"].is_null());

    let flat = json_of(&bin(&[
        "verify",
        "--corpus",
        "flat-identity",
        "--order",
        "6",
    ]));
    assert_eq!(flat["verdict"], "super-polynomial");
    assert_eq!(flat["analytic"], false);
}

#[test]
fn verify_accepts_explicit_windows() {
    let v = json_of(&bin(&[
        "verify",
        "--corpus",
        "flat-identity",
        "--order",
        "6",
        "--window",
        "0.35",
        "0.55",
        "--window",
        "0.28",
        "0.40",
    ]));
    let windows: Vec<Value> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["window"].clone())
        .collect();
    assert_eq!(windows, vec![json!([0.35, 0.55]), json!([0.28, 0.40])]);
    assert_eq!(v["verdict"], "super-polynomial");
    let bad = bin(&["verify", "--corpus", "sine", "--window", "0.1", "0.01"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn output_is_deterministic_apart_from_timing() {
    for args in [
        &["verify", "--corpus", "lambert", "--order", "3"][..],
        &[
            "revert", "--corpus", "tangent", "--order", "12", "--mode", "float",
        ][..],
        &["jet", "--corpus", "scaled", "--order", "4", "--numeric-jet"][..],
    ] {
        let a = strip_timing(json_of(&bin(args)));
        let b = strip_timing(json_of(&bin(args)));
        assert_eq!(a, b, "{args:?}");
    }
    let one = Command::new(env!("CARGO_BIN_EXE_series-invert"))
        .args([
            "revert", "--corpus", "lambert", "--order", "20", "--mode", "float",
        ])
        .env("SERIES_INVERT_THREADS", "1")
        .output()
        .unwrap();
    let many = bin(&[
        "revert", "--corpus", "lambert", "--order", "20", "--mode", "float",
    ]);
    assert_eq!(strip_timing(json_of(&one)), strip_timing(json_of(&many)));
}

#[test]
fn bad_thread_setting_is_an_input_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_series-invert"))
        .args(["corpus"])
        .env("SERIES_INVERT_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bench_covers_both_rings_and_all_methods() {
    let out = bin(&["bench", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("algorithm,mode,order,wall_time,max_coeff_diff_vs_triangular")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 24);
    for r in &rows {
        let diff: f64 = r[4].parse().unwrap();
        match r[1] {
            "rational" => assert_eq!(diff, 0.0),
            "float" => assert!(diff <= 1e-10, "{r:?}"),
            other => panic!("mode {other}"),
        }
    }
}

#[test]
fn corpus_listing() {
    let v = json_of(&bin(&["corpus"]));
    let names: Vec<&str> = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "identity",
            "quadratic",
            "lambert",
            "sine",
            "tangent",
            "scaled",
            "flat-identity"
        ]
    );
    let one = json_of(&bin(&["corpus", "--corpus", "quadratic"]));
    assert_eq!(one["entries"][0]["exact_series"]["coeffs"][2], "-1");
}
