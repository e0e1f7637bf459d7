use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn conestab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conestab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn stab_falsifies_the_orthant_quadratic_form() {
    let out = conestab(&[
        "stab",
        "-e",
        "(z1+z3)^2 - z2^2",
        "--cone",
        "orthant:3",
        "--verify",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"]["status"], "falsified");
    assert_eq!(v["verified"], true);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["verdict"]["witness"].as_array().unwrap().len(), 3);
    assert!(v["verdict"]["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn stab_does_not_falsify_the_psd_determinant() {
    let out = conestab(&[
        "stab",
        "-e",
        "z11*z22 - z12^2",
        "--cone",
        "psd:2",
        "--samples",
        "2000",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"]["status"], "not_falsified");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["verdict"]["seed"], 7);
    assert_eq!(v["verdict"]["samples"], 2000);
}

#[test]
fn stab_zero_polynomial_is_certified_unstable() {
    let out = conestab(&["stab", "-e", "0", "--cone", "orthant:1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"]["status"], "certified_unstable");
}

#[test]
fn stab_linear_input_is_exact() {
    let out = conestab(&[
        "stab",
        "-e",
        "z1 + 2*z2 + 3i",
        "--cone",
        "orthant:2",
        "--output",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("status,seed,samples,residual,witness"));
    assert!(lines.next().unwrap().starts_with("certified_stable,0,0,"));
}

#[test]
fn stab_is_reproducible_and_thread_independent() {
    let args = [
        "stab",
        "-e",
        "z1*z2 + z3^2",
        "--cone",
        "orthant:3",
        "--seed",
        "11",
        "--samples",
        "500",
    ];
    let a = stdout(&conestab(&args));
    let b = stdout(&conestab(&[&args[..], &["--threads", "1"]].concat()));
    assert_eq!(a, b);
}

#[test]
fn stab_reads_expression_and_json_files() {
    let dir = std::env::temp_dir().join(format!("conestab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let expr = dir.join("f.txt");
    std::fs::write(&expr, "(z1+z3)^2 - z2^2\n").unwrap();
    let poly = dir.join("f.json");
    std::fs::write(
        &poly,
        r#"{"vars": ["a", "b"], "terms": [{"exp": [1, 0], "re": 1}, {"exp": [0, 1], "re": 1}]}"#,
    )
    .unwrap();
    let out = conestab(&["stab", "-f", expr.to_str().unwrap(), "--cone", "orthant:3"]);
    assert_eq!(out.status.code(), Some(1));
    let out = conestab(&["stab", "-f", poly.to_str().unwrap(), "--cone", "orthant:2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"]["status"], "certified_stable");
    assert_eq!(v["vars"], serde_json::json!(["a", "b"]));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cone_mini_syntax() {
    let wedge = format!("poly:@{}", data("wedge.json"));
    let out = conestab(&["stab", "-e", "z1 - z2", "--cone", &wedge]);
    assert_eq!(json(&out)["verdict"]["status"], "certified_stable");
    let out = conestab(&["stab", "-e", "2*z2 - z1", "--cone", &wedge]);
    assert_eq!(json(&out)["verdict"]["status"], "certified_unstable");
    let prod = format!("prod:orthant:1,{wedge}");
    let out = conestab(&["stab", "-e", "z1 + z2 + z3", "--cone", &prod]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"]["status"], "certified_stable");
    assert_eq!(v["vars"].as_array().unwrap().len(), 3);
}

#[test]
fn input_errors_exit_two() {
    for args in [
        &["stab", "-e", "z1 +", "--cone", "orthant:1"][..],
        &["stab", "-e", "w1", "--cone", "orthant:1"],
        &["stab", "-e", "z1", "--cone", "sphere:2"],
        &[
            "stab",
            "-e",
            "z1",
            "--cone",
            "orthant:1",
            "--tol",
            "bogus=1",
        ],
        &["stab", "-e", "z1", "--cone", "poly:@/nonexistent/cone.json"],
        &["stab", "--cone", "orthant:1"],
        &["detstab", "--blocks", "/nonexistent/blocks.json"],
        &["improj", "-e", "z1 + z2", "--box", "0:1,0:1,0:1"],
    ] {
        let out = conestab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn tolerance_override_is_applied() {
    // a witness margin larger than any sampled interior point rejects every witness
    let ok = conestab(&[
        "stab",
        "-e",
        "(z1+z3)^2 - z2^2",
        "--cone",
        "orthant:3",
        "--samples",
        "200",
    ]);
    assert_eq!(ok.status.code(), Some(1));
    let strict = conestab(&[
        "stab",
        "-e",
        "(z1+z3)^2 - z2^2",
        "--cone",
        "orthant:3",
        "--samples",
        "200",
        "--tol",
        "witness_margin=1e6",
    ]);
    assert_eq!(strict.status.code(), Some(0));
    assert_eq!(json(&strict)["verdict"]["status"], "not_falsified");
}

#[test]
fn hko_linear_pair_is_consistent_negative() {
    let out = conestab(&[
        "hko",
        "--f",
        "z2",
        "--g",
        "z1",
        "--cone",
        "orthant:2",
        "--verify",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["summary"], "consistent-negative");
    assert_eq!(v["pencil_clean"], false);
    assert_eq!(v["verified"], true);
}

#[test]
fn hko_equal_pair_is_degenerate() {
    let out = conestab(&[
        "hko",
        "--f",
        "z1",
        "--g",
        "z1",
        "--cone",
        "orthant:2",
        "--samples",
        "500",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["summary"], "consistent-degenerate");
    assert_eq!(v["pencil_clean"], true);
    assert_eq!(v["side_clean"], true);
}

#[test]
fn hko_non_interlacing_pair_is_consistent_negative() {
    let out = conestab(&[
        "hko",
        "--f",
        "z1^2 - z2^2",
        "--g",
        "z1*z2 + 1",
        "--cone",
        "orthant:2",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["summary"], "consistent-negative");
    assert_eq!(v["g_plus_if"]["status"], "falsified");
    assert_eq!(v["f_plus_ig"]["status"], "falsified");
}

#[test]
fn hko_stable_side() {
    let out = conestab(&[
        "hko",
        "--f",
        "z1 + z2",
        "--g",
        "1",
        "--cone",
        "orthant:2",
        "--output",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("summary: consistent\n"), "{text}");
    assert!(text.contains("f+ig status: certified_stable"));
    assert!(text.contains("W(g,f) <= 0: true"));
}

#[test]
fn detstab_certifies_the_interlaced_example() {
    let out = conestab(&["detstab", "--blocks", &data("interlaced.json"), "--perturb"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"]["status"], "certified_stable");
    assert_eq!(v["polynomial"], "z11^2 + 2*z11*z22 - z12^2 + z22^2");
    assert_eq!(v["perturbation"]["passes"], true);
}

#[test]
fn detstab_indefinite_example_is_not_certified() {
    let out = conestab(&[
        "detstab",
        "--blocks",
        &data("indefinite.json"),
        "--samples",
        "1000",
        "--verify",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"]["status"], "not_certified");
    assert_eq!(v["falsifier"]["status"], "not_falsified");
    assert!(v["note"].as_str().unwrap().contains("not_falsified"));
    assert_eq!(v["polynomial"], "5*z11^2 + 26*z11*z22 - 16*z12^2 + 5*z22^2");
}

#[test]
fn detstab_zero_blocks_with_identity() {
    let out = conestab(&[
        "detstab",
        "--blocks",
        &data("zero_blocks.json"),
        "--b",
        &data("identity2.json"),
        "--output",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("status: certified_stable"));
    assert!(text.contains("polynomial: 1\n"));
}

#[test]
fn improj_of_a_quadratic_in_one_variable() {
    let out = conestab(&["improj", "-e", "z1^2 + 1", "--points", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("im_z1"));
    let values: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 10);
    assert!(values.iter().all(|v| (v.abs() - 1.0).abs() < 1e-9));
}

#[test]
fn improj_of_a_linear_form_lies_on_a_hyperplane() {
    let out = conestab(&[
        "improj",
        "-e",
        "z1 + 2*z2 - 3*z3",
        "--points",
        "200",
        "--box",
        "-1:1,-2:2,-3:3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 200);
    for r in rows {
        assert!((r[0] + 2.0 * r[1] - 3.0 * r[2]).abs() < 1e-9);
    }
}

#[test]
fn improj_of_the_quadratic_form_lies_on_two_planes() {
    let out = conestab(&[
        "improj",
        "-e",
        "(z1+z3)^2 - z2^2",
        "--points",
        "300",
        "--output",
        "json",
    ]);
    let v = json(&out);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 300);
    for p in points {
        let y: Vec<f64> = p
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        let s = y[0] + y[2];
        assert!((s.abs() - y[1].abs()).abs() < 1e-7, "{y:?}");
    }
}
