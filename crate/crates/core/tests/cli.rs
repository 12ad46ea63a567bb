use hm_core::semialg::expr::{default_names, Expr};
use hm_core::series::Ctx;
use proptest::prelude::*;
use serde_json::Value;
use std::process::{Command, Output};

fn hm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hm")).args(args).env_remove("HM_PRECISION").output().expect("run hm")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).trim_end().to_string()
}

struct Example {
    args: Vec<String>,
    expected: String,
}

fn gallery() -> Vec<Example> {
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).expect("README.md");
    let block = readme.split("```console\n").nth(1).expect("console block").split("\n```").next().unwrap();
    let mut out = Vec::new();
    for chunk in block.split("\n\n") {
        let mut lines = chunk.lines();
        let cmd = lines.next().unwrap().strip_prefix("$ hm ").expect("command line");
        let args = shlex::split(cmd).expect("shell words");
        out.push(Example { args, expected: lines.collect::<Vec<_>>().join("\n") });
    }
    out
}

#[test]
fn readme_gallery_is_reproduced() {
    let examples = gallery();
    assert!(examples.len() >= 20);
    for ex in examples {
        let args: Vec<&str> = ex.args.iter().map(String::as_str).collect();
        let out = hm(&args);
        let is_error = ex.expected.starts_with("error:");
        let got = if is_error { text(&out.stderr) } else { text(&out.stdout) };
        assert_eq!(got, ex.expected, "hm {}", ex.args.join(" "));
        assert_eq!(out.status.success(), !is_error, "hm {}", ex.args.join(" "));
    }
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| hm(args).status.code().unwrap();
    assert_eq!(code(&["measure", "[0, 1]"]), 0);
    assert_eq!(code(&["measure", "[0"]), 1);
    assert_eq!(code(&["no-such-command"]), 1);
    assert_eq!(code(&["eval", "1/(t - t)"]), 2);
    assert_eq!(code(&["integrate", "1/x^2", "on", "[-1, 1]"]), 2);
    assert_eq!(code(&["limit", "--at", "inf", "sin(x)"]), 1);
    let tight = ["compare", "(1+t)^(1/2)", "1 + t/2 - t^2/8 + t^3/16 - 5*t^4/128 + 7*t^5/256 - 21*t^6/1024 + 33*t^7/2048"];
    assert_eq!(code(&tight), 3);
    let mut wide = vec!["--precision", "12"];
    wide.extend_from_slice(&tight);
    assert_eq!(code(&wide), 0);
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_hm")).args(["eval", "1/(1-t)"]).env("HM_PRECISION", "2").output().unwrap();
    assert_eq!(text(&out.stdout), "1 + t + O(t^2)");
    let out = Command::new(env!("CARGO_BIN_EXE_hm")).args(["--precision", "3", "eval", "1/(1-t)"]).env("HM_PRECISION", "2").output().unwrap();
    assert_eq!(text(&out.stdout), "1 + t + t^2 + O(t^3)");
}

#[test]
fn json_schema() {
    let out = hm(&["--format", "json", "integrate", "1/x", "on", "[1, t^(-1)]"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["value"], "X");
    assert_eq!(v["degree"], 1);
    assert_eq!(v["precision"], "8");
    assert_eq!(v["oracle_check"]["tau0"], 0.001);
    assert!(v["oracle_check"]["rel_err"].as_f64().unwrap() < 1e-6);

    let out = hm(&["--format", "json", "measure", "[0, inf)"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], "infinite");
    assert!(v["oracle_check"].is_null());

    let out = hm(&["--format", "json", "integrate", "1/x", "on", "[0, 1]"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["error"]["kind"], "DivergentIntegral");
}

fn gallery_expressions() -> Vec<String> {
    let mut out = Vec::new();
    for ex in gallery() {
        for w in ex.args.windows(2) {
            if w[1] == "on" || ["antideriv", "limit", "convolve", "coeffs"].contains(&ex.args[0].as_str()) && !w[1].starts_with('[') {
                out.push(w[0].clone());
            }
        }
        if let Some(last) = ex.args.last() {
            if !last.contains('[') && !last.contains("->") {
                out.push(last.clone());
            }
        }
    }
    out.retain(|s| !s.starts_with('-') && s != "on" && s != "inf");
    out
}

fn round_trips(src: &str) -> Result<(), String> {
    let ctx = Ctx::rational();
    let names = default_names(2);
    let Ok(e1) = Expr::parse(src, &names, &ctx) else { return Ok(()) };
    let shown = e1.render(&names);
    if shown.contains("O(") {
        return Ok(());
    }
    let e2 = Expr::parse(&shown, &names, &ctx).map_err(|e| format!("{src} -> {shown}: {e}"))?;
    if e1 == e2 {
        Ok(())
    } else {
        Err(format!("{src} -> {shown} reparses differently"))
    }
}

#[test]
fn gallery_expressions_round_trip() {
    let exprs = gallery_expressions();
    assert!(exprs.len() >= 10);
    for src in exprs {
        round_trips(&src).unwrap();
    }
}

fn arb_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("t".to_string()),
        Just("X".to_string()),
        Just("pi".to_string()),
        (-9i64..10).prop_map(|n| n.to_string()),
        (1i64..9, 2i64..9).prop_map(|(n, d)| format!("{n}/{d}")),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), 1i64..4).prop_map(|(a, k)| format!("({a})^{k}")),
            (inner.clone(), -3i64..4, 1i64..4).prop_map(|(a, n, d)| format!("({a})^({n}/{d})")),
            (inner.clone(), prop::sample::select(vec!["exp", "log", "sqrt", "arctan", "abs"])).prop_map(|(a, f)| format!("{f}({a})")),
            (inner.clone(), inner.clone(), inner).prop_map(|(c, a, b)| format!("piecewise({c} < 0: {a}, {b})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn render_then_parse_is_identity(src in arb_expr()) {
        prop_assert!(round_trips(&src).is_ok(), "{:?}", round_trips(&src));
    }
}
