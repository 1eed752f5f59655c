use std::process::{Command, Output};

use birat_core::picard::IndexReport;

fn birat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_birat"))
        .args(args)
        .env_remove("BIRAT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn resolve_henon_is_regular() {
    let out = birat(&[
        "resolve",
        "--builder",
        "henon",
        "--a",
        "1",
        "--b",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["resolution"]["regular"], true);
    assert_eq!(v["resolution"]["i0"], 0);
    assert_eq!(v["resolution"]["z_phi"], "[1:0:0]");
    assert_eq!(v["resolution"]["z_phi_inverse"], "[0:1:0]");
}

#[test]
fn resolve_elementary_shares_a_prefix() {
    let out = birat(&["resolve", "--map", "x; y+x^2; x; y-x^2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["resolution"]["regular"], false);
    assert!(v["resolution"]["i0"].as_u64().unwrap() >= 1);
}

#[test]
fn exit_codes() {
    let out = birat(&["resolve", "--map", "x; y; x; y"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degree >= 2 required"));

    let out = birat(&["indices", "--map", "x; y+x^2; x; y+x^2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "NotInverse");

    let out = birat(&["indices", "--builder", "henon", "--term-budget", "10"]);
    assert_eq!(out.status.code(), Some(4));

    let out = birat(&["resolve", "--builder", "henon", "--step-budget", "2"]);
    assert_eq!(out.status.code(), Some(4));

    let out = birat(&["resolve", "--map", "x; y+x^2+; x; y"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn indices_text_report() {
    let out = birat(&["indices", "--builder", "transposed", "--d", "3", "--a", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("α(φ,eff) = 10/3 on the canonical resolution"),
        "{text}"
    );
    assert!(text.contains("α(φ,amp) ≤ 0 on this resolution"));
    assert!(text.contains("delta + 1/deg = 10/3 (equal)"));
    assert!(text.contains("NotPolyhedral"));
}

#[test]
fn indices_json_round_trips() {
    let out = birat(&[
        "indices",
        "--builder",
        "transposed",
        "--d",
        "4",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let report: IndexReport = serde_json::from_str(&text).unwrap();
    assert_eq!(
        report.eff_exact.as_ref().map(ToString::to_string),
        Some("17/4".into())
    );
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, text);
}

#[test]
fn table_rows_and_sweep() {
    let out = birat(&["table", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let effs: Vec<&str> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["eff"].as_str().unwrap())
        .collect();
    assert_eq!(effs, ["5/2", "10/3", "17/4"]);
    assert_eq!(v["all_match"], true);

    let out = birat(&["table", "--a", "7/3", "--b", "-2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains("MISMATCH"));
}

#[test]
fn fixed_seed_gives_identical_bytes() {
    let args = [
        "indices",
        "--builder",
        "henon",
        "--a",
        "3",
        "--b",
        "-1/2",
        "--format",
        "json",
        "--seed",
        "42",
    ];
    let first = birat(&args);
    let second = birat(&args);
    assert_eq!(first.stdout, second.stdout);
    let from_env = Command::new(env!("CARGO_BIN_EXE_birat"))
        .args(&args[..args.len() - 2])
        .env("BIRAT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(first.stdout, from_env.stdout);
}
