mod common;

use std::io::Cursor;
use std::process::Command;

use common::assert_valid;
use qmh_server::cli::{run, EXIT_INPUT, EXIT_OK};
use serde_json::Value;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn qmh(args: &[&str], stdin: &str) -> Output {
    let mut input = Cursor::new(stdin.as_bytes().to_vec());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("qmh").chain(args.iter().copied()), &mut input, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(s: &str) -> Value {
    serde_json::from_str(s.trim()).unwrap_or_else(|e| panic!("{e}: {s}"))
}

fn bob(args: &[&str]) -> f64 {
    let o = qmh(args, "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    json(&o.stdout)["bob"].as_f64().unwrap()
}

#[test]
fn payoff_examples() {
    let v = bob(&["payoff", "--regime", "unentangled", "--alice", "identity", "--bob", "identity", "--gamma", "0"]);
    assert!((v - 2.0 / 3.0).abs() < 1e-12);
    let v = bob(&["payoff", "--regime", "entangled", "--alice", "fair-h", "--bob", "identity", "--gamma", "0.7"]);
    assert!((v - 0.5).abs() < 1e-9);
    let v = bob(&["payoff", "--regime", "entangled", "--alice", "identity", "--bob", "identity", "--gamma", "1.5707963"]);
    assert!((v - 1.0).abs() < 1e-12);
    let v = bob(&["payoff", "--regime", "entangled", "--alice", "uniform-shuffles", "--bob", "uniform-shuffles"]);
    assert!((v - 2.0 / 3.0).abs() < 1e-12);
    let v = bob(&[
        "payoff", "--regime", "unentangled", "--alice", "identity", "--bob", "identity",
        "--gamma", "0.5235987755982988", "--mode", "coherent",
    ]);
    assert!((v - 0.552_831_216_351_296_8).abs() < 1e-12);

    let o = qmh(&["payoff", "--regime", "unentangled", "--output", "json"], "");
    assert_valid("payoff-result.schema.json", None, &json(&o.stdout));
}

#[test]
fn payoff_csv() {
    let o = qmh(&["payoff", "--regime", "unentangled", "--output", "csv"], "");
    assert_eq!(o.code, EXIT_OK);
    let mut lines = o.stdout.lines();
    assert_eq!(lines.next().unwrap(), "bob,alice,final_norm2,mode,regime,gamma");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!((row[0].parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(&row[3..5], ["incoherent", "unentangled"]);
}

#[test]
fn input_errors_exit_2_with_codes() {
    let cases: [(&[&str], &str); 7] = [
        (
            &["payoff", "--bob", r#"{"matrix":[[[2,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]]}"#],
            "NonUnitaryStrategy",
        ),
        (&["payoff", "--gamma", "2"], "GammaOutOfRange"),
        (&["payoff", "--gamma", "-0.1"], "GammaOutOfRange"),
        (&["payoff", "--regime", "custom"], "BadCustomState"),
        (&["payoff", "--alice", "sideways"], "UnknownPreset"),
        (&["payoff", "--mode", "loud"], "UsageError"),
        (&["frobnicate"], "UsageError"),
    ];
    for (args, code) in cases {
        let o = qmh(args, "");
        assert_eq!(o.code, EXIT_INPUT, "{args:?}");
        assert!(o.stdout.is_empty());
        assert_eq!(json(&o.stderr)["error"]["code"], code, "{args:?}");
    }

    // a normalized custom state with support off the o = 0 slice
    let mut amps = vec![[0.0, 0.0]; 27];
    amps[9] = [1.0, 0.0];
    let state = serde_json::to_string(&amps).unwrap();
    let o = qmh(&["payoff", "--regime", "custom", "--state", &state], "");
    assert_eq!(o.code, EXIT_INPUT);
    assert_eq!(json(&o.stderr)["error"]["code"], "BadCustomState");
}

#[test]
fn custom_state_is_accepted() {
    let mut amps = vec![[0.0, 0.0]; 27];
    amps[0] = [1.0, 0.0];
    let state = serde_json::to_string(&amps).unwrap();
    // |0 0 0>: Bob and Alice on box 0, staying wins
    let v = bob(&["payoff", "--regime", "custom", "--state", &state, "--gamma", "1.5707963267948966"]);
    assert!((v - 1.0).abs() < 1e-12);
}

#[test]
fn best_response_examples() {
    let o = qmh(&["best-response", "--respond-as", "bob", "--regime", "unentangled", "--against", "identity", "--starts", "8"], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = json(&o.stdout);
    assert!((v["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 2e-3);
    assert_eq!(v["gamma_branch"], "switch");
    assert_eq!(v["strategy"].as_array().unwrap().len(), 8);

    let random = serde_json::json!({"matrix": qmh_server::wire::op_to_wire(&qmh::linalg::random_su3(12).unwrap())});
    let o = qmh(
        &["best-response", "--respond-as", "bob", "--regime", "entangled", "--against", &random.to_string(), "--starts", "8"],
        "",
    );
    assert!(json(&o.stdout)["value"].as_f64().unwrap() > 1.0 - 1e-6);

    let o = qmh(
        &["best-response", "--respond-as", "alice", "--regime", "entangled", "--against", "identity", "--gamma", "0", "--starts", "8"],
        "",
    );
    assert!(json(&o.stdout)["bob_payoff"].as_f64().unwrap() < 1e-6);

    let o = qmh(&["best-response", "--respond-as", "alice", "--against", "identity"], "");
    assert_eq!(o.code, EXIT_INPUT);
    assert_eq!(json(&o.stderr)["error"]["code"], "MissingField");
}

#[test]
fn verify_paper_quick_passes() {
    let o = qmh(&["verify-paper", "--quick", "--seed", "3"], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
    assert_eq!(o.stdout.lines().filter(|l| l.trim_end().ends_with("PASS")).count(), 11);
    assert!(o.stdout.contains("quick run"));

    let o = qmh(&["verify-paper", "--quick", "--json"], "");
    let v = json(&o.stdout);
    assert_eq!(v["claims"].as_array().unwrap().len(), 11);
    assert!(v["claims"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

fn play(args: &[&str], stdin: &str) -> (Output, Vec<Value>) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let mut full = vec!["play"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--transcript", path.to_str().unwrap()]);
    let o = qmh(&full, stdin);
    let lines = std::fs::read_to_string(&path)
        .unwrap_or_default()
        .lines()
        .map(json)
        .collect();
    (o, lines)
}

#[test]
fn play_identity_stay_wins_every_round() {
    let (o, lines) = play(
        &["--regime", "entangled", "--alice-policy", "identity", "--rounds", "5"],
        &"identity stay\n".repeat(5),
    );
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("final score: you 5, Alice 0"), "{}", o.stdout);
    assert_eq!(lines.len(), 5);
    for l in &lines {
        assert_eq!(l["outcome"]["bob_wins"], true);
        assert_valid("match-transcript.schema.json", Some("round_record"), l);
    }
}

#[test]
fn play_always_switching_wins_two_thirds() {
    let n = 3000;
    let (o, lines) = play(
        &["--regime", "unentangled", "--alice-policy", "identity", "--seed", "11"],
        &"identity switch\n".repeat(n),
    );
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(lines.len(), n);
    let wins = lines.iter().filter(|l| l["outcome"]["bob_wins"] == true).count() as f64;
    let p: f64 = 2.0 / 3.0;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((wins / n as f64 - p).abs() < 4.0 * sigma);
}

#[test]
fn play_quit_and_bad_input() {
    let input = "identity switch\nnonsense\nidentity sideways\nwarp stay\nidentity 7\nhelp\nscore\nfair-h stay\nquit\nidentity stay\n";
    let (o, lines) = play(&["--regime", "entangled", "--alice-policy", "adaptive-counter"], input);
    assert_eq!(o.code, EXIT_OK);
    // only the two valid moves before quit are played
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["round"], 2);
    assert!(o.stdout.contains("could not read that move"));
    assert!(o.stdout.contains("move rejected (UnknownPreset)"));
    assert!(o.stdout.contains("move rejected (GammaOutOfRange)"));
    assert!(o.stdout.contains("2 rounds written"));

    // end of input behaves like quit
    let (o, lines) = play(&["--regime", "entangled"], "identity stay\n");
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(lines.len(), 1);
}

#[test]
fn play_rejects_unknown_policy() {
    let (o, _) = play(&["--alice-policy", "nobody"], "");
    assert_eq!(o.code, EXIT_INPUT);
    assert_eq!(json(&o.stderr)["error"]["code"], "UnknownPolicy");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qmh");
    let out = Command::new(bin).args(["payoff", "--regime", "unentangled"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&String::from_utf8_lossy(&out.stdout))["bob"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);

    let out = Command::new(bin).args(["payoff", "--gamma", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&String::from_utf8_lossy(&out.stderr))["error"]["code"], "GammaOutOfRange");

    let out = Command::new(bin).args(["--version"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
