//! End-to-end command-line tests: file round-trips, verdict output and
//! the exit-code contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relucheck"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn write_fixtures(dir: &Path) {
    // The split identity network: x -> (ReLU(x), ReLU(-x)) -> y1 - y2.
    fs::write(
        dir.join("net.json"),
        r#"{"layers":[[{"act":"id"}],
            [{"act":"relu","bias":"0","weights":["1"]},
             {"act":"relu","bias":"0","weights":["-1"]}],
            [{"act":"id","bias":"0","weights":["1","-1"]}]]}"#,
    )
    .unwrap();
    fs::write(
        dir.join("unit.json"),
        r#"{"dim":1,"rows":[{"coeffs":["1"],"rel":"<=","rhs":"1"},
                            {"coeffs":["-1"],"rel":"<=","rhs":"0"}]}"#,
    )
    .unwrap();
    fs::write(
        dir.join("cap.json"),
        r#"{"dim":1,"rows":[{"coeffs":["1"],"rel":"<","rhs":"1"}]}"#,
    )
    .unwrap();
}

#[test]
fn check_decides_and_reports_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run(
        &[
            "check", "vip", "--net", "net.json", "--inspec", "unit.json", "--outspec",
            "cap.json",
        ],
        dir.path(),
    );
    let v = stdout_json(&out);
    assert_eq!(v["holds"], false);
    assert_eq!(v["witness"][0], "1");
    assert!(v["certificate"].is_object());
}

#[test]
fn check_reads_instance_files_and_certify_replays() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let net = fs::read_to_string(dir.path().join("net.json")).unwrap();
    fs::write(
        dir.path().join("sr.json"),
        format!(
            r#"{{"problem":"sr","net":{},"metric":"linf","eps":"1","delta":"1/2","center":["0"]}}"#,
            net
        ),
    )
    .unwrap();
    let out = run(&["check", "sr", "--instance", "sr.json"], dir.path());
    let v = stdout_json(&out);
    assert_eq!(v["holds"], false);

    fs::write(
        dir.path().join("cert.json"),
        serde_json::to_string(&v["certificate"]).unwrap(),
    )
    .unwrap();
    let out = run(
        &[
            "certify",
            "--instance",
            "sr.json",
            "--certificate",
            "cert.json",
        ],
        dir.path(),
    );
    let v = stdout_json(&out);
    assert_eq!(v["valid"], true);
}

#[test]
fn reduce_emits_files_the_checker_accepts_with_equal_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let net = fs::read_to_string(dir.path().join("net.json")).unwrap();
    fs::write(
        dir.path().join("sr.json"),
        format!(
            r#"{{"problem":"sr","net":{},"metric":"linf","eps":"1","delta":"1/2","center":["0"]}}"#,
            net
        ),
    )
    .unwrap();
    for (name, problem) in [("sr2vip", "vip"), ("sr2cr", "cr")] {
        let outfile = format!("{}.json", name);
        let out = run(
            &[
                "reduce", name, "--instance", "sr.json", "--out", &outfile, "--pure-relu",
            ],
            dir.path(),
        );
        assert!(out.status.success());
        let check = run(&["check", problem, "--instance", &outfile], dir.path());
        let v = stdout_json(&check);
        assert_eq!(v["holds"], false, "{} must mirror the SR verdict", name);
    }
}

#[test]
fn gadget_pipeline_from_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("unsat.cnf"), "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n").unwrap();
    let out = run(
        &[
            "gadget", "--cnf", "unsat.cnf", "--target", "gsr", "--out", "g",
        ],
        dir.path(),
    );
    let meta = stdout_json(&out);
    assert_eq!(meta["clauses"], 2);
    let check = run(&["check", "gsr", "--instance", "g.instance.json"], dir.path());
    let v = stdout_json(&check);
    assert_eq!(v["holds"], true, "an unsatisfiable formula is robust");

    // The emitted network file re-parses as a network.
    let net_text = fs::read_to_string(dir.path().join("g.net.json")).unwrap();
    assert!(serde_json::from_str::<relucheck::net::Network>(&net_text).is_ok());
}

#[test]
fn necessity_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run(
        &["check", "nece", "--net", "net.json", "--nodes", "1:0"],
        dir.path(),
    );
    let v = stdout_json(&out);
    assert_eq!(v["holds"], true);
    let out = run(&["check", "anece", "--net", "net.json"], dir.path());
    let v = stdout_json(&out);
    assert_eq!(v["holds"], true);
}

#[test]
fn falsify_finds_planted_violations() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run(
        &[
            "falsify", "sr", "--net", "net.json", "--metric", "linf", "--eps", "1",
            "--delta", "1/2", "--center", "0", "--trials", "1000", "--seed", "5",
        ],
        dir.path(),
    );
    let v = stdout_json(&out);
    assert!(!v["witness"].is_null());
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    // Decided either way: 0.
    let out = run(
        &[
            "check", "sr", "--net", "net.json", "--metric", "linf", "--eps", "1",
            "--delta", "2", "--center", "0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    // Unreadable file: 2.
    let out = run(
        &[
            "check", "sr", "--net", "missing.json", "--metric", "linf", "--eps", "1",
            "--delta", "2", "--center", "0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // Unsupported metric for Lipschitz robustness: 2.
    let out = run(
        &[
            "check", "lr", "--net", "net.json", "--metric", "l1", "--eps", "1", "--lip",
            "1", "--center", "0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // Usage error (unknown subcommand): 2 from the argument parser.
    let out = run(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // Retraction with an infinite radius is a precondition failure: 2.
    let out = run(
        &[
            "reduce", "retract", "--net", "net.json", "--source-metric", "l1",
            "--center", "0", "--eps", "inf", "--out", "t.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // Malformed DIMACS: 2.
    fs::write(dir.path().join("bad.cnf"), "p cnf 1 1\n1 1 0\n").unwrap();
    let out = run(
        &["gadget", "--cnf", "bad.cnf", "--target", "lr", "--out", "g"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn retraction_emission_and_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run(
        &[
            "reduce", "retract", "--net", "net.json", "--source-metric", "l1",
            "--center", "0", "--eps", "1", "--lambda", "d3", "--out", "t.json",
        ],
        dir.path(),
    );
    let meta = stdout_json(&out);
    assert_eq!(meta["target_metric"], "d3");
    let text = fs::read_to_string(dir.path().join("t.json")).unwrap();
    let net: relucheck::net::Network = serde_json::from_str(&text).unwrap();
    // net is identity-composed-with-T: far inputs collapse to the ball.
    let v = net
        .evaluate(&relucheck::rat::RatVector::new(vec![relucheck::parse_rational("-5").unwrap()]))
        .unwrap();
    assert_eq!(v[0], relucheck::parse_rational("-1").unwrap());
}
