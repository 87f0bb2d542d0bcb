//! End-to-end tests of the `exm` binary: subcommand behavior, exit codes,
//! and output determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn exm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exm"))
        .args(args)
        .env_remove("EXM_QRNG_URL")
        .env_remove("EXM_QRNG_TOKEN")
        .output()
        .expect("spawn exm")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("exm_cli_test_{}_{name}", std::process::id()));
    path
}

#[test]
fn run_collatz_halts_with_exit_zero_and_full_trace() {
    let output = exm(&[
        "run",
        "collatz.exm",
        "--tape",
        "# #11111#",
        "--trace",
        "text",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    // Header + 384 rows + summary.
    assert_eq!(text.lines().count(), 386);
    assert!(text.lines().next().unwrap().starts_with("STATE"));
    assert!(text.contains("(q, #, a, #, 1)"));
    assert!(text
        .lines()
        .last()
        .unwrap()
        .starts_with("halted: steps 384"));
}

#[test]
fn run_stdout_is_deterministic_for_fixed_seed() {
    let args = [
        "run",
        "randomwalk.exm",
        "--tape",
        "# ##",
        "--bits",
        "seed:9",
        "--max-steps",
        "200",
        "--trace",
        "json",
    ];
    let first = exm(&args);
    let second = exm(&args);
    assert_eq!(first.status.code(), Some(6));
    assert_eq!(first.stdout, second.stdout);
    // Every JSON line parses and mirrors the trace schema.
    for line in stdout(&first).lines().take(200) {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(value["state"].is_string());
        assert!(value["head"].is_i64());
    }
}

#[test]
fn exit_codes_for_the_error_paths() {
    // Usage: random instructions need a bit source.
    let output = exm(&["run", "randomwalk.exm", "--tape", "# ##"]);
    assert_eq!(output.status.code(), Some(2));

    // Parse: malformed tape literal.
    let output = exm(&["run", "collatz.exm", "--tape", "##"]);
    assert_eq!(output.status.code(), Some(3));

    // Parse: unknown machine.
    let output = exm(&["run", "no-such.exm", "--tape", "# ##"]);
    assert_eq!(output.status.code(), Some(3));

    // Bits exhausted mid-run.
    let bits = temp_path("empty_bits.txt");
    std::fs::write(&bits, "").unwrap();
    let output = exm(&[
        "run",
        "randomwalk.exm",
        "--tape",
        "# ##",
        "--bits",
        &format!("file:{}", bits.display()),
    ]);
    assert_eq!(output.status.code(), Some(5));

    // Step limit.
    let output = exm(&[
        "run",
        "randomwalk.exm",
        "--tape",
        "# ##",
        "--bits",
        "seed:1",
        "--max-steps",
        "50",
    ]);
    assert_eq!(output.status.code(), Some(6));

    // Usage: no such subcommand flag.
    let output = exm(&["run", "collatz.exm", "--no-such-flag"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn build_qx_then_membership_round_trip() {
    let machine = temp_path("q.exm");
    let output = exm(&["build-qx", "11010", "-o", machine.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));

    let output = exm(&["membership", machine.to_str().unwrap(), "--n", "2"]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout(&output), "N\nbits used: 0\n");

    // Past the prefix without a bit source: exhaustion, code 5.
    let output = exm(&["membership", machine.to_str().unwrap(), "--n", "7"]);
    assert_eq!(output.status.code(), Some(5));

    // Past the prefix with recorded bits: evolves and saves.
    let bits = temp_path("grow_bits.txt");
    std::fs::write(&bits, "011").unwrap();
    let evolved = temp_path("q_evolved.exm");
    let output = exm(&[
        "membership",
        machine.to_str().unwrap(),
        "--n",
        "7",
        "--bits",
        &format!("file:{}", bits.display()),
        "--save-evolved",
        evolved.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout(&output), "Y\nbits used: 3\n");
    let saved = std::fs::read_to_string(&evolved).unwrap();
    let machine = exm_core::parser::parse_machine(&saved).unwrap();
    assert_eq!(machine.state_count(), 17);
    assert_eq!(
        exm_core::qx::extract_language_prefix(&machine).unwrap(),
        vec![1, 1, 0, 1, 0, 0, 1, 1]
    );
}

#[test]
fn psi_round_trip_via_cli() {
    let output = exm(&["psi", "7"]);
    assert_eq!(stdout(&output), "000\n");
    let output = exm(&["psi-inv", "000"]);
    assert_eq!(stdout(&output), "7\n");
    let output = exm(&["psi", "0"]);
    assert_eq!(stdout(&output), "\n");
    let output = exm(&["psi-inv"]);
    assert_eq!(stdout(&output), "0\n");
    let output = exm(&["psi-inv", "0x1"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn collatz_survey_reports_halts() {
    let output = exm(&["collatz-survey", "--odd-max", "15", "--max-steps", "100000"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("halted 7/7"));
}

#[test]
fn halting_lab_writes_machine_and_report() {
    let machine = temp_path("lab.exm");
    let report = temp_path("lab.json");
    let output = exm(&[
        "halting-lab",
        "--m",
        "8",
        "--max-states",
        "1",
        "--oracle-steps",
        "1000",
        "-o",
        machine.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("oracle bits 0..=8: 100000000"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["prefix"], "100000000");
    assert_eq!(report["verdicts"].as_array().unwrap().len(), 9);
    assert_eq!(report["verdicts"][0]["kind"], "halts");
    assert_eq!(report["verdicts"][1]["kind"], "immortal");

    let saved = std::fs::read_to_string(&machine).unwrap();
    let machine = exm_core::parser::parse_machine(&saved).unwrap();
    assert_eq!(
        exm_core::qx::extract_language_prefix(&machine).unwrap(),
        vec![1, 0, 0, 0, 0, 0, 0, 0, 0]
    );
}

#[test]
fn phi_check_reports_exact_correspondence() {
    let output = exm(&[
        "phi-check",
        "collatz.exm",
        "--tape",
        "# #11111#",
        "--steps",
        "10000",
        "--report",
        "json",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(stdout(&output).trim()).unwrap();
    assert_eq!(value["exact"], true);
    assert_eq!(value["steps_checked"], 384);
    assert_eq!(value["halted"], true);

    // Machines with random instructions are outside the embedding: usage.
    let output = exm(&["phi-check", "qx.exm", "--tape", "# ##"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bits_test_passes_seeded_source() {
    let output = exm(&["bits-test", "--bits", "seed:42", "--count", "100000"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("monobit: 50006/100000 = 0.50006 (ok)"));
    assert!(text.contains("(within)"));
}

#[test]
fn run_saves_evolved_machine() {
    let bits = temp_path("qx_bits.txt");
    std::fs::write(&bits, "11010").unwrap();
    let evolved = temp_path("run_evolved.exm");
    let output = exm(&[
        "run",
        "qx.exm",
        "--tape",
        "# #aaaa##",
        "--bits",
        &format!("file:{}", bits.display()),
        "--save-evolved",
        evolved.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let saved = std::fs::read_to_string(&evolved).unwrap();
    let machine = exm_core::parser::parse_machine(&saved).unwrap();
    assert_eq!(machine.instructions().len(), 24);
    assert_eq!(machine.state_count(), 14);
}
