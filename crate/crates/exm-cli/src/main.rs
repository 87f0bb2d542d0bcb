//! `exm` — run machine files, query and evolve the self-extending acceptor,
//! survey Collatz inputs, drive the bounded halting lab, check the affine
//! embedding, and self-test bit sources.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage, 3 parse, 4 stuck,
//! 5 bits exhausted, 6 step limit, 7 protocol, 8 entropy backend.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use exm_cli::bits::bit_source_from_spec;
use exm_cli::output::{render_json_trace, render_summary, render_text_trace};
use exm_core::engine::{run, EngineError, RunOptions, RunOutcome};
use exm_core::halting::{collatz_survey, guided_evolution, EnumerationBounds, OracleVerdict};
use exm_core::machines;
use exm_core::parser::{parse_machine, serialize_machine};
use exm_core::phi::{verify_correspondence, PhiError};
use exm_core::qx::{build_qx, membership, psi, psi_inv, QxError};
use exm_core::random::{
    collect_bits, monobit_frequency, sign_change_band, sign_change_count, BitSource,
    BitSourceError, NoBits,
};
use exm_core::MachineDef;

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_STUCK: u8 = 4;
const EXIT_BITS_EXHAUSTED: u8 = 5;
const EXIT_STEP_LIMIT: u8 = 6;
const EXIT_PROTOCOL: u8 = 7;
const EXIT_REMOTE: u8 = 8;

#[derive(Parser)]
#[command(
    name = "exm",
    version,
    about = "Interpreter and experiment harness for self-modifying machines with random instructions",
    after_help = "Bundled machines (used when no such file exists): collatz.exm, \
                  randomwalk.exm, qx.exm, example22.exm.\n\
                  Bit sources: seed:<n> (pinned deterministic generator), file:<path> \
                  (recorded 0/1 text), os (operating system entropy), qrng (remote \
                  generator; set EXM_QRNG_URL and optionally EXM_QRNG_TOKEN)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TraceMode {
    Off,
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a machine on a tape literal.
    Run {
        /// Machine file (or bundled machine name).
        machine: String,
        /// Tape literal; the single space marks the head, e.g. "# #11111#".
        #[arg(long)]
        tape: String,
        /// Bit source for random instructions: seed:<n> | file:<path> | os | qrng.
        #[arg(long)]
        bits: Option<String>,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
        /// Trace each step to stdout.
        #[arg(long, value_enum, default_value_t = TraceMode::Off)]
        trace: TraceMode,
        /// Write the machine as evolved by this run.
        #[arg(long)]
        save_evolved: Option<PathBuf>,
        /// Window padding for rendered trace rows.
        #[arg(long, default_value_t = 2)]
        pad: u32,
    },
    /// Ask whether a^n is in a machine's language.
    Membership {
        machine: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        bits: Option<String>,
        #[arg(long)]
        save_evolved: Option<PathBuf>,
    },
    /// Construct the acceptor with a given determined prefix.
    BuildQx {
        /// Determined prefix, e.g. 11010 (empty for the blank acceptor).
        #[arg(default_value = "")]
        bits: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Unary length to binary string.
    Psi { n: u64 },
    /// Binary string back to unary length.
    PsiInv {
        #[arg(default_value = "")]
        bits: String,
    },
    /// Run the Collatz machine over odd inputs and report halts.
    CollatzSurvey {
        #[arg(long, default_value_t = 101)]
        odd_max: u64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
    },
    /// Decide blank-tape halting for the bounded family and evolve the
    /// acceptor along the verdict bits.
    HaltingLab {
        #[arg(long, default_value_t = 8)]
        m: u64,
        #[arg(long, default_value_t = 1)]
        max_states: u32,
        #[arg(long, default_value_t = 1_000)]
        oracle_steps: u64,
        /// Write the evolved acceptor here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write a JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check the exact affine embedding against an actual run.
    PhiCheck {
        machine: String,
        #[arg(long)]
        tape: String,
        #[arg(long, default_value_t = 1_000)]
        steps: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
    },
    /// Statistical self-tests of a bit source.
    BitsTest {
        #[arg(long)]
        bits: String,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

type CliResult = Result<(), CliError>;

/// Die quietly when the consumer of a pipe goes away, like any other
/// line-oriented tool.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("exm: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Run {
            machine,
            tape,
            bits,
            max_steps,
            trace,
            save_evolved,
            pad,
        } => cmd_run(
            &machine,
            &tape,
            bits.as_deref(),
            max_steps,
            trace,
            save_evolved,
            pad,
        ),
        Command::Membership {
            machine,
            n,
            bits,
            save_evolved,
        } => cmd_membership(&machine, n, bits.as_deref(), save_evolved),
        Command::BuildQx { bits, output } => cmd_build_qx(&bits, &output),
        Command::Psi { n } => {
            println!("{}", psi(n));
            Ok(())
        }
        Command::PsiInv { bits } => {
            let n = psi_inv(&bits).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
            println!("{n}");
            Ok(())
        }
        Command::CollatzSurvey { odd_max, max_steps } => cmd_collatz_survey(odd_max, max_steps),
        Command::HaltingLab {
            m,
            max_states,
            oracle_steps,
            output,
            report,
        } => cmd_halting_lab(m, max_states, oracle_steps, output, report),
        Command::PhiCheck {
            machine,
            tape,
            steps,
            report,
        } => cmd_phi_check(&machine, &tape, steps, report),
        Command::BitsTest { bits, count } => cmd_bits_test(&bits, count),
    }
}

/// Loads a machine file, falling back to the bundled machine of the same
/// name when no such file exists.
fn load_machine(path: &str) -> Result<MachineDef, CliError> {
    let source = if Path::new(path).exists() {
        fs::read_to_string(path)
            .map_err(|e| CliError::new(EXIT_PARSE, format!("reading `{path}`: {e}")))?
    } else if let Some(bundled) = machines::bundled(path) {
        bundled.to_string()
    } else {
        return Err(CliError::new(
            EXIT_PARSE,
            format!(
                "no such machine file `{path}` (bundled: {})",
                machines::BUNDLED_NAMES.join(", ")
            ),
        ));
    };
    parse_machine(&source).map_err(|e| CliError::new(EXIT_PARSE, format!("{path}: {e}")))
}

fn make_source(
    machine: &MachineDef,
    bits: Option<&str>,
    required: bool,
) -> Result<Box<dyn BitSource>, CliError> {
    match bits {
        Some(spec) => {
            bit_source_from_spec(spec).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))
        }
        None if machine.has_random_instructions() && required => Err(CliError::new(
            EXIT_USAGE,
            "this machine has random instructions; pass --bits seed:<n> | file:<path> | os | qrng",
        )),
        None => Ok(Box::new(NoBits)),
    }
}

/// Exit-code mapping for bit-source failures carried through the engine.
fn source_failure_code(message: &str) -> u8 {
    if message.contains("remote-protocol") {
        EXIT_PROTOCOL
    } else {
        EXIT_REMOTE
    }
}

fn engine_error(e: EngineError) -> CliError {
    match &e {
        EngineError::BitSource(msg) => CliError::new(source_failure_code(msg), e.to_string()),
        EngineError::Literal(_) => CliError::new(EXIT_PARSE, e.to_string()),
        _ => CliError::new(EXIT_OTHER, e.to_string()),
    }
}

/// Writes a machine file, prefixed by provenance comments (which the parser
/// ignores on re-read).
fn save_machine_with_notes(path: &Path, machine: &MachineDef, notes: &[String]) -> CliResult {
    let mut text = String::new();
    for note in notes {
        text.push_str(";; ");
        text.push_str(note);
        text.push('\n');
    }
    if !notes.is_empty() {
        text.push('\n');
    }
    text.push_str(&serialize_machine(machine));
    fs::write(path, text)
        .map_err(|e| CliError::new(EXIT_OTHER, format!("writing `{}`: {e}", path.display())))
}

/// Provenance note for a machine's determined prefix, when it has one.
fn prefix_note(machine: &MachineDef) -> Option<String> {
    exm_core::qx::extract_language_prefix(machine)
        .ok()
        .map(|prefix| {
            let bits: String = prefix.iter().map(|b| char::from(b'0' + b)).collect();
            format!("determined prefix: {bits}")
        })
}

fn cmd_run(
    machine_path: &str,
    tape: &str,
    bits: Option<&str>,
    max_steps: u64,
    trace: TraceMode,
    save_evolved: Option<PathBuf>,
    pad: u32,
) -> CliResult {
    let machine = load_machine(machine_path)?;
    let mut source = make_source(&machine, bits, true)?;
    let options = RunOptions {
        max_steps,
        trace: trace != TraceMode::Off,
        record_configs: false,
        window_pad: pad,
    };
    let output = run(&machine, tape, source.as_mut(), options).map_err(engine_error)?;
    // Files land before anything is printed: a closed stdout pipe must not
    // lose the evolved machine.
    if let Some(path) = save_evolved {
        let mut notes = vec![format!(
            "evolved by a run on tape \"{tape}\" ({} bits consumed{})",
            output.report.bits_consumed,
            bits.map(|spec| format!(", source {spec}"))
                .unwrap_or_default()
        )];
        notes.extend(prefix_note(&output.machine));
        save_machine_with_notes(&path, &output.machine, &notes)?;
    }
    match trace {
        TraceMode::Off => {}
        TraceMode::Text => print!("{}", render_text_trace(&output)),
        TraceMode::Json => print!("{}", render_json_trace(&output)),
    }
    println!("{}", render_summary(&output, &output.machine));
    match output.outcome {
        RunOutcome::Halted => Ok(()),
        RunOutcome::Stuck { state, scanned } => Err(CliError::new(
            EXIT_STUCK,
            format!(
                "stuck: no instruction for state {} scanning `{scanned}`",
                output.machine.state_name(state)
            ),
        )),
        RunOutcome::BitsExhausted => {
            Err(CliError::new(EXIT_BITS_EXHAUSTED, "bit source exhausted"))
        }
        RunOutcome::StepLimit => Err(CliError::new(
            EXIT_STEP_LIMIT,
            format!("step limit of {max_steps} reached"),
        )),
    }
}

fn qx_error(e: QxError) -> CliError {
    match &e {
        QxError::Protocol { .. } => CliError::new(EXIT_PROTOCOL, e.to_string()),
        QxError::DidNotHalt(RunOutcome::Stuck { .. }) => CliError::new(EXIT_STUCK, e.to_string()),
        QxError::DidNotHalt(RunOutcome::BitsExhausted) => CliError::new(
            EXIT_BITS_EXHAUSTED,
            "query ran past the determined prefix; configure --bits",
        ),
        QxError::DidNotHalt(_) => CliError::new(EXIT_STEP_LIMIT, e.to_string()),
        QxError::Engine(EngineError::BitSource(msg)) => {
            CliError::new(source_failure_code(msg), e.to_string())
        }
        QxError::InvalidPrefixBit { .. } | QxError::BadBinary(_) | QxError::PsiOverflow => {
            CliError::new(EXIT_USAGE, e.to_string())
        }
        _ => CliError::new(EXIT_OTHER, e.to_string()),
    }
}

fn cmd_membership(
    machine_path: &str,
    n: u64,
    bits: Option<&str>,
    save_evolved: Option<PathBuf>,
) -> CliResult {
    let machine = load_machine(machine_path)?;
    // Queries inside the determined prefix need no bits, so a source is
    // optional here; running past the prefix without one exhausts NoBits.
    let mut source = make_source(&machine, bits, false)?;
    let verdict = membership(&machine, n, source.as_mut()).map_err(qx_error)?;
    if let Some(path) = save_evolved {
        let mut notes = vec![format!(
            "evolved by the membership query n = {n} ({} bits consumed{})",
            verdict.bits_used,
            bits.map(|spec| format!(", source {spec}"))
                .unwrap_or_default()
        )];
        notes.extend(prefix_note(&verdict.machine));
        save_machine_with_notes(&path, &verdict.machine, &notes)?;
    }
    println!("{}", verdict.answer);
    println!("bits used: {}", verdict.bits_used);
    Ok(())
}

fn cmd_build_qx(bits: &str, output: &Path) -> CliResult {
    let prefix: Vec<u8> = bits
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(CliError::new(
                EXIT_USAGE,
                format!("prefix must be 0s and 1s, found `{other}`"),
            )),
        })
        .collect::<Result<_, _>>()?;
    let machine = build_qx(&prefix).map_err(qx_error)?;
    let notes = vec![format!("determined prefix: {bits}")];
    save_machine_with_notes(output, &machine, &notes)?;
    println!(
        "wrote {}: {} instructions, {} states, determined prefix `{bits}`",
        output.display(),
        machine.instructions().len(),
        machine.state_count()
    );
    Ok(())
}

fn cmd_collatz_survey(odd_max: u64, max_steps: u64) -> CliResult {
    let rows =
        collatz_survey(odd_max, max_steps).map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?;
    println!(
        "{:>5}   {:>8}   {:>12}   {:>5}",
        "N", "VERDICT", "STEPS", "ONES"
    );
    let mut halted = 0usize;
    for row in &rows {
        match row.verdict {
            OracleVerdict::Halts { steps } => {
                halted += 1;
                println!(
                    "{:>5}   {:>8}   {:>12}   {:>5}",
                    row.n,
                    "halts",
                    steps,
                    row.ones_at_halt.unwrap_or_default()
                );
                if row.error_symbol {
                    return Err(CliError::new(
                        EXIT_PROTOCOL,
                        format!("error symbol written for n = {}", row.n),
                    ));
                }
            }
            OracleVerdict::Unknown { budget } => {
                println!(
                    "{:>5}   {:>8}   {:>12}   {:>5}",
                    row.n, "unknown", budget, "-"
                );
            }
            OracleVerdict::Immortal { .. } => unreachable!("survey never certifies immortality"),
        }
    }
    println!("halted {halted}/{} within {max_steps} steps", rows.len());
    Ok(())
}

fn verdict_json(index: u64, verdict: &OracleVerdict) -> serde_json::Value {
    match verdict {
        OracleVerdict::Halts { steps } => {
            serde_json::json!({"index": index, "kind": "halts", "steps": steps})
        }
        OracleVerdict::Immortal { first, second } => {
            serde_json::json!({
                "index": index, "kind": "immortal", "first": first, "second": second
            })
        }
        OracleVerdict::Unknown { budget } => {
            serde_json::json!({"index": index, "kind": "unknown", "budget": budget})
        }
    }
}

fn cmd_halting_lab(
    m: u64,
    max_states: u32,
    oracle_steps: u64,
    output: Option<PathBuf>,
    report: Option<PathBuf>,
) -> CliResult {
    let bounds = EnumerationBounds {
        max_states,
        ..EnumerationBounds::default()
    };
    let evolution = guided_evolution(m, &bounds, oracle_steps)
        .map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?;
    let prefix: String = evolution
        .oracle_bits
        .iter()
        .map(|b| char::from(b'0' + b))
        .collect();
    if let Some(path) = &output {
        let notes = vec![
            format!("determined prefix: {prefix}"),
            format!(
                "prefix bit i decides blank-tape halting of enumerated machine i \
                 (max_states {max_states}, budget {oracle_steps})"
            ),
        ];
        save_machine_with_notes(path, &evolution.machine, &notes)?;
    }
    if let Some(path) = &report {
        let verdicts: Vec<serde_json::Value> = evolution
            .verdicts
            .iter()
            .enumerate()
            .map(|(i, v)| verdict_json(i as u64, v))
            .collect();
        let body = serde_json::json!({
            "m": m,
            "max_states": max_states,
            "oracle_steps": oracle_steps,
            "prefix": prefix,
            "verdicts": verdicts,
        });
        fs::write(path, format!("{body:#}\n"))
            .map_err(|e| CliError::new(EXIT_OTHER, format!("writing `{}`: {e}", path.display())))?;
    }
    println!("oracle bits 0..={m}: {prefix}");
    for (index, verdict) in evolution.verdicts.iter().enumerate() {
        match verdict {
            OracleVerdict::Halts { steps } => println!("  {index}: halts after {steps} steps"),
            OracleVerdict::Immortal { first, second } => {
                println!("  {index}: immortal (configuration {first} recurs at {second})")
            }
            OracleVerdict::Unknown { budget } => println!("  {index}: unknown after {budget}"),
        }
    }
    println!(
        "evolved acceptor: {} instructions, {} states",
        evolution.machine.instructions().len(),
        evolution.machine.state_count()
    );
    Ok(())
}

fn cmd_phi_check(machine_path: &str, tape: &str, steps: u64, format: ReportFormat) -> CliResult {
    let machine = load_machine(machine_path)?;
    let report = verify_correspondence(&machine, tape, steps).map_err(|e| match e {
        PhiError::NonStandardMachine | PhiError::NoLiveStates => {
            CliError::new(EXIT_USAGE, e.to_string())
        }
        PhiError::Engine(engine) => engine_error(engine),
        other => CliError::new(EXIT_OTHER, other.to_string()),
    })?;
    match format {
        ReportFormat::Text => {
            println!("steps checked: {}", report.steps_checked);
            println!("exact at every step: {}", report.mismatches.is_empty());
            println!("halted: {}", report.halted);
            match report.final_point_exits {
                Some(exits) => println!("final point exits the live squares: {exits}"),
                None => println!("final point exits the live squares: n/a"),
            }
            match report.premature_exit_at {
                Some(at) => println!("premature exit at step {at}"),
                None => println!("no premature square exit"),
            }
            if let Some(at) = report.move_zero_at {
                println!("stopped at a move-0 instruction at step {at}");
            }
        }
        ReportFormat::Json => {
            let body = serde_json::json!({
                "steps_checked": report.steps_checked,
                "mismatches": report.mismatches,
                "halted": report.halted,
                "final_point_exits": report.final_point_exits,
                "premature_exit_at": report.premature_exit_at,
                "move_zero_at": report.move_zero_at,
                "exact": report.exact(),
            });
            println!("{body}");
        }
    }
    if report.exact() {
        Ok(())
    } else {
        Err(CliError::new(EXIT_OTHER, "correspondence check failed"))
    }
}

fn cmd_bits_test(spec: &str, count: usize) -> CliResult {
    if count == 0 {
        return Err(CliError::new(EXIT_USAGE, "--count must be at least 1"));
    }
    let mut source =
        bit_source_from_spec(spec).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    let bits = collect_bits(source.as_mut(), count).map_err(|e| match e {
        BitSourceError::Exhausted => CliError::new(
            EXIT_BITS_EXHAUSTED,
            "bit source exhausted before --count bits",
        ),
        BitSourceError::Unavailable(msg) => CliError::new(source_failure_code(&msg), msg),
    })?;
    let frequency = monobit_frequency(&bits).expect("count >= 1");
    let value = *frequency.numer() as f64 / *frequency.denom() as f64;
    let ones = bits.iter().filter(|b| **b == 1).count();
    let monobit_ok = (value - 0.5).abs() < 0.01;
    println!("bits drawn: {count}");
    println!(
        "monobit: {ones}/{count} = {value:.5} ({})",
        if monobit_ok { "ok" } else { "SUSPECT" }
    );

    let changes = sign_change_count(&bits).expect("count >= 1");
    let (low, high) = sign_change_band(1_000, count, 31337, 5);
    let within = (low..=high).contains(&changes);
    println!(
        "sign changes: {changes}, 99% band from 1000 simulated walks: [{low}, {high}] ({})",
        if within { "within" } else { "OUTSIDE" }
    );
    if monobit_ok && within {
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_OTHER,
            "statistical self-test flagged this source",
        ))
    }
}
