//! Trace and report rendering: aligned text columns in the classic
//! STATE / TAPE / TAPE HEAD / INSTRUCTION EXECUTED / NEW INSTRUCTION
//! layout, and JSON lines mirroring the same fields.

use exm_core::engine::{RunOutcome, RunOutput, TraceRecord};
use exm_core::MachineDef;

/// One rendered trace row, ready for either output format.
struct Row {
    state: String,
    tape: String,
    head: String,
    executed: String,
    new_instruction: Option<String>,
}

fn rows_of(output: &RunOutput) -> Vec<Row> {
    let machine = &output.machine;
    output
        .trace
        .iter()
        .map(|record: &TraceRecord| Row {
            state: record.post_state_name.clone(),
            tape: record.tape_window.clone(),
            head: record.head.to_string(),
            executed: machine.render_instruction_with_bit(&record.executed, record.random_bit),
            new_instruction: record
                .new_instruction
                .as_ref()
                .map(|inst| machine.render_instruction(inst)),
        })
        .collect()
}

/// Text trace with dynamically sized columns.
pub fn render_text_trace(output: &RunOutput) -> String {
    let rows = rows_of(output);
    let any_new = rows.iter().any(|r| r.new_instruction.is_some());
    let width = |header: &str, values: &mut dyn Iterator<Item = usize>| {
        values
            .chain(std::iter::once(header.len()))
            .max()
            .unwrap_or(0)
    };
    let w_state = width("STATE", &mut rows.iter().map(|r| r.state.len()));
    let w_tape = width("TAPE", &mut rows.iter().map(|r| r.tape.len()));
    let w_head = width("TAPE HEAD", &mut rows.iter().map(|r| r.head.len()));
    let w_exec = width(
        "INSTRUCTION EXECUTED",
        &mut rows.iter().map(|r| r.executed.len()),
    );

    let mut out = String::new();
    out.push_str(&format!(
        "{:<w_state$}   {:<w_tape$}   {:>w_head$}   {:<w_exec$}",
        "STATE", "TAPE", "TAPE HEAD", "INSTRUCTION EXECUTED"
    ));
    if any_new {
        out.push_str("   NEW INSTRUCTION");
    }
    out.push('\n');
    for row in &rows {
        out.push_str(&format!(
            "{:<w_state$}   {:<w_tape$}   {:>w_head$}   {:<w_exec$}",
            row.state, row.tape, row.head, row.executed
        ));
        if let Some(new_instruction) = &row.new_instruction {
            out.push_str("   ");
            out.push_str(new_instruction);
        }
        // Column padding is significant only between fields.
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

/// JSON-lines trace mirroring the text columns field for field.
pub fn render_json_trace(output: &RunOutput) -> String {
    let machine = &output.machine;
    let mut out = String::new();
    for record in &output.trace {
        let line = serde_json::json!({
            "state": record.post_state_name,
            "tape": record.tape_window,
            "head": record.head,
            "executed": machine.render_instruction_with_bit(&record.executed, record.random_bit),
            "random_bit": record.random_bit,
            "new_instruction": record
                .new_instruction
                .as_ref()
                .map(|inst| machine.render_instruction(inst)),
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

pub fn outcome_name(outcome: &RunOutcome) -> &'static str {
    match outcome {
        RunOutcome::Halted => "halted",
        RunOutcome::Stuck { .. } => "stuck",
        RunOutcome::BitsExhausted => "bits-exhausted",
        RunOutcome::StepLimit => "step-limit",
    }
}

/// One-line run summary.
pub fn render_summary(output: &RunOutput, machine: &MachineDef) -> String {
    let report = &output.report;
    format!(
        "{outcome}: steps {steps}, |Q| {states}, instructions {instructions}, \
         bits {bits}, tape support {support}, final state {state}, head {head}",
        outcome = outcome_name(&output.outcome),
        steps = report.steps,
        states = report.state_count,
        instructions = report.instruction_count,
        bits = report.bits_consumed,
        support = report.tape_support,
        state = machine.state_name(output.config.state),
        head = output.config.head,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use exm_core::engine::{run, RunOptions};
    use exm_core::machines;
    use exm_core::random::ReplayBits;

    #[test]
    fn text_and_json_traces_mirror_each_other() {
        let machine = machines::qx();
        let mut source = ReplayBits::new(vec![1, 1, 0, 1, 0]);
        let output = run(
            &machine,
            "# #aaaa##",
            &mut source,
            RunOptions::default().with_trace(),
        )
        .unwrap();
        let text = render_text_trace(&output);
        let json = render_json_trace(&output);
        assert_eq!(text.lines().count(), output.trace.len() + 1);
        assert_eq!(json.lines().count(), output.trace.len());
        for (text_line, json_line) in text.lines().skip(1).zip(json.lines()) {
            let value: serde_json::Value = serde_json::from_str(json_line).unwrap();
            assert!(text_line.starts_with(value["state"].as_str().unwrap()));
            assert!(text_line.contains(value["executed"].as_str().unwrap()));
            if let Some(new_instruction) = value["new_instruction"].as_str() {
                assert!(text_line.ends_with(new_instruction));
            }
        }
        // The random rows carry the measured bit in both formats.
        assert!(text.contains("(x, a, t, 1_qr, 0)"));
        assert!(json.contains("\"random_bit\":1"));
    }
}
