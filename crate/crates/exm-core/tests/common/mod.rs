//! Shared plumbing for the golden-trace tests: a parser for reference trace
//! rows and a comparator against engine output.
//!
//! Rows look like
//!
//! ```text
//!   w     ## aaaa###    1     (t, 1, w, a, 0, (|Q|-1, #, y, #, 1))        (8, #, y, #, 1)
//! ```
//!
//! i.e. state, tape window (containing exactly one space, the head marker),
//! head index, the executed instruction, and optionally the installed
//! instruction, followed by free-text comments.  Window widths vary row to
//! row in the reference logs, so tapes are compared after blank
//! normalization; instruction text is compared structurally.

use exm_core::engine::TraceRecord;
use exm_core::parser::parse_trace_instruction;
use exm_core::tape::normalize_window;
use exm_core::MachineDef;

#[derive(Clone, Debug)]
pub struct GoldenRow {
    pub state: String,
    pub tape: String,
    pub head: i64,
    pub executed: String,
    pub new_instruction: Option<String>,
}

/// Extracts one balanced parenthesized group starting at `text[from..]`.
fn balanced_group(text: &str, from: usize) -> Option<(String, usize)> {
    let bytes = text.as_bytes();
    let start = (from..text.len()).find(|&i| bytes[i] == b'(')?;
    let mut depth = 0usize;
    for i in start..text.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth == 0 {
                    return Some((text[start..=i].to_string(), i + 1));
                }
            }
            _ => {}
        }
    }
    None
}

pub fn parse_golden_row(line: &str) -> GoldenRow {
    let mut fields = line.split_whitespace();
    let state = fields.next().expect("state column").to_string();
    let tape_left = fields.next().expect("tape left of head");
    let tape_right = fields.next().expect("tape right of head");
    let head: i64 = fields
        .next()
        .expect("head column")
        .parse()
        .expect("head index");
    let (executed, after) = balanced_group(line, 0).expect("executed instruction column");
    let new_instruction = balanced_group(line, after).map(|(group, _)| group);
    GoldenRow {
        state,
        tape: format!("{tape_left} {tape_right}"),
        head,
        executed,
        new_instruction,
    }
}

pub fn parse_golden(text: &str) -> Vec<GoldenRow> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(parse_golden_row)
        .collect()
}

/// Bits measured by the random instructions of a reference log, in order.
pub fn golden_bits(rows: &[GoldenRow], machine: &MachineDef) -> Vec<u8> {
    rows.iter()
        .filter_map(|row| {
            let (_, bit) = parse_trace_instruction(&row.executed, machine)
                .unwrap_or_else(|e| panic!("golden row `{}`: {e}", row.executed));
            bit
        })
        .collect()
}

/// Asserts that an executed trace matches the reference rows.
///
/// Compared per row: post state (by name), head index, normalized tape
/// window, the executed instruction (structurally, including the measured
/// bit), and the installed instruction wherever the reference records one.
/// The reference logs leave that column blank on steps that materialize a
/// self-instantiating rule into the program for the first time; for such
/// rows the engine's installed instruction must equal the executed one.
pub fn assert_trace_matches(rows: &[GoldenRow], trace: &[TraceRecord], machine: &MachineDef) {
    assert_eq!(
        rows.len(),
        trace.len(),
        "row count: reference {} vs engine {}",
        rows.len(),
        trace.len()
    );
    for (i, (golden, mine)) in rows.iter().zip(trace).enumerate() {
        let row = i + 1;
        assert_eq!(golden.state, mine.post_state_name, "state at row {row}");
        assert_eq!(golden.head, mine.head, "head at row {row}");
        assert_eq!(
            normalize_window(&golden.tape),
            normalize_window(&mine.tape_window),
            "tape at row {row}"
        );
        let (expected_inst, expected_bit) = parse_trace_instruction(&golden.executed, machine)
            .unwrap_or_else(|e| panic!("row {row} executed `{}`: {e}", golden.executed));
        assert_eq!(expected_inst, mine.executed, "instruction at row {row}");
        assert_eq!(expected_bit, mine.random_bit, "random bit at row {row}");
        match &golden.new_instruction {
            Some(text) => {
                let (expected, _) = parse_trace_instruction(text, machine)
                    .unwrap_or_else(|e| panic!("row {row} new instruction `{text}`: {e}"));
                assert_eq!(
                    Some(&expected),
                    mine.new_instruction.as_ref(),
                    "installed instruction at row {row}"
                );
            }
            None => {
                if let Some(installed) = &mine.new_instruction {
                    assert_eq!(
                        installed, &mine.executed,
                        "row {row} installs an instruction the reference does not \
                         record, and it is not the executed one"
                    );
                }
            }
        }
    }
}
