//! Execution of machines: dispatch, the three instruction semantics, state
//! growth, program self-modification, trace recording, and stopping rules.
//!
//! Each step works against a snapshot of the state count taken at dispatch:
//! every symbolic reference in the fired instruction — including those in a
//! nested update — resolves against that snapshot, even when the step itself
//! adds a state.  Two rules grow the state set:
//!
//! * a transition whose resolved target equals the snapshot count adds that
//!   state (`|Q|` names the next fresh state);
//! * installing a nested update that names the current count as a state also
//!   adds it, so an update may reference one state past the count grown by
//!   its own standard part.
//!
//! A fired non-meta instruction whose source form carried a symbolic
//! reference (a *simple meta instruction*) persists: its resolved concrete
//! form is installed into the program through the same add-or-replace rule
//! as a nested update.
//!
//! Halting is recognized on *entering* a halt state, after the incoming
//! instruction completes its write and move.  A missing (state, symbol) pair
//! stops the run as [`RunOutcome::Stuck`]; the bundled machines never hit it,
//! so it is kept distinct from an ordinary halt.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::isa::{
    validate_uniqueness, AmbiguousLookup, InstantiationError, Instruction, MachineDef,
    MachineError, StateRef,
};
use crate::random::{BitSource, BitSourceError};
use crate::tape::{render_window, tape_from_literal_checked, Configuration, LiteralError, Symbol};

/// Terminal condition of a run.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RunOutcome {
    /// Entered a halt state.
    Halted,
    /// No instruction matches the current (state, scanned symbol).
    Stuck { state: u32, scanned: Symbol },
    /// The bit source ran out while a random instruction was executing.
    BitsExhausted,
    /// The step budget was exhausted before any of the above.
    StepLimit,
}

/// Result of one step: the run continues or has terminated.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepEvent {
    Continued,
    Terminal(RunOutcome),
}

/// Hard execution errors, as opposed to terminal outcomes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EngineError {
    Literal(LiteralError),
    Instantiation(InstantiationError),
    Ambiguous(AmbiguousLookup),
    /// A transition targeted a state beyond `|Q|` (only `|Q|` itself may be
    /// entered fresh).
    UnknownNextState {
        id: u32,
        state_count: u32,
    },
    /// The bit source failed for a reason other than exhaustion.
    BitSource(String),
    /// A program update was rejected.
    Update(MachineError),
    FiniteConditions(FiniteConditionViolation),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Literal(e) => write!(f, "{e}"),
            EngineError::Instantiation(e) => write!(f, "{e}"),
            EngineError::Ambiguous(e) => write!(f, "{e}"),
            EngineError::UnknownNextState { id, state_count } => {
                write!(f, "transition into state {id} with |Q| = {state_count}")
            }
            EngineError::BitSource(msg) => write!(f, "bit source failed: {msg}"),
            EngineError::Update(e) => write!(f, "program update rejected: {e}"),
            EngineError::FiniteConditions(v) => write!(f, "{v}"),
        }
    }
}

impl From<LiteralError> for EngineError {
    fn from(e: LiteralError) -> Self {
        EngineError::Literal(e)
    }
}

impl From<InstantiationError> for EngineError {
    fn from(e: InstantiationError) -> Self {
        EngineError::Instantiation(e)
    }
}

/// First violated clause of the finite-initial-conditions check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FiniteConditionViolation {
    /// The machine declares no states or an out-of-range start state.
    States { start: u32, state_count: u32 },
    /// The alphabet lost one of `0`, `1`, `#`.
    Alphabet,
    /// The instruction list breaks the uniqueness condition.
    Instructions,
    /// A halt state lies outside the declared states.
    HaltStates { halt: u32, state_count: u32 },
}

impl fmt::Display for FiniteConditionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiniteConditionViolation::States { start, state_count } => {
                write!(f, "start state {start} invalid for |Q| = {state_count}")
            }
            FiniteConditionViolation::Alphabet => f.write_str("alphabet must contain 0, 1, and #"),
            FiniteConditionViolation::Instructions => {
                f.write_str("instruction list violates the uniqueness condition")
            }
            FiniteConditionViolation::HaltStates { halt, state_count } => {
                write!(f, "halt state {halt} invalid for |Q| = {state_count}")
            }
        }
    }
}

/// One executed step, mirroring the reference trace row schema: the state
/// and tape *after* the step, the instruction that fired, and the program
/// update it installed, if any.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceRecord {
    pub post_state: u32,
    pub post_state_name: String,
    pub tape_window: String,
    pub head: i64,
    /// The fired instruction: meta instructions in their stored (possibly
    /// symbolic) form, everything else resolved to concrete states.
    pub executed: Instruction,
    /// Bit measured by a random instruction, shown as `b_qr` when rendered.
    pub random_bit: Option<u8>,
    /// Instruction installed into the program by this step.
    pub new_instruction: Option<Instruction>,
}

/// Resource accounting for a finished run.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct RunReport {
    pub steps: u64,
    pub bits_consumed: u64,
    pub state_count: u32,
    pub instruction_count: usize,
    pub tape_support: usize,
}

/// Everything a finished run leaves behind.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RunOutput {
    pub outcome: RunOutcome,
    /// The machine as evolved by the run (identical to the input machine
    /// when no meta or simple meta instruction fired).
    pub machine: MachineDef,
    pub config: Configuration,
    pub trace: Vec<TraceRecord>,
    /// Configuration before step 1, after step 1, … (when recorded).
    pub configs: Vec<Configuration>,
    pub report: RunReport,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub max_steps: u64,
    pub trace: bool,
    pub record_configs: bool,
    /// Window padding for rendered trace rows.
    pub window_pad: u32,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_steps: 1_000_000,
            trace: false,
            record_configs: false,
            window_pad: 2,
        }
    }
}

impl RunOptions {
    pub fn with_trace(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }
}

/// A stepwise execution; owns its evolving machine copy.
pub struct Execution<'s> {
    machine: MachineDef,
    config: Configuration,
    source: &'s mut dyn BitSource,
    steps: u64,
    bits_drawn: u64,
}

impl<'s> Execution<'s> {
    /// Starts an execution on the given tape literal from the machine's
    /// start state.
    pub fn new(
        machine: &MachineDef,
        tape_literal: &str,
        source: &'s mut dyn BitSource,
    ) -> Result<Self, EngineError> {
        let (tape, head) = tape_from_literal_checked(tape_literal, machine.alphabet())?;
        let config = Configuration {
            state: machine.start(),
            head,
            tape,
        };
        Ok(Execution::from_config(machine, config, source))
    }

    /// Starts an execution from an explicit configuration (used by the
    /// halting lab to vary the initial state).
    pub fn from_config(
        machine: &MachineDef,
        config: Configuration,
        source: &'s mut dyn BitSource,
    ) -> Self {
        Execution {
            machine: machine.clone(),
            config,
            source,
            steps: 0,
            bits_drawn: 0,
        }
    }

    pub fn machine(&self) -> &MachineDef {
        &self.machine
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn bits_drawn(&self) -> u64 {
        self.bits_drawn
    }

    pub fn halted(&self) -> bool {
        self.machine.is_halt(self.config.state)
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            steps: self.steps,
            bits_consumed: self.bits_drawn,
            state_count: self.machine.state_count(),
            instruction_count: self.machine.instructions().len(),
            tape_support: self.config.tape.support_len(),
        }
    }

    pub fn into_parts(self) -> (MachineDef, Configuration) {
        (self.machine, self.config)
    }

    /// Transition to `next`, growing the state set when `next` is exactly
    /// the snapshot count.
    fn enter_state(&mut self, next: u32, snapshot: u32) -> Result<(), EngineError> {
        if next == snapshot && snapshot == self.machine.state_count() {
            self.machine.grow_one_state();
        } else if next >= self.machine.state_count() {
            return Err(EngineError::UnknownNextState {
                id: next,
                state_count: self.machine.state_count(),
            });
        }
        self.config.state = next;
        Ok(())
    }

    /// Installs `update` into the program; states the update names are
    /// created when they equal the current count.
    fn install_update(&mut self, update: Instruction) -> Result<Instruction, EngineError> {
        for state_ref in [update.q(), update.next()] {
            if let StateRef::Concrete(id) = state_ref {
                if id == self.machine.state_count() {
                    self.machine.grow_one_state();
                }
            }
        }
        self.machine
            .apply_update(update.clone())
            .map_err(EngineError::Update)?;
        // Uniqueness can only change when the program does.
        debug_assert!(
            validate_uniqueness(self.machine.instructions()).is_ok(),
            "program update broke the uniqueness condition"
        );
        Ok(update)
    }

    /// Executes one step.  The caller is expected to have checked
    /// [`Execution::halted`]; stepping a halted execution reports it as
    /// terminal without touching the configuration.
    pub fn step(&mut self) -> Result<StepEvent, EngineError> {
        self.step_traced(None).map(|(event, _)| event)
    }

    /// As [`Execution::step`], optionally producing a trace record rendered
    /// with the given window padding.
    pub fn step_traced(
        &mut self,
        trace_pad: Option<u32>,
    ) -> Result<(StepEvent, Option<TraceRecord>), EngineError> {
        if self.halted() {
            return Ok((StepEvent::Terminal(RunOutcome::Halted), None));
        }
        let snapshot = self.machine.state_count();
        let scanned = self.config.scanned();
        let Some(found) = self
            .machine
            .dispatch(self.config.state, &scanned)
            .map_err(EngineError::Ambiguous)?
        else {
            let outcome = RunOutcome::Stuck {
                state: self.config.state,
                scanned,
            };
            return Ok((StepEvent::Terminal(outcome), None));
        };
        let source_form = found.clone();
        let simple_meta = !source_form.is_meta() && source_form.has_symbolic_ref();
        let resolved = source_form.instantiate(snapshot)?;

        let mut random_bit = None;
        let mut new_instruction = None;
        let executed;

        match resolved.clone() {
            Instruction::Standard {
                next, write, mv, ..
            } => {
                let next = next.instantiate(snapshot).expect("resolved");
                self.config.tape.write(self.config.head, write);
                self.enter_state(next, snapshot)?;
                self.config.head += mv.delta();
                if simple_meta {
                    new_instruction = Some(self.install_update(resolved.clone())?);
                }
                executed = resolved;
            }
            Instruction::Random { next, mv, .. } => {
                let next = next.instantiate(snapshot).expect("resolved");
                let bit = match self.source.next_bit() {
                    Ok(bit) => bit,
                    Err(BitSourceError::Exhausted) => {
                        return Ok((StepEvent::Terminal(RunOutcome::BitsExhausted), None));
                    }
                    Err(BitSourceError::Unavailable(msg)) => {
                        return Err(EngineError::BitSource(msg));
                    }
                };
                self.bits_drawn += 1;
                random_bit = Some(bit);
                self.config
                    .tape
                    .write(self.config.head, Symbol::from_bit(bit));
                self.enter_state(next, snapshot)?;
                self.config.head += mv.delta();
                if simple_meta {
                    new_instruction = Some(self.install_update(resolved.clone())?);
                }
                executed = resolved;
            }
            Instruction::Meta {
                next,
                write,
                mv,
                update,
                ..
            } => {
                let next = next.instantiate(snapshot).expect("resolved");
                self.config.tape.write(self.config.head, write);
                self.enter_state(next, snapshot)?;
                self.config.head += mv.delta();
                new_instruction = Some(self.install_update(*update)?);
                // Meta instructions are reported in their stored form.
                executed = source_form;
            }
        }

        self.steps += 1;

        let record = trace_pad.map(|pad| TraceRecord {
            post_state: self.config.state,
            post_state_name: self.machine.state_name(self.config.state),
            tape_window: render_window(&self.config.tape, self.config.head, pad),
            head: self.config.head,
            executed,
            random_bit,
            new_instruction,
        });
        Ok((StepEvent::Continued, record))
    }
}


/// Runs a machine on a tape literal until it halts, sticks, exhausts its
/// bits, or spends `options.max_steps` steps.
pub fn run(
    machine: &MachineDef,
    tape_literal: &str,
    source: &mut dyn BitSource,
    options: RunOptions,
) -> Result<RunOutput, EngineError> {
    let (tape, _) = tape_from_literal_checked(tape_literal, machine.alphabet())?;
    check_finite_conditions(machine, &tape).map_err(EngineError::FiniteConditions)?;

    let mut exec = Execution::new(machine, tape_literal, source)?;
    let mut trace = Vec::new();
    let mut configs = Vec::new();
    if options.record_configs {
        configs.push(exec.config().clone());
    }
    let outcome = loop {
        if exec.halted() {
            break RunOutcome::Halted;
        }
        if exec.steps() >= options.max_steps {
            break RunOutcome::StepLimit;
        }
        let pad = options.trace.then_some(options.window_pad);
        let (event, record) = exec.step_traced(pad)?;
        if let Some(record) = record {
            trace.push(record);
        }
        match event {
            StepEvent::Continued => {
                if options.record_configs {
                    configs.push(exec.config().clone());
                }
            }
            StepEvent::Terminal(outcome) => break outcome,
        }
    };
    let report = exec.report();
    let (machine, config) = exec.into_parts();
    Ok(RunOutput {
        outcome,
        machine,
        config,
        trace,
        configs,
        report,
    })
}

/// Verifies the four finite-initial-condition clauses.  The representation
/// makes the counting clauses structural, so this re-asserts the machine
/// invariants and start validity; it exists so that foreign callers get a
/// named violation instead of a latent panic.
pub fn check_finite_conditions(
    machine: &MachineDef,
    _tape: &crate::tape::Tape,
) -> Result<(), FiniteConditionViolation> {
    let state_count = machine.state_count();
    if state_count == 0 || machine.start() >= state_count {
        return Err(FiniteConditionViolation::States {
            start: machine.start(),
            state_count,
        });
    }
    let required = [Symbol::zero(), Symbol::one(), Symbol::blank()];
    if !required.iter().all(|s| machine.contains_symbol(s)) {
        return Err(FiniteConditionViolation::Alphabet);
    }
    if validate_uniqueness(machine.instructions()).is_err() {
        return Err(FiniteConditionViolation::Instructions);
    }
    if let Some(&halt) = machine.halt_states().iter().find(|h| **h >= state_count) {
        return Err(FiniteConditionViolation::HaltStates { halt, state_count });
    }
    Ok(())
}

/// Earliest exact repeat in a configuration sequence.
///
/// Returns `(i, j)` with `configs[i] == configs[j]`, minimizing `j` then
/// `i`.  For a machine with only standard instructions a repeat certifies
/// that the run never halts.  Comparison is exact on (state, head, tape) —
/// a pure translation of the same tape pattern does not count.
pub fn detect_repeat_configuration(configs: &[Configuration]) -> Option<(usize, usize)> {
    let mut seen: BTreeMap<&Configuration, usize> = BTreeMap::new();
    for (j, config) in configs.iter().enumerate() {
        if let Some(&i) = seen.get(config) {
            return Some((i, j));
        }
        seen.insert(config, j);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::Move;
    use crate::machines;
    use crate::random::{NoBits, ReplayBits, SeededBits};
    use crate::tape::normalize_window;
    use alloc::collections::BTreeSet;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn collatz_first_rows_match_reference() {
        let machine = machines::collatz();
        let mut source = NoBits;
        let output = run(
            &machine,
            "# #11111#",
            &mut source,
            RunOptions::default().with_trace(),
        )
        .unwrap();
        assert_eq!(output.outcome, RunOutcome::Halted);
        // Rows after the first ten steps of the reference run.
        let expect = [
            ("a", " 11111", 1, "(q, #, a, #, 1)"),
            ("b", "1 1111", 2, "(a, 1, b, 1, 1)"),
            ("c", "11 111", 3, "(b, 1, c, 1, 1)"),
            ("d", "111 11", 4, "(c, 1, d, 1, 1)"),
            ("c", "1111 1", 5, "(d, 1, c, 1, 1)"),
            ("d", "11111 #", 6, "(c, 1, d, 1, 1)"),
            ("k", "1111 1", 5, "(d, #, k, #, -1)"),
            ("l", "11110 #", 6, "(k, 1, l, 0, 1)"),
            ("m", "111100 #", 7, "(l, #, m, 0, 1)"),
            ("k", "11110 00", 6, "(m, #, k, 0, -1)"),
        ];
        for (row, (state, window, head, inst)) in output.trace.iter().zip(expect) {
            assert_eq!(row.post_state_name, state);
            assert_eq!(normalize_window(&row.tape_window), window);
            assert_eq!(row.head, head);
            assert_eq!(output.machine.render_instruction(&row.executed), inst);
            assert_eq!(row.new_instruction, None);
        }
        // Standard machines never evolve.
        assert!(output.machine.structurally_equal(&machine));
        assert_eq!(output.report.bits_consumed, 0);
    }

    #[test]
    fn random_walk_executes_replayed_bits() {
        let machine = machines::random_walk();
        // First two random draws of the reference first run: 0 then 1.
        let mut source = ReplayBits::new(vec![0, 1]);
        let output = run(
            &machine,
            "# ##",
            &mut source,
            RunOptions::default().with_trace().max_steps(3),
        )
        .unwrap();
        let rows = &output.trace;
        assert_eq!(rows[0].random_bit, Some(0));
        assert_eq!(
            output
                .machine
                .render_instruction_with_bit(&rows[0].executed, rows[0].random_bit),
            "(0, #, 0, 0_qr, 0)"
        );
        assert_eq!(normalize_window(&rows[0].tape_window), " 0");
        assert_eq!(rows[0].head, 0);
        assert_eq!(rows[1].head, -1);
        assert_eq!(rows[2].random_bit, Some(1));
        assert_eq!(normalize_window(&rows[2].tape_window), " 10");
    }

    #[test]
    fn random_walk_exhausts_bits() {
        let machine = machines::random_walk();
        let mut source = ReplayBits::new(vec![]);
        let output = run(&machine, "# ##", &mut source, RunOptions::default()).unwrap();
        assert_eq!(output.outcome, RunOutcome::BitsExhausted);
        assert_eq!(output.report.steps, 0);
    }

    #[test]
    fn replaying_recorded_bits_determinizes_a_run() {
        let machine = machines::random_walk();
        let mut seeded = SeededBits::new(1234);
        let options = RunOptions::default().with_trace().max_steps(500);
        let recorded = run(&machine, "# ##", &mut seeded, options).unwrap();
        let bits: Vec<u8> = recorded.trace.iter().filter_map(|r| r.random_bit).collect();
        assert!(!bits.is_empty());
        let mut replay = ReplayBits::new(bits);
        let replayed = run(&machine, "# ##", &mut replay, options).unwrap();
        assert_eq!(recorded.trace, replayed.trace);
        assert_eq!(recorded.config, replayed.config);
    }

    #[test]
    fn random_walk_hits_step_limit_with_seeded_bits() {
        let machine = machines::random_walk();
        let mut source = SeededBits::new(1);
        let output = run(
            &machine,
            "# ##",
            &mut source,
            RunOptions::default().max_steps(10_000),
        )
        .unwrap();
        assert_eq!(output.outcome, RunOutcome::StepLimit);
        assert_eq!(output.report.steps, 10_000);
        assert_eq!(output.report.bits_consumed, source.bits_consumed());
    }

    #[test]
    fn example_machine_mints_states_and_instructions() {
        let machine = machines::example22();
        let mut source = NoBits;
        let output = run(
            &machine,
            "# ##",
            &mut source,
            RunOptions::default().with_trace().max_steps(4),
        )
        .unwrap();
        assert_eq!(output.outcome, RunOutcome::StepLimit);
        assert_eq!(output.machine.state_count(), 3);
        let added: Vec<String> = output
            .trace
            .iter()
            .map(|row| {
                output
                    .machine
                    .render_instruction(row.new_instruction.as_ref().unwrap())
            })
            .collect();
        assert_eq!(
            added,
            vec![
                "(0, #, 0, 1, 0)".to_string(),
                "(0, 1, 1, 0, 1)".to_string(),
                "(1, #, 1, 1, 0)".to_string(),
                "(1, 1, 2, 0, 1)".to_string(),
            ]
        );
        // The executed column shows the instantiated forms.
        let executed: Vec<String> = output
            .trace
            .iter()
            .map(|row| output.machine.render_instruction(&row.executed))
            .collect();
        assert_eq!(added, executed);
        assert_eq!(output.machine.instructions().len(), 3 + 4);
    }

    #[test]
    fn random_shaped_simple_meta_persists_its_instantiation() {
        // A four-field instruction with self-referential states: draws a
        // bit, enters the fresh state |Q|, and freezes its resolved form.
        let machine = MachineDef::new(
            vec!["0".into()],
            vec![],
            0,
            BTreeSet::new(),
            vec![Instruction::random(
                StateRef::QRel(1),
                Symbol::blank(),
                StateRef::QRel(0),
                Move::Right,
            )],
        )
        .unwrap();
        let mut source = ReplayBits::new(vec![1]);
        let output = run(
            &machine,
            "# ##",
            &mut source,
            RunOptions::default().with_trace().max_steps(1),
        )
        .unwrap();
        assert_eq!(output.machine.state_count(), 2);
        assert_eq!(output.config.state, 1);
        assert_eq!(output.config.tape.read(0), Symbol::one());
        let row = &output.trace[0];
        assert_eq!(row.random_bit, Some(1));
        let expected = Instruction::random(
            StateRef::Concrete(0),
            Symbol::blank(),
            StateRef::Concrete(1),
            Move::Right,
        );
        assert_eq!(row.executed, expected);
        assert_eq!(row.new_instruction.as_ref(), Some(&expected));
        assert_eq!(output.machine.instructions().len(), 2);
    }

    #[test]
    fn stuck_is_a_distinct_outcome() {
        let machine = MachineDef::new(
            vec!["0".into(), "h".into()],
            vec![],
            0,
            BTreeSet::from([1]),
            vec![Instruction::standard(
                StateRef::Concrete(0),
                Symbol::blank(),
                StateRef::Concrete(0),
                Symbol::one(),
                Move::Right,
            )],
        )
        .unwrap();
        let mut source = NoBits;
        let output = run(&machine, "# #1#", &mut source, RunOptions::default()).unwrap();
        assert_eq!(
            output.outcome,
            RunOutcome::Stuck {
                state: 0,
                scanned: Symbol::one()
            }
        );
    }

    #[test]
    fn halt_recognized_on_entry_after_write_and_move() {
        let machine = MachineDef::new(
            vec!["0".into(), "h".into()],
            vec![],
            0,
            BTreeSet::from([1]),
            vec![Instruction::standard(
                StateRef::Concrete(0),
                Symbol::blank(),
                StateRef::Concrete(1),
                Symbol::one(),
                Move::Left,
            )],
        )
        .unwrap();
        let mut source = NoBits;
        let output = run(&machine, "# ##", &mut source, RunOptions::default()).unwrap();
        assert_eq!(output.outcome, RunOutcome::Halted);
        // The incoming instruction completed its write and move first.
        assert_eq!(output.report.steps, 1);
        assert_eq!(output.config.state, 1);
        assert_eq!(output.config.head, -1);
        assert_eq!(output.config.tape.read(0), Symbol::one());
    }

    #[test]
    fn start_in_halt_state_runs_zero_steps() {
        let machine =
            MachineDef::new(vec!["h".into()], vec![], 0, BTreeSet::from([0]), vec![]).unwrap();
        let mut source = NoBits;
        let output = run(&machine, "# ##", &mut source, RunOptions::default()).unwrap();
        assert_eq!(output.outcome, RunOutcome::Halted);
        assert_eq!(output.report.steps, 0);
    }

    #[test]
    fn transition_into_missing_state_is_an_error() {
        let machine = MachineDef::new(
            vec!["0".into()],
            vec![],
            0,
            BTreeSet::new(),
            vec![Instruction::standard(
                StateRef::Concrete(0),
                Symbol::blank(),
                StateRef::Concrete(7),
                Symbol::one(),
                Move::Right,
            )],
        )
        .unwrap();
        let mut source = NoBits;
        let err = run(&machine, "# ##", &mut source, RunOptions::default()).unwrap_err();
        assert_eq!(
            err,
            EngineError::UnknownNextState {
                id: 7,
                state_count: 1
            }
        );
    }

    #[test]
    fn finite_conditions_hold_for_bundled_machines() {
        let (tape, _) = crate::tape::tape_from_literal("# ##").unwrap();
        for m in [
            machines::collatz(),
            machines::random_walk(),
            machines::qx(),
            machines::example22(),
        ] {
            assert_eq!(check_finite_conditions(&m, &tape), Ok(()));
        }
    }

    #[test]
    fn finite_conditions_persist_through_evolution() {
        let machine = machines::qx();
        let mut source = ReplayBits::new(vec![1, 1, 0, 1, 0]);
        let output = run(&machine, "# #aaaa##", &mut source, RunOptions::default()).unwrap();
        assert_eq!(output.outcome, RunOutcome::Halted);
        assert_eq!(
            check_finite_conditions(&output.machine, &output.config.tape),
            Ok(())
        );
    }

    #[test]
    fn repeat_detection_fixed_point_and_mover() {
        let fixed = MachineDef::new(
            vec!["0".into()],
            vec![],
            0,
            BTreeSet::new(),
            vec![Instruction::standard(
                StateRef::Concrete(0),
                Symbol::blank(),
                StateRef::Concrete(0),
                Symbol::blank(),
                Move::Stay,
            )],
        )
        .unwrap();
        let mut source = NoBits;
        let output = run(
            &fixed,
            "# ##",
            &mut source,
            RunOptions {
                record_configs: true,
                max_steps: 4,
                ..RunOptions::default()
            },
        )
        .unwrap();
        assert_eq!(detect_repeat_configuration(&output.configs), Some((0, 1)));

        let mover = MachineDef::new(
            vec!["0".into()],
            vec![],
            0,
            BTreeSet::new(),
            vec![Instruction::standard(
                StateRef::Concrete(0),
                Symbol::blank(),
                StateRef::Concrete(0),
                Symbol::blank(),
                Move::Right,
            )],
        )
        .unwrap();
        let mut source = NoBits;
        let output = run(
            &mover,
            "# ##",
            &mut source,
            RunOptions {
                record_configs: true,
                max_steps: 100,
                ..RunOptions::default()
            },
        )
        .unwrap();
        assert_eq!(detect_repeat_configuration(&output.configs), None);
    }
}
