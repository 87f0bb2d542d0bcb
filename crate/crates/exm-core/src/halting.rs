//! A desk-scale blank-tape halting lab.
//!
//! The true halting function is incomputable; this module realizes the
//! *mechanism* around it for a bounded machine family.  [`enumeration`]
//! yields standard machines under a documented, reproducible ranking;
//! [`bounded_halting_oracle`] decides blank-tape halting per index where a
//! step budget or an exact configuration repeat suffices, and answers
//! `Unknown` honestly otherwise; [`guided_evolution`] feeds the decided bits
//! into the self-extending acceptor so that the evolved machine's determined
//! prefix spells out the oracle's verdicts.
//!
//! # Enumeration ranking
//!
//! The family is parameterized by a maximum working-state count and an
//! alphabet (default `#`, `0`, `1`, in that order).  A machine with `k`
//! working states `0..k-1` has one extra halt state `h = k` and any
//! instruction set, over those states, that satisfies the uniqueness
//! condition — including partial and empty sets.  Machines are ordered by
//! `k`, then by their sorted instruction lists compared lexicographically;
//! tuples compare by (state, scanned, next, written, move) with symbols in
//! the declared alphabet order, the halt state after all working states,
//! and moves ordered 0, −1, +1.  Each machine is paired with each working
//! state as an initial state, in state order.  The ranking is part of the
//! crate's compatibility surface: changing it renumbers every index.
//!
//! Moves include 0 deliberately: stay-writers are the machines whose blank
//! -tape runs revisit a configuration exactly, which is what the repeat
//! certificate can prove immortal.  A one-way mover never repeats a
//! configuration and stays `Unknown` under this oracle.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{run, EngineError, Execution, RunOptions, RunOutcome, StepEvent};
use crate::isa::{Instruction, MachineDef, Move, StateRef};
use crate::machines;
use crate::qx::{build_qx, evolve_sequence, QxError};
use crate::random::{NoBits, ReplayBits};
use crate::tape::{Configuration, Symbol, Tape};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum HaltingError {
    /// The oracle only speaks about machines with standard instructions.
    NonStandardMachine,
    InitialStateOutOfRange {
        initial: u32,
        state_count: u32,
    },
    /// Index beyond the finite bounded family.
    OutOfRange {
        index: u64,
    },
    /// Indices the oracle could not decide within its budget.
    Undecided {
        indices: Vec<u64>,
    },
    Engine(EngineError),
    Qx(QxError),
}

impl fmt::Display for HaltingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltingError::NonStandardMachine => {
                f.write_str("the halting oracle requires a machine with only standard instructions")
            }
            HaltingError::InitialStateOutOfRange {
                initial,
                state_count,
            } => {
                write!(
                    f,
                    "initial state {initial} out of range for |Q| = {state_count}"
                )
            }
            HaltingError::OutOfRange { index } => {
                write!(f, "index {index} exceeds the bounded machine family")
            }
            HaltingError::Undecided { indices } => {
                write!(f, "oracle undecided at indices {indices:?}")
            }
            HaltingError::Engine(e) => write!(f, "{e}"),
            HaltingError::Qx(e) => write!(f, "{e}"),
        }
    }
}

impl From<EngineError> for HaltingError {
    fn from(e: EngineError) -> Self {
        HaltingError::Engine(e)
    }
}

impl From<QxError> for HaltingError {
    fn from(e: QxError) -> Self {
        HaltingError::Qx(e)
    }
}

/// Family bounds: working states per machine and the alphabet, in
/// enumeration order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EnumerationBounds {
    pub max_states: u32,
    pub alphabet: Vec<Symbol>,
}

impl Default for EnumerationBounds {
    fn default() -> Self {
        EnumerationBounds {
            max_states: 1,
            alphabet: alloc::vec![Symbol::blank(), Symbol::zero(), Symbol::one()],
        }
    }
}

/// All instructions available to a `k`-working-state machine, in ranking
/// order.
fn ranked_tuples(k: u32, alphabet: &[Symbol]) -> Vec<Instruction> {
    let moves = [Move::Stay, Move::Left, Move::Right];
    let mut tuples = Vec::new();
    for q in 0..k {
        for scan in alphabet {
            for next in 0..=k {
                for write in alphabet {
                    for mv in moves {
                        tuples.push(Instruction::standard(
                            StateRef::Concrete(q),
                            scan.clone(),
                            StateRef::Concrete(next),
                            write.clone(),
                            mv,
                        ));
                    }
                }
            }
        }
    }
    tuples
}

/// Dispatch-pair index of a ranked tuple (tuples are grouped by pair).
fn pair_rank(tuple_index: usize, per_pair: usize) -> usize {
    tuple_index / per_pair
}

/// Lazily enumerates `(machine, initial state)` in ranking order.
pub struct EnumIter {
    bounds: EnumerationBounds,
    k: u32,
    tuples: Vec<Instruction>,
    per_pair: usize,
    /// DFS stack of instruction-index lists; preorder = lexicographic order.
    stack: Vec<Vec<usize>>,
    /// Initial states still to pair with the current machine.
    pending: Option<(MachineDef, u32)>,
}

impl EnumIter {
    pub fn new(bounds: EnumerationBounds) -> Self {
        let mut iter = EnumIter {
            bounds,
            k: 0,
            tuples: Vec::new(),
            per_pair: 0,
            stack: Vec::new(),
            pending: None,
        };
        iter.advance_state_count();
        iter
    }

    fn advance_state_count(&mut self) {
        self.k += 1;
        if self.k > self.bounds.max_states {
            self.stack.clear();
            self.tuples.clear();
            return;
        }
        self.tuples = ranked_tuples(self.k, &self.bounds.alphabet);
        // next states (k+1 of them) × written symbols × 3 moves per pair
        self.per_pair = (self.k as usize + 1) * self.bounds.alphabet.len() * 3;
        self.stack = alloc::vec![Vec::new()];
    }

    fn machine_for(&self, picks: &[usize]) -> MachineDef {
        let mut names: Vec<String> = (0..self.k).map(|q| q.to_string()).collect();
        names.push("h".to_string());
        let extras: Vec<Symbol> = self
            .bounds
            .alphabet
            .iter()
            .filter(|s| !s.is_blank() && s.as_str() != "0" && s.as_str() != "1")
            .cloned()
            .collect();
        let instructions: Vec<Instruction> =
            picks.iter().map(|&i| self.tuples[i].clone()).collect();
        MachineDef::new(
            names,
            extras,
            0,
            alloc::collections::BTreeSet::from([self.k]),
            instructions,
        )
        .expect("enumerated machines are valid by construction")
    }
}

impl Iterator for EnumIter {
    type Item = (MachineDef, u32);

    fn next(&mut self) -> Option<(MachineDef, u32)> {
        if let Some((machine, state)) = self.pending.take() {
            if state < self.k {
                if state + 1 < self.k {
                    self.pending = Some((machine.clone(), state + 1));
                }
                return Some((machine, state));
            }
        }
        loop {
            let Some(picks) = self.stack.pop() else {
                if self.k > self.bounds.max_states {
                    return None;
                }
                self.advance_state_count();
                if self.k > self.bounds.max_states {
                    return None;
                }
                continue;
            };
            // Children extend with any later tuple whose pair is unused;
            // pushed in reverse so the smallest extension pops first.
            let used: Vec<usize> = picks.iter().map(|&i| pair_rank(i, self.per_pair)).collect();
            let from = picks.last().map_or(0, |&last| last + 1);
            for next in (from..self.tuples.len()).rev() {
                if !used.contains(&pair_rank(next, self.per_pair)) {
                    let mut child = picks.clone();
                    child.push(next);
                    self.stack.push(child);
                }
            }
            let machine = self.machine_for(&picks);
            if self.k > 1 {
                self.pending = Some((machine.clone(), 1));
            }
            return Some((machine, 0));
        }
    }
}

/// The `index`-th `(machine, initial state)` pair of the bounded family.
pub fn enumerate(
    index: u64,
    bounds: &EnumerationBounds,
) -> Result<(MachineDef, u32), HaltingError> {
    EnumIter::new(bounds.clone())
        .nth(index as usize)
        .ok_or(HaltingError::OutOfRange { index })
}

/// Oracle verdict for one blank-tape run.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OracleVerdict {
    /// Stopped (halt state or no applicable instruction) after `steps`.
    Halts { steps: u64 },
    /// Exact configuration repeat: the configuration before step
    /// `first + 1` recurred before step `second + 1`.
    Immortal { first: u64, second: u64 },
    /// Neither stop nor repeat within the budget.
    Unknown { budget: u64 },
}

impl OracleVerdict {
    pub fn decided_bit(&self) -> Option<u8> {
        match self {
            OracleVerdict::Halts { .. } => Some(1),
            OracleVerdict::Immortal { .. } => Some(0),
            OracleVerdict::Unknown { .. } => None,
        }
    }
}

/// Decides blank-tape halting for a standard machine within `budget` steps.
pub fn bounded_halting_oracle(
    machine: &MachineDef,
    initial: u32,
    budget: u64,
) -> Result<OracleVerdict, HaltingError> {
    if !machine.is_standard_machine() {
        return Err(HaltingError::NonStandardMachine);
    }
    if initial >= machine.state_count() {
        return Err(HaltingError::InitialStateOutOfRange {
            initial,
            state_count: machine.state_count(),
        });
    }
    let mut source = NoBits;
    let start = Configuration {
        state: initial,
        head: 0,
        tape: Tape::new(),
    };
    let mut exec = Execution::from_config(machine, start.clone(), &mut source);
    let mut seen: BTreeMap<Configuration, u64> = BTreeMap::new();
    seen.insert(start, 0);
    loop {
        if exec.halted() {
            return Ok(OracleVerdict::Halts {
                steps: exec.steps(),
            });
        }
        if exec.steps() >= budget {
            return Ok(OracleVerdict::Unknown { budget });
        }
        match exec.step()? {
            StepEvent::Continued => {
                let config = exec.config().clone();
                if let Some(&first) = seen.get(&config) {
                    return Ok(OracleVerdict::Immortal {
                        first,
                        second: exec.steps(),
                    });
                }
                seen.insert(config, exec.steps());
            }
            StepEvent::Terminal(RunOutcome::Halted | RunOutcome::Stuck { .. }) => {
                return Ok(OracleVerdict::Halts {
                    steps: exec.steps(),
                });
            }
            StepEvent::Terminal(RunOutcome::BitsExhausted) => {
                unreachable!("standard machines draw no bits")
            }
            StepEvent::Terminal(RunOutcome::StepLimit) => {
                return Ok(OracleVerdict::Unknown { budget });
            }
        }
    }
}

/// Re-checks a verdict against a fresh run: a `Halts` claim must stop at
/// exactly its step count, an `Immortal` certificate's two configurations
/// must compare equal field by field.  `Unknown` re-verifies trivially.
pub fn verify_verdict(
    machine: &MachineDef,
    initial: u32,
    verdict: &OracleVerdict,
) -> Result<bool, HaltingError> {
    let config_after = |steps: u64| -> Result<(Configuration, bool), HaltingError> {
        let mut source = NoBits;
        let start = Configuration {
            state: initial,
            head: 0,
            tape: Tape::new(),
        };
        let mut exec = Execution::from_config(machine, start, &mut source);
        let mut stopped = false;
        for _ in 0..steps {
            if exec.halted() {
                stopped = true;
                break;
            }
            match exec.step()? {
                StepEvent::Continued => {}
                StepEvent::Terminal(_) => {
                    stopped = true;
                    break;
                }
            }
        }
        let stopped_now =
            stopped || exec.halted() || matches!(exec.step()?, StepEvent::Terminal(_));
        Ok((exec.config().clone(), stopped_now))
    };
    match verdict {
        OracleVerdict::Halts { steps } => {
            let (_, stopped) = config_after(*steps)?;
            Ok(stopped)
        }
        OracleVerdict::Immortal { first, second } => {
            let (a, _) = config_after(*first)?;
            let (b, _) = config_after(*second)?;
            Ok(a == b && first < second)
        }
        OracleVerdict::Unknown { .. } => Ok(true),
    }
}

/// Result of [`guided_evolution`].
#[derive(Clone, Debug)]
pub struct GuidedEvolution {
    /// The evolved acceptor; its determined prefix equals `oracle_bits`.
    pub machine: MachineDef,
    pub oracle_bits: Vec<u8>,
    pub verdicts: Vec<OracleVerdict>,
}

/// Computes the oracle bits for indices `0..=m` and evolves the acceptor
/// along them, realizing the path from the blank acceptor to the machine
/// whose determined prefix is the halting bits.
pub fn guided_evolution(
    m: u64,
    bounds: &EnumerationBounds,
    budget: u64,
) -> Result<GuidedEvolution, HaltingError> {
    let mut verdicts = Vec::with_capacity(m as usize + 1);
    let mut bits = Vec::with_capacity(m as usize + 1);
    let mut undecided = Vec::new();
    let mut iter = EnumIter::new(bounds.clone());
    for index in 0..=m {
        let (machine, initial) = iter.next().ok_or(HaltingError::OutOfRange { index })?;
        let verdict = bounded_halting_oracle(&machine, initial, budget)?;
        match verdict.decided_bit() {
            Some(bit) => bits.push(bit),
            None => undecided.push(index),
        }
        verdicts.push(verdict);
    }
    if !undecided.is_empty() {
        return Err(HaltingError::Undecided { indices: undecided });
    }
    let acceptor = build_qx(&[])?;
    let mut replay = ReplayBits::new(bits.clone());
    let (machine, _) = evolve_sequence(&acceptor, &[m], &mut replay)?;
    Ok(GuidedEvolution {
        machine,
        oracle_bits: bits,
        verdicts,
    })
}

/// Survey verdict for one odd input.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SurveyRow {
    pub n: u64,
    pub verdict: OracleVerdict,
    /// Count of `1` symbols on the final tape, when the run stopped.
    pub ones_at_halt: Option<u64>,
    /// Whether the error symbol `E` appeared on the final tape.
    pub error_symbol: bool,
}

/// Runs the bundled Collatz machine on `# #1^n#` for each odd `n` up to
/// `odd_max`, with `budget` steps per run.
pub fn collatz_survey(odd_max: u64, budget: u64) -> Result<Vec<SurveyRow>, HaltingError> {
    let machine = machines::collatz();
    let mut rows = Vec::new();
    let mut n = 3;
    while n <= odd_max {
        let mut literal = String::with_capacity(n as usize + 4);
        literal.push_str("# #");
        for _ in 0..n {
            literal.push('1');
        }
        literal.push('#');
        let mut source = NoBits;
        let output = run(
            &machine,
            &literal,
            &mut source,
            RunOptions::default().max_steps(budget),
        )?;
        let stopped = matches!(
            output.outcome,
            RunOutcome::Halted | RunOutcome::Stuck { .. }
        );
        let verdict = if stopped {
            OracleVerdict::Halts {
                steps: output.report.steps,
            }
        } else {
            OracleVerdict::Unknown { budget }
        };
        let ones = stopped.then(|| {
            output
                .config
                .tape
                .iter()
                .filter(|(_, s)| s.as_str() == "1")
                .count() as u64
        });
        let error_symbol = output.config.tape.iter().any(|(_, s)| s.as_str() == "E");
        rows.push(SurveyRow {
            n,
            verdict,
            ones_at_halt: ones,
            error_symbol,
        });
        n += 2;
    }
    Ok(rows)
}

/// Integer Collatz orbit, independent of the machine path: `n`, its
/// iterates, ending at the first 1.
pub fn collatz_orbit(n: u64) -> Vec<u64> {
    assert!(n >= 1);
    let mut orbit = alloc::vec![n];
    let mut v = n;
    while v != 1 {
        v = if v.is_multiple_of(2) {
            v / 2
        } else {
            v.checked_mul(3)
                .and_then(|t| t.checked_add(1))
                .expect("orbit overflow")
        };
        orbit.push(v);
    }
    orbit
}
