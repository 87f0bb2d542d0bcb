//! The Q(x) machine family: builder, membership protocol, evolution, prefix
//! extraction, and the unary↔binary translation ψ.
//!
//! Q(x) accepts or rejects unary strings `a^n`.  Its program carries a
//! *determined prefix* — one frozen yes/no instruction per already-decided
//! string length — plus a self-extending core that decides longer strings by
//! drawing one random bit per undecided square and freezing the answer into
//! a new instruction.  Running length `n` past the prefix therefore grows
//! the machine; re-running any decided length is deterministic, consumes no
//! bits, and leaves the machine unchanged.
//!
//! [`build_qx`] constructs the machine with a given determined prefix
//! directly; evolving `Q(x)` by replaying the same bits produces a
//! structurally identical machine, which the tests exercise in both
//! directions.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{run, EngineError, RunOptions, RunOutcome};
use crate::isa::{Instruction, MachineDef, Move, StateRef};
use crate::random::BitSource;
use crate::tape::Symbol;

/// Number of core states (`0`, `h`, `n`, `y`, `t`, `v`, `w`, `x`, `8`)
/// before the per-bit ladder begins.
const CORE_STATES: u32 = 9;

/// State ids of the fixed roles.
const STATE_HALT: u32 = 1;
const STATE_NO: u32 = 2;
const STATE_YES: u32 = 3;
const LADDER_BASE: u32 = 8;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum QxError {
    /// A determined-prefix element was not 0 or 1.
    InvalidPrefixBit {
        index: usize,
        value: u8,
    },
    /// The machine halted scanning something other than `Y` or `N`.
    Protocol {
        scanned: Symbol,
    },
    /// The run ended without halting.
    DidNotHalt(RunOutcome),
    /// The machine does not have the Q-family shape.
    NotAQFamilyMachine(&'static str),
    /// ψ⁻¹ input contained a non-binary character.
    BadBinary(char),
    /// ψ⁻¹ input longer than 63 bits does not fit the result type.
    PsiOverflow,
    Engine(EngineError),
}

impl fmt::Display for QxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QxError::InvalidPrefixBit { index, value } => {
                write!(f, "prefix element {index} is {value}, not a bit")
            }
            QxError::Protocol { scanned } => {
                write!(f, "machine halted scanning `{scanned}` instead of Y or N")
            }
            QxError::DidNotHalt(outcome) => write!(f, "run ended without halting: {outcome:?}"),
            QxError::NotAQFamilyMachine(why) => write!(f, "not a Q-family machine: {why}"),
            QxError::BadBinary(c) => write!(f, "`{c}` is not a binary digit"),
            QxError::PsiOverflow => f.write_str("binary string too long to invert"),
            QxError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl From<EngineError> for QxError {
    fn from(e: EngineError) -> Self {
        QxError::Engine(e)
    }
}

/// Outcome of one membership query.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MembershipVerdict {
    pub answer: Answer,
    /// The machine after the query, evolved when `n` exceeded the
    /// determined prefix.
    pub machine: MachineDef,
    pub bits_used: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn as_bit(self) -> u8 {
        match self {
            Answer::Yes => 1,
            Answer::No => 0,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "Y",
            Answer::No => "N",
        })
    }
}

fn sym(text: &str) -> Symbol {
    Symbol::new(text)
}

fn conc(id: u32) -> StateRef {
    StateRef::Concrete(id)
}

/// The fourteen instructions shared by every Q-family machine (everything
/// except the undetermined-entry rule `(8, #, x, #, 0)` and the ladder).
fn core_instructions() -> Vec<Instruction> {
    let meta = |q, scan, next, write, mv, j| {
        Instruction::meta(q, scan, next, write, mv, j).expect("nested update is standard")
    };
    let s = Instruction::standard;
    let r = Instruction::random;
    // Role ids: 0 start, 1 h, 2 n, 3 y, 4 t, 5 v, 6 w, 7 x, 8 ladder base.
    let (h, n, y, t, v, w, x) = (1, 2, 3, 4, 5, 6, 7);
    alloc::vec![
        s(conc(0), sym("#"), conc(8), sym("#"), Move::Right),
        s(conc(y), sym("#"), conc(h), sym("Y"), Move::Stay),
        s(conc(n), sym("#"), conc(h), sym("N"), Move::Stay),
        r(conc(x), sym("#"), conc(x), Move::Stay),
        r(conc(x), sym("a"), conc(t), Move::Stay),
        meta(
            conc(x),
            sym("0"),
            conc(v),
            sym("#"),
            Move::Stay,
            s(StateRef::QRel(1), sym("#"), conc(n), sym("#"), Move::Right),
        ),
        meta(
            conc(x),
            sym("1"),
            conc(w),
            sym("#"),
            Move::Stay,
            s(StateRef::QRel(1), sym("#"), conc(y), sym("#"), Move::Right),
        ),
        meta(
            conc(t),
            sym("0"),
            conc(w),
            sym("a"),
            Move::Stay,
            s(StateRef::QRel(1), sym("#"), conc(n), sym("#"), Move::Right),
        ),
        meta(
            conc(t),
            sym("1"),
            conc(w),
            sym("a"),
            Move::Stay,
            s(StateRef::QRel(1), sym("#"), conc(y), sym("#"), Move::Right),
        ),
        meta(
            conc(v),
            sym("#"),
            conc(n),
            sym("#"),
            Move::Right,
            s(
                StateRef::QRel(1),
                sym("a"),
                StateRef::QRel(0),
                sym("a"),
                Move::Right
            ),
        ),
        meta(
            conc(w),
            sym("#"),
            conc(y),
            sym("#"),
            Move::Right,
            s(
                StateRef::QRel(1),
                sym("a"),
                StateRef::QRel(0),
                sym("a"),
                Move::Right
            ),
        ),
        meta(
            conc(w),
            sym("a"),
            StateRef::QRel(0),
            sym("a"),
            Move::Right,
            s(
                StateRef::QRel(1),
                sym("a"),
                StateRef::QRel(0),
                sym("a"),
                Move::Right
            ),
        ),
        s(StateRef::QRel(1), sym("a"), conc(x), sym("a"), Move::Stay),
        s(StateRef::QRel(1), sym("#"), conc(x), sym("#"), Move::Stay),
    ]
}

fn qx_state_names(total: u32) -> Vec<String> {
    let mut names: Vec<String> = ["0", "h", "n", "y", "t", "v", "w", "x", "8"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for id in CORE_STATES..total {
        names.push(id.to_string());
    }
    names
}

/// Builds the Q-family machine with the given determined prefix.
///
/// An empty prefix yields the fifteen-instruction Q(x).  A prefix of length
/// `m+1` removes the undetermined-entry rule `(8, #, x, #, 0)` and appends,
/// per index `i`, the decided pair `(i+8, #, y|n, #, 1)` and
/// `(i+8, a, i+9, a, 1)`; the result has `m + 10` states.
pub fn build_qx(prefix: &[u8]) -> Result<MachineDef, QxError> {
    for (index, &value) in prefix.iter().enumerate() {
        if value > 1 {
            return Err(QxError::InvalidPrefixBit { index, value });
        }
    }
    let mut instructions = core_instructions();
    if prefix.is_empty() {
        instructions.insert(
            1,
            Instruction::standard(conc(8), sym("#"), conc(7), sym("#"), Move::Stay),
        );
    } else {
        for (i, &bit) in prefix.iter().enumerate() {
            let rung = LADDER_BASE + i as u32;
            let verdict_state = if bit == 1 { STATE_YES } else { STATE_NO };
            instructions.push(Instruction::standard(
                conc(rung),
                sym("#"),
                conc(verdict_state),
                sym("#"),
                Move::Right,
            ));
            instructions.push(Instruction::standard(
                conc(rung),
                sym("a"),
                conc(rung + 1),
                sym("a"),
                Move::Right,
            ));
        }
    }
    let total_states = CORE_STATES + prefix.len() as u32;
    MachineDef::new(
        qx_state_names(total_states),
        alloc::vec![sym("N"), sym("Y"), sym("a")],
        0,
        BTreeSet::from([STATE_HALT]),
        instructions,
    )
    .map_err(|_| QxError::NotAQFamilyMachine("builder produced an invalid machine"))
}

/// Unary input tape `# #a^n#`.
pub fn membership_tape(n: u64) -> String {
    let mut literal = String::with_capacity(n as usize + 4);
    literal.push_str("# #");
    for _ in 0..n {
        literal.push('a');
    }
    literal.push('#');
    literal
}

/// Runs one membership query for `a^n`.
///
/// For `n` within the determined prefix the verdict is bit-free and the
/// machine comes back unchanged; past the prefix the returned machine has
/// grown one ladder rung per newly decided length.
pub fn membership(
    machine: &MachineDef,
    n: u64,
    source: &mut dyn BitSource,
) -> Result<MembershipVerdict, QxError> {
    let options = RunOptions::default().max_steps((n + 2) * 16 + 1_000);
    let output = run(machine, &membership_tape(n), source, options)?;
    match output.outcome {
        RunOutcome::Halted => {}
        other => return Err(QxError::DidNotHalt(other)),
    }
    let scanned = output.config.scanned();
    let answer = match scanned.as_str() {
        "Y" => Answer::Yes,
        "N" => Answer::No,
        _ => return Err(QxError::Protocol { scanned }),
    };
    Ok(MembershipVerdict {
        answer,
        machine: output.machine,
        bits_used: output.report.bits_consumed,
    })
}

/// Folds [`membership`] over `queries`, threading the evolved machine.
pub fn evolve_sequence(
    machine: &MachineDef,
    queries: &[u64],
    source: &mut dyn BitSource,
) -> Result<(MachineDef, Vec<Answer>), QxError> {
    let mut current = machine.clone();
    let mut answers = Vec::with_capacity(queries.len());
    for &n in queries {
        let verdict = membership(&current, n, source)?;
        current = verdict.machine;
        answers.push(verdict.answer);
    }
    Ok((current, answers))
}

/// Reads the determined prefix back out of a Q-family machine.
///
/// Inverse of [`build_qx`]: bit `i` is read from the decided rule
/// `(i+8, #, y|n, #, 1)`, ascending until the ladder stops.
pub fn extract_language_prefix(machine: &MachineDef) -> Result<Vec<u8>, QxError> {
    if machine.start() != 0 {
        return Err(QxError::NotAQFamilyMachine("start state is not 0"));
    }
    if machine.halt_states().iter().copied().collect::<Vec<_>>() != [STATE_HALT] {
        return Err(QxError::NotAQFamilyMachine("halt set is not {h}"));
    }
    let core = core_instructions();
    for required in &core {
        if !machine.instructions().contains(required) {
            return Err(QxError::NotAQFamilyMachine("core instruction missing"));
        }
    }

    let decided_bit = |rung: u32| -> Option<u8> {
        machine.instructions().iter().find_map(|inst| match inst {
            Instruction::Standard {
                q,
                scan,
                next,
                write,
                mv,
            } if *q == conc(rung) && scan.is_blank() && write.is_blank() && *mv == Move::Right => {
                match next {
                    StateRef::Concrete(STATE_YES) => Some(1),
                    StateRef::Concrete(STATE_NO) => Some(0),
                    _ => None,
                }
            }
            _ => None,
        })
    };
    let ladder_step = |rung: u32| -> bool {
        machine.instructions().contains(&Instruction::standard(
            conc(rung),
            sym("a"),
            conc(rung + 1),
            sym("a"),
            Move::Right,
        ))
    };

    let mut prefix = Vec::new();
    let mut rung = LADDER_BASE;
    while let Some(bit) = decided_bit(rung) {
        if !ladder_step(rung) {
            return Err(QxError::NotAQFamilyMachine(
                "decided rung without ladder step",
            ));
        }
        prefix.push(bit);
        rung += 1;
    }

    if prefix.is_empty() {
        let undetermined_entry =
            Instruction::standard(conc(8), sym("#"), conc(7), sym("#"), Move::Stay);
        if !machine.instructions().contains(&undetermined_entry) {
            return Err(QxError::NotAQFamilyMachine(
                "no determined prefix and no entry rule",
            ));
        }
    }

    let expected_states = CORE_STATES + prefix.len() as u32;
    if machine.state_count() != expected_states {
        return Err(QxError::NotAQFamilyMachine(
            "state count does not match the ladder",
        ));
    }
    let expected_instructions = core.len()
        + if prefix.is_empty() {
            1
        } else {
            2 * prefix.len()
        };
    if machine.instructions().len() != expected_instructions {
        return Err(QxError::NotAQFamilyMachine("unexpected extra instructions"));
    }
    Ok(prefix)
}

/// The length-ordered bijection from unary lengths to binary strings:
/// 0 ↦ ε, 1 ↦ `0`, 2 ↦ `1`, 3 ↦ `00`, 4 ↦ `01`, …
///
/// `psi(n)` is the binary expansion of `n + 1` with its leading 1 removed.
pub fn psi(n: u64) -> String {
    let v = n + 1;
    let width = 63 - v.leading_zeros() as u64;
    let mut out = String::with_capacity(width as usize);
    for k in (0..width).rev() {
        out.push(if (v >> k) & 1 == 1 { '1' } else { '0' });
    }
    out
}

/// Inverse of [`psi`]; accepts the empty string.
pub fn psi_inv(bits: &str) -> Result<u64, QxError> {
    if bits.len() >= 64 {
        return Err(QxError::PsiOverflow);
    }
    let mut v: u64 = 1;
    for c in bits.chars() {
        let bit = match c {
            '0' => 0,
            '1' => 1,
            other => return Err(QxError::BadBinary(other)),
        };
        v = (v << 1) | bit;
    }
    Ok(v - 1)
}
