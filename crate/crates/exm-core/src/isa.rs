//! Instruction forms, machine definitions, and the program-update rule.
//!
//! Three instruction kinds share one dispatch key: the pair (state, scanned
//! symbol).  The *unique state, scanning-symbol condition* requires that no
//! two instructions of any kind share both coordinates, which makes dispatch
//! unambiguous and survives every program update by construction.
//!
//! States in an instruction are either concrete ids or the self-reflective
//! forms `|Q|` and `|Q|-c`, which instantiate against the machine's state
//! count at the moment the instruction executes.  Uniqueness compares those
//! references *structurally*: `|Q|-1` and the concrete id it happens to equal
//! today are different keys.  A concrete instruction therefore shadows a
//! symbolic one that instantiates onto the same pair; [`lookup`] implements
//! that precedence.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use crate::tape::Move;
use crate::tape::Symbol;

/// A state position inside an instruction: a concrete id, or `|Q|-c`
/// (`QRel(c)`, with `QRel(0)` written `|Q|`) resolved at execution time.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum StateRef {
    Concrete(u32),
    QRel(u32),
}

/// `|Q|-c` cannot be instantiated because `c` exceeds the state count.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct InstantiationError {
    pub offset: u32,
    pub state_count: u32,
}

impl fmt::Display for InstantiationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|Q|-{} cannot be instantiated with |Q| = {}",
            self.offset, self.state_count
        )
    }
}

impl StateRef {
    pub fn is_symbolic(self) -> bool {
        matches!(self, StateRef::QRel(_))
    }

    /// Resolves the reference against `state_count`.
    pub fn instantiate(self, state_count: u32) -> Result<u32, InstantiationError> {
        match self {
            StateRef::Concrete(id) => Ok(id),
            StateRef::QRel(c) if c <= state_count => Ok(state_count - c),
            StateRef::QRel(c) => Err(InstantiationError {
                offset: c,
                state_count,
            }),
        }
    }
}

impl fmt::Display for StateRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateRef::Concrete(id) => write!(f, "{id}"),
            StateRef::QRel(0) => write!(f, "|Q|"),
            StateRef::QRel(c) => write!(f, "|Q|-{c}"),
        }
    }
}

/// One machine instruction.
///
/// A meta instruction's nested update is always standard or random, never
/// itself meta; [`Instruction::meta`] enforces this.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Instruction {
    Standard {
        q: StateRef,
        scan: Symbol,
        next: StateRef,
        write: Symbol,
        mv: Move,
    },
    Random {
        q: StateRef,
        scan: Symbol,
        next: StateRef,
        mv: Move,
    },
    Meta {
        q: StateRef,
        scan: Symbol,
        next: StateRef,
        write: Symbol,
        mv: Move,
        update: Box<Instruction>,
    },
}

/// A nested meta update must itself be standard or random.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NestedMetaError;

impl fmt::Display for NestedMetaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a meta instruction cannot nest another meta instruction")
    }
}

impl Instruction {
    pub fn standard(q: StateRef, scan: Symbol, next: StateRef, write: Symbol, mv: Move) -> Self {
        Instruction::Standard {
            q,
            scan,
            next,
            write,
            mv,
        }
    }

    pub fn random(q: StateRef, scan: Symbol, next: StateRef, mv: Move) -> Self {
        Instruction::Random { q, scan, next, mv }
    }

    pub fn meta(
        q: StateRef,
        scan: Symbol,
        next: StateRef,
        write: Symbol,
        mv: Move,
        update: Instruction,
    ) -> Result<Self, NestedMetaError> {
        if update.is_meta() {
            return Err(NestedMetaError);
        }
        Ok(Instruction::Meta {
            q,
            scan,
            next,
            write,
            mv,
            update: Box::new(update),
        })
    }

    pub fn is_meta(&self) -> bool {
        matches!(self, Instruction::Meta { .. })
    }

    pub fn q(&self) -> StateRef {
        match self {
            Instruction::Standard { q, .. }
            | Instruction::Random { q, .. }
            | Instruction::Meta { q, .. } => *q,
        }
    }

    pub fn scan(&self) -> &Symbol {
        match self {
            Instruction::Standard { scan, .. }
            | Instruction::Random { scan, .. }
            | Instruction::Meta { scan, .. } => scan,
        }
    }

    pub fn next(&self) -> StateRef {
        match self {
            Instruction::Standard { next, .. }
            | Instruction::Random { next, .. }
            | Instruction::Meta { next, .. } => *next,
        }
    }

    pub fn mv(&self) -> Move {
        match self {
            Instruction::Standard { mv, .. }
            | Instruction::Random { mv, .. }
            | Instruction::Meta { mv, .. } => *mv,
        }
    }

    /// The structural dispatch key used by the uniqueness condition.
    pub fn key(&self) -> (StateRef, &Symbol) {
        (self.q(), self.scan())
    }

    /// True when any state reference, including the nested update's, is
    /// symbolic.  An executed non-meta instruction with a symbolic reference
    /// is a *simple meta instruction*: its instantiation persists into the
    /// program.
    pub fn has_symbolic_ref(&self) -> bool {
        match self {
            Instruction::Standard { q, next, .. } | Instruction::Random { q, next, .. } => {
                q.is_symbolic() || next.is_symbolic()
            }
            Instruction::Meta {
                q, next, update, ..
            } => q.is_symbolic() || next.is_symbolic() || update.has_symbolic_ref(),
        }
    }

    /// Resolves every state reference (including the nested update's)
    /// against `state_count`.
    pub fn instantiate(&self, state_count: u32) -> Result<Instruction, InstantiationError> {
        let conc = |r: StateRef| r.instantiate(state_count).map(StateRef::Concrete);
        Ok(match self {
            Instruction::Standard {
                q,
                scan,
                next,
                write,
                mv,
            } => Instruction::Standard {
                q: conc(*q)?,
                scan: scan.clone(),
                next: conc(*next)?,
                write: write.clone(),
                mv: *mv,
            },
            Instruction::Random { q, scan, next, mv } => Instruction::Random {
                q: conc(*q)?,
                scan: scan.clone(),
                next: conc(*next)?,
                mv: *mv,
            },
            Instruction::Meta {
                q,
                scan,
                next,
                write,
                mv,
                update,
            } => Instruction::Meta {
                q: conc(*q)?,
                scan: scan.clone(),
                next: conc(*next)?,
                write: write.clone(),
                mv: *mv,
                update: Box::new(update.instantiate(state_count)?),
            },
        })
    }
}

/// Checks the unique state, scanning-symbol condition over all instruction
/// kinds.  Returns the indices of every offending pair; symbolic references
/// compare structurally, so `(|Q|-1, #, …)` and `(8, #, …)` may coexist.
pub fn validate_uniqueness(instructions: &[Instruction]) -> Result<(), Vec<(usize, usize)>> {
    let mut violations = Vec::new();
    for (i, a) in instructions.iter().enumerate() {
        for (j, b) in instructions.iter().enumerate().skip(i + 1) {
            if a.key() == b.key() {
                violations.push((i, j));
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Two symbolic instructions instantiated onto the same (state, symbol) pair;
/// the program is ill-formed at this state count.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AmbiguousLookup {
    pub state: u32,
    pub scanned: Symbol,
}

impl fmt::Display for AmbiguousLookup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "two symbolic instructions both apply in state {} scanning `{}`",
            self.state, self.scanned
        )
    }
}

/// Finds the instruction dispatched for `(state, scanned)` at the given
/// state count.  A concrete first coordinate wins over a symbolic one that
/// instantiates onto the same state.
pub fn lookup<'a>(
    instructions: &'a [Instruction],
    state: u32,
    scanned: &Symbol,
    state_count: u32,
) -> Result<Option<&'a Instruction>, AmbiguousLookup> {
    let mut symbolic: Option<&Instruction> = None;
    for inst in instructions {
        if inst.scan() != scanned {
            continue;
        }
        match inst.q() {
            StateRef::Concrete(id) if id == state => return Ok(Some(inst)),
            StateRef::QRel(c) => {
                if c <= state_count && state_count - c == state {
                    if symbolic.is_some() {
                        return Err(AmbiguousLookup {
                            state,
                            scanned: scanned.clone(),
                        });
                    }
                    symbolic = Some(inst);
                }
            }
            StateRef::Concrete(_) => {}
        }
    }
    Ok(symbolic)
}

/// What [`MachineDef::apply_update`] did with the new instruction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum UpdateEffect {
    Appended,
    Replaced(Instruction),
}

/// Errors constructing or updating a [`MachineDef`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MachineError {
    StartOutOfRange {
        start: u32,
        state_count: u32,
    },
    HaltOutOfRange {
        halt: u32,
        state_count: u32,
    },
    Uniqueness {
        pairs: Vec<(usize, usize)>,
    },
    /// `apply_update` requires a concrete standard or random instruction.
    UpdateNotConcrete,
    UpdateIsMeta,
    DuplicateStateName(String),
    DuplicateAlphabetSymbol(Symbol),
}

impl fmt::Display for MachineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineError::StartOutOfRange { start, state_count } => {
                write!(
                    f,
                    "start state {start} is not below the state count {state_count}"
                )
            }
            MachineError::HaltOutOfRange { halt, state_count } => {
                write!(
                    f,
                    "halt state {halt} is not below the state count {state_count}"
                )
            }
            MachineError::Uniqueness { pairs } => write!(
                f,
                "{} instruction pair(s) share a (state, scanned symbol) key",
                pairs.len()
            ),
            MachineError::UpdateNotConcrete => {
                f.write_str("program updates must carry concrete state ids")
            }
            MachineError::UpdateIsMeta => {
                f.write_str("program updates must be standard or random instructions")
            }
            MachineError::DuplicateStateName(name) => {
                write!(f, "state name `{name}` declared twice")
            }
            MachineError::DuplicateAlphabetSymbol(s) => {
                write!(f, "alphabet symbol `{s}` declared twice")
            }
        }
    }
}

/// A machine definition: states `0..state_count`, an alphabet containing
/// `0`, `1`, `#`, a start state, halt states, and an instruction list
/// satisfying the uniqueness condition.
///
/// Instructions may name states at or above `state_count`; existence is
/// enforced when a transition actually targets such a state, because program
/// updates routinely install instructions for states added in the same step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MachineDef {
    state_count: u32,
    state_names: Vec<String>,
    alphabet: Vec<Symbol>,
    start: u32,
    halt_states: BTreeSet<u32>,
    instructions: Vec<Instruction>,
}

impl MachineDef {
    /// Builds a machine from named states and alphabet extras beyond the
    /// implicit `0`, `1`, `#`.
    pub fn new(
        state_names: Vec<String>,
        alphabet_extras: Vec<Symbol>,
        start: u32,
        halt_states: BTreeSet<u32>,
        instructions: Vec<Instruction>,
    ) -> Result<Self, MachineError> {
        let state_count = state_names.len() as u32;
        {
            let mut seen = BTreeSet::new();
            for name in &state_names {
                if !seen.insert(name.clone()) {
                    return Err(MachineError::DuplicateStateName(name.clone()));
                }
            }
        }
        if start >= state_count {
            return Err(MachineError::StartOutOfRange { start, state_count });
        }
        if let Some(&halt) = halt_states.iter().find(|h| **h >= state_count) {
            return Err(MachineError::HaltOutOfRange { halt, state_count });
        }
        let mut alphabet = alloc::vec![Symbol::zero(), Symbol::one(), Symbol::blank()];
        for extra in alphabet_extras {
            if alphabet.contains(&extra) {
                return Err(MachineError::DuplicateAlphabetSymbol(extra));
            }
            alphabet.push(extra);
        }
        validate_uniqueness(&instructions).map_err(|pairs| MachineError::Uniqueness { pairs })?;
        Ok(MachineDef {
            state_count,
            state_names,
            alphabet,
            start,
            halt_states,
            instructions,
        })
    }

    pub fn state_count(&self) -> u32 {
        self.state_count
    }

    /// The display name of a state: its declared label, or the decimal id
    /// for states added during execution.
    pub fn state_name(&self, id: u32) -> String {
        self.state_names
            .get(id as usize)
            .cloned()
            .unwrap_or_else(|| id.to_string())
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    /// Resolves a label to its state id.
    pub fn state_id(&self, name: &str) -> Option<u32> {
        self.state_names
            .iter()
            .position(|n| n == name)
            .map(|i| i as u32)
    }

    /// The full alphabet in canonical order: `0`, `1`, `#`, then declared
    /// extras.
    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    /// Alphabet symbols beyond the implicit `0`, `1`, `#`.
    pub fn alphabet_extras(&self) -> &[Symbol] {
        &self.alphabet[3..]
    }

    pub fn contains_symbol(&self, s: &Symbol) -> bool {
        self.alphabet.contains(s)
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn halt_states(&self) -> &BTreeSet<u32> {
        &self.halt_states
    }

    pub fn is_halt(&self, state: u32) -> bool {
        self.halt_states.contains(&state)
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn has_random_instructions(&self) -> bool {
        self.instructions.iter().any(|i| match i {
            Instruction::Random { .. } => true,
            Instruction::Meta { update, .. } => matches!(**update, Instruction::Random { .. }),
            Instruction::Standard { .. } => false,
        })
    }

    pub fn is_standard_machine(&self) -> bool {
        self.instructions
            .iter()
            .all(|i| matches!(i, Instruction::Standard { .. }) && !i.has_symbolic_ref())
    }

    /// Adds one state `|Q|`, returning its id.
    pub fn grow_one_state(&mut self) -> u32 {
        let id = self.state_count;
        self.state_count += 1;
        self.state_names.push(id.to_string());
        id
    }

    pub(crate) fn dispatch(
        &self,
        state: u32,
        scanned: &Symbol,
    ) -> Result<Option<&Instruction>, AmbiguousLookup> {
        lookup(&self.instructions, state, scanned, self.state_count)
    }

    /// Installs `update` into the program: appended when its (state, symbol)
    /// key is fresh, otherwise replacing the unique instruction with that
    /// key.  The uniqueness condition holds afterwards by construction.
    pub fn apply_update(&mut self, update: Instruction) -> Result<UpdateEffect, MachineError> {
        if update.is_meta() {
            return Err(MachineError::UpdateIsMeta);
        }
        if update.has_symbolic_ref() {
            return Err(MachineError::UpdateNotConcrete);
        }
        let position = self
            .instructions
            .iter()
            .position(|i| i.key() == update.key());
        match position {
            Some(at) => {
                let old = core::mem::replace(&mut self.instructions[at], update);
                Ok(UpdateEffect::Replaced(old))
            }
            None => {
                self.instructions.push(update);
                Ok(UpdateEffect::Appended)
            }
        }
    }

    /// Instruction list sorted into a canonical order; two machines are
    /// interchangeable when these agree together with the state count,
    /// alphabet, start, and halt set.
    pub fn canonical_instructions(&self) -> Vec<Instruction> {
        let mut sorted = self.instructions.clone();
        sorted.sort();
        sorted
    }

    /// Order-insensitive structural equality on the parts that determine
    /// behavior.  State names are display metadata and do not participate.
    pub fn structurally_equal(&self, other: &MachineDef) -> bool {
        self.state_count == other.state_count
            && self.alphabet == other.alphabet
            && self.start == other.start
            && self.halt_states == other.halt_states
            && self.canonical_instructions() == other.canonical_instructions()
    }

    /// Renders an instruction in tuple syntax using this machine's state
    /// names, e.g. `(q, #, a, #, 1)`.
    pub fn render_instruction(&self, inst: &Instruction) -> String {
        self.render_instruction_with_bit(inst, None)
    }

    /// As [`Self::render_instruction`], with a measured random bit shown in
    /// the write position as `0_qr` / `1_qr`.
    pub fn render_instruction_with_bit(&self, inst: &Instruction, bit: Option<u8>) -> String {
        let sref = |r: StateRef| match r {
            StateRef::Concrete(id) => self.state_name(id),
            symbolic => symbolic.to_string(),
        };
        match inst {
            Instruction::Standard {
                q,
                scan,
                next,
                write,
                mv,
            } => {
                format!(
                    "({}, {}, {}, {}, {})",
                    sref(*q),
                    scan,
                    sref(*next),
                    write,
                    mv
                )
            }
            Instruction::Random { q, scan, next, mv } => match bit {
                Some(b) => {
                    format!(
                        "({}, {}, {}, {}_qr, {})",
                        sref(*q),
                        scan,
                        sref(*next),
                        b,
                        mv
                    )
                }
                None => format!("({}, {}, {}, {})", sref(*q), scan, sref(*next), mv),
            },
            Instruction::Meta {
                q,
                scan,
                next,
                write,
                mv,
                update,
            } => format!(
                "({}, {}, {}, {}, {}, {})",
                sref(*q),
                scan,
                sref(*next),
                write,
                mv,
                self.render_instruction(update)
            ),
        }
    }
}
