//! Exact-rational embedding of standard-machine runs into the plane.
//!
//! A machine with alphabet `A`, non-halt states `Q'`, and base
//! `B = |A| + |Q'| + 1` maps each configuration to a point in ℚ × ℚ: the
//! x coordinate encodes the scanned square and everything to its right, the
//! y coordinate the state and everything to the left.  Each ±1-move
//! instruction becomes an affine map, and executing the instruction
//! commutes exactly with applying the map.  All arithmetic is exact — blank
//! tails are geometric series summed in closed form, so no truncation
//! exists anywhere.
//!
//! Value assignment: ν(halt) = 0; alphabet symbols get 1..|A| in canonical
//! alphabet order; non-halt states get |A|+1 … |A|+|Q'| in state-id order.
//! A live configuration's point lies in the unit square whose coordinate
//! floors are determined by the scanned symbol and the state; a halting
//! step maps the point below the live band (the state region of y collapses
//! to ν(halt) = 0), which is the square-exit reading of halting.  Move-0
//! instructions have no affine form and stop the correspondence check.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::One;

use crate::engine::{EngineError, Execution, StepEvent};
use crate::isa::{Instruction, MachineDef, Move, StateRef};
use crate::random::NoBits;
use crate::tape::{Configuration, Symbol};

pub type Rat = Ratio<BigInt>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PhiError {
    /// The embedding is defined for standard machines only.
    NonStandardMachine,
    /// Move-0 steps have no affine image.
    MoveZeroUnsupported,
    /// Symbol or state outside the machine the value function was built for.
    UnknownSymbol(Symbol),
    UnknownState(u32),
    /// The machine has no non-halt states to embed.
    NoLiveStates,
    Engine(EngineError),
}

impl fmt::Display for PhiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiError::NonStandardMachine => {
                f.write_str("the affine embedding requires a standard machine")
            }
            PhiError::MoveZeroUnsupported => {
                f.write_str("move-0 instructions have no affine image")
            }
            PhiError::UnknownSymbol(s) => write!(f, "symbol `{s}` has no value"),
            PhiError::UnknownState(q) => write!(f, "state {q} has no value"),
            PhiError::NoLiveStates => f.write_str("machine has no non-halt states"),
            PhiError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl From<EngineError> for PhiError {
    fn from(e: EngineError) -> Self {
        PhiError::Engine(e)
    }
}

/// The value function ν and base B for one machine.
#[derive(Clone, Debug)]
pub struct ValueFunction {
    base: u64,
    symbol_values: BTreeMap<Symbol, u64>,
    state_values: BTreeMap<u32, u64>,
    alphabet_len: u64,
    live_states: u64,
}

impl ValueFunction {
    /// Builds ν for a machine: halt states share ν = 0, alphabet symbols
    /// take 1..|A| in canonical order, non-halt states follow in id order.
    pub fn for_machine(machine: &MachineDef) -> Result<Self, PhiError> {
        let alphabet_len = machine.alphabet().len() as u64;
        let mut symbol_values = BTreeMap::new();
        for (i, symbol) in machine.alphabet().iter().enumerate() {
            symbol_values.insert(symbol.clone(), i as u64 + 1);
        }
        let mut state_values = BTreeMap::new();
        let mut next = alphabet_len + 1;
        for id in 0..machine.state_count() {
            if machine.is_halt(id) {
                state_values.insert(id, 0);
            } else {
                state_values.insert(id, next);
                next += 1;
            }
        }
        let live_states = next - alphabet_len - 1;
        if live_states == 0 {
            return Err(PhiError::NoLiveStates);
        }
        Ok(ValueFunction {
            base: alphabet_len + live_states + 1,
            symbol_values,
            state_values,
            alphabet_len,
            live_states,
        })
    }

    /// B = |A| + |Q'| + 1.
    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn base_rat(&self) -> Rat {
        Ratio::from_integer(BigInt::from(self.base))
    }

    pub fn nu_symbol(&self, symbol: &Symbol) -> Result<u64, PhiError> {
        self.symbol_values
            .get(symbol)
            .copied()
            .ok_or_else(|| PhiError::UnknownSymbol(symbol.clone()))
    }

    /// ν of a state id; halt states map to 0.
    pub fn nu_state(&self, state: u32) -> Result<u64, PhiError> {
        self.state_values
            .get(&state)
            .copied()
            .ok_or(PhiError::UnknownState(state))
    }

    /// Whether a point's y coordinate lies in the band occupied by live
    /// (non-halt) states: ⌊y/B⌋ ∈ [|A|+1, |A|+|Q'|].
    pub fn in_live_band(&self, point: &RationalPoint) -> bool {
        let region = (&point.y / self.base_rat()).floor().to_integer();
        let lo = BigInt::from(self.alphabet_len + 1);
        let hi = BigInt::from(self.alphabet_len + self.live_states);
        region >= lo && region <= hi
    }
}

/// An exact point in ℚ × ℚ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalPoint {
    pub x: Rat,
    pub y: Rat,
}

impl RationalPoint {
    /// The unit square `[m, m+1] × [n, n+1]` containing the point, by
    /// coordinate floors.
    pub fn unit_square(&self) -> (BigInt, BigInt) {
        (self.x.floor().to_integer(), self.y.floor().to_integer())
    }
}

/// A diagonal affine map `(x, y) ↦ (mx·x + cx, my·y + cy)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AffineMap {
    pub mx: Rat,
    pub cx: Rat,
    pub my: Rat,
    pub cy: Rat,
}

impl AffineMap {
    pub fn apply(&self, point: &RationalPoint) -> RationalPoint {
        RationalPoint {
            x: &self.mx * &point.x + &self.cx,
            y: &self.my * &point.y + &self.cy,
        }
    }
}

fn rat(v: u64) -> Rat {
    Ratio::from_integer(BigInt::from(v))
}

/// ν of entity: convenience wrapper matching the formula ν(h) = 0,
/// ν(aᵢ) = i, ν(qᵢ) = i + |A|.
pub fn nu_value(vf: &ValueFunction, entity: &NuEntity) -> Result<u64, PhiError> {
    match entity {
        NuEntity::Symbol(s) => vf.nu_symbol(s),
        NuEntity::State(q) => vf.nu_state(*q),
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NuEntity {
    Symbol(Symbol),
    State(u32),
}

/// φ of a configuration.
///
/// x = B·ν(T_k) + Σ_{j≥0} ν(T_{k+1+j})·B^{−j};
/// y = B·ν(q) + Σ_{j≥0} ν(T_{k−1−j})·B^{−j}.
/// Finite support is summed directly; the all-blank tails collapse to
/// ν(#)·B^{1−j₀}/(B−1) in closed form.
pub fn phi_config(config: &Configuration, vf: &ValueFunction) -> Result<RationalPoint, PhiError> {
    let base = vf.base_rat();
    let blank_value = vf.nu_symbol(&Symbol::blank())?;
    let head = config.head;

    // Geometric tail Σ_{j≥j0} c·B^{−j} = c·B^{−j0}·B/(B−1).
    let tail = |j0: i64| -> Rat {
        let b = vf.base_rat();
        let factor = &b / (&b - Rat::one());
        rat(blank_value) * power(&base, -j0) * factor
    };

    // Rightward sum for x, starting at the scanned square.
    let mut x = base.clone() * rat(vf.nu_symbol(&config.tape.read(head))?);
    let right_extent = config
        .tape
        .support_bounds()
        .map(|(_, max)| max)
        .filter(|max| *max > head);
    let first_tail_j = match right_extent {
        Some(max) => {
            for j in 0..(max - head) {
                let square = head + 1 + j;
                x += rat(vf.nu_symbol(&config.tape.read(square))?) * power(&base, -j);
            }
            max - head
        }
        None => 0,
    };
    x += tail(first_tail_j);

    // Leftward sum for y, starting at the state value.
    let mut y = base.clone() * rat(vf.nu_state(config.state)?);
    let left_extent = config
        .tape
        .support_bounds()
        .map(|(min, _)| min)
        .filter(|min| *min < head);
    let first_tail_j = match left_extent {
        Some(min) => {
            for j in 0..(head - min) {
                let square = head - 1 - j;
                y += rat(vf.nu_symbol(&config.tape.read(square))?) * power(&base, -j);
            }
            head - min
        }
        None => 0,
    };
    y += tail(first_tail_j);

    Ok(RationalPoint { x, y })
}

fn power(base: &Rat, exponent: i64) -> Rat {
    let positive = num_traits::pow(base.to_integer(), exponent.unsigned_abs() as usize);
    if exponent >= 0 {
        Ratio::from_integer(positive)
    } else {
        Ratio::from_integer(positive).recip()
    }
}

/// The affine map of one ±1-move standard step.
///
/// Right step (q, T_k) → (r, α, +1):
///   f(x, y) = (B·x − B²·ν(T_k),  y/B + B·ν(r) + ν(α) − ν(q)).
/// Left step (q, T_k) → (r, α, −1), with T_{k−1} the symbol left of the
/// head before the step:
///   g(x, y) = (x/B + B·ν(T_{k−1}) + ν(α) − ν(T_k),
///              B·y + B·ν(r) − B²·ν(q) − B·ν(T_{k−1})).
pub fn phi_step_map(
    inst: &Instruction,
    left_neighbor: &Symbol,
    vf: &ValueFunction,
) -> Result<AffineMap, PhiError> {
    let Instruction::Standard {
        q,
        scan,
        next,
        write,
        mv,
    } = inst
    else {
        return Err(PhiError::NonStandardMachine);
    };
    let (StateRef::Concrete(q), StateRef::Concrete(r)) = (*q, *next) else {
        return Err(PhiError::NonStandardMachine);
    };
    let b = vf.base_rat();
    let b2 = &b * &b;
    let nu_q = rat(vf.nu_state(q)?);
    let nu_r = rat(vf.nu_state(r)?);
    let nu_scan = rat(vf.nu_symbol(scan)?);
    let nu_write = rat(vf.nu_symbol(write)?);
    match mv {
        Move::Right => Ok(AffineMap {
            mx: b.clone(),
            cx: -(&b2 * &nu_scan),
            my: b.recip(),
            cy: &b * &nu_r + &nu_write - &nu_q,
        }),
        Move::Left => {
            let nu_left = rat(vf.nu_symbol(left_neighbor)?);
            Ok(AffineMap {
                mx: b.recip(),
                cx: &b * &nu_left + &nu_write - &nu_scan,
                my: b.clone(),
                cy: &b * &nu_r - &b2 * &nu_q - &b * &nu_left,
            })
        }
        Move::Stay => Err(PhiError::MoveZeroUnsupported),
    }
}

/// Lockstep report of engine steps against affine images.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CorrespondenceReport {
    /// Steps whose affine image was compared against φ of the next
    /// configuration.
    pub steps_checked: u64,
    /// Steps where the two disagreed (empty means exact correspondence).
    pub mismatches: Vec<u64>,
    /// The run reached a halt state within the horizon.
    pub halted: bool,
    /// A move-0 instruction stopped the check at this step, if any.
    pub move_zero_at: Option<u64>,
    /// First step whose *post* point left the live band while the machine
    /// had not halted (exit must coincide with halting, so this should
    /// stay `None`).
    pub premature_exit_at: Option<u64>,
    /// For a halted run: whether the final point left the live band.
    pub final_point_exits: Option<bool>,
}

impl CorrespondenceReport {
    /// Exact correspondence and exit-iff-halt over the checked horizon.
    pub fn exact(&self) -> bool {
        self.mismatches.is_empty()
            && self.premature_exit_at.is_none()
            && self.final_point_exits != Some(false)
    }
}

/// Runs `machine` on `tape_literal` for at most `max_steps` steps, applying
/// each step's affine map alongside and comparing exactly.
pub fn verify_correspondence(
    machine: &MachineDef,
    tape_literal: &str,
    max_steps: u64,
) -> Result<CorrespondenceReport, PhiError> {
    if !machine.is_standard_machine() {
        return Err(PhiError::NonStandardMachine);
    }
    let vf = ValueFunction::for_machine(machine)?;
    let mut source = NoBits;
    let mut exec = Execution::new(machine, tape_literal, &mut source)?;
    let mut report = CorrespondenceReport {
        steps_checked: 0,
        mismatches: Vec::new(),
        halted: false,
        move_zero_at: None,
        premature_exit_at: None,
        final_point_exits: None,
    };
    let mut point = phi_config(exec.config(), &vf)?;
    while exec.steps() < max_steps {
        if exec.halted() {
            report.halted = true;
            break;
        }
        let config = exec.config().clone();
        let scanned = config.scanned();
        let Some(inst) = crate::isa::lookup(
            machine.instructions(),
            config.state,
            &scanned,
            machine.state_count(),
        )
        .map_err(EngineError::Ambiguous)?
        else {
            break; // stuck: no affine step to compare
        };
        if inst.mv() == Move::Stay {
            report.move_zero_at = Some(exec.steps());
            break;
        }
        let left_neighbor = config.tape.read(config.head - 1);
        let map = phi_step_map(inst, &left_neighbor, &vf)?;
        let image = map.apply(&point);
        match exec.step()? {
            StepEvent::Continued | StepEvent::Terminal(_) => {}
        }
        let next_point = phi_config(exec.config(), &vf)?;
        if next_point != image {
            report.mismatches.push(exec.steps());
        }
        report.steps_checked += 1;
        point = next_point;
        let live = vf.in_live_band(&point);
        if exec.halted() {
            report.halted = true;
            report.final_point_exits = Some(!live);
            break;
        } else if !live {
            report.premature_exit_at = Some(exec.steps());
        }
    }
    Ok(report)
}
