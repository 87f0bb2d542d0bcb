//! Core virtual machine for self-modifying machines with random instructions.
//!
//! The machines modeled here execute three instruction kinds over a sparse,
//! finitely bounded tape:
//!
//! * **standard** five-tuples `(q, a, r, α, y)` — ordinary Turing machine
//!   steps;
//! * **random** four-tuples `(q, a, r, y)` — draw one unbiased bit from a
//!   [`random::BitSource`] and write it over the scanned square;
//! * **meta** six-field instructions `(q, a, r, α, y, J)` — execute the first
//!   five coordinates as a standard step, then add `J` to the program or
//!   replace the instruction sharing `J`'s state/scanned-symbol pair.
//!
//! Instructions may name states symbolically (`|Q|`, `|Q|-1`); symbolic
//! references resolve against the current state count each time the
//! instruction fires, so a program can grow its own state set while running.
//! The [`engine`] owns those execution rules, [`isa`] the instruction forms
//! and the program-update discipline, [`parser`] the machine-file syntax,
//! and [`tape`] the tape/configuration primitives.  On top of the machine
//! model sit three experiment harnesses: [`qx`] (the self-extending language
//! acceptor family and its builder), [`halting`] (a bounded blank-tape
//! halting lab plus the Collatz survey), and [`phi`] (the exact-rational
//! affine embedding of standard-machine runs).
//!
//! The crate is `no_std` (with `alloc`); sources of OS or network entropy
//! live in the companion CLI crate behind the same [`random::BitSource`]
//! trait.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod engine;
pub mod halting;
pub mod isa;
pub mod machines;
pub mod parser;
pub mod phi;
pub mod qx;
pub mod random;
pub mod tape;

pub use engine::{run, Execution, RunOptions, RunOutcome, RunOutput, TraceRecord};
pub use isa::{Instruction, MachineDef, Move, StateRef};
pub use random::{BitSource, ReplayBits, SeededBits};
pub use tape::{Configuration, Symbol, Tape};
