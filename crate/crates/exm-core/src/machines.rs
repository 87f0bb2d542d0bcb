//! Bundled machine definitions.
//!
//! The sources are embedded so that library users and tests need no file
//! system; the CLI also resolves these names when no such file exists on
//! disk.

use crate::isa::MachineDef;
use crate::parser::parse_machine;

/// Unary Collatz orbit machine; halts at `# 1#` when the orbit reaches 1.
pub const COLLATZ: &str = include_str!("../machines/collatz.exm");

/// Unbiased random walk; never halts from a blank tape.
pub const RANDOM_WALK: &str = include_str!("../machines/randomwalk.exm");

/// The self-extending language acceptor Q(x).
pub const QX: &str = include_str!("../machines/qx.exm");

/// Three self-instantiating instructions that mint a new state per pair of
/// steps; never halts.
pub const EXAMPLE22: &str = include_str!("../machines/example22.exm");

/// Looks up a bundled machine source by file name.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "collatz.exm" => Some(COLLATZ),
        "randomwalk.exm" => Some(RANDOM_WALK),
        "qx.exm" => Some(QX),
        "example22.exm" => Some(EXAMPLE22),
        _ => None,
    }
}

/// Names accepted by [`bundled`].
pub const BUNDLED_NAMES: [&str; 4] = ["collatz.exm", "randomwalk.exm", "qx.exm", "example22.exm"];

pub fn collatz() -> MachineDef {
    parse_machine(COLLATZ).expect("bundled collatz machine parses")
}

pub fn random_walk() -> MachineDef {
    parse_machine(RANDOM_WALK).expect("bundled random walk machine parses")
}

pub fn qx() -> MachineDef {
    parse_machine(QX).expect("bundled qx machine parses")
}

pub fn example22() -> MachineDef {
    parse_machine(EXAMPLE22).expect("bundled example machine parses")
}
