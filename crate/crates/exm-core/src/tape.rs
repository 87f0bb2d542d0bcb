//! Tape, configuration, and window-rendering primitives.
//!
//! A tape is a total map from integer square indices to symbols in which all
//! but finitely many squares hold the blank `#`.  Only the non-blank squares
//! (the *support*) are stored, so cloning a configuration is cheap and two
//! tapes compare equal exactly when they agree on every square.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

/// A tape symbol: a non-empty text atom.
///
/// Every alphabet contains `0`, `1`, and the blank `#`; machines may declare
/// further symbols.  All bundled machines use single glyphs, but multi-glyph
/// atoms are permitted everywhere except tape literals (which are read one
/// glyph per square).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    /// Interns `token` as a symbol.  Panics on an empty token; parsers are
    /// expected to reject those before constructing symbols.
    pub fn new(token: &str) -> Self {
        assert!(!token.is_empty(), "symbol token must be non-empty");
        Symbol(Arc::from(token))
    }

    pub fn blank() -> Self {
        Symbol::new("#")
    }

    pub fn zero() -> Self {
        Symbol::new("0")
    }

    pub fn one() -> Self {
        Symbol::new("1")
    }

    /// The symbol written by a random instruction that measured `bit`.
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Symbol::zero()
        } else {
            Symbol::one()
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_blank(&self) -> bool {
        &*self.0 == "#"
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Head displacement of one executed instruction: −1, 0, or +1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl Move {
    pub fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Stay => 0,
            Move::Right => 1,
        }
    }

    pub fn from_delta(delta: i64) -> Option<Move> {
        match delta {
            -1 => Some(Move::Left),
            0 => Some(Move::Stay),
            1 => Some(Move::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.delta())
    }
}

/// A finitely bounded tape: square index → symbol, blank by default.
///
/// Writing a blank removes the square from the stored support, so the
/// representation of a tape is canonical and derived `Eq`/`Ord`/`Hash` give
/// semantic equality.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Tape {
    cells: BTreeMap<i64, Symbol>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    /// Reads square `i`; squares outside the support are blank.
    pub fn read(&self, i: i64) -> Symbol {
        self.cells.get(&i).cloned().unwrap_or_else(Symbol::blank)
    }

    /// Writes `s` to square `i`.  Writing the blank erases the square.
    pub fn write(&mut self, i: i64, s: Symbol) {
        if s.is_blank() {
            self.cells.remove(&i);
        } else {
            self.cells.insert(i, s);
        }
    }

    /// Number of non-blank squares.
    pub fn support_len(&self) -> usize {
        self.cells.len()
    }

    /// Least and greatest non-blank square, or `None` for an all-blank tape.
    pub fn support_bounds(&self) -> Option<(i64, i64)> {
        let min = *self.cells.keys().next()?;
        let max = *self.cells.keys().next_back()?;
        Some((min, max))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Symbol)> {
        self.cells.iter().map(|(i, s)| (*i, s))
    }
}

/// One machine configuration: current state, head square, and tape.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Configuration {
    pub state: u32,
    pub head: i64,
    pub tape: Tape,
}

impl Configuration {
    pub fn scanned(&self) -> Symbol {
        self.tape.read(self.head)
    }
}

/// Errors from [`tape_from_literal`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LiteralError {
    /// The literal must contain exactly one space marking the head.
    MalformedLiteral { spaces: usize },
    /// A glyph was not in the validating alphabet.
    UnknownSymbol { glyph: char },
}

impl fmt::Display for LiteralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiteralError::MalformedLiteral { spaces } => write!(
                f,
                "tape literal must contain exactly one space marking the head (found {spaces})"
            ),
            LiteralError::UnknownSymbol { glyph } => {
                write!(
                    f,
                    "tape literal glyph `{glyph}` is not in the machine alphabet"
                )
            }
        }
    }
}

/// Builds a tape from a literal such as `# #11111#`.
///
/// The single space marks the head: the square holding the glyph right after
/// the space is square 0, glyphs left of the space occupy −1, −2, … and the
/// head starts at 0.  Squares beyond the literal are blank.
pub fn tape_from_literal(text: &str) -> Result<(Tape, i64), LiteralError> {
    tape_from_literal_impl(text, None)
}

/// As [`tape_from_literal`], but rejects glyphs outside `alphabet`.
pub fn tape_from_literal_checked(
    text: &str,
    alphabet: &[Symbol],
) -> Result<(Tape, i64), LiteralError> {
    tape_from_literal_impl(text, Some(alphabet))
}

fn tape_from_literal_impl(
    text: &str,
    alphabet: Option<&[Symbol]>,
) -> Result<(Tape, i64), LiteralError> {
    let spaces = text.chars().filter(|c| *c == ' ').count();
    if spaces != 1 {
        return Err(LiteralError::MalformedLiteral { spaces });
    }
    let (left, right) = text.split_once(' ').expect("exactly one space");
    if right.is_empty() {
        // A head marker with nothing under it does not name a scanned square.
        return Err(LiteralError::MalformedLiteral { spaces: 1 });
    }
    let mut tape = Tape::new();
    let check = |glyph: char| -> Result<Symbol, LiteralError> {
        let mut buf = [0u8; 4];
        let token: &str = glyph.encode_utf8(&mut buf);
        if let Some(alpha) = alphabet {
            if !alpha.iter().any(|s| s.as_str() == token) {
                return Err(LiteralError::UnknownSymbol { glyph });
            }
        }
        Ok(Symbol::new(token))
    };
    let left_len = left.chars().count() as i64;
    for (offset, glyph) in left.chars().enumerate() {
        tape.write(offset as i64 - left_len, check(glyph)?);
    }
    for (offset, glyph) in right.chars().enumerate() {
        tape.write(offset as i64, check(glyph)?);
    }
    Ok((tape, 0))
}

/// Renders the window covering the support and the head, padded by `pad`
/// squares on each side, with a single space before the scanned glyph.
pub fn render_window(tape: &Tape, head: i64, pad: u32) -> String {
    let pad = pad.max(1) as i64;
    let (lo, hi) = match tape.support_bounds() {
        Some((min, max)) => (min.min(head), max.max(head)),
        None => (head, head),
    };
    let (lo, hi) = (lo - pad, hi + pad);
    let mut out = String::new();
    for i in lo..=hi {
        if i == head {
            out.push(' ');
        }
        out.push_str(tape.read(i).as_str());
    }
    out
}

/// Strips the leading blanks before the head marker and the trailing blanks
/// after the scanned square.
///
/// Reference traces pad their windows by varying amounts row to row; after
/// normalization two renderings of the same configuration compare equal.
/// The scanned square itself is always kept, blank or not.
pub fn normalize_window(window: &str) -> String {
    let Some((left, right)) = window.split_once(' ') else {
        return window.to_owned();
    };
    let left = left.trim_start_matches('#');
    let scanned = &right[..right.chars().next().map_or(0, |c| c.len_utf8())];
    let tail = right[scanned.len()..].trim_end_matches('#');
    let mut out = String::with_capacity(left.len() + 1 + right.len());
    out.push_str(left);
    out.push(' ');
    out.push_str(scanned);
    out.push_str(tail);
    out
}
