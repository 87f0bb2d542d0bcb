//! Machine-definition files: the tuple syntax plus a small header.
//!
//! A file carries four header directives and then one parenthesized tuple
//! per instruction:
//!
//! ```text
//! ;; Comments follow two semicolons.
//! alphabet: E          ;; extras beyond the implicit 0, 1, #
//! states: a b c h      ;; labels; position = state id
//! start: a
//! halt: h
//!
//! (a, #, b, #, 1)      ;; standard: (q, a, r, α, y)
//! (b, #, c, 0)         ;; random:   (q, a, r, y) — arity alone distinguishes
//! (c, 1, h, 1, 0, (|Q|-1, #, a, #, 1))   ;; meta with nested update
//! ```
//!
//! State positions accept labels, bare numeric ids, `|Q|`, and `|Q|-c`.
//! Next states may name ids at or above the declared state count; the
//! engine checks existence when a transition actually targets them.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::isa::{validate_uniqueness, Instruction, MachineDef, Move, StateRef};
use crate::tape::Symbol;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownStateLabel(String),
    UnknownSymbol(String),
    BadMove(String),
    BadArity(usize),
    NestedMeta,
    DuplicateHeader(String),
    MissingHeader(String),
    Machine(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "{msg}"),
            ParseErrorKind::UnknownStateLabel(name) => write!(f, "unknown state label `{name}`"),
            ParseErrorKind::UnknownSymbol(name) => write!(f, "unknown alphabet symbol `{name}`"),
            ParseErrorKind::BadMove(text) => {
                write!(f, "move must be -1, 0, or 1 (found `{text}`)")
            }
            ParseErrorKind::BadArity(n) => {
                write!(f, "instruction tuples have 4, 5, or 6 elements (found {n})")
            }
            ParseErrorKind::NestedMeta => {
                write!(
                    f,
                    "a nested instruction cannot itself carry a nested instruction"
                )
            }
            ParseErrorKind::DuplicateHeader(name) => write!(f, "duplicate `{name}:` header"),
            ParseErrorKind::MissingHeader(name) => write!(f, "missing `{name}:` header"),
            ParseErrorKind::Machine(msg) => write!(f, "{msg}"),
        }
    }
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Token {
    LParen,
    RParen,
    Comma,
    Atom(String),
}

fn strip_comment(line: &str) -> &str {
    match line.find(";;") {
        Some(at) => &line[..at],
        None => line,
    }
}

fn tokenize(lines: &[(usize, &str)]) -> Result<Vec<(usize, Token)>, ParseError> {
    let mut tokens = Vec::new();
    for &(line_no, line) in lines {
        let mut atom = String::new();
        let flush = |atom: &mut String, tokens: &mut Vec<(usize, Token)>| {
            if !atom.is_empty() {
                tokens.push((line_no, Token::Atom(core::mem::take(atom))));
            }
        };
        for ch in line.chars() {
            match ch {
                '(' => {
                    flush(&mut atom, &mut tokens);
                    tokens.push((line_no, Token::LParen));
                }
                ')' => {
                    flush(&mut atom, &mut tokens);
                    tokens.push((line_no, Token::RParen));
                }
                ',' => {
                    flush(&mut atom, &mut tokens);
                    tokens.push((line_no, Token::Comma));
                }
                c if c.is_whitespace() => flush(&mut atom, &mut tokens),
                c => atom.push(c),
            }
        }
        flush(&mut atom, &mut tokens);
    }
    Ok(tokens)
}

/// One parenthesized group: atoms and nested groups, comma-separated.
#[derive(Clone, PartialEq, Eq, Debug)]
enum Element {
    Atom(usize, String),
    Tuple(usize, Vec<Element>),
}

fn parse_tuple(tokens: &[(usize, Token)], pos: &mut usize) -> Result<Element, ParseError> {
    let (open_line, ref tok) = tokens[*pos];
    debug_assert_eq!(*tok, Token::LParen);
    *pos += 1;
    let mut elements = Vec::new();
    let mut want_element = true;
    loop {
        let Some((line, token)) = tokens.get(*pos) else {
            return Err(err(
                open_line,
                ParseErrorKind::Syntax("unclosed `(`".into()),
            ));
        };
        match token {
            Token::LParen => {
                if !want_element {
                    return Err(err(*line, ParseErrorKind::Syntax("missing `,`".into())));
                }
                elements.push(parse_tuple(tokens, pos)?);
                want_element = false;
            }
            Token::Atom(text) => {
                if !want_element {
                    return Err(err(*line, ParseErrorKind::Syntax("missing `,`".into())));
                }
                elements.push(Element::Atom(*line, text.clone()));
                *pos += 1;
                want_element = false;
            }
            Token::Comma => {
                if want_element {
                    return Err(err(
                        *line,
                        ParseErrorKind::Syntax("empty tuple element".into()),
                    ));
                }
                *pos += 1;
                want_element = true;
            }
            Token::RParen => {
                if want_element && !elements.is_empty() {
                    return Err(err(*line, ParseErrorKind::Syntax("trailing `,`".into())));
                }
                *pos += 1;
                return Ok(Element::Tuple(open_line, elements));
            }
        }
    }
}

/// Resolution context: declared state labels and the machine alphabet.
struct Names<'a> {
    state_labels: &'a [String],
    alphabet: &'a [Symbol],
}

impl Names<'_> {
    fn state_ref(&self, line: usize, text: &str) -> Result<StateRef, ParseError> {
        if text == "|Q|" {
            return Ok(StateRef::QRel(0));
        }
        if let Some(offset) = text.strip_prefix("|Q|-") {
            let c: u32 = offset.parse().map_err(|_| {
                err(
                    line,
                    ParseErrorKind::Syntax(format!("bad relative state `{text}`")),
                )
            })?;
            return Ok(StateRef::QRel(c));
        }
        if let Some(at) = self.state_labels.iter().position(|l| l == text) {
            return Ok(StateRef::Concrete(at as u32));
        }
        if text.bytes().all(|b| b.is_ascii_digit()) && !text.is_empty() {
            let id: u32 = text.parse().map_err(|_| {
                err(
                    line,
                    ParseErrorKind::Syntax(format!("state id `{text}` out of range")),
                )
            })?;
            return Ok(StateRef::Concrete(id));
        }
        Err(err(
            line,
            ParseErrorKind::UnknownStateLabel(text.to_string()),
        ))
    }

    fn symbol(&self, line: usize, text: &str) -> Result<Symbol, ParseError> {
        let sym = self
            .alphabet
            .iter()
            .find(|s| s.as_str() == text)
            .cloned()
            .ok_or_else(|| err(line, ParseErrorKind::UnknownSymbol(text.to_string())))?;
        Ok(sym)
    }

    fn mv(&self, line: usize, text: &str) -> Result<Move, ParseError> {
        match text {
            "-1" => Ok(Move::Left),
            "0" => Ok(Move::Stay),
            "1" => Ok(Move::Right),
            other => Err(err(line, ParseErrorKind::BadMove(other.to_string()))),
        }
    }

    fn atom<'e>(&self, element: &'e Element) -> Result<(usize, &'e str), ParseError> {
        match element {
            Element::Atom(line, text) => Ok((*line, text)),
            Element::Tuple(line, _) => Err(err(
                *line,
                ParseErrorKind::Syntax(
                    "nested instruction only allowed as the last element".into(),
                ),
            )),
        }
    }

    fn instruction(&self, element: &Element, nested: bool) -> Result<Instruction, ParseError> {
        let Element::Tuple(line, elements) = element else {
            let (line, _) = self.atom(element)?;
            return Err(err(line, ParseErrorKind::Syntax("expected `(`".into())));
        };
        let line = *line;
        match elements.len() {
            4 => {
                let (l0, a0) = self.atom(&elements[0])?;
                let (l1, a1) = self.atom(&elements[1])?;
                let (l2, a2) = self.atom(&elements[2])?;
                let (l3, a3) = self.atom(&elements[3])?;
                Ok(Instruction::random(
                    self.state_ref(l0, a0)?,
                    self.symbol(l1, a1)?,
                    self.state_ref(l2, a2)?,
                    self.mv(l3, a3)?,
                ))
            }
            5 => {
                let (l0, a0) = self.atom(&elements[0])?;
                let (l1, a1) = self.atom(&elements[1])?;
                let (l2, a2) = self.atom(&elements[2])?;
                let (l3, a3) = self.atom(&elements[3])?;
                let (l4, a4) = self.atom(&elements[4])?;
                Ok(Instruction::standard(
                    self.state_ref(l0, a0)?,
                    self.symbol(l1, a1)?,
                    self.state_ref(l2, a2)?,
                    self.symbol(l3, a3)?,
                    self.mv(l4, a4)?,
                ))
            }
            6 => {
                if nested {
                    return Err(err(line, ParseErrorKind::NestedMeta));
                }
                let (l0, a0) = self.atom(&elements[0])?;
                let (l1, a1) = self.atom(&elements[1])?;
                let (l2, a2) = self.atom(&elements[2])?;
                let (l3, a3) = self.atom(&elements[3])?;
                let (l4, a4) = self.atom(&elements[4])?;
                let update = self.instruction(&elements[5], true)?;
                Instruction::meta(
                    self.state_ref(l0, a0)?,
                    self.symbol(l1, a1)?,
                    self.state_ref(l2, a2)?,
                    self.symbol(l3, a3)?,
                    self.mv(l4, a4)?,
                    update,
                )
                .map_err(|_| err(line, ParseErrorKind::NestedMeta))
            }
            n => Err(err(line, ParseErrorKind::BadArity(n))),
        }
    }
}

struct Headers {
    alphabet_extras: Vec<Symbol>,
    state_labels: Vec<String>,
    start: (usize, String),
    halts: Vec<(usize, String)>,
}

fn split_values(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|v| !v.is_empty())
}

fn collect_headers(lines: &[(usize, &str)]) -> Result<(Headers, Vec<(usize, String)>), ParseError> {
    let mut alphabet_extras: Option<(usize, Vec<Symbol>)> = None;
    let mut state_labels: Option<(usize, Vec<String>)> = None;
    let mut start: Option<(usize, String)> = None;
    let mut halts: Vec<(usize, String)> = Vec::new();
    let mut body: Vec<(usize, String)> = Vec::new();

    for &(line_no, raw) in lines {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let header = if line.starts_with('(') {
            None
        } else {
            line.split_once(':')
        };
        match header {
            Some((key, rest)) => {
                let key = key.trim();
                match key {
                    "alphabet" => {
                        if alphabet_extras.is_some() {
                            return Err(err(
                                line_no,
                                ParseErrorKind::DuplicateHeader("alphabet".into()),
                            ));
                        }
                        alphabet_extras =
                            Some((line_no, split_values(rest).map(Symbol::new).collect()));
                    }
                    "states" => {
                        if state_labels.is_some() {
                            return Err(err(
                                line_no,
                                ParseErrorKind::DuplicateHeader("states".into()),
                            ));
                        }
                        state_labels =
                            Some((line_no, split_values(rest).map(String::from).collect()));
                    }
                    "start" => {
                        if start.is_some() {
                            return Err(err(
                                line_no,
                                ParseErrorKind::DuplicateHeader("start".into()),
                            ));
                        }
                        let mut values = split_values(rest);
                        let value = values.next().ok_or_else(|| {
                            err(
                                line_no,
                                ParseErrorKind::Syntax("empty `start:` header".into()),
                            )
                        })?;
                        if values.next().is_some() {
                            return Err(err(
                                line_no,
                                ParseErrorKind::Syntax("`start:` names one state".into()),
                            ));
                        }
                        start = Some((line_no, value.to_string()));
                    }
                    "halt" => {
                        for value in split_values(rest) {
                            halts.push((line_no, value.to_string()));
                        }
                    }
                    other => {
                        return Err(err(
                            line_no,
                            ParseErrorKind::Syntax(format!("unknown header `{other}:`")),
                        ))
                    }
                }
            }
            None => body.push((line_no, line.to_string())),
        }
    }

    let state_labels =
        state_labels.ok_or_else(|| err(0, ParseErrorKind::MissingHeader("states".into())))?;
    let start = start.ok_or_else(|| err(0, ParseErrorKind::MissingHeader("start".into())))?;
    Ok((
        Headers {
            alphabet_extras: alphabet_extras.map(|(_, v)| v).unwrap_or_default(),
            state_labels: state_labels.1,
            start,
            halts,
        },
        body,
    ))
}

/// Parses a machine-definition file.
pub fn parse_machine(text: &str) -> Result<MachineDef, ParseError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line))
        .collect();
    let (headers, body) = collect_headers(&lines)?;

    let mut alphabet = alloc::vec![Symbol::zero(), Symbol::one(), Symbol::blank()];
    for extra in &headers.alphabet_extras {
        if !alphabet.contains(extra) {
            alphabet.push(extra.clone());
        }
    }
    let names = Names {
        state_labels: &headers.state_labels,
        alphabet: &alphabet,
    };

    let resolve_declared = |(line, label): &(usize, String)| -> Result<u32, ParseError> {
        match names.state_ref(*line, label)? {
            StateRef::Concrete(id) if (id as usize) < headers.state_labels.len() => Ok(id),
            StateRef::Concrete(_) | StateRef::QRel(_) => {
                Err(err(*line, ParseErrorKind::UnknownStateLabel(label.clone())))
            }
        }
    };
    let start = resolve_declared(&headers.start)?;
    let mut halt_states = BTreeSet::new();
    for halt in &headers.halts {
        halt_states.insert(resolve_declared(halt)?);
    }

    let body_lines: Vec<(usize, &str)> = body
        .iter()
        .map(|(line, text)| (*line, text.as_str()))
        .collect();
    let tokens = tokenize(&body_lines)?;
    let mut instructions = Vec::new();
    let mut inst_lines = Vec::new();
    let mut pos = 0;
    while pos < tokens.len() {
        let (line, ref token) = tokens[pos];
        if *token != Token::LParen {
            return Err(err(line, ParseErrorKind::Syntax("expected `(`".into())));
        }
        let element = parse_tuple(&tokens, &mut pos)?;
        instructions.push(names.instruction(&element, false)?);
        inst_lines.push(line);
    }

    if let Err(pairs) = validate_uniqueness(&instructions) {
        let (first, second) = pairs[0];
        return Err(err(
            inst_lines[second],
            ParseErrorKind::Machine(format!(
                "instruction shares its (state, scanned symbol) pair with the one on line {}",
                inst_lines[first]
            )),
        ));
    }

    MachineDef::new(
        headers.state_labels.clone(),
        headers.alphabet_extras.clone(),
        start,
        halt_states,
        instructions,
    )
    .map_err(|e| err(0, ParseErrorKind::Machine(e.to_string())))
}

/// Serializes a machine so that [`parse_machine`] reconstructs it exactly.
pub fn serialize_machine(machine: &MachineDef) -> String {
    let mut out = String::new();
    if !machine.alphabet_extras().is_empty() {
        out.push_str("alphabet:");
        for sym in machine.alphabet_extras() {
            out.push(' ');
            out.push_str(sym.as_str());
        }
        out.push('\n');
    }
    out.push_str("states:");
    for name in machine.state_names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    out.push_str("start: ");
    out.push_str(&machine.state_name(machine.start()));
    out.push('\n');
    if !machine.halt_states().is_empty() {
        out.push_str("halt:");
        for halt in machine.halt_states() {
            out.push(' ');
            out.push_str(&machine.state_name(*halt));
        }
        out.push('\n');
    }
    out.push('\n');
    for inst in machine.instructions() {
        out.push_str(&machine.render_instruction(inst));
        out.push('\n');
    }
    out
}

/// Parses one instruction in trace syntax against a machine's names.
///
/// Accepts everything [`MachineDef::render_instruction_with_bit`] emits; a
/// `0_qr`/`1_qr` in the write position of a five-element tuple denotes an
/// executed random instruction and is returned as the measured bit.
pub fn parse_trace_instruction(
    text: &str,
    machine: &MachineDef,
) -> Result<(Instruction, Option<u8>), ParseError> {
    let lines = [(1usize, text)];
    let tokens = tokenize(&lines)?;
    if tokens.is_empty() || tokens[0].1 != Token::LParen {
        return Err(err(1, ParseErrorKind::Syntax("expected `(`".into())));
    }
    let mut pos = 0;
    let element = parse_tuple(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(err(
            1,
            ParseErrorKind::Syntax("trailing input after tuple".into()),
        ));
    }
    let names = Names {
        state_labels: machine.state_names(),
        alphabet: machine.alphabet(),
    };

    // A `b_qr` write marks an executed random instruction.
    if let Element::Tuple(line, ref elements) = element {
        if elements.len() == 5 {
            if let Element::Atom(_, ref w) = elements[3] {
                if let Some(bit_text) = w.strip_suffix("_qr") {
                    let bit = match bit_text {
                        "0" => 0,
                        "1" => 1,
                        other => {
                            return Err(err(
                                line,
                                ParseErrorKind::Syntax(format!("bad random bit `{other}_qr`")),
                            ))
                        }
                    };
                    let (l0, a0) = names.atom(&elements[0])?;
                    let (l1, a1) = names.atom(&elements[1])?;
                    let (l2, a2) = names.atom(&elements[2])?;
                    let (l4, a4) = names.atom(&elements[4])?;
                    let inst = Instruction::random(
                        names.state_ref(l0, a0)?,
                        names.symbol(l1, a1)?,
                        names.state_ref(l2, a2)?,
                        names.mv(l4, a4)?,
                    );
                    return Ok((inst, Some(bit)));
                }
            }
        }
    }
    Ok((names.instruction(&element, false)?, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines;
    use alloc::vec;

    #[test]
    fn parses_collatz_listing() {
        let m = parse_machine(machines::COLLATZ).unwrap();
        assert_eq!(m.state_count(), 16);
        assert_eq!(m.state_name(14), "p");
        assert_eq!(m.state_name(15), "q");
        assert_eq!(m.start(), 15);
        assert_eq!(m.halt_states().iter().copied().collect::<Vec<_>>(), vec![7]);
        assert_eq!(m.instructions().len(), 45);
        assert!(m.is_standard_machine());
        assert_eq!(m.alphabet().len(), 4);
    }

    #[test]
    fn parses_qx_listing() {
        let m = parse_machine(machines::QX).unwrap();
        assert_eq!(m.state_count(), 9);
        assert_eq!(m.instructions().len(), 15);
        assert_eq!(m.start(), 0);
        assert_eq!(m.halt_states().iter().copied().collect::<Vec<_>>(), vec![1]);
        assert!(m.has_random_instructions());
        // The two self-reflective rules parse as relative references.
        let symbolic = m
            .instructions()
            .iter()
            .filter(|i| i.q() == StateRef::QRel(1))
            .count();
        assert_eq!(symbolic, 2);
    }

    #[test]
    fn parses_random_walk_and_example_machines() {
        let m = parse_machine(machines::RANDOM_WALK).unwrap();
        assert_eq!(m.state_count(), 8);
        assert_eq!(m.instructions().len(), 21);
        let m = parse_machine(machines::EXAMPLE22).unwrap();
        assert_eq!(m.state_count(), 1);
        assert_eq!(m.instructions().len(), 3);
        assert!(m.halt_states().is_empty());
    }

    #[test]
    fn tuples_may_span_lines_with_inline_comments() {
        let text = "states: 0 1\nstart: 0\n(0, #,\n   1,   ;; split across lines\n   #, 1)\n";
        let m = parse_machine(text).unwrap();
        assert_eq!(m.instructions().len(), 1);
        assert_eq!(m.instructions()[0].next(), StateRef::Concrete(1));
    }

    #[test]
    fn arity_three_is_rejected() {
        let text = "states: 0\nstart: 0\n(0, #, 0)\n";
        let e = parse_machine(text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::BadArity(3));
        assert_eq!(e.line, 3);
    }

    #[test]
    fn unknown_symbol_and_label_are_reported() {
        let text = "states: 0\nstart: 0\n(0, Z, 0, #, 1)\n";
        let e = parse_machine(text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownSymbol("Z".into()));

        let text = "states: 0\nstart: 0\n(zap, #, 0, #, 1)\n";
        let e = parse_machine(text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownStateLabel("zap".into()));
    }

    #[test]
    fn bad_move_is_reported() {
        let text = "states: 0\nstart: 0\n(0, #, 0, #, 2)\n";
        let e = parse_machine(text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::BadMove("2".into()));
    }

    #[test]
    fn uniqueness_violation_names_both_lines() {
        let text = "states: 0 1\nstart: 0\n(0, #, 0, #, 1)\n(0, #, 1, #, 1)\n";
        let e = parse_machine(text).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(matches!(e.kind, ParseErrorKind::Machine(_)));
    }

    #[test]
    fn next_state_beyond_count_is_allowed() {
        let text = "states: 0\nstart: 0\n(0, #, 7, #, 1)\n";
        let m = parse_machine(text).unwrap();
        assert_eq!(m.instructions()[0].next(), StateRef::Concrete(7));
    }

    #[test]
    fn round_trips_bundled_machines() {
        for source in [
            machines::COLLATZ,
            machines::RANDOM_WALK,
            machines::QX,
            machines::EXAMPLE22,
        ] {
            let m = parse_machine(source).unwrap();
            let again = parse_machine(&serialize_machine(&m)).unwrap();
            assert_eq!(m, again);
        }
    }

    #[test]
    fn serializes_relative_refs_literally() {
        let m = parse_machine(machines::QX).unwrap();
        let text = serialize_machine(&m);
        assert!(text.contains("(|Q|-1, a, x, a, 0)"));
        assert!(text.contains("(|Q|-1, #, x, #, 0)"));
        assert!(text.contains("(w, a, |Q|, a, 1, (|Q|-1, a, |Q|, a, 1))"));
    }

    #[test]
    fn trace_instruction_with_qr_bit() {
        let m = parse_machine(machines::RANDOM_WALK).unwrap();
        let (inst, bit) = parse_trace_instruction("(0, #,  0, 0_qr, 0)", &m).unwrap();
        assert_eq!(bit, Some(0));
        assert_eq!(
            inst,
            Instruction::random(
                StateRef::Concrete(0),
                Symbol::blank(),
                StateRef::Concrete(0),
                Move::Stay
            )
        );
        let (inst, bit) = parse_trace_instruction("(0, 0, 1, 0, -1)", &m).unwrap();
        assert_eq!(bit, None);
        assert!(matches!(inst, Instruction::Standard { .. }));
    }

    proptest::proptest! {
        /// Generated machines survive a serialize → parse round trip.
        #[test]
        fn round_trip_on_generated_machines(
            tuples in proptest::collection::vec(
                (0u32..5, 0u8..3, 0u32..6, 0u8..3, -1i64..=1, proptest::bool::ANY, 0u32..3),
                0..25,
            ),
            halts in proptest::collection::vec(0u32..5, 0..3),
        ) {
            let symbol = |k: u8| match k {
                0 => Symbol::blank(),
                1 => Symbol::zero(),
                _ => Symbol::one(),
            };
            let mut instructions: Vec<Instruction> = Vec::new();
            for (q, a, r, w, mv, random, qrel) in tuples {
                let q = if qrel == 1 { StateRef::QRel(q % 3) } else { StateRef::Concrete(q) };
                let next = if qrel == 2 { StateRef::QRel(r % 3) } else { StateRef::Concrete(r) };
                let inst = if random {
                    Instruction::random(q, symbol(a), next, Move::from_delta(mv).unwrap())
                } else {
                    Instruction::standard(q, symbol(a), next, symbol(w), Move::from_delta(mv).unwrap())
                };
                if instructions.iter().all(|other| other.key() != inst.key()) {
                    instructions.push(inst);
                }
            }
            let machine = MachineDef::new(
                vec!["s0".into(), "s1".into(), "s2".into(), "s3".into(), "s4".into()],
                vec![],
                0,
                halts.into_iter().collect(),
                instructions,
            ).unwrap();
            let text = serialize_machine(&machine);
            let reparsed = parse_machine(&text).unwrap();
            proptest::prop_assert_eq!(machine, reparsed);
        }
    }
}
