//! Bit sources and the statistical self-tests applied to them.
//!
//! A [`BitSource`] answers one unbiased bit per call.  The model assumes a
//! physical generator whose draws are fair coin flips with no memory; those
//! assumptions cannot be proved from finitely many bits, so the checks here
//! ([`monobit_frequency`], [`sign_change_count`]) are falsification tests
//! with statistical bands, not certificates.
//!
//! Two backends live in this crate: [`SeededBits`] (a pinned deterministic
//! generator, so recorded runs stay reproducible across platforms and
//! releases) and [`ReplayBits`] (a recorded bit sequence, which determinizes
//! any run containing random instructions).  OS-entropy and remote-generator
//! backends are std concerns and live in the CLI crate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;

/// Why a bit source failed to produce a bit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BitSourceError {
    /// A replay source ran past the end of its recorded sequence.
    Exhausted,
    /// The backend cannot supply bits (network failure, closed device, …).
    Unavailable(String),
}

impl fmt::Display for BitSourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitSourceError::Exhausted => f.write_str("replay bit sequence exhausted"),
            BitSourceError::Unavailable(msg) => write!(f, "bit source unavailable: {msg}"),
        }
    }
}

/// Supplier of unbiased bits, one per call.
pub trait BitSource {
    /// Returns the next bit, 0 or 1.
    fn next_bit(&mut self) -> Result<u8, BitSourceError>;

    /// Total bits handed out so far.
    fn bits_consumed(&self) -> u64;
}

/// Draws `n` bits into a vector.
pub fn collect_bits(source: &mut dyn BitSource, n: usize) -> Result<Vec<u8>, BitSourceError> {
    let mut bits = Vec::with_capacity(n);
    for _ in 0..n {
        bits.push(source.next_bit()?);
    }
    Ok(bits)
}

/// The pinned deterministic generator behind `seed:` bit specs.
///
/// This is SplitMix64 (Steele–Lea–Flood update with the golden-gamma
/// increment); each 64-bit output is consumed most-significant bit first.
/// The algorithm is fixed permanently: recorded traces and goldens depend on
/// the exact stream.
#[derive(Clone, Debug)]
pub struct SeededBits {
    state: u64,
    block: u64,
    remaining: u8,
    consumed: u64,
}

impl SeededBits {
    pub fn new(seed: u64) -> Self {
        SeededBits {
            state: seed,
            block: 0,
            remaining: 0,
            consumed: 0,
        }
    }

    fn next_block(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
}

impl BitSource for SeededBits {
    fn next_bit(&mut self) -> Result<u8, BitSourceError> {
        if self.remaining == 0 {
            self.block = self.next_block();
            self.remaining = 64;
        }
        self.remaining -= 1;
        self.consumed += 1;
        Ok(((self.block >> self.remaining) & 1) as u8)
    }

    fn bits_consumed(&self) -> u64 {
        self.consumed
    }
}

/// Replays a recorded bit sequence; drawing past the end is an error, never
/// a wraparound.
#[derive(Clone, Debug)]
pub struct ReplayBits {
    bits: Vec<u8>,
    cursor: usize,
}

impl ReplayBits {
    /// Panics if any element is not 0 or 1; use [`ReplayBits::from_text`]
    /// for unvalidated input.
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|b| *b <= 1), "replay bits must be 0 or 1");
        ReplayBits { bits, cursor: 0 }
    }

    /// Reads a bit sequence from text: `0` and `1` count, all whitespace is
    /// ignored, anything else is reported.
    pub fn from_text(text: &str) -> Result<Self, char> {
        let mut bits = Vec::new();
        for ch in text.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                c => return Err(c),
            }
        }
        Ok(ReplayBits::new(bits))
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.cursor
    }
}

impl BitSource for ReplayBits {
    fn next_bit(&mut self) -> Result<u8, BitSourceError> {
        let bit = *self
            .bits
            .get(self.cursor)
            .ok_or(BitSourceError::Exhausted)?;
        self.cursor += 1;
        Ok(bit)
    }

    fn bits_consumed(&self) -> u64 {
        self.cursor as u64
    }
}

/// A source that always fails; the engine uses it for machines that contain
/// no random instructions.
#[derive(Clone, Copy, Default, Debug)]
pub struct NoBits;

impl BitSource for NoBits {
    fn next_bit(&mut self) -> Result<u8, BitSourceError> {
        Err(BitSourceError::Exhausted)
    }

    fn bits_consumed(&self) -> u64 {
        0
    }
}

/// Statistics over an empty bit sequence are undefined.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EmptyBitsError;

impl fmt::Display for EmptyBitsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("statistic requires a non-empty bit sequence")
    }
}

/// Fraction of ones, exactly.
pub fn monobit_frequency(bits: &[u8]) -> Result<Ratio<u64>, EmptyBitsError> {
    if bits.is_empty() {
        return Err(EmptyBitsError);
    }
    let ones = bits.iter().filter(|b| **b == 1).count() as u64;
    Ok(Ratio::new(ones, bits.len() as u64))
}

/// Number of sign changes of the ±1 partial-sum walk induced by `bits`.
///
/// Bit 1 steps +1, bit 0 steps −1.  A sign change happens where the walk
/// touches zero and then continues on the other side, so an all-ones
/// sequence has zero changes and the alternating sequence `0101…` — which
/// never leaves {−1, 0} — also has zero.
pub fn sign_change_count(bits: &[u8]) -> Result<u64, EmptyBitsError> {
    if bits.is_empty() {
        return Err(EmptyBitsError);
    }
    let mut sum: i64 = 0;
    let mut last_sign: i8 = 0;
    let mut changes = 0u64;
    for &bit in bits {
        sum += if bit == 1 { 1 } else { -1 };
        let sign = match sum {
            s if s > 0 => 1i8,
            s if s < 0 => -1,
            _ => 0,
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                changes += 1;
            }
            last_sign = sign;
        }
    }
    Ok(changes)
}

/// Central band of sign-change counts estimated from `walks` independent
/// seeded walks of `len` bits each.
///
/// Returns `(low, high)` covering all but `tail_per_mille`/1000 of the
/// simulated counts in each tail (`tail_per_mille = 5` gives the central
/// 99% band).  Deterministic for a fixed `seed`.
pub fn sign_change_band(walks: u32, len: usize, seed: u64, tail_per_mille: u32) -> (u64, u64) {
    assert!(walks > 0 && len > 0);
    let mut counts: Vec<u64> = Vec::with_capacity(walks as usize);
    for w in 0..walks {
        let mut source = SeededBits::new(seed.wrapping_add(w as u64));
        let mut sum: i64 = 0;
        let mut last_sign: i8 = 0;
        let mut changes = 0u64;
        for _ in 0..len {
            let bit = source.next_bit().expect("seeded source never fails");
            sum += if bit == 1 { 1 } else { -1 };
            let sign = match sum {
                s if s > 0 => 1i8,
                s if s < 0 => -1,
                _ => 0,
            };
            if sign != 0 {
                if last_sign != 0 && sign != last_sign {
                    changes += 1;
                }
                last_sign = sign;
            }
        }
        counts.push(changes);
    }
    counts.sort_unstable();
    let tail = (counts.len() as u64 * tail_per_mille as u64 / 1000) as usize;
    let high_at = counts.len() - 1 - tail;
    (counts[tail], counts[high_at])
}
