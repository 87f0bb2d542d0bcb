//! Bit-source specs: `seed:<n>`, `file:<path>`, `os`, `qrng`.

use std::fmt;
use std::fs;

use exm_core::random::{BitSource, BitSourceError, ReplayBits, SeededBits};

use crate::qrng::RemoteBits;

/// Environment variables configuring the remote generator backend.
pub const ENV_QRNG_URL: &str = "EXM_QRNG_URL";
pub const ENV_QRNG_TOKEN: &str = "EXM_QRNG_TOKEN";

#[derive(Debug)]
pub enum BitSpecError {
    UnknownSpec(String),
    BadSeed(String),
    File { path: String, message: String },
    BadBitChar { path: String, found: char },
    MissingEndpoint,
}

impl fmt::Display for BitSpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitSpecError::UnknownSpec(spec) => write!(
                f,
                "unknown bit source `{spec}` (expected seed:<n>, file:<path>, os, or qrng)"
            ),
            BitSpecError::BadSeed(text) => write!(f, "bad seed `{text}`"),
            BitSpecError::File { path, message } => write!(f, "bits file `{path}`: {message}"),
            BitSpecError::BadBitChar { path, found } => {
                write!(
                    f,
                    "bits file `{path}` contains `{found}`; only 0, 1, and whitespace"
                )
            }
            BitSpecError::MissingEndpoint => {
                write!(f, "bit source `qrng` requires {ENV_QRNG_URL} to be set")
            }
        }
    }
}

/// Builds a bit source from a command-line spec.
pub fn bit_source_from_spec(spec: &str) -> Result<Box<dyn BitSource>, BitSpecError> {
    if let Some(seed) = spec.strip_prefix("seed:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| BitSpecError::BadSeed(seed.to_string()))?;
        return Ok(Box::new(SeededBits::new(seed)));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = fs::read_to_string(path).map_err(|e| BitSpecError::File {
            path: path.to_string(),
            message: e.to_string(),
        })?;
        let replay = ReplayBits::from_text(&text).map_err(|found| BitSpecError::BadBitChar {
            path: path.to_string(),
            found,
        })?;
        return Ok(Box::new(replay));
    }
    match spec {
        "os" => Ok(Box::new(OsEntropyBits::new())),
        "qrng" => {
            let url = std::env::var(ENV_QRNG_URL).map_err(|_| BitSpecError::MissingEndpoint)?;
            let token = std::env::var(ENV_QRNG_TOKEN).ok();
            Ok(Box::new(RemoteBits::new(url, token)))
        }
        other => Err(BitSpecError::UnknownSpec(other.to_string())),
    }
}

/// Unbiased bits from the operating system's entropy source, consumed
/// most-significant bit first per drawn byte.
pub struct OsEntropyBits {
    buffer: [u8; 64],
    byte: usize,
    bit: u8,
    consumed: u64,
    filled: bool,
}

impl OsEntropyBits {
    pub fn new() -> Self {
        OsEntropyBits {
            buffer: [0; 64],
            byte: 0,
            bit: 0,
            consumed: 0,
            filled: false,
        }
    }
}

impl Default for OsEntropyBits {
    fn default() -> Self {
        Self::new()
    }
}

impl BitSource for OsEntropyBits {
    fn next_bit(&mut self) -> Result<u8, BitSourceError> {
        if !self.filled || self.byte == self.buffer.len() {
            getrandom::fill(&mut self.buffer)
                .map_err(|e| BitSourceError::Unavailable(e.to_string()))?;
            self.byte = 0;
            self.bit = 0;
            self.filled = true;
        }
        let bit = (self.buffer[self.byte] >> (7 - self.bit)) & 1;
        self.bit += 1;
        if self.bit == 8 {
            self.bit = 0;
            self.byte += 1;
        }
        self.consumed += 1;
        Ok(bit)
    }

    fn bits_consumed(&self) -> u64 {
        self.consumed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_spec_is_deterministic() {
        let mut a = bit_source_from_spec("seed:9").unwrap();
        let mut b = bit_source_from_spec("seed:9").unwrap();
        for _ in 0..128 {
            assert_eq!(a.next_bit().unwrap(), b.next_bit().unwrap());
        }
    }

    #[test]
    fn file_spec_replays_and_reports_junk() {
        let dir = std::env::temp_dir();
        let path = dir.join("exm_bits_ok.txt");
        fs::write(&path, "1 10\n10").unwrap();
        let spec = format!("file:{}", path.display());
        let mut source = bit_source_from_spec(&spec).unwrap();
        let mut bits = Vec::new();
        while let Ok(b) = source.next_bit() {
            bits.push(b);
        }
        assert_eq!(bits, vec![1, 1, 0, 1, 0]);

        let path = dir.join("exm_bits_bad.txt");
        fs::write(&path, "10z").unwrap();
        let spec = format!("file:{}", path.display());
        assert!(matches!(
            bit_source_from_spec(&spec),
            Err(BitSpecError::BadBitChar { found: 'z', .. })
        ));
    }

    #[test]
    fn unknown_spec_is_rejected() {
        assert!(matches!(
            bit_source_from_spec("dice"),
            Err(BitSpecError::UnknownSpec(_))
        ));
    }

    #[test]
    fn os_entropy_supplies_bits() {
        let mut source = OsEntropyBits::new();
        let mut ones = 0u32;
        for _ in 0..4096 {
            ones += source.next_bit().unwrap() as u32;
        }
        assert_eq!(source.bits_consumed(), 4096);
        // Crude sanity: not frozen at either extreme.
        assert!(ones > 1024 && ones < 3072, "ones = {ones}");
    }
}
