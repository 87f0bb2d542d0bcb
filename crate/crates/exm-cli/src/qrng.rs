//! Remote quantum random number generator client.
//!
//! The service contract is a GET returning a small JSON body with an array
//! of integers 0–255 — either bare (`[165, 23]`) or under a `"data"` key
//! (`{"data": [165, 23], …}`).  Each byte expands to eight bits, most
//! significant first.  Transient failures (network errors, 5xx) are retried
//! with exponential backoff; the client never fabricates bits locally.
//!
//! The request asks for `length=<n>` bytes via query parameter and sends
//! `Authorization: Bearer <token>` when a token is configured.  This build
//! speaks plain HTTP; put a local proxy in front of TLS-only services.

use std::collections::VecDeque;
use std::fmt;
use std::time::Duration;

use exm_core::random::{BitSource, BitSourceError};

/// How a remote fetch failed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RemoteError {
    /// Network or server failure after all retries.
    Unreachable(String),
    /// The response decoded but was not the expected payload.
    Protocol(String),
    /// `n = 0` requested.
    EmptyRequest,
}

impl fmt::Display for RemoteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RemoteError::Unreachable(msg) => write!(f, "remote generator unreachable: {msg}"),
            RemoteError::Protocol(msg) => write!(f, "remote generator protocol error: {msg}"),
            RemoteError::EmptyRequest => f.write_str("requested zero bits"),
        }
    }
}

impl RemoteError {
    /// Marker-prefixed message for transport through [`BitSourceError`];
    /// the binary maps the marker back onto its exit codes.
    pub fn into_source_error(self) -> BitSourceError {
        let marker = match &self {
            RemoteError::Unreachable(_) => "remote-unreachable",
            RemoteError::Protocol(_) | RemoteError::EmptyRequest => "remote-protocol",
        };
        BitSourceError::Unavailable(format!("{marker}: {self}"))
    }
}

/// Buffering client for a remote bit service.
pub struct RemoteBits {
    url: String,
    token: Option<String>,
    agent: ureq::Agent,
    buffer: VecDeque<u8>,
    consumed: u64,
    retries: u32,
    backoff: Duration,
    /// Bytes fetched per request.
    batch_bytes: usize,
}

impl RemoteBits {
    pub fn new(url: String, token: Option<String>) -> Self {
        Self::with_policy(url, token, 3, Duration::from_millis(200))
    }

    /// Retry/backoff knobs exposed for tests and impatient callers.
    pub fn with_policy(
        url: String,
        token: Option<String>,
        retries: u32,
        backoff: Duration,
    ) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(10)))
            .build()
            .into();
        RemoteBits {
            url,
            token,
            agent,
            buffer: VecDeque::new(),
            consumed: 0,
            retries,
            backoff,
            batch_bytes: 64,
        }
    }

    fn request_url(&self, bytes: usize) -> String {
        let separator = if self.url.contains('?') { '&' } else { '?' };
        format!("{}{}length={}&type=uint8", self.url, separator, bytes)
    }

    fn fetch_once(&self, bytes: usize) -> Result<Vec<u8>, RemoteError> {
        let url = self.request_url(bytes);
        let mut request = self.agent.get(&url);
        if let Some(token) = &self.token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .call()
            .map_err(|e| RemoteError::Unreachable(e.to_string()))?;
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| RemoteError::Unreachable(e.to_string()))?;
        decode_payload(&text)
    }

    /// Fetches exactly `n` bits, buffering any surplus.
    pub fn fetch_bits(&mut self, n: usize) -> Result<Vec<u8>, RemoteError> {
        if n == 0 {
            return Err(RemoteError::EmptyRequest);
        }
        while self.buffer.len() < n {
            let missing_bits = n - self.buffer.len();
            let bytes = missing_bits.div_ceil(8).max(self.batch_bytes);
            let payload = self.fetch_with_retries(bytes)?;
            for byte in payload {
                for k in (0..8).rev() {
                    self.buffer.push_back((byte >> k) & 1);
                }
            }
        }
        Ok((0..n).map(|_| self.buffer.pop_front().unwrap()).collect())
    }

    fn fetch_with_retries(&self, bytes: usize) -> Result<Vec<u8>, RemoteError> {
        let mut delay = self.backoff;
        let mut last = None;
        for attempt in 0..=self.retries {
            match self.fetch_once(bytes) {
                Ok(payload) => {
                    if payload.is_empty() {
                        return Err(RemoteError::Protocol("empty byte array".into()));
                    }
                    return Ok(payload);
                }
                // Protocol errors are not transient; report immediately.
                Err(RemoteError::Protocol(msg)) => return Err(RemoteError::Protocol(msg)),
                Err(e) => last = Some(e),
            }
            if attempt < self.retries {
                std::thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(last.unwrap_or_else(|| RemoteError::Unreachable("no attempts made".into())))
    }
}

fn decode_payload(text: &str) -> Result<Vec<u8>, RemoteError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| RemoteError::Protocol(format!("bad JSON: {e}")))?;
    let array = match &value {
        serde_json::Value::Array(items) => items,
        serde_json::Value::Object(map) => map
            .get("data")
            .and_then(|d| d.as_array())
            .ok_or_else(|| RemoteError::Protocol("no `data` array".into()))?,
        _ => return Err(RemoteError::Protocol("expected array or object".into())),
    };
    array
        .iter()
        .map(|item| {
            item.as_u64()
                .filter(|v| *v <= 255)
                .map(|v| v as u8)
                .ok_or_else(|| RemoteError::Protocol(format!("byte out of range: {item}")))
        })
        .collect()
}

impl BitSource for RemoteBits {
    fn next_bit(&mut self) -> Result<u8, BitSourceError> {
        if self.buffer.is_empty() {
            let batch = self.batch_bytes;
            self.fetch_with_retries(batch)
                .map(|payload| {
                    for byte in payload {
                        for k in (0..8).rev() {
                            self.buffer.push_back((byte >> k) & 1);
                        }
                    }
                })
                .map_err(RemoteError::into_source_error)?;
        }
        let bit = self.buffer.pop_front().expect("buffer refilled");
        self.consumed += 1;
        Ok(bit)
    }

    fn bits_consumed(&self) -> u64 {
        self.consumed
    }
}
