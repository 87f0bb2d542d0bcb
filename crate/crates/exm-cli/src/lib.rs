//! Std-side plumbing for the `exm` binary: bit-source construction from
//! command-line specs, the OS-entropy and remote-generator backends, and
//! trace/report rendering.

pub mod bits;
pub mod output;
pub mod qrng;
