//! Command line, wire formats and HTTP API for the quantum Monty Hall engine
//! in [`qmh`].
//!
//! The HTTP API is what the browser client talks to; the command line
//! exposes the same operations plus an interactive text game.

pub mod cli;
pub mod error;
pub mod service;
pub mod session;
pub mod wire;

pub use error::{ApiError, ErrorKind};
