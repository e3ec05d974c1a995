//! Command-line front end and file formats for the moving-frame Finsler
//! connection library (`ffc-core`).
//!
//! This crate owns everything with an IO surface: the JSON problem-config
//! format, the deterministic sampler, the CSV/JSONL emitters with their
//! `%.17g` contract, the builtin example problems, and the five
//! subcommands (`check`, `connection`, `geodesic`, `oracle-compare`,
//! `examples`). The binary in `main.rs` is a thin argument-parsing shell
//! over [`commands`].

#![warn(missing_docs)]

pub mod builtin;
pub mod commands;
pub mod config;
pub mod error;
pub mod gfmt;
pub mod rng;
pub mod sample;

pub use commands::Overrides;
pub use config::{Problem, ProblemConfig};
pub use error::CmdError;
