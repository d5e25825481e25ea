//! File formats, the benchmark harness and the subcommands behind the
//! `opnorm` binary.

pub mod bench;
pub mod commands;
pub mod formats;
pub mod oracle;
