//! File formats, tracing driver and command-line tool for IRS deployment planning.

pub mod cli;
pub mod error;
pub mod run;
pub mod scenario;
pub mod tables;
pub mod trace;
