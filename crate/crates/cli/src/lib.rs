//! Library side of the `lpsim` binary: scenario schemas, run orchestration,
//! and the error-to-exit-code mapping. Kept as a lib so integration tests
//! can parse the same summary and report types the binary writes.

pub mod config;
pub mod error;
pub mod run;
