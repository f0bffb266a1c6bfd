//! Driver for prime-digit lattice walks: threaded sieving, resumable runs,
//! CSV export and the `primewalk` command line.

pub mod checkpoint;
pub mod config;
mod error;
pub mod export;
pub mod pipeline;
pub mod session;

pub use config::{
    parse_count, Analyses, Analysis, OutputOptions, RuleChoice, RunConfig, RunIdentity,
};
pub use error::{CheckpointError, RunError};
pub use pipeline::SievePool;
pub use session::{run, RunOutcome, Session};
