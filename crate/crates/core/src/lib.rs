//! Prime-digit lattice walks.
//!
//! Every prime other than 2 and 5 ends in 1, 3, 7 or 9. Reading those
//! terminal digits in order and mapping each one to a lattice direction gives
//! a deterministic walk on the square grid. This crate holds the pure
//! algorithmic pieces:
//!
//! - [`prime_stream`]: segmented sieve and the ordered terminal-digit stream.
//! - [`walk`]: direction rules, the walk loop and a seeded uniform baseline.
//! - [`grid`]: visit counts, covered area and recurrence reports.
//! - [`runs`]: run lengths of consecutive primes sharing a terminal digit.
//! - [`benford`]: leading-digit statistics.
//! - [`polar`]: polar increments of a trajectory and box counting.
//! - [`regression`]: least-squares lines with slope standard errors.
//!
//! The crate is `no_std` and needs only `alloc`. Threads, files and the
//! command line live in the `primewalk` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod benford;
mod error;
pub mod grid;
pub mod polar;
pub mod prime_stream;
pub mod regression;
pub mod runs;
pub mod walk;

pub use error::{Error, Result};
pub use prime_stream::{PrimeDigitEvent, TerminalDigit};
pub use walk::{Direction, Position, WalkRule, WalkState};
