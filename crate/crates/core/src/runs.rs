//! Maximal runs of consecutive primes that share a terminal digit.

use alloc::vec::Vec;

use crate::prime_stream::{PrimeEvents, TerminalDigit};
use crate::walk::{Step, WalkObserver};
use crate::{Error, Result};

/// The run currently being extended.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunAccumulator {
    current: Option<(TerminalDigit, u64)>,
}

impl RunAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_open_run(run: Option<(TerminalDigit, u64)>) -> Self {
        Self {
            current: run.filter(|&(_, len)| len > 0),
        }
    }

    /// Open run as `(digit, length)`.
    pub fn open_run(&self) -> Option<(TerminalDigit, u64)> {
        self.current
    }

    #[inline]
    pub fn feed(&mut self, digit: TerminalDigit, hist: &mut RunHistogram) {
        match &mut self.current {
            Some((d, len)) if *d == digit => *len += 1,
            current => {
                if let Some((d, len)) = current.replace((digit, 1)) {
                    hist.add_run(d, len, 1);
                }
            }
        }
    }

    /// Commit the open run, if any.
    pub fn finalize(&mut self, hist: &mut RunHistogram) {
        if let Some((d, len)) = self.current.take() {
            hist.add_run(d, len, 1);
        }
    }
}

/// Occurrences of each `(digit, run length)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunHistogram {
    // counts[digit index][length], index 0 unused.
    counts: [Vec<u64>; 4],
}

impl RunHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_run(&mut self, digit: TerminalDigit, length: u64, occurrences: u64) {
        if length == 0 || occurrences == 0 {
            return;
        }
        let row = &mut self.counts[digit.index()];
        let len = length as usize;
        if row.len() <= len {
            row.resize(len + 1, 0);
        }
        row[len] += occurrences;
    }

    pub fn occurrences(&self, digit: TerminalDigit, length: u64) -> u64 {
        self.counts[digit.index()]
            .get(length as usize)
            .copied()
            .unwrap_or(0)
    }

    /// Longest run seen for `digit` (0 if none).
    pub fn max_length(&self, digit: TerminalDigit) -> u64 {
        self.counts[digit.index()]
            .iter()
            .rposition(|&c| c > 0)
            .unwrap_or(0) as u64
    }

    pub fn max_length_per_digit(&self) -> [u64; 4] {
        TerminalDigit::ALL.map(|d| self.max_length(d))
    }

    /// `(digit, length, occurrences)` with nonzero occurrences, sorted by
    /// digit then length.
    pub fn iter(&self) -> impl Iterator<Item = (TerminalDigit, u64, u64)> + '_ {
        TerminalDigit::ALL.into_iter().flat_map(move |d| {
            self.counts[d.index()]
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c > 0)
                .map(move |(len, &c)| (d, len as u64, c))
        })
    }

    pub fn total_runs(&self) -> u64 {
        self.iter().map(|(_, _, c)| c).sum()
    }

    /// Sum of length times occurrences: the number of events the runs cover.
    pub fn total_events(&self) -> u64 {
        self.iter().map(|(_, len, c)| len * c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_runs() == 0
    }
}

/// Fraction of runs of length 1 or 2.
pub fn short_run_fraction(hist: &RunHistogram) -> Result<f64> {
    let total = hist.total_runs();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let short: u64 = TerminalDigit::ALL
        .iter()
        .map(|&d| hist.occurrences(d, 1) + hist.occurrences(d, 2))
        .sum();
    Ok(short as f64 / total as f64)
}

/// Run histogram over every walk prime `<= limit`.
pub fn run_histogram(limit: u64) -> RunHistogram {
    let mut acc = RunAccumulator::new();
    let mut hist = RunHistogram::new();
    for event in PrimeEvents::new(limit) {
        acc.feed(event.digit, &mut hist);
    }
    acc.finalize(&mut hist);
    hist
}

/// Streaming run counter for use alongside other walk observers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunTracker {
    pub acc: RunAccumulator,
    pub hist: RunHistogram,
}

impl RunTracker {
    /// Committed runs plus the open one, without disturbing the tracker.
    pub fn snapshot(&self) -> RunHistogram {
        let mut hist = self.hist.clone();
        let mut acc = self.acc;
        acc.finalize(&mut hist);
        hist
    }
}

impl WalkObserver for RunTracker {
    fn on_step(&mut self, step: &Step) -> Result<()> {
        if let Some(digit) = step.digit {
            self.acc.feed(digit, &mut self.hist);
        }
        Ok(())
    }
}
