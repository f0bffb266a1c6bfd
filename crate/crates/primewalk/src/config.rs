use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use primewalk_core::grid::CheckpointSchedule;
use primewalk_core::prime_stream::DEFAULT_SEGMENT_FLAGS;
use primewalk_core::regression::DEFAULT_MIN_N_P;
use primewalk_core::WalkRule;

/// Prime-digit rule or the seeded uniform baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleChoice {
    Prime(WalkRule),
    Random,
}

impl RuleChoice {
    pub fn code(self) -> u8 {
        match self {
            Self::Prime(WalkRule::A1) => 1,
            Self::Prime(WalkRule::A2) => 2,
            Self::Prime(WalkRule::A3) => 3,
            Self::Random => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => Self::Prime(WalkRule::A1),
            2 => Self::Prime(WalkRule::A2),
            3 => Self::Prime(WalkRule::A3),
            4 => Self::Random,
            _ => return None,
        })
    }
}

impl FromStr for RuleChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "a1" => Ok(Self::Prime(WalkRule::A1)),
            "a2" => Ok(Self::Prime(WalkRule::A2)),
            "a3" => Ok(Self::Prime(WalkRule::A3)),
            "rw" => Ok(Self::Random),
            other => Err(format!(
                "unknown rule {other:?} (expected a1, a2, a3 or rw)"
            )),
        }
    }
}

impl fmt::Display for RuleChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Prime(rule) => f.write_str(rule.name()),
            Self::Random => f.write_str("rw"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Area,
    Runs,
    Benford,
    Polar,
    Recurrence,
}

impl Analysis {
    pub const ALL: [Analysis; 5] = [
        Self::Area,
        Self::Runs,
        Self::Benford,
        Self::Polar,
        Self::Recurrence,
    ];

    fn bit(self) -> u8 {
        1 << self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Area => "area",
            Self::Runs => "runs",
            Self::Benford => "benford",
            Self::Polar => "polar",
            Self::Recurrence => "recurrence",
        }
    }
}

/// Which reports a run writes. Every analyzer runs regardless; this only
/// selects outputs, so it is not part of the checkpoint identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Analyses(u8);

impl Analyses {
    pub fn all() -> Self {
        Self(Analysis::ALL.iter().map(|a| a.bit()).fold(0, |m, b| m | b))
    }

    pub fn contains(self, a: Analysis) -> bool {
        self.0 & a.bit() != 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Self {
        Self(bits & Self::all().0)
    }
}

impl Default for Analyses {
    fn default() -> Self {
        Self::all()
    }
}

impl FromStr for Analyses {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::all());
        }
        let mut bits = 0;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let analysis = Analysis::ALL
                .into_iter()
                .find(|a| a.name().eq_ignore_ascii_case(part))
                .ok_or_else(|| {
                    format!("unknown analysis {part:?} (expected area, runs, benford, polar, recurrence)")
                })?;
            bits |= analysis.bit();
        }
        Ok(Self(bits))
    }
}

impl fmt::Display for Analyses {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = Analysis::ALL
            .into_iter()
            .filter(|a| self.contains(*a))
            .map(Analysis::name)
            .collect();
        f.write_str(&names.join(","))
    }
}

/// Settings that determine the walk state. A checkpoint can only be resumed
/// under the same identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunIdentity {
    pub rule: RuleChoice,
    /// Ignored (stored as 0) for prime walks.
    pub seed: u64,
    pub checkpoint_factor: f64,
    /// Polar increments are collected for moves with `n <= polar_limit`.
    pub polar_limit: u64,
}

impl RunIdentity {
    pub fn new(rule: RuleChoice, seed: u64, checkpoint_factor: f64, polar_limit: u64) -> Self {
        let seed = if rule == RuleChoice::Random { seed } else { 0 };
        Self {
            rule,
            seed,
            checkpoint_factor,
            polar_limit,
        }
    }
}

/// Settings that only shape the written reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputOptions {
    pub analyses: Analyses,
    pub dphi_bins: u32,
    /// visits.csv is skipped when the map holds more cells than this.
    pub max_visits_rows: u64,
    /// Rows with fewer moves are left out of the growth fit.
    pub min_n_p: u64,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            analyses: Analyses::all(),
            dphi_bins: 72,
            max_visits_rows: 1_000_000,
            min_n_p: DEFAULT_MIN_N_P,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Largest integer scanned; for the uniform baseline, the move count.
    pub limit: u64,
    pub identity: RunIdentity,
    pub output: OutputOptions,
    pub out_dir: PathBuf,
    pub resume_from: Option<PathBuf>,
    pub threads: usize,
    pub segment_flags: usize,
    /// Seconds between automatic checkpoints during a run; 0 disables them.
    pub save_every: u64,
}

impl RunConfig {
    pub fn new(limit: u64, rule: RuleChoice, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            limit,
            identity: RunIdentity::new(rule, 0, CheckpointSchedule::DEFAULT_FACTOR, 1_000_000),
            output: OutputOptions::default(),
            out_dir: out_dir.into(),
            resume_from: None,
            threads: 1,
            segment_flags: DEFAULT_SEGMENT_FLAGS,
            save_every: 600,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let factor = self.identity.checkpoint_factor;
        if !(factor > 1.0 && factor.is_finite()) {
            return Err(format!(
                "checkpoint factor must be a finite number > 1, got {factor}"
            ));
        }
        if self.output.dphi_bins == 0 {
            return Err("dphi histogram needs at least one bin".into());
        }
        if self.segment_flags == 0 {
            return Err("segment size must be positive".into());
        }
        Ok(())
    }
}

/// Parse a nonnegative integer written as `1000000`, `1_000_000`, `1e6` or
/// `2.5e9`. The value must be an exact integer.
pub fn parse_count(text: &str) -> Result<u64, String> {
    let cleaned: String = text.trim().chars().filter(|&c| c != '_').collect();
    let bad = || format!("{text:?} is not a nonnegative integer (e.g. 1000000, 1_000_000, 1e6)");
    let (mantissa, exponent) = match cleaned.find(['e', 'E']) {
        Some(i) => {
            let exp: u32 = cleaned[i + 1..]
                .trim_start_matches('+')
                .parse()
                .map_err(|_| bad())?;
            (&cleaned[..i], exp)
        }
        None => (cleaned.as_str(), 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let frac_part = frac_part.trim_end_matches('0');
    let digits = format!("{int_part}{frac_part}");
    let mut value: u128 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let frac_len = frac_part.len() as u32;
    if exponent < frac_len {
        return Err(format!("{text:?} is not an integer"));
    }
    for _ in 0..exponent - frac_len {
        value = value
            .checked_mul(10)
            .ok_or_else(|| format!("{text:?} is too large"))?;
    }
    u64::try_from(value).map_err(|_| format!("{text:?} is too large"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_in_shorthand() {
        assert_eq!(parse_count("1000000"), Ok(1_000_000));
        assert_eq!(parse_count("1_000_000"), Ok(1_000_000));
        assert_eq!(parse_count("1e9"), Ok(1_000_000_000));
        assert_eq!(parse_count("2E10"), Ok(20_000_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2_500));
        assert_eq!(parse_count("1.50e1"), Ok(15));
        assert_eq!(parse_count("0"), Ok(0));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("1.25e1").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("abc").is_err());
        assert!(parse_count("1e30").is_err());
        assert!(parse_count("").is_err());
    }

    #[test]
    fn rules_and_analyses() {
        assert_eq!(
            "A2".parse::<RuleChoice>(),
            Ok(RuleChoice::Prime(WalkRule::A2))
        );
        assert_eq!("rw".parse::<RuleChoice>(), Ok(RuleChoice::Random));
        assert!("a4".parse::<RuleChoice>().is_err());
        for code in 1..=4 {
            assert_eq!(RuleChoice::from_code(code).unwrap().code(), code);
        }
        let a: Analyses = "area,polar".parse().unwrap();
        assert!(a.contains(Analysis::Area) && a.contains(Analysis::Polar));
        assert!(!a.contains(Analysis::Runs));
        assert_eq!(a.to_string(), "area,polar");
        assert_eq!("all".parse::<Analyses>(), Ok(Analyses::all()));
        assert!("area,bogus".parse::<Analyses>().is_err());
    }

    #[test]
    fn prime_walks_ignore_the_seed() {
        let a = RunIdentity::new(RuleChoice::Prime(WalkRule::A1), 42, 1.25, 10);
        let b = RunIdentity::new(RuleChoice::Prime(WalkRule::A1), 7, 1.25, 10);
        assert_eq!(a, b);
    }
}
