//! Binary checkpoint files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "PWLK"  u32 version  u64 payload_len  payload  [u8; 32] sha256(payload)
//! ```
//!
//! The payload starts with the SHA-256 of the run identity, followed by the
//! identity and output options, the walk state, the visit map (cells sorted
//! by position), the growth series, the run histogram and the polar samples.

use std::fs;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use sha2::{Digest, Sha256};

use primewalk_core::grid::{AreaSeries, AreaTracker, CheckpointSchedule, VisitMap};
use primewalk_core::polar::{DeltaSample, DeltaTracker, PolarCollector};
use primewalk_core::runs::{RunAccumulator, RunHistogram, RunTracker};
use primewalk_core::{Position, TerminalDigit, WalkState};

use crate::config::{Analyses, OutputOptions, RuleChoice, RunIdentity};
use crate::error::CheckpointError;

pub const MAGIC: [u8; 4] = *b"PWLK";
pub const VERSION: u32 = 1;
pub const FILE_NAME: &str = "checkpoint.pwlk";

/// Everything needed to continue a run.
#[derive(Debug, Clone)]
pub struct CheckpointData {
    pub identity: RunIdentity,
    pub output: OutputOptions,
    pub state: WalkState,
    pub area: AreaTracker,
    pub runs: RunTracker,
    pub polar: PolarCollector,
}

fn identity_bytes(identity: &RunIdentity) -> Vec<u8> {
    let mut out = Vec::with_capacity(32);
    out.extend_from_slice(b"primewalk-identity-v1");
    out.push(identity.rule.code());
    out.extend_from_slice(&identity.seed.to_le_bytes());
    out.extend_from_slice(&identity.checkpoint_factor.to_bits().to_le_bytes());
    out.extend_from_slice(&identity.polar_limit.to_le_bytes());
    out
}

pub fn identity_hash(identity: &RunIdentity) -> [u8; 32] {
    Sha256::digest(identity_bytes(identity)).into()
}

fn sha256(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

fn write_position(out: &mut Vec<u8>, pos: Position) {
    out.write_i64::<LE>(pos.x).unwrap();
    out.write_i64::<LE>(pos.y).unwrap();
}

pub fn encode(
    identity: &RunIdentity,
    output: &OutputOptions,
    state: &WalkState,
    area: &AreaTracker,
    runs: &RunTracker,
    polar: &PolarCollector,
) -> Vec<u8> {
    let cells = area.map.sorted_cells();
    let mut p = Vec::with_capacity(256 + 24 * cells.len() + 24 * polar.samples.len());
    // Writes into a Vec cannot fail.
    p.extend_from_slice(&identity_hash(identity));
    p.push(identity.rule.code());
    p.write_u64::<LE>(identity.seed).unwrap();
    p.write_f64::<LE>(identity.checkpoint_factor).unwrap();
    p.write_u64::<LE>(identity.polar_limit).unwrap();

    p.push(output.analyses.bits());
    p.write_u32::<LE>(output.dphi_bins).unwrap();
    p.write_u64::<LE>(output.max_visits_rows).unwrap();
    p.write_u64::<LE>(output.min_n_p).unwrap();

    p.write_u64::<LE>(state.last_n).unwrap();
    write_position(&mut p, state.pos);
    p.write_u64::<LE>(state.steps_taken).unwrap();

    p.push(u8::from(area.map.origin_occupied()));
    p.write_u64::<LE>(cells.len() as u64).unwrap();
    for (pos, z) in cells {
        write_position(&mut p, pos);
        p.write_u64::<LE>(z).unwrap();
    }
    p.write_u64::<LE>(area.schedule.next()).unwrap();
    p.write_u64::<LE>(area.series.len() as u64).unwrap();
    for row in area.series.rows() {
        p.write_u64::<LE>(row.n).unwrap();
        p.write_u64::<LE>(row.n_p).unwrap();
        p.write_u64::<LE>(row.area).unwrap();
    }

    let (open_digit, open_len) = runs.acc.open_run().map_or((0, 0), |(d, l)| (d.value(), l));
    p.push(open_digit);
    p.write_u64::<LE>(open_len).unwrap();
    for digit in TerminalDigit::ALL {
        let max = runs.hist.max_length(digit);
        p.write_u64::<LE>(max).unwrap();
        for len in 1..=max {
            p.write_u64::<LE>(runs.hist.occurrences(digit, len))
                .unwrap();
        }
    }

    match polar.tracker.prev() {
        Some(pos) => {
            p.push(1);
            write_position(&mut p, pos);
        }
        None => {
            p.push(0);
            write_position(&mut p, Position::ORIGIN);
        }
    }
    p.write_u64::<LE>(polar.tracker.skipped()).unwrap();
    p.write_u64::<LE>(polar.samples.len() as u64).unwrap();
    for s in &polar.samples {
        p.write_u64::<LE>(s.step_index).unwrap();
        p.write_f64::<LE>(s.d_r).unwrap();
        p.write_f64::<LE>(s.d_phi).unwrap();
    }

    let mut file = Vec::with_capacity(p.len() + 48);
    file.extend_from_slice(&MAGIC);
    file.write_u32::<LE>(VERSION).unwrap();
    file.write_u64::<LE>(p.len() as u64).unwrap();
    file.extend_from_slice(&p);
    file.extend_from_slice(&sha256(&p));
    file
}

fn inconsistent(what: impl Into<String>) -> CheckpointError {
    CheckpointError::Inconsistent(what.into())
}

fn truncated(_: std::io::Error) -> CheckpointError {
    CheckpointError::Truncated
}

fn read_position(r: &mut Cursor<&[u8]>) -> Result<Position, CheckpointError> {
    Ok(Position::new(
        r.read_i64::<LE>().map_err(truncated)?,
        r.read_i64::<LE>().map_err(truncated)?,
    ))
}

/// Element count, bounded by what the remaining bytes could hold.
fn read_len(r: &mut Cursor<&[u8]>, element_size: u64) -> Result<u64, CheckpointError> {
    let len = r.read_u64::<LE>().map_err(truncated)?;
    let remaining = r.get_ref().len() as u64 - r.position();
    if len.saturating_mul(element_size) > remaining {
        return Err(CheckpointError::Truncated);
    }
    Ok(len)
}

pub fn decode(bytes: &[u8]) -> Result<CheckpointData, CheckpointError> {
    if bytes.len() < 16 || bytes[..4] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut header = Cursor::new(&bytes[4..16]);
    let version = header.read_u32::<LE>().map_err(truncated)?;
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let payload_len = header.read_u64::<LE>().map_err(truncated)?;
    if bytes.len() as u64 != 16 + payload_len.saturating_add(32) {
        return Err(CheckpointError::Truncated);
    }
    let payload = &bytes[16..16 + payload_len as usize];
    if sha256(payload) != bytes[16 + payload_len as usize..] {
        return Err(CheckpointError::Checksum);
    }

    let r = &mut Cursor::new(payload);
    let mut stored_hash = [0u8; 32];
    r.read_exact(&mut stored_hash).map_err(truncated)?;
    let rule_code = r.read_u8().map_err(truncated)?;
    let rule = RuleChoice::from_code(rule_code)
        .ok_or_else(|| inconsistent(format!("unknown rule code {rule_code}")))?;
    let identity = RunIdentity {
        rule,
        seed: r.read_u64::<LE>().map_err(truncated)?,
        checkpoint_factor: r.read_f64::<LE>().map_err(truncated)?,
        polar_limit: r.read_u64::<LE>().map_err(truncated)?,
    };
    if identity_hash(&identity) != stored_hash {
        return Err(inconsistent("identity hash does not match stored identity"));
    }
    if identity.checkpoint_factor.is_nan() || identity.checkpoint_factor <= 1.0 {
        return Err(inconsistent("checkpoint factor must exceed 1"));
    }
    let output = OutputOptions {
        analyses: Analyses::from_bits(r.read_u8().map_err(truncated)?),
        dphi_bins: r.read_u32::<LE>().map_err(truncated)?,
        max_visits_rows: r.read_u64::<LE>().map_err(truncated)?,
        min_n_p: r.read_u64::<LE>().map_err(truncated)?,
    };
    let state = WalkState {
        last_n: r.read_u64::<LE>().map_err(truncated)?,
        pos: read_position(r)?,
        steps_taken: r.read_u64::<LE>().map_err(truncated)?,
    };

    let origin_occupied = r.read_u8().map_err(truncated)? != 0;
    let cell_count = read_len(r, 24)?;
    let mut cells = Vec::with_capacity(cell_count as usize);
    for _ in 0..cell_count {
        let pos = read_position(r)?;
        let z = r.read_u64::<LE>().map_err(truncated)?;
        if z == 0 {
            return Err(inconsistent("visit map holds a zero count"));
        }
        cells.push((pos, z));
    }
    if cells.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(inconsistent("visit map cells are not strictly sorted"));
    }
    let map = VisitMap::from_cells(cells, origin_occupied);
    if map.steps() != state.steps_taken {
        return Err(inconsistent(format!(
            "visit counts sum to {} but the walk made {} moves",
            map.steps(),
            state.steps_taken
        )));
    }
    let next = r.read_u64::<LE>().map_err(truncated)?;
    let schedule = CheckpointSchedule::resume(identity.checkpoint_factor, next);
    let mut series = AreaSeries::new();
    for _ in 0..read_len(r, 24)? {
        let n = r.read_u64::<LE>().map_err(truncated)?;
        let n_p = r.read_u64::<LE>().map_err(truncated)?;
        let area = r.read_u64::<LE>().map_err(truncated)?;
        series
            .checkpoint(n, n_p, area)
            .map_err(|e| inconsistent(e.to_string()))?;
    }

    let open_digit = r.read_u8().map_err(truncated)?;
    let open_len = r.read_u64::<LE>().map_err(truncated)?;
    let open = match open_digit {
        0 => None,
        d => Some((
            TerminalDigit::new(u64::from(d)).map_err(|e| inconsistent(e.to_string()))?,
            open_len,
        )),
    };
    let mut hist = RunHistogram::new();
    for digit in TerminalDigit::ALL {
        let max = read_len(r, 8)?;
        for len in 1..=max {
            hist.add_run(digit, len, r.read_u64::<LE>().map_err(truncated)?);
        }
    }
    let runs = RunTracker {
        acc: RunAccumulator::from_open_run(open),
        hist,
    };

    let has_prev = r.read_u8().map_err(truncated)? != 0;
    let prev = read_position(r)?;
    let skipped = r.read_u64::<LE>().map_err(truncated)?;
    let sample_count = read_len(r, 24)?;
    let mut samples = Vec::with_capacity(sample_count as usize);
    for _ in 0..sample_count {
        samples.push(DeltaSample {
            step_index: r.read_u64::<LE>().map_err(truncated)?,
            d_r: r.read_f64::<LE>().map_err(truncated)?,
            d_phi: r.read_f64::<LE>().map_err(truncated)?,
        });
    }
    if r.position() != payload.len() as u64 {
        return Err(CheckpointError::Truncated);
    }
    let polar = PolarCollector {
        tracker: DeltaTracker::from_parts(has_prev.then_some(prev), skipped),
        samples,
        limit: identity.polar_limit,
    };

    Ok(CheckpointData {
        identity,
        output,
        state,
        area: AreaTracker {
            map,
            series,
            schedule,
        },
        runs,
        polar,
    })
}

/// Write via a temporary file and rename, so a crash never leaves a torn
/// checkpoint behind.
pub fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("pwlk.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn read_file(path: &Path) -> Result<CheckpointData, CheckpointError> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use primewalk_core::walk::{run_walk, WalkObserver, WalkRule};

    fn sample() -> (
        RunIdentity,
        OutputOptions,
        WalkState,
        AreaTracker,
        RunTracker,
        PolarCollector,
    ) {
        let identity = RunIdentity::new(RuleChoice::Prime(WalkRule::A2), 0, 1.25, 3_000);
        let mut area = AreaTracker::new(VisitMap::new(), identity.checkpoint_factor);
        let mut runs = RunTracker::default();
        let mut polar = PolarCollector::new(identity.polar_limit);
        let observers: &mut [&mut dyn WalkObserver] = &mut [&mut area, &mut runs, &mut polar];
        let summary = run_walk(10_000, WalkRule::A2, observers).unwrap();
        let state = WalkState {
            pos: summary.final_pos,
            steps_taken: summary.steps_taken,
            last_n: summary.last_n,
        };
        (identity, OutputOptions::default(), state, area, runs, polar)
    }

    #[test]
    fn round_trip() {
        let (identity, output, state, area, runs, polar) = sample();
        let bytes = encode(&identity, &output, &state, &area, &runs, &polar);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.identity, identity);
        assert_eq!(back.output, output);
        assert_eq!(back.state, state);
        assert_eq!(back.area.map.sorted_cells(), area.map.sorted_cells());
        assert_eq!(back.area.map.area(), area.map.area());
        assert_eq!(back.area.series, area.series);
        assert_eq!(back.area.schedule, area.schedule);
        assert_eq!(back.runs, runs);
        assert_eq!(back.polar, polar);
        let again = encode(
            &back.identity,
            &back.output,
            &back.state,
            &back.area,
            &back.runs,
            &back.polar,
        );
        assert_eq!(again, bytes);
    }

    #[test]
    fn corruption_is_detected() {
        let (identity, output, state, area, runs, polar) = sample();
        let bytes = encode(&identity, &output, &state, &area, &runs, &polar);

        let mut flipped = bytes.clone();
        flipped[100] ^= 1;
        assert!(matches!(decode(&flipped), Err(CheckpointError::Checksum)));

        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode(&magic), Err(CheckpointError::BadMagic)));

        let mut version = bytes.clone();
        version[4] = 9;
        assert!(matches!(
            decode(&version),
            Err(CheckpointError::UnsupportedVersion(9))
        ));

        assert!(matches!(
            decode(&bytes[..bytes.len() - 1]),
            Err(CheckpointError::Truncated)
        ));
    }

    #[test]
    fn identity_hash_tracks_every_field() {
        let base = RunIdentity::new(RuleChoice::Random, 1, 1.25, 10);
        let variants = [
            RunIdentity::new(RuleChoice::Prime(WalkRule::A1), 1, 1.25, 10),
            RunIdentity::new(RuleChoice::Random, 2, 1.25, 10),
            RunIdentity::new(RuleChoice::Random, 1, 1.5, 10),
            RunIdentity::new(RuleChoice::Random, 1, 1.25, 11),
        ];
        for v in variants {
            assert_ne!(identity_hash(&v), identity_hash(&base), "{v:?}");
        }
    }
}
