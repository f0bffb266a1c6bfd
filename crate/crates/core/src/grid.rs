//! Visit counts, covered area and growth checkpoints.
//!
//! `z(x, y)` counts prime-driven arrivals only. The origin belongs to the
//! covered area from the start even though nothing ever "arrives" there until
//! the walk returns, so `z(0, 0)` may be 0 while the origin still counts.

use alloc::vec::Vec;

use foldhash::fast::FixedState;
use hashbrown::HashMap;

use crate::walk::{Position, Step, WalkObserver, WalkState};
use crate::{Error, Result};

const MAP_SEED: u64 = 0x7072_696d_6577_616c;

#[inline]
fn pack(pos: Position) -> u128 {
    (u128::from(pos.x as u64) << 64) | u128::from(pos.y as u64)
}

#[inline]
fn unpack(key: u128) -> Position {
    Position::new((key >> 64) as u64 as i64, key as u64 as i64)
}

/// Sparse map from lattice point to visit count.
#[derive(Debug, Clone)]
pub struct VisitMap {
    cells: HashMap<u128, u64, FixedState>,
    distinct: u64,
    origin_occupied: bool,
    total: u64,
}

impl Default for VisitMap {
    fn default() -> Self {
        Self::new()
    }
}

impl VisitMap {
    /// Empty map for a walk standing at the origin.
    pub fn new() -> Self {
        Self::with_capacity(0)
    }

    pub fn with_capacity(cells: usize) -> Self {
        Self {
            cells: HashMap::with_capacity_and_hasher(cells, FixedState::with_seed(MAP_SEED)),
            distinct: 1,
            origin_occupied: true,
            total: 0,
        }
    }

    /// Capacity hint for a walk expected to take `steps` moves: area grows
    /// at roughly 3% of the step count.
    pub fn capacity_hint(steps: u64) -> usize {
        (steps / 32 + 1024).min(1 << 28) as usize
    }

    /// Rebuild from stored cells. Zero counts are dropped.
    pub fn from_cells<I>(cells: I, origin_occupied: bool) -> Self
    where
        I: IntoIterator<Item = (Position, u64)>,
    {
        let iter = cells.into_iter();
        let mut map = Self::with_capacity(iter.size_hint().0);
        map.origin_occupied = origin_occupied;
        map.distinct = 0;
        for (pos, z) in iter.filter(|&(_, z)| z > 0) {
            if map.cells.insert(pack(pos), z).is_none() {
                map.distinct += 1;
            }
            map.total += z;
        }
        if origin_occupied && !map.cells.contains_key(&pack(Position::ORIGIN)) {
            map.distinct += 1;
        }
        map
    }

    /// Count one arrival at `pos`.
    #[inline]
    pub fn record_step(&mut self, pos: Position) {
        let z = self.cells.entry(pack(pos)).or_insert(0);
        if *z == 0 && !(pos.is_origin() && self.origin_occupied) {
            self.distinct += 1;
        }
        *z += 1;
        self.total += 1;
    }

    /// Distinct lattice points ever occupied, origin included.
    pub fn area(&self) -> u64 {
        self.distinct
    }

    pub fn origin_occupied(&self) -> bool {
        self.origin_occupied
    }

    /// Arrivals recorded so far (the sum of all z).
    pub fn steps(&self) -> u64 {
        self.total
    }

    pub fn count(&self, pos: Position) -> u64 {
        self.cells.get(&pack(pos)).copied().unwrap_or(0)
    }

    /// Number of stored cells with `z >= 1`.
    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    /// All positive visit counts, in no particular order.
    pub fn z_values(&self) -> impl Iterator<Item = u64> + '_ {
        self.cells.values().copied()
    }

    /// `(position, z)` pairs, in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = (Position, u64)> + '_ {
        self.cells.iter().map(|(&k, &z)| (unpack(k), z))
    }

    /// `(position, z)` pairs sorted by `(x, y)`.
    pub fn sorted_cells(&self) -> Vec<(Position, u64)> {
        let mut cells: Vec<_> = self.iter().collect();
        cells.sort_unstable_by_key(|&(p, _)| p);
        cells
    }
}

impl WalkObserver for VisitMap {
    fn on_step(&mut self, step: &Step) -> Result<()> {
        self.record_step(step.to);
        Ok(())
    }
}

/// One growth checkpoint: area and move count after scanning up to `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AreaRow {
    pub n: u64,
    pub n_p: u64,
    pub area: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AreaSeries {
    rows: Vec<AreaRow>,
}

impl AreaSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[AreaRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&AreaRow> {
        self.rows.last()
    }

    /// Append a row. `n` must strictly increase; `n_p` and `area` must not
    /// decrease.
    pub fn checkpoint(&mut self, n: u64, n_p: u64, area: u64) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if n <= last.n {
                return Err(Error::NonMonotoneCheckpoint {
                    last: last.n,
                    got: n,
                });
            }
            if n_p < last.n_p || area < last.area {
                return Err(Error::DecreasingCheckpoint { n, n_p, area });
            }
        }
        self.rows.push(AreaRow { n, n_p, area });
        Ok(())
    }
}

/// Geometric checkpoint cadence in `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointSchedule {
    factor: f64,
    next: u64,
}

impl CheckpointSchedule {
    pub const FIRST: u64 = 10;
    pub const DEFAULT_FACTOR: f64 = 1.25;

    /// Panics unless `factor > 1`.
    pub fn new(factor: f64) -> Self {
        Self::resume(factor, Self::FIRST)
    }

    pub fn resume(factor: f64, next: u64) -> Self {
        assert!(
            factor > 1.0,
            "checkpoint factor must exceed 1, got {factor}"
        );
        Self { factor, next }
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn next(&self) -> u64 {
        self.next
    }

    pub fn advance(&mut self) {
        let scaled = libm::ceil(self.next as f64 * self.factor);
        self.next = if scaled >= u64::MAX as f64 {
            u64::MAX
        } else {
            (scaled as u64).max(self.next + 1)
        };
    }
}

/// Visit map plus growth series, fed from the walk.
#[derive(Debug, Clone)]
pub struct AreaTracker {
    pub map: VisitMap,
    pub series: AreaSeries,
    pub schedule: CheckpointSchedule,
}

impl AreaTracker {
    pub fn new(map: VisitMap, factor: f64) -> Self {
        Self {
            map,
            series: AreaSeries::new(),
            schedule: CheckpointSchedule::new(factor),
        }
    }

    /// Record every scheduled checkpoint strictly below `n`, using the
    /// current state. Returns whether any row was added.
    pub fn flush_below(&mut self, n: u64) -> Result<bool> {
        let mut added = false;
        while self.schedule.next() < n {
            self.series
                .checkpoint(self.schedule.next(), self.map.steps(), self.map.area())?;
            self.schedule.advance();
            added = true;
        }
        Ok(added)
    }

    /// Scheduled rows plus a closing row at `limit` when the schedule did
    /// not land on it. A limit of 0 gives an empty series.
    pub fn series_with_final(&self, limit: u64) -> AreaSeries {
        let mut series = self.series.clone();
        let needs_final = limit > 0 && series.last().is_none_or(|r| r.n < limit);
        if needs_final {
            series.rows.push(AreaRow {
                n: limit,
                n_p: self.map.steps(),
                area: self.map.area(),
            });
        }
        series
    }
}

impl WalkObserver for AreaTracker {
    fn on_step(&mut self, step: &Step) -> Result<()> {
        self.flush_below(step.n)?;
        self.map.record_step(step.to);
        Ok(())
    }

    fn on_finish(&mut self, state: &WalkState) -> Result<()> {
        self.flush_below(state.last_n.saturating_add(1))?;
        Ok(())
    }
}

/// Most-visited point and how the covered area spreads over the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceReport {
    pub argmax_pos: Position,
    pub z_max: u64,
    pub dist_argmax: f64,
    /// Strict-interior quadrants I, II, III, IV.
    pub quadrant_counts: [u64; 4],
    /// Points on the x axis and on the y axis, origin excluded.
    pub axis_counts: [u64; 2],
    /// Whether the origin is part of the covered area.
    pub origin_counted: bool,
}

/// Argmax of `z`, ties broken by distance to the origin, then by `(x, y)`.
pub fn recurrence_report(map: &VisitMap) -> Result<RecurrenceReport> {
    if map.steps() == 0 {
        return Err(Error::EmptyMap);
    }
    let mut best: Option<(Position, u64)> = None;
    let mut quadrant_counts = [0u64; 4];
    let mut axis_counts = [0u64; 2];
    for (pos, z) in map.iter() {
        let better = match best {
            None => true,
            Some((bp, bz)) => {
                z > bz || (z == bz && (pos.norm_squared(), pos) < (bp.norm_squared(), bp))
            }
        };
        if better {
            best = Some((pos, z));
        }
        match (pos.x.signum(), pos.y.signum()) {
            (0, 0) => {}
            (_, 0) => axis_counts[0] += 1,
            (0, _) => axis_counts[1] += 1,
            (1, 1) => quadrant_counts[0] += 1,
            (-1, 1) => quadrant_counts[1] += 1,
            (-1, -1) => quadrant_counts[2] += 1,
            _ => quadrant_counts[3] += 1,
        }
    }
    let (argmax_pos, z_max) = best.ok_or(Error::EmptyMap)?;
    Ok(RecurrenceReport {
        argmax_pos,
        z_max,
        dist_argmax: libm::sqrt(argmax_pos.norm_squared() as f64),
        quadrant_counts,
        axis_counts,
        origin_counted: map.origin_occupied() || map.count(Position::ORIGIN) > 0,
    })
}
