//! Polar view of a trajectory: per-step radius and angle increments.
//!
//! Angles use the four-quadrant arctangent in `(-pi, pi]`, and increments are
//! wrapped into the same interval so crossing the negative x axis does not
//! produce a spurious jump of `2 pi`. Steps touching the origin have no angle
//! and are skipped.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::regression::{linear_fit, FitResult};
use crate::walk::{Position, Step, WalkObserver};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
}

pub fn to_polar(pos: Position) -> Result<PolarPoint> {
    if pos.is_origin() {
        return Err(Error::OriginHasNoAngle);
    }
    let (x, y) = (pos.x as f64, pos.y as f64);
    Ok(PolarPoint {
        r: libm::hypot(x, y),
        // y is never -0.0 here, so the negative x axis maps to +pi.
        phi: libm::atan2(y, x),
    })
}

/// Wrap an angle difference into `(-pi, pi]`.
pub fn wrap_angle(mut a: f64) -> f64 {
    while a > PI {
        a -= 2.0 * PI;
    }
    while a <= -PI {
        a += 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSample {
    pub d_r: f64,
    pub d_phi: f64,
    /// Index of the later position in the trajectory.
    pub step_index: u64,
}

/// Streaming `(dR, dphi)` generator over consecutive trajectory positions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeltaTracker {
    prev: Option<Position>,
    skipped: u64,
}

impl DeltaTracker {
    /// Tracker whose trajectory starts at `start`.
    pub fn new(start: Position) -> Self {
        Self {
            prev: Some(start),
            skipped: 0,
        }
    }

    pub fn from_parts(prev: Option<Position>, skipped: u64) -> Self {
        Self { prev, skipped }
    }

    pub fn prev(&self) -> Option<Position> {
        self.prev
    }

    /// Pairs skipped because one end was the origin.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn push(&mut self, pos: Position, step_index: u64) -> Option<DeltaSample> {
        let prev = self.prev.replace(pos)?;
        match (to_polar(prev), to_polar(pos)) {
            (Ok(a), Ok(b)) => Some(DeltaSample {
                d_r: b.r - a.r,
                d_phi: wrap_angle(b.phi - a.phi),
                step_index,
            }),
            _ => {
                self.skipped += 1;
                None
            }
        }
    }
}

/// Increments for a whole trajectory, plus the number of skipped pairs.
/// Sample `k` refers to position index `k`.
pub fn delta_series<I>(trajectory: I) -> (Vec<DeltaSample>, u64)
where
    I: IntoIterator<Item = Position>,
{
    let mut iter = trajectory.into_iter();
    let Some(first) = iter.next() else {
        return (Vec::new(), 0);
    };
    let mut tracker = DeltaTracker::new(first);
    let samples = iter
        .enumerate()
        .filter_map(|(i, pos)| tracker.push(pos, i as u64 + 1))
        .collect();
    (samples, tracker.skipped())
}

/// Collects increments for every move with `n <= limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCollector {
    pub tracker: DeltaTracker,
    pub samples: Vec<DeltaSample>,
    pub limit: u64,
}

impl PolarCollector {
    pub fn new(limit: u64) -> Self {
        Self {
            tracker: DeltaTracker::new(Position::ORIGIN),
            samples: Vec::new(),
            limit,
        }
    }
}

impl WalkObserver for PolarCollector {
    fn on_step(&mut self, step: &Step) -> Result<()> {
        if step.n <= self.limit {
            if let Some(sample) = self.tracker.push(step.to, step.steps_taken) {
                self.samples.push(sample);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiHistogram {
    pub counts: Vec<u64>,
}

impl PhiHistogram {
    pub fn bin_width(&self) -> f64 {
        2.0 * PI / self.counts.len() as f64
    }

    /// `(low, high]` of bin `i`.
    pub fn bin_bounds(&self, i: usize) -> (f64, f64) {
        let w = self.bin_width();
        let high = if i + 1 == self.counts.len() {
            PI
        } else {
            -PI + (i + 1) as f64 * w
        };
        (-PI + i as f64 * w, high)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Uniform bins `(low, high]` covering `(-pi, pi]`.
pub fn delta_phi_histogram<I>(d_phis: I, bin_count: usize) -> Result<PhiHistogram>
where
    I: IntoIterator<Item = f64>,
{
    if bin_count == 0 {
        return Err(Error::ZeroBins);
    }
    let mut counts = alloc::vec![0u64; bin_count];
    let w = 2.0 * PI / bin_count as f64;
    for d in d_phis {
        let d = wrap_angle(d);
        let bin = libm::ceil((d + PI) / w) as i64 - 1;
        counts[bin.clamp(0, bin_count as i64 - 1) as usize] += 1;
    }
    Ok(PhiHistogram { counts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxDimension {
    pub dimension: f64,
    pub stderr: f64,
    /// Set when every point coincides; the dimension is then 0.
    pub degenerate: bool,
    /// `(box size, occupied boxes)` per scale.
    pub counts: Vec<(f64, u64)>,
    pub fit: Option<FitResult>,
}

/// Box-counting dimension of a planar point set.
///
/// Points are first mapped onto the unit square (each axis by its own
/// min/max); `scales` are box sizes in `(0, 1]`. The estimate is the slope of
/// `ln(count)` against `ln(1 / size)`.
pub fn box_counting_dimension(points: &[(f64, f64)], scales: &[f64]) -> Result<BoxDimension> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    if scales.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: scales.len(),
        });
    }
    if let Some(&bad) = scales.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
        return Err(Error::InvalidScale(bad));
    }

    let bounds = |f: fn(&(f64, f64)) -> f64| {
        points
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    };
    let (x_lo, x_hi) = bounds(|p| p.0);
    let (y_lo, y_hi) = bounds(|p| p.1);
    let unit = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };

    let mut counts = Vec::with_capacity(scales.len());
    let mut keys = Vec::with_capacity(points.len());
    for &s in scales {
        let max_index = (libm::ceil(1.0 / s) as u64).saturating_sub(1);
        let cell = |u: f64| (libm::floor(u / s) as u64).min(max_index);
        keys.clear();
        keys.extend(
            points
                .iter()
                .map(|&(x, y)| (cell(unit(x, x_lo, x_hi)) << 32) | cell(unit(y, y_lo, y_hi))),
        );
        keys.sort_unstable();
        keys.dedup();
        counts.push((s, keys.len() as u64));
    }

    if x_hi == x_lo && y_hi == y_lo {
        return Ok(BoxDimension {
            dimension: 0.0,
            stderr: 0.0,
            degenerate: true,
            counts,
            fit: None,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = counts
        .iter()
        .map(|&(s, c)| (libm::log(1.0 / s), libm::log(c as f64)))
        .unzip();
    let fit = linear_fit(&xs, &ys)?;
    Ok(BoxDimension {
        dimension: fit.slope,
        stderr: fit.slope_stderr,
        degenerate: false,
        counts,
        fit: Some(fit),
    })
}

/// Box sizes `2^-1 .. 2^-levels`.
pub fn dyadic_scales(levels: u32) -> Vec<f64> {
    (1..=levels)
        .map(|k| libm::ldexp(1.0, -(k as i32)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn p(x: i64, y: i64) -> Position {
        Position::new(x, y)
    }

    #[test]
    fn polar_points() {
        assert_eq!(to_polar(p(1, 0)), Ok(PolarPoint { r: 1.0, phi: 0.0 }));
        let q = to_polar(p(0, 2)).unwrap();
        assert_eq!(q.r, 2.0);
        assert!((q.phi - FRAC_PI_2).abs() < 1e-12);
        let q = to_polar(p(-1, -1)).unwrap();
        assert!((q.r - SQRT_2).abs() < 1e-15);
        assert!((q.phi + 3.0 * FRAC_PI_4).abs() < 1e-12);
        assert_eq!(to_polar(p(-3, 0)).unwrap().phi, PI);
        assert_eq!(to_polar(p(0, 0)), Err(Error::OriginHasNoAngle));
    }

    #[test]
    fn deltas() {
        let (s, skipped) = delta_series([p(1, 0), p(1, 1)]);
        assert_eq!(skipped, 0);
        assert!((s[0].d_r - (SQRT_2 - 1.0)).abs() < 1e-15);
        assert!((s[0].d_phi - FRAC_PI_4).abs() < 1e-15);
        assert!((s[0].d_r - 0.4142).abs() < 1e-4);

        let (s, _) = delta_series([p(0, 1), p(0, 2)]);
        assert_eq!((s[0].d_r, s[0].d_phi), (1.0, 0.0));

        let (s, skipped) = delta_series([p(1, 0), p(0, 0), p(1, 0)]);
        assert!(s.is_empty());
        assert_eq!(skipped, 2);
    }

    #[test]
    fn wrapping_across_the_branch_cut() {
        // (-1, 1) at 3pi/4 to (-1, 0) at pi to (-1, -1) at -3pi/4.
        let (s, _) = delta_series([p(-1, 1), p(-1, 0), p(-1, -1)]);
        assert!((s[0].d_phi - FRAC_PI_4).abs() < 1e-12);
        assert!((s[1].d_phi - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
    }

    #[test]
    fn histogram_bins() {
        let h = delta_phi_histogram([0.0], 4).unwrap();
        assert_eq!(h.counts, [0, 1, 0, 0]);
        let (lo, hi) = h.bin_bounds(1);
        assert!(lo < 0.0 && hi >= 0.0);
        let h = delta_phi_histogram([], 8).unwrap();
        assert_eq!(h.counts, [0; 8]);
        let h = delta_phi_histogram([PI, -PI + 1e-9, 1.0], 3).unwrap();
        assert_eq!(h.total(), 3);
        assert_eq!(h.counts, [1, 1, 1]);
        assert_eq!(delta_phi_histogram([0.0], 0), Err(Error::ZeroBins));
    }

    #[test]
    fn box_dimension_of_synthetic_sets() {
        let scales = dyadic_scales(6);
        let line: Vec<(f64, f64)> = (0..10_000)
            .map(|i| {
                let t = i as f64 / 9_999.0;
                (t, t)
            })
            .collect();
        let d = box_counting_dimension(&line, &scales).unwrap();
        assert!((d.dimension - 1.0).abs() < 0.1, "line: {}", d.dimension);

        let grid: Vec<(f64, f64)> = (0..100)
            .flat_map(|i| (0..100).map(move |j| (i as f64, j as f64)))
            .collect();
        let d = box_counting_dimension(&grid, &scales).unwrap();
        assert!((d.dimension - 2.0).abs() < 0.1, "grid: {}", d.dimension);

        let d = box_counting_dimension(&[(0.3, -2.0)], &scales).unwrap();
        assert_eq!(d.dimension, 0.0);
        assert!(d.degenerate);
    }

    #[test]
    fn box_dimension_errors() {
        assert_eq!(
            box_counting_dimension(&[], &[0.5, 0.25]),
            Err(Error::EmptySample)
        );
        assert!(matches!(
            box_counting_dimension(&[(0.0, 0.0)], &[0.5]),
            Err(Error::TooFewPoints { .. })
        ));
        assert_eq!(
            box_counting_dimension(&[(0.0, 0.0)], &[0.5, 1.5]),
            Err(Error::InvalidScale(1.5))
        );
        assert_eq!(dyadic_scales(3), vec![0.5, 0.25, 0.125]);
    }
}
