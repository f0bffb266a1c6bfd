//! Ordinary least-squares lines.

use crate::grid::AreaSeries;
use crate::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

fn compensated<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Asymptotic standard error of the slope; 0 for two points.
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares fit of `ys = intercept + slope * xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let nf = n as f64;
    let x_mean = compensated(xs.iter().copied()) / nf;
    let y_mean = compensated(ys.iter().copied()) / nf;

    let mut sxx = CompensatedSum::default();
    let mut sxy = CompensatedSum::default();
    let mut syy = CompensatedSum::default();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx.add(dx * dx);
        sxy.add(dx * dy);
        syy.add(dy * dy);
    }
    let (sxx, sxy, syy) = (sxx.value(), sxy.value(), syy.value());
    if sxx == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let rss = compensated(xs.iter().zip(ys).map(|(&x, &y)| {
        let r = (y - y_mean) - slope * (x - x_mean);
        r * r
    }));
    let slope_stderr = if n > 2 {
        libm::sqrt(rss / (nf - 2.0) / sxx)
    } else {
        0.0
    };
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - rss / syy).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        n_points: n,
    })
}

/// Area against move count over the rows with `n_p >= min_n_p`.
pub fn fit_area_growth(series: &AreaSeries, min_n_p: u64) -> Result<FitResult> {
    let (xs, ys): (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) = series
        .rows()
        .iter()
        .filter(|r| r.n_p >= min_n_p)
        .map(|r| (r.n_p as f64, r.area as f64))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: xs.len(),
        });
    }
    linear_fit(&xs, &ys)
}

/// Fit window used for growth slopes unless told otherwise.
pub const DEFAULT_MIN_N_P: u64 = 1_000_000;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lines() {
        let f = linear_fit(&[0.0, 1.0, 2.0], &[0.0, 2.0, 4.0]).unwrap();
        assert_eq!((f.slope, f.intercept, f.slope_stderr), (2.0, 0.0, 0.0));
        assert_eq!(f.r_squared, 1.0);
        let f = linear_fit(&[0.0, 1.0], &[5.0, 5.0]).unwrap();
        assert_eq!((f.slope, f.intercept), (0.0, 5.0));
    }

    #[test]
    fn four_point_fit_by_hand() {
        // xbar = 1.5, ybar = 1.75, Sxx = 5, Sxy = 6.5 -> slope 1.3,
        // intercept 1.75 - 1.95 = -0.2. Residuals 0.2, -0.1, -0.4, 0.3,
        // RSS = 0.3, stderr = sqrt(0.3 / 2 / 5) = sqrt(0.03).
        let f = linear_fit(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 2.0, 4.0]).unwrap();
        assert!((f.slope - 1.3).abs() < 1e-12);
        assert!((f.intercept + 0.2).abs() < 1e-12);
        assert!((f.slope_stderr - libm::sqrt(0.03)).abs() < 1e-12);
        // Syy = 8.75, R^2 = 1 - 0.3 / 8.75
        assert!((f.r_squared - (1.0 - 0.3 / 8.75)).abs() < 1e-12);
    }

    #[test]
    fn contract_errors() {
        assert_eq!(
            linear_fit(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { xs: 2, ys: 1 })
        );
        assert_eq!(
            linear_fit(&[1.0], &[1.0]),
            Err(Error::TooFewPoints { needed: 2, got: 1 })
        );
        assert_eq!(
            linear_fit(&[3.0, 3.0], &[1.0, 2.0]),
            Err(Error::ZeroVariance)
        );
    }

    #[test]
    fn planted_area_line() {
        let mut series = AreaSeries::new();
        for k in 1..=20u64 {
            let n_p = k * 1_000_000;
            series
                .checkpoint(k * 20_000_000, n_p, n_p * 3 / 100)
                .unwrap();
        }
        let f = fit_area_growth(&series, DEFAULT_MIN_N_P).unwrap();
        assert!((f.slope - 0.03).abs() < 1e-15);
        assert!(f.slope_stderr < 1e-15);
        assert!(matches!(
            fit_area_growth(&series, 20_000_000),
            Err(Error::TooFewPoints { got: 1, .. })
        ));
    }
}
