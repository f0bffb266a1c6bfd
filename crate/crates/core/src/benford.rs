//! Leading-digit (Benford) statistics.

use crate::{Error, Result};

/// Leftmost decimal digit of `n`.
pub fn leading_digit(mut n: u64) -> Result<u8> {
    if n == 0 {
        return Err(Error::LeadingDigitOfZero);
    }
    while n >= 10 {
        n /= 10;
    }
    Ok(n as u8)
}

/// `log10(1 + 1/d)`.
pub fn benford_expected(d: u8) -> Result<f64> {
    if !(1..=9).contains(&d) {
        return Err(Error::DigitOutOfRange(d));
    }
    Ok(libm::log10(1.0 + 1.0 / f64::from(d)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenfordTable {
    /// Observed proportions, index 0 is digit 1.
    pub observed: [f64; 9],
    pub expected: [f64; 9],
    /// Raw leading-digit counts.
    pub counts: [u64; 9],
    pub sample_size: u64,
    pub max_abs_dev: f64,
    pub chi_square: f64,
}

impl BenfordTable {
    /// Tabulate the leading digits of `values`. Zeros are skipped.
    pub fn from_values<I>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = u64>,
    {
        let mut counts = [0u64; 9];
        for v in values {
            if let Ok(d) = leading_digit(v) {
                counts[usize::from(d) - 1] += 1;
            }
        }
        Self::from_counts(counts)
    }

    pub fn from_counts(counts: [u64; 9]) -> Result<Self> {
        let sample_size: u64 = counts.iter().sum();
        if sample_size == 0 {
            return Err(Error::EmptySample);
        }
        let n = sample_size as f64;
        let mut observed = [0.0; 9];
        let mut expected = [0.0; 9];
        let mut max_abs_dev: f64 = 0.0;
        let mut chi_square = 0.0;
        for i in 0..9 {
            let p = libm::log10(1.0 + 1.0 / (i + 1) as f64);
            expected[i] = p;
            observed[i] = counts[i] as f64 / n;
            max_abs_dev = max_abs_dev.max((observed[i] - p).abs());
            let e = n * p;
            chi_square += (counts[i] as f64 - e) * (counts[i] as f64 - e) / e;
        }
        Ok(Self {
            observed,
            expected,
            counts,
            sample_size,
            max_abs_dev,
            chi_square,
        })
    }
}

/// Shorthand for [`BenfordTable::from_values`].
pub fn benford_table<I: IntoIterator<Item = u64>>(values: I) -> Result<BenfordTable> {
    BenfordTable::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_digits() {
        assert_eq!(leading_digit(1), Ok(1));
        assert_eq!(leading_digit(455_052_509), Ok(4));
        assert_eq!(leading_digit(907), Ok(9));
        assert_eq!(leading_digit(u64::MAX), Ok(1));
        assert_eq!(leading_digit(0), Err(Error::LeadingDigitOfZero));
    }

    #[test]
    fn expected_distribution() {
        assert!((benford_expected(1).unwrap() - core::f64::consts::LOG10_2).abs() < 1e-15);
        assert!((benford_expected(9).unwrap() - 0.045_757_490_560_675_1).abs() < 1e-15);
        let sum: f64 = (1..=9).map(|d| benford_expected(d).unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(benford_expected(0), Err(Error::DigitOutOfRange(0)));
        assert_eq!(benford_expected(10), Err(Error::DigitOutOfRange(10)));
    }

    #[test]
    fn uniform_digits() {
        let t = benford_table(1..=9).unwrap();
        for p in t.observed {
            assert!((p - 1.0 / 9.0).abs() < 1e-15);
        }
        let dev = (1.0 / 9.0 - libm::log10(2.0)).abs();
        assert!((t.max_abs_dev - dev).abs() < 1e-15);
        assert!((t.max_abs_dev - 0.1899).abs() < 1e-4);
    }

    #[test]
    fn degenerate_inputs() {
        let t = benford_table([1, 1, 1]).unwrap();
        assert_eq!(t.observed[0], 1.0);
        assert_eq!(t.sample_size, 3);
        assert_eq!(benford_table([]), Err(Error::EmptySample));
        assert_eq!(benford_table([0, 0]), Err(Error::EmptySample));
    }

    #[test]
    fn chi_square_against_hand_value() {
        // counts all in digit 1: chi2 = (n - n p1)^2 / (n p1) + sum_{d>1} n p_d
        let t = benford_table([1; 100]).unwrap();
        let p1 = libm::log10(2.0);
        let miss = 100.0 - 100.0 * p1;
        let want = miss * miss / (100.0 * p1) + 100.0 * (1.0 - p1);
        assert!((t.chi_square - want).abs() < 1e-9);
    }
}
