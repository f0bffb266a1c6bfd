//! CSV artifacts and the `key=value` summary.

use std::io::{self, Write};

use primewalk_core::benford::BenfordTable;
use primewalk_core::grid::{AreaSeries, VisitMap};
use primewalk_core::polar::{DeltaSample, PhiHistogram};
use primewalk_core::runs::RunHistogram;

/// `x` with `digits` significant digits, fixed notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn write_area_series<W: Write>(mut w: W, series: &AreaSeries) -> io::Result<()> {
    writeln!(w, "n,n_p,area")?;
    for row in series.rows() {
        writeln!(w, "{},{},{}", row.n, row.n_p, row.area)?;
    }
    w.flush()
}

/// Cells sorted by `(x, y)`.
pub fn write_visits<W: Write>(mut w: W, map: &VisitMap) -> io::Result<()> {
    writeln!(w, "x,y,z")?;
    for (pos, z) in map.sorted_cells() {
        writeln!(w, "{},{},{}", pos.x, pos.y, z)?;
    }
    w.flush()
}

pub fn write_runs<W: Write>(mut w: W, hist: &RunHistogram) -> io::Result<()> {
    writeln!(w, "digit,length,count")?;
    for (digit, length, count) in hist.iter() {
        writeln!(w, "{digit},{length},{count}")?;
    }
    w.flush()
}

/// Header only when there is nothing to tabulate.
pub fn write_benford<W: Write>(mut w: W, table: Option<&BenfordTable>) -> io::Result<()> {
    writeln!(w, "d,observed,expected")?;
    if let Some(t) = table {
        for d in 0..9 {
            writeln!(w, "{},{:.6},{:.6}", d + 1, t.observed[d], t.expected[d])?;
        }
    }
    w.flush()
}

pub fn write_polar_deltas<W: Write>(mut w: W, samples: &[DeltaSample]) -> io::Result<()> {
    writeln!(w, "step,d_r,d_phi")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{}",
            s.step_index,
            fmt_sig(s.d_r, 9),
            fmt_sig(s.d_phi, 9)
        )?;
    }
    w.flush()
}

pub fn write_dphi_hist<W: Write>(mut w: W, hist: &PhiHistogram) -> io::Result<()> {
    writeln!(w, "bin_low,bin_high,count")?;
    for (i, count) in hist.counts.iter().enumerate() {
        let (lo, hi) = hist.bin_bounds(i);
        writeln!(w, "{},{},{}", fmt_sig(lo, 9), fmt_sig(hi, 9), count)?;
    }
    w.flush()
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_owned(), value.to_string()));
    }

    pub fn push_real(&mut self, key: &str, value: Option<f64>) {
        self.push(
            key,
            value.map_or_else(|| "NA".to_owned(), |v| fmt_sig(v, 9)),
        );
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn lines(&self) -> &[(String, String)] {
        &self.lines
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.lines {
            writeln!(w, "{k}={v}")?;
        }
        w.flush()
    }
}
