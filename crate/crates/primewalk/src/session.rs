//! A walk run: analyzers wired to the walk, checkpoint/resume, reports.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use primewalk_core::benford::BenfordTable;
use primewalk_core::grid::{
    recurrence_report, AreaSeries, AreaTracker, RecurrenceReport, VisitMap,
};
use primewalk_core::polar::{
    box_counting_dimension, delta_phi_histogram, dyadic_scales, BoxDimension, PhiHistogram,
    PolarCollector,
};
use primewalk_core::prime_stream::SegmentPlan;
use primewalk_core::regression::{fit_area_growth, FitResult};
use primewalk_core::runs::{short_run_fraction, RunHistogram, RunTracker};
use primewalk_core::walk::{self, SplitMix64, Step, WalkObserver, WalkSummary};
use primewalk_core::{Error, TerminalDigit, WalkState};

use crate::checkpoint::{self, CheckpointData};
use crate::config::{Analysis, OutputOptions, RuleChoice, RunConfig, RunIdentity};
use crate::error::{CheckpointError, RunError};
use crate::export::{self, Summary};
use crate::pipeline::SievePool;

/// Box sizes used for the polar cloud's dimension estimate.
const BOX_LEVELS: u32 = 8;

struct Autosave {
    path: PathBuf,
    interval: Duration,
    last: Instant,
}

/// Everything the walk feeds. Runs on the walk thread.
pub struct Analyzers {
    pub area: AreaTracker,
    pub runs: RunTracker,
    pub polar: PolarCollector,
    identity: RunIdentity,
    output: OutputOptions,
    autosave: Option<Autosave>,
    save_error: Option<RunError>,
}

impl Analyzers {
    fn maybe_autosave(&mut self, step: &Step) -> Result<(), Error> {
        let Some(auto) = &mut self.autosave else {
            return Ok(());
        };
        if auto.last.elapsed() < auto.interval {
            return Ok(());
        }
        // The newest row is the state just before this move.
        let Some(row) = self.area.series.last() else {
            return Ok(());
        };
        let state = WalkState {
            pos: step.from,
            steps_taken: step.steps_taken - 1,
            last_n: row.n,
        };
        let bytes = checkpoint::encode(
            &self.identity,
            &self.output,
            &state,
            &self.area,
            &self.runs,
            &self.polar,
        );
        auto.last = Instant::now();
        if let Err(e) = checkpoint::write_file(&auto.path, &bytes) {
            let message = format!("autosave to {} failed: {e}", auto.path.display());
            self.save_error = Some(RunError::io(&auto.path, e));
            return Err(Error::Observer(message));
        }
        Ok(())
    }
}

impl WalkObserver for Analyzers {
    #[inline]
    fn on_step(&mut self, step: &Step) -> Result<(), Error> {
        if self.area.flush_below(step.n)? {
            self.maybe_autosave(step)?;
        }
        self.area.map.record_step(step.to);
        self.runs.on_step(step)?;
        self.polar.on_step(step)
    }

    fn on_finish(&mut self, state: &WalkState) -> Result<(), Error> {
        self.area.on_finish(state)
    }
}

pub struct Session {
    pub state: WalkState,
    pub analyzers: Analyzers,
}

impl Session {
    pub fn new(identity: RunIdentity, output: OutputOptions, expected_limit: u64) -> Self {
        let map = VisitMap::with_capacity(VisitMap::capacity_hint(expected_limit / 20));
        Self {
            state: WalkState::new(),
            analyzers: Analyzers {
                area: AreaTracker::new(map, identity.checkpoint_factor),
                runs: RunTracker::default(),
                polar: PolarCollector::new(identity.polar_limit),
                identity,
                output,
                autosave: None,
                save_error: None,
            },
        }
    }

    pub fn from_checkpoint(data: CheckpointData) -> Self {
        Self {
            state: data.state,
            analyzers: Analyzers {
                area: data.area,
                runs: data.runs,
                polar: data.polar,
                identity: data.identity,
                output: data.output,
                autosave: None,
                save_error: None,
            },
        }
    }

    pub fn identity(&self) -> &RunIdentity {
        &self.analyzers.identity
    }

    pub fn output(&self) -> &OutputOptions {
        &self.analyzers.output
    }

    pub fn set_output(&mut self, output: OutputOptions) {
        self.analyzers.output = output;
    }

    /// Save a checkpoint to `path` every `interval` during [`Session::advance_to`].
    pub fn autosave(&mut self, path: PathBuf, interval: Duration) {
        self.analyzers.autosave = Some(Autosave {
            path,
            interval,
            last: Instant::now(),
        });
    }

    /// Continue the walk up to `limit` (integers scanned, or moves for the
    /// uniform baseline).
    pub fn advance_to(
        &mut self,
        limit: u64,
        pool: SievePool,
        segment_flags: usize,
    ) -> Result<WalkSummary, RunError> {
        if limit < self.state.last_n {
            return Err(RunError::Usage(format!(
                "limit {limit} is below the {} already walked",
                self.state.last_n
            )));
        }
        let result = self.walk(limit, pool, segment_flags);
        if let Some(e) = self.analyzers.save_error.take() {
            return Err(e);
        }
        result?;
        Ok(self.state.into())
    }

    fn walk(&mut self, limit: u64, pool: SievePool, segment_flags: usize) -> Result<(), Error> {
        let state = &mut self.state;
        let analyzers = &mut self.analyzers;
        match analyzers.identity.rule {
            RuleChoice::Prime(rule) => {
                let plan = SegmentPlan::after(state.last_n, limit, segment_flags);
                pool.for_each_segment(&plan, |segment| {
                    walk::advance(state, segment.events(), rule, &mut [&mut *analyzers])
                })?;
                walk::finish_walk(state, limit, &mut [analyzers])
            }
            RuleChoice::Random => {
                let mut source = SplitMix64::at(analyzers.identity.seed, state.steps_taken);
                walk::random_walk_from(state, limit, &mut source, &mut [analyzers])
            }
        }
    }

    pub fn checkpoint_bytes(&self) -> Vec<u8> {
        let a = &self.analyzers;
        checkpoint::encode(
            &a.identity,
            &a.output,
            &self.state,
            &a.area,
            &a.runs,
            &a.polar,
        )
    }

    pub fn report(&self) -> Report {
        Report::build(self)
    }
}

/// Derived statistics at the end of a run.
#[derive(Debug, Clone)]
pub struct Report {
    pub rule: RuleChoice,
    pub state: WalkState,
    pub area: u64,
    pub series: AreaSeries,
    pub fit: Option<FitResult>,
    pub recurrence: Option<RecurrenceReport>,
    pub runs: RunHistogram,
    pub short_run_fraction: Option<f64>,
    pub benford: Option<BenfordTable>,
    pub dphi: PhiHistogram,
    pub box_dimension: Option<BoxDimension>,
    pub polar_samples: usize,
    pub polar_skipped: u64,
}

impl Report {
    fn build(session: &Session) -> Self {
        let a = &session.analyzers;
        let state = session.state;
        let series = a.area.series_with_final(state.last_n);
        let runs = a.runs.snapshot();
        let cloud: Vec<(f64, f64)> = a.polar.samples.iter().map(|s| (s.d_phi, s.d_r)).collect();
        Self {
            rule: a.identity.rule,
            state,
            area: a.area.map.area(),
            fit: fit_area_growth(&series, a.output.min_n_p).ok(),
            series,
            recurrence: recurrence_report(&a.area.map).ok(),
            short_run_fraction: short_run_fraction(&runs).ok(),
            runs,
            benford: BenfordTable::from_values(a.area.map.z_values()).ok(),
            dphi: delta_phi_histogram(
                a.polar.samples.iter().map(|s| s.d_phi),
                a.output.dphi_bins as usize,
            )
            .expect("bin count validated"),
            box_dimension: box_counting_dimension(&cloud, &dyadic_scales(BOX_LEVELS)).ok(),
            polar_samples: a.polar.samples.len(),
            polar_skipped: a.polar.tracker.skipped(),
        }
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        s.push("rule", self.rule);
        s.push("n", self.state.last_n);
        s.push("n_p", self.state.steps_taken);
        s.push("final_x", self.state.pos.x);
        s.push("final_y", self.state.pos.y);
        s.push("area", self.area);
        s.push_real("beta", self.fit.map(|f| f.slope));
        s.push_real("beta_stderr", self.fit.map(|f| f.slope_stderr));
        s.push_real("beta_r_squared", self.fit.map(|f| f.r_squared));
        s.push("beta_points", self.fit.map_or(0, |f| f.n_points));
        match &self.recurrence {
            Some(r) => {
                s.push("z_max", r.z_max);
                s.push("argmax_x", r.argmax_pos.x);
                s.push("argmax_y", r.argmax_pos.y);
                s.push_real("argmax_dist", Some(r.dist_argmax));
                for (i, c) in r.quadrant_counts.iter().enumerate() {
                    s.push(&format!("quadrant_{}", i + 1), c);
                }
                s.push("axis_x", r.axis_counts[0]);
                s.push("axis_y", r.axis_counts[1]);
            }
            None => {
                for key in ["z_max", "argmax_x", "argmax_y", "argmax_dist"] {
                    s.push(key, "NA");
                }
            }
        }
        s.push("runs_total", self.runs.total_runs());
        s.push_real("short_run_fraction", self.short_run_fraction);
        for d in TerminalDigit::ALL {
            s.push(&format!("max_run_{d}"), self.runs.max_length(d));
        }
        s.push("benford_samples", self.benford.map_or(0, |b| b.sample_size));
        s.push_real("benford_max_abs_dev", self.benford.map(|b| b.max_abs_dev));
        s.push_real("benford_chi_square", self.benford.map(|b| b.chi_square));
        s.push("polar_samples", self.polar_samples);
        s.push("polar_skipped", self.polar_skipped);
        s.push_real(
            "polar_box_dimension",
            self.box_dimension.as_ref().map(|b| b.dimension),
        );
        s
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| RunError::io(path, e))
}

fn write_with<F>(dir: &Path, name: &str, write: F) -> Result<PathBuf, RunError>
where
    F: FnOnce(BufWriter<File>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    write(create(&path)?).map_err(|e| RunError::io(&path, e))?;
    Ok(path)
}

/// Files written by a run.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
    pub visits_skipped: bool,
}

/// Write the selected CSVs, `summary.txt` and the final checkpoint.
pub fn write_outputs(session: &Session, dir: &Path) -> Result<(Report, Artifacts), RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let report = session.report();
    let output = session.output();
    let want = |a| output.analyses.contains(a);
    let mut artifacts = Artifacts::default();
    let files = &mut artifacts.files;

    if want(Analysis::Area) {
        files.push(write_with(dir, "area_series.csv", |w| {
            export::write_area_series(w, &report.series)
        })?);
        let map = &session.analyzers.area.map;
        if map.occupied_cells() as u64 <= output.max_visits_rows {
            files.push(write_with(dir, "visits.csv", |w| {
                export::write_visits(w, map)
            })?);
        } else {
            artifacts.visits_skipped = true;
        }
    }
    if want(Analysis::Runs) {
        files.push(write_with(dir, "runs.csv", |w| {
            export::write_runs(w, &report.runs)
        })?);
    }
    if want(Analysis::Benford) {
        files.push(write_with(dir, "benford.csv", |w| {
            export::write_benford(w, report.benford.as_ref())
        })?);
    }
    if want(Analysis::Polar) {
        let samples = &session.analyzers.polar.samples;
        files.push(write_with(dir, "polar_deltas.csv", |w| {
            export::write_polar_deltas(w, samples)
        })?);
        files.push(write_with(dir, "dphi_hist.csv", |w| {
            export::write_dphi_hist(w, &report.dphi)
        })?);
    }
    let summary = report.summary();
    files.push(write_with(dir, "summary.txt", |w| summary.write(w))?);

    let ckpt = dir.join(checkpoint::FILE_NAME);
    checkpoint::write_file(&ckpt, &session.checkpoint_bytes())
        .map_err(|e| RunError::io(&ckpt, e))?;
    files.push(ckpt);
    Ok((report, artifacts))
}

#[derive(Debug)]
pub struct RunOutcome {
    pub summary: WalkSummary,
    pub report: Report,
    pub artifacts: Artifacts,
    pub elapsed: Duration,
}

/// Open the session a config asks for: fresh, or from its resume checkpoint.
pub fn open_session(config: &RunConfig) -> Result<Session, RunError> {
    config.validate().map_err(RunError::Usage)?;
    let Some(path) = &config.resume_from else {
        return Ok(Session::new(config.identity, config.output, config.limit));
    };
    let data = checkpoint::read_file(path)?;
    if data.identity != config.identity {
        return Err(CheckpointError::ConfigMismatch(format!(
            "checkpoint has rule={} seed={} checkpoint-factor={} polar-limit={}",
            data.identity.rule,
            data.identity.seed,
            data.identity.checkpoint_factor,
            data.identity.polar_limit
        ))
        .into());
    }
    let mut session = Session::from_checkpoint(data);
    session.set_output(config.output);
    Ok(session)
}

/// Run `config` end to end and write its artifacts.
pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let mut session = open_session(config)?;
    if config.resume_from.is_some() && config.limit <= session.state.last_n {
        return Err(RunError::Usage(format!(
            "resume limit {} must exceed the checkpointed n = {}",
            config.limit, session.state.last_n
        )));
    }
    fs::create_dir_all(&config.out_dir).map_err(|e| RunError::io(&config.out_dir, e))?;
    if config.save_every > 0 {
        session.autosave(
            config.out_dir.join(checkpoint::FILE_NAME),
            Duration::from_secs(config.save_every),
        );
    }
    let start = Instant::now();
    let summary = session.advance_to(
        config.limit,
        SievePool::new(config.threads),
        config.segment_flags,
    )?;
    let elapsed = start.elapsed();
    let (report, artifacts) = write_outputs(&session, &config.out_dir)?;
    Ok(RunOutcome {
        summary,
        report,
        artifacts,
        elapsed,
    })
}

/// Config that continues `checkpoint` to `limit` with its stored settings.
pub fn resume_config(
    checkpoint: &Path,
    limit: u64,
    out_dir: Option<PathBuf>,
) -> Result<RunConfig, RunError> {
    let data = checkpoint::read_file(checkpoint)?;
    let out_dir = out_dir.unwrap_or_else(|| {
        checkpoint
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
    });
    let mut config = RunConfig::new(limit, data.identity.rule, out_dir);
    config.identity = data.identity;
    config.output = data.output;
    config.resume_from = Some(checkpoint.to_path_buf());
    Ok(config)
}
