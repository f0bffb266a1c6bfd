use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use primewalk::config::RuleChoice;
use primewalk::session::{self, RunOutcome};
use primewalk::{parse_count, Analyses, RunConfig, RunError, RunIdentity, SievePool};
use primewalk_core::grid::CheckpointSchedule;
use primewalk_core::prime_stream::{SegmentPlan, DEFAULT_SEGMENT_FLAGS};

#[derive(Parser, Debug)]
#[command(
    name = "primewalk",
    version,
    about = "Lattice walks steered by the last digit of each prime"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count primes up to LIMIT that end in 1, 3, 7 or 9.
    Count {
        #[arg(value_parser = parse_count)]
        limit: u64,
        #[command(flatten)]
        sieve: SieveArgs,
    },
    /// Run a walk and write its CSVs, summary and checkpoint.
    Walk(WalkArgs),
    /// Continue a checkpointed walk to a larger limit.
    Resume {
        checkpoint: PathBuf,
        #[arg(long, value_parser = parse_count)]
        limit: u64,
        /// Output directory (defaults to the checkpoint's directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sieve: SieveArgs,
        #[arg(long, default_value_t = 600)]
        save_every: u64,
    },
}

#[derive(Args, Debug)]
struct SieveArgs {
    /// Sieve worker threads (defaults to the available cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Integers covered by one sieve segment.
    #[arg(long, value_parser = parse_count)]
    segment_size: Option<u64>,
}

impl SieveArgs {
    fn threads(&self) -> usize {
        self.threads.unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, std::num::NonZeroUsize::get)
        })
    }

    fn segment_flags(&self) -> Result<usize, RunError> {
        match self.segment_size {
            None => Ok(DEFAULT_SEGMENT_FLAGS),
            Some(size) if size >= 2 => usize::try_from(size / 2)
                .map_err(|_| RunError::Usage(format!("segment size {size} is too large"))),
            Some(size) => Err(RunError::Usage(format!(
                "segment size must be at least 2, got {size}"
            ))),
        }
    }
}

#[derive(Args, Debug)]
struct WalkArgs {
    /// Largest integer scanned (prime rules) or move count (rw).
    #[arg(long, value_parser = parse_count)]
    limit: Option<u64>,
    /// Move count for the uniform random baseline.
    #[arg(long, value_parser = parse_count)]
    steps: Option<u64>,
    #[arg(long, default_value = "a1")]
    rule: RuleChoice,
    /// Seed for the random baseline.
    #[arg(long, value_parser = parse_count, default_value = "0")]
    seed: u64,
    /// Ratio between successive area checkpoints.
    #[arg(long, default_value_t = CheckpointSchedule::DEFAULT_FACTOR)]
    checkpoint_factor: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated subset of area,runs,benford,polar,recurrence, or all.
    #[arg(long, default_value = "all")]
    analyses: Analyses,
    /// Continue from this checkpoint; other settings must match it.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[command(flatten)]
    sieve: SieveArgs,
    /// Polar increments are recorded while n (or the move count) is at most this.
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    polar_limit: u64,
    #[arg(long, default_value_t = 72)]
    dphi_bins: u32,
    /// Skip visits.csv when more cells than this were visited.
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    max_visits_rows: u64,
    /// Smallest move count included in the area growth fit.
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    min_n_p: u64,
    /// Seconds between automatic checkpoints; 0 disables them.
    #[arg(long, default_value_t = 600)]
    save_every: u64,
}

impl WalkArgs {
    fn into_config(self) -> Result<RunConfig, RunError> {
        let limit = match (self.rule, self.limit, self.steps) {
            (_, Some(a), Some(b)) if a != b => {
                return Err(RunError::Usage("--limit and --steps disagree".into()))
            }
            (RuleChoice::Prime(_), _, Some(_)) => {
                return Err(RunError::Usage("--steps applies only to --rule rw".into()))
            }
            (_, Some(n), _) | (_, None, Some(n)) => n,
            (_, None, None) => return Err(RunError::Usage("--limit is required".into())),
        };
        let seed = match self.rule {
            RuleChoice::Random => self.seed,
            RuleChoice::Prime(_) => 0,
        };
        let mut config = RunConfig::new(limit, self.rule, self.out);
        config.identity =
            RunIdentity::new(self.rule, seed, self.checkpoint_factor, self.polar_limit);
        config.output.analyses = self.analyses;
        config.output.dphi_bins = self.dphi_bins;
        config.output.max_visits_rows = self.max_visits_rows;
        config.output.min_n_p = self.min_n_p;
        config.resume_from = self.resume;
        config.threads = self.sieve.threads();
        config.segment_flags = self.sieve.segment_flags()?;
        config.save_every = self.save_every;
        Ok(config)
    }
}

fn report(outcome: &RunOutcome) {
    let _ = outcome.report.summary().write(std::io::stdout().lock());
    if outcome.artifacts.visits_skipped {
        eprintln!("visits.csv skipped: too many cells (raise --max-visits-rows)");
    }
    eprintln!(
        "walked to n = {} in {:.2} s; {} files written",
        outcome.summary.last_n,
        outcome.elapsed.as_secs_f64(),
        outcome.artifacts.files.len()
    );
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Count { limit, sieve } => {
            let plan = SegmentPlan::new(0, limit, sieve.segment_flags()?);
            let count = SievePool::new(sieve.threads()).count_walk_primes(&plan);
            println!("{count}");
        }
        Command::Walk(args) => report(&session::run(&args.into_config()?)?),
        Command::Resume {
            checkpoint,
            limit,
            out,
            sieve,
            save_every,
        } => {
            let mut config = session::resume_config(&checkpoint, limit, out)?;
            config.threads = sieve.threads();
            config.segment_flags = sieve.segment_flags()?;
            config.save_every = save_every;
            report(&session::run(&config)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
