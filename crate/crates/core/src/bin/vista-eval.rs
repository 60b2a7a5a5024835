use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use vista_eval::metrics::ScoreMode;
use vista_eval::model::{load_manifest, View};
use vista_eval::reports::{evaluate_report, read_report, write_run, EvalReport};
use vista_eval::sope::{driver_from_spec, resolve_pair, EvalOptions, Protocol, DEFAULT_MIN_RUN_LEN};
use vista_eval::synth::{serve_scripted, write_suite, ScriptedPredictor, ScriptedTracker, SuiteSpec, SynthSpec};
use vista_eval::{Error, Result};

#[derive(Parser)]
#[command(
    name = "vista-eval",
    version,
    about = "Evaluate single-object trackers on synchronized first/third-person video pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a tracker and write a report directory.
    Run(RunArgs),
    /// Check a manifest against the pairing constraints.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Generate a synthetic dataset.
    Synth {
        /// Suite or single-pair spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scripted tracker speaking the line protocol on stdin/stdout.
    /// The pair and view come from VISTA_SEQ and VISTA_VIEW.
    MockTracker {
        #[arg(long)]
        manifest: PathBuf,
        /// perfect, echo_init, lose_after:K, fixed_offset:DX,DY, view_biased:FPV/TPV
        #[arg(long)]
        tracker: ScriptedTracker,
        #[arg(long, default_value = "box")]
        repr: ScoreMode,
    },
    /// Work with existing reports.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Combine the reports of several trackers into one run directory.
    Merge {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Verify that a report's aggregates follow from its scores.
    Check { report: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// replay:DIR, cmd:"COMMAND" or scripted:KIND
    #[arg(long)]
    driver: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "long")]
    protocol: Protocol,
    #[arg(long, value_delimiter = ',', default_value = "fpv,tpv")]
    views: Vec<View>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_RUN_LEN)]
    min_run_len: usize,
    /// Representation the tracker exchanges and is scored in.
    #[arg(long, default_value = "box")]
    repr: ScoreMode,
    /// Tracker name in reports (defaults to the driver spec).
    #[arg(long)]
    label: Option<String>,
    /// Per-frame reply timeout for cmd drivers, in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Skip mask-based J and F.
    #[arg(long)]
    no_vos: bool,
    /// Compute pixel attributes (IV, MB); needs the frame images.
    #[arg(long)]
    pixels: bool,
}

fn run(args: RunArgs) -> Result<()> {
    if args.timeout.is_nan() || args.timeout <= 0.0 {
        return Err(Error::InvalidArgument("timeout must be positive".into()));
    }
    let manifest = load_manifest(&args.manifest)?;
    let driver = driver_from_spec(&args.driver, args.repr, Duration::from_secs_f64(args.timeout))?;
    let opts = EvalOptions {
        protocol: args.protocol,
        views: args.views,
        jobs: args.jobs,
        min_run_len: args.min_run_len,
        with_vos: !args.no_vos,
    };
    let label = args.label.as_deref().unwrap_or(&args.driver);
    let name = args.manifest.display().to_string();
    let (report, outcome) = evaluate_report(&manifest, &name, driver.as_ref(), label, args.repr, &opts, args.pixels)?;
    for f in &outcome.failures {
        let view = f.view.map(|v| format!(" ({v})")).unwrap_or_default();
        eprintln!("warning: {}{view} excluded: {}", f.pair_id, f.error);
    }
    let dir = write_run(&report, &args.out)?;
    println!("{}", dir.display());
    Ok(())
}

fn synth(spec: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(spec).map_err(|e| Error::InvalidArgument(format!("{}: {e}", spec.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let suite: SuiteSpec = if value.get("template").is_some() {
        serde_json::from_value(value)?
    } else {
        let pair: SynthSpec = serde_json::from_value(value)?;
        SuiteSpec {
            seed: 0,
            count: 1,
            template: pair,
            steps: None,
            max_gaps: 0,
        }
    };
    println!("{}", write_suite(&suite, out)?.display());
    Ok(())
}

fn mock_tracker(manifest: &Path, tracker: ScriptedTracker, repr: ScoreMode) -> Result<()> {
    let env = |name: &str| std::env::var(name).map_err(|_| Error::InvalidArgument(format!("{name} is not set")));
    let seq = env("VISTA_SEQ")?;
    let view: View = env("VISTA_VIEW")?.parse().map_err(Error::InvalidArgument)?;
    let manifest = load_manifest(manifest)?;
    let pair = resolve_pair(&manifest, &seq)?;
    let predictor = ScriptedPredictor::new(tracker, &pair, view, repr)?;
    serve_scripted(predictor, BufReader::new(io::stdin().lock()), io::stdout().lock())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { manifest } => load_manifest(&manifest).map(|m| {
            println!("{} pairs ok", m.len());
        }),
        Command::Synth { spec, out } => synth(&spec, &out),
        Command::MockTracker {
            manifest,
            tracker,
            repr,
        } => mock_tracker(&manifest, tracker, repr),
        Command::Report(ReportCommand::Merge { out, reports }) => reports
            .iter()
            .map(|p| read_report(p))
            .collect::<Result<Vec<_>>>()
            .and_then(EvalReport::merge)
            .and_then(|merged| write_run(&merged, &out))
            .map(|dir| println!("{}", dir.display())),
        Command::Report(ReportCommand::Check { report }) => read_report(&report).map(|r| {
            println!("{} trackers consistent", r.trackers.len());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
