use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use cgr::analytics::{self, ResampleUnit, Statistic};
use cgr::direct::{AttemptBound, DirectConfig};
use cgr::gateway::http::{BackendConfig, HttpClient};
use cgr::gateway::{self, ModelClient, RetryPolicy, Script, ScriptedClient};
use cgr::item::{self, Item};
use cgr::pipeline::{self, RunConfig};
use cgr::report::{self, ReplaySpec};
use cgr::sandbox::{AssistedConfig, ExecutionConfig};
use cgr::store;

#[derive(Parser)]
#[command(name = "cgr", version, about = "Direct vs scaffold-assisted MCQA evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate items through the direct and assisted paths.
    Run(RunArgs),
    /// Audit result, ledger, and scaffold files.
    Audit(AuditArgs),
    /// Dataset, solver, matrix, difficulty, and overlap tables from results.
    Report(ReportArgs),
    /// Percentile bootstrap intervals over a pair-summary file.
    Bootstrap(BootstrapArgs),
    /// Recompute macro, sweep, gap-closure, and uncertainty rows from pair summaries.
    ReplayFixture(ReplayArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    run_id: String,
    /// Item files (line-delimited JSON). Repeatable.
    #[arg(long, required = true, num_args = 1..)]
    items: Vec<PathBuf>,
    /// Backend config file, or just a label when --scripted is given.
    #[arg(long)]
    solver: String,
    /// Backend config file, or just a label when --scripted is given.
    #[arg(long)]
    generator: String,
    /// JSON file with {"solver": <script>, "generator": <script>}.
    #[arg(long)]
    scripted: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[arg(long, default_value_t = 30)]
    call_cap: u32,
    /// Enforce the 10-call limit stated in the generator prompt.
    #[arg(long)]
    strict_cap: bool,
    /// Wall-clock limit per scaffold execution, seconds.
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long, default_value_t = 3)]
    reattempt_max_ct: u32,
    #[arg(long, value_enum, default_value_t = AttemptBound::Extra)]
    reattempt_bound: AttemptBound,
    /// Also reattempt direct answers outside the option set.
    #[arg(long)]
    retry_out_of_set: bool,
    /// Restrict the scaffold-side extract_answer helper to option letters.
    #[arg(long)]
    option_set_aware: bool,
    #[arg(long, default_value = "python3")]
    interpreter: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    ledger: Option<PathBuf>,
    #[arg(long)]
    scaffolds: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    call_limit: usize,
    #[arg(long, default_value = "out/audit")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long, default_value = "out/report")]
    out: PathBuf,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Pair-summary file; the bundled fixture when omitted.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Threshold defining the kept pairs.
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    #[arg(long, value_enum, default_value_t = Statistic::MacroDelta)]
    statistic: Statistic,
    #[arg(long, value_enum, num_args = 1.., default_values_t = [ResampleUnit::Pair, ResampleUnit::DatasetCluster, ResampleUnit::SolverCluster])]
    unit: Vec<ResampleUnit>,
    #[arg(long, default_value_t = analytics::DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = analytics::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Pair-summary file; the bundled fixture when omitted.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', default_values_t = analytics::DEFAULT_TAUS.to_vec())]
    tau: Vec<f64>,
    #[arg(long, default_value_t = analytics::DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = analytics::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure class mapped to the process exit code.
enum Failure {
    Config(anyhow::Error),
    Evaluation(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Report(args) => cmd_report(args),
        Command::Bootstrap(args) => cmd_bootstrap(args),
        Command::ReplayFixture(args) => cmd_replay(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Evaluation(summary)) => {
            eprintln!("{summary}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[derive(Deserialize)]
struct ScriptFile {
    solver: Script,
    generator: Script,
}

fn load_backend(spec: &str) -> anyhow::Result<(Arc<dyn ModelClient>, String)> {
    let config = BackendConfig::load(Path::new(spec))?;
    let label = config.model_label.clone();
    Ok((Arc::new(HttpClient::new(config)?), label))
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut items: Vec<Item> = Vec::new();
    for path in &args.items {
        items.extend(item::load_items(path, None)?);
    }
    let ((solver, solver_label), (generator, generator_label)) = match &args.scripted {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let scripts: ScriptFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let s: Arc<dyn ModelClient> = Arc::new(ScriptedClient::new(scripts.solver)?);
            let g: Arc<dyn ModelClient> = Arc::new(ScriptedClient::new(scripts.generator)?);
            ((s, args.solver.clone()), (g, args.generator.clone()))
        }
        None => (load_backend(&args.solver)?, load_backend(&args.generator)?),
    };
    let execution = ExecutionConfig {
        call_cap: args.call_cap,
        wall_timeout_s: args.timeout,
        enforce_strict_cap: args.strict_cap,
        interpreter: args.interpreter.clone(),
        option_set_aware: args.option_set_aware,
        ..Default::default()
    };
    execution.validate()?;
    let retry = if args.scripted.is_some() {
        RetryPolicy {
            max_retries: 0,
            base_backoff: Duration::ZERO,
        }
    } else {
        RetryPolicy::default()
    };
    let config = RunConfig {
        run_id: args.run_id.clone(),
        items,
        solver,
        solver_label,
        generator,
        generator_label,
        direct: DirectConfig {
            reattempt_max_ct: args.reattempt_max_ct,
            retry_out_of_set: args.retry_out_of_set,
            bound: args.reattempt_bound,
        },
        assisted: AssistedConfig {
            execution,
            reattempt_max_ct: args.reattempt_max_ct,
            bound: args.reattempt_bound,
            ..Default::default()
        },
        workers: args.workers,
        out_dir: args.out.clone(),
        retry,
    };
    let summary = pipeline::run(config)?;
    println!(
        "run {}: {} records -> {}\nledger -> {}\nscaffolds -> {}",
        args.run_id,
        summary.records_written,
        summary.results_path.display(),
        summary.ledger_path.display(),
        summary.scaffold_dir.display()
    );
    if summary.failures.is_empty() {
        return Ok(());
    }
    let mut text = format!("{} item(s) failed:", summary.failures.len());
    for f in &summary.failures {
        text.push_str(&format!("\n  {}/{}: {}", f.dataset_id, f.item_id, f.message));
    }
    Err(Failure::Evaluation(text))
}

fn emit(tables: &[report::Table], out: Option<&Path>, stem: &str) -> anyhow::Result<()> {
    print!("{}", report::render_text(tables));
    if let Some(dir) = out {
        let written = report::write_tables(dir, stem, tables)?;
        eprintln!("wrote {} files under {}", written.len(), dir.display());
    }
    Ok(())
}

fn cmd_audit(args: AuditArgs) -> Result<(), Failure> {
    let records = store::load_records(&args.results)?;
    let ledger = match &args.ledger {
        Some(p) => gateway::load_ledger(p)?,
        None => Vec::new(),
    };
    let report = report::audit(&records, &ledger, args.scaffolds.as_deref(), args.call_limit)?;
    emit(&report.tables(), Some(&args.out), "audit")?;
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let records = store::load_records(&args.results)?;
    emit(&report::summary_tables(&records), Some(&args.out), "report")?;
    Ok(())
}

fn load_fixture(path: Option<&Path>) -> anyhow::Result<Vec<analytics::PairSummary>> {
    Ok(match path {
        Some(p) => analytics::load_pairs(p)?,
        None => analytics::retained_pairs(),
    })
}

fn cmd_bootstrap(args: BootstrapArgs) -> Result<(), Failure> {
    let pairs = load_fixture(args.fixture.as_deref())?;
    let kept = analytics::partition(&pairs, args.tau)?.kept_pairs;
    let mut reports = Vec::new();
    for unit in &args.unit {
        reports.push(analytics::bootstrap_ci(&kept, args.statistic, *unit, args.replicates, args.seed)?);
    }
    emit(&[report::bootstrap_table(&reports)], args.out.as_deref(), "bootstrap")?;
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<(), Failure> {
    let pairs = load_fixture(args.fixture.as_deref())?;
    let spec = ReplaySpec {
        taus: args.tau,
        replicates: args.replicates,
        seed: args.seed,
    };
    let replay = report::replay_fixture(&pairs, &spec)?;
    emit(&replay.tables(), args.out.as_deref(), "replay")?;
    Ok(())
}
