use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use coopsense::analysis::{analyze, AnalysisOptions};
use coopsense::golden;
use coopsense::model::{Hypothesis, ScenarioConfig};
use coopsense::report::{emit_table, Record, ResultRow};
use coopsense::scenarios;
use coopsense::sim::{calibrate_thresholds, CalibrationBudget, ErrorPooling, MonteCarlo};
use coopsense::tables::{reproduce_table, TableOptions};

/// Cooperative sequential spectrum sensing: simulation, analysis and
/// reproduction of the published tables.
///
/// Every flag can also be set through an environment variable with the
/// COOPSENSE_ prefix (COOPSENSE_TRIALS, COOPSENSE_SEED, ...).
#[derive(Debug, Parser)]
#[command(name = "coopsense", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo run of one scenario.
    Simulate(SimulateArgs),
    /// Analytic P_FA and E_DD (SPRT-CSPRT only); defaults to the Table IV rows.
    Analyze(AnalyzeArgs),
    /// Search thresholds for a target error probability.
    Calibrate(CalibrateArgs),
    /// Rebuild a published table and compare cell by cell.
    ReproduceTable(ReproduceArgs),
    /// Simulation and analysis side by side for one scenario.
    Compare(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Truth {
    H0,
    H1,
}

impl From<Truth> for Hypothesis {
    fn from(t: Truth) -> Self {
        match t {
            Truth::H0 => Hypothesis::H0,
            Truth::H1 => Hypothesis::H1,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    #[arg(long, env = "COOPSENSE_TRIALS", value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    #[arg(long, env = "COOPSENSE_SEED", default_value_t = 42)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "COOPSENSE_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// CSV output path; the aligned table always goes to stdout.
    #[arg(long, env = "COOPSENSE_OUT")]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn workers(&self) -> usize {
        self.workers.map_or_else(
            || std::thread::available_parallelism().map_or(1, |n| n.get()),
            |w| w as usize,
        )
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, env = "COOPSENSE_SCENARIO")]
    scenario: PathBuf,
    /// Override the scenario's true hypothesis.
    #[arg(long, value_enum)]
    hypothesis: Option<Truth>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long, env = "COOPSENSE_SCENARIO")]
    scenario: Option<PathBuf>,
    #[arg(long, env = "COOPSENSE_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long, env = "COOPSENSE_SCENARIO")]
    scenario: PathBuf,
    #[arg(long, env = "COOPSENSE_TARGET_PFA")]
    target_pfa: f64,
    /// Local threshold candidates (γ, or c for GLR); defaults to the scenario's own.
    #[arg(long, value_delimiter = ',')]
    locals: Vec<f64>,
    /// Constrain errors pooled over both hypotheses instead of the scenario's own.
    #[arg(long)]
    pooled: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
    table: u8,
    /// Include Table I's 5e-5 column (at least 2e6 trials per cell).
    #[arg(long)]
    long_column: bool,
    #[command(flatten)]
    run: RunArgs,
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path).with_context(|| format!("loading scenario {}", path.display()))
}

/// Write CSV to `out` (or nowhere) and print the aligned text.
fn emit(records: &[Record], out: Option<&Path>) -> Result<()> {
    let text = match out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            emit_table(records, BufWriter::new(f))?
        }
        None => emit_table(records, std::io::sink())?,
    };
    print!("{text}");
    Ok(())
}

fn simulate(args: &SimulateArgs, with_analysis: bool) -> Result<ExitCode> {
    let mut cfg = load(&args.scenario)?;
    if let Some(h) = args.hypothesis {
        cfg = cfg.with_truth(h.into());
    }
    let trials = args.run.trials.unwrap_or(100_000);
    let s = MonteCarlo::new(args.run.seed, args.run.workers()).summarize(&cfg, trials)?;
    let mut records: Vec<Record> = vec![ResultRow::from_simulation(&cfg, &s, args.run.seed).into()];
    if with_analysis {
        let a = analyze(&cfg, &AnalysisOptions::default())?;
        records.push(ResultRow::from_analysis(&cfg, &a).into());
    }
    emit(&records, args.run.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_analyze(args: &AnalyzeArgs) -> Result<ExitCode> {
    let configs = match &args.scenario {
        Some(p) => vec![load(p)?],
        None => golden::TABLE4.iter().map(scenarios::table4).collect(),
    };
    let opts = AnalysisOptions::default();
    let records = configs
        .iter()
        .map(|cfg| Ok(ResultRow::from_analysis(cfg, &analyze(cfg, &opts)?).into()))
        .collect::<Result<Vec<Record>>>()?;
    emit(&records, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn calibrate(args: &CalibrateArgs) -> Result<ExitCode> {
    let cfg = load(&args.scenario)?;
    let locals = if args.locals.is_empty() {
        vec![cfg.local_parameter()]
    } else {
        args.locals.clone()
    };
    let mut budget = CalibrationBudget::new(args.run.trials.unwrap_or(100_000), locals);
    budget.master_seed = args.run.seed;
    budget.workers = args.run.workers();
    if args.pooled {
        budget.pooling = ErrorPooling::Pooled;
    }
    let out = calibrate_thresholds(&cfg, args.target_pfa, &budget)?;
    println!(
        "local={} beta={} achieved_pfa={:.6} ci95=[{:.6}, {:.6}] edd={:.4}",
        out.local, out.beta, out.achieved_pfa, out.pfa_ci95.0, out.pfa_ci95.1, out.edd
    );
    // Verify on seeds disjoint from the calibration run.
    let design = out.apply(&cfg);
    let seed = args.run.seed.wrapping_add(1);
    let s = MonteCarlo::new(seed, args.run.workers()).summarize(&design, budget.trials)?;
    emit(&[ResultRow::from_simulation(&design, &s, seed).into()], args.run.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn comparison_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "table".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.comparison.csv"))
}

fn reproduce(args: &ReproduceArgs) -> Result<ExitCode> {
    let mut opts = TableOptions::defaults(args.table);
    if let Some(t) = args.run.trials {
        opts = opts.with_trials(t);
    }
    opts.seed = args.run.seed;
    opts.workers = args.run.workers();
    opts.long_column = args.long_column;
    let report = reproduce_table(args.table, &opts)?;
    if report.rows.is_empty() {
        bail!("table {}: no cell could be calibrated\n{}", args.table, report.summary_text());
    }
    let rows: Vec<Record> = report.rows.iter().cloned().map(Record::from).collect();
    let cells: Vec<Record> = report.cells.iter().cloned().map(Record::from).collect();
    emit(&rows, args.run.out.as_deref())?;
    println!();
    emit(&cells, args.run.out.as_deref().map(comparison_path).as_deref())?;
    println!();
    print!("{}", report.summary_text());
    if report.passed() {
        println!("table {}: all cells within tolerance", args.table);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("table {}: out-of-tolerance cells or failed checks", args.table);
        Ok(ExitCode::from(2))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, false),
        Command::Compare(a) => simulate(a, true),
        Command::Analyze(a) => run_analyze(a),
        Command::Calibrate(a) => calibrate(a),
        Command::ReproduceTable(a) => reproduce(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
