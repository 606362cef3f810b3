//! `fairlab` command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fairlab_core::data::{generate, mask_protected, write_csv, JointSpec};
use fairlab_core::experiment::{
    emit_reports, format_pareto, format_selection, pareto_rows, read_runs, replay, run_one,
    run_record, run_sweep, runs_dir, selection_rows, summarize, ExperimentConfig, RunManifest,
    OUT_ENV,
};
use fairlab_core::metrics::{evaluate, format_report, read_predictions, Utopia};
use fairlab_core::models::Variant;

#[derive(Parser, Debug)]
#[command(name = "fairlab", version, about = "Adversarial debiasing experiments")]
struct Cli {
    /// Seed: data seed for generate-data and sweep, training seed for train.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root.
    #[arg(long, global = true, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// Flat key = value experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a synthetic dataset and write it as CSV.
    GenerateData(GenerateArgs),
    /// Train one configuration and write its run manifest.
    Train(TrainArgs),
    /// Train every variant × λ × seed and write the reports.
    Sweep(SweepArgs),
    /// Score a `yhat,y,g` predictions file.
    Evaluate(EvaluateArgs),
    /// Seed-mean Pareto frontier per variant from runs.csv.
    Pareto(ParetoArgs),
    /// Fairest candidate within an accuracy slack, from runs.csv.
    Select(SelectArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Generator spec name.
    #[arg(long, default_value = "moji_default")]
    spec: String,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Fraction of rows keeping their protected label.
    #[arg(long, default_value_t = 1.0)]
    protected_fraction: f64,
    /// Output CSV (default: <out>/data.csv).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Overrides {
    /// `key=value` config override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    lambda: Option<f64>,
    #[command(flatten)]
    overrides: Overrides,
    /// Re-run a manifest and check that it reproduces.
    #[arg(long, value_name = "MANIFEST", conflicts_with_all = ["variant", "lambda"])]
    replay: Option<PathBuf>,
    /// Also write the best checkpoint here.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Concurrent training runs.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    predictions: PathBuf,
}

#[derive(Args, Debug)]
struct ParetoArgs {
    runs: PathBuf,
    /// Write the frontier here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelectArgs {
    runs: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    slack: f64,
}

fn load_config(cli: &Cli, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    for kv in &overrides.set {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .unwrap_or_else(fairlab_core::experiment::default_out_dir)
}

fn print_bytes(bytes: &[u8]) -> Result<()> {
    std::io::stdout().write_all(bytes)?;
    Ok(())
}

fn cmd_generate(cli: &Cli, a: &GenerateArgs) -> Result<()> {
    let spec = JointSpec::by_name(&a.spec)?;
    let seed = cli.seed.unwrap_or(0);
    let mut ds = generate(&spec, a.n, seed)?;
    if a.protected_fraction < 1.0 {
        ds = mask_protected(&ds, a.protected_fraction, seed)?;
    }
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| out_dir(cli).join("data.csv"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(&ds, &path).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} rows to {}", ds.len(), path.display());
    Ok(())
}

fn print_manifest(m: &RunManifest, path: &Path) {
    if let (Some(dev), Some(test)) = (m.dev, m.test) {
        println!("manifest {}", path.display());
        println!("best epoch {}", m.best_epoch.unwrap_or(0));
        println!("dev  {}", format_report(&dev));
        println!("test {}", format_report(&test));
    }
}

fn cmd_train(cli: &Cli, a: &TrainArgs) -> Result<()> {
    if let Some(path) = &a.replay {
        let original =
            RunManifest::load(path).with_context(|| format!("reading {}", path.display()))?;
        let again = replay(&original)?;
        let same = run_record(&original) == run_record(&again) && original.history == again.history;
        println!(
            "{}",
            format_report(&again.test.context("replayed run failed")?)
        );
        if !same {
            bail!(
                "replay of {} does not reproduce the recorded run",
                path.display()
            );
        }
        println!("replay reproduces {}", original.hash);
        return Ok(());
    }
    let mut cfg = load_config(cli, &a.overrides)?;
    if let Some(v) = a.variant {
        cfg.train.variant = v;
    }
    if let Some(l) = a.lambda {
        cfg.train.lambda = l;
    }
    if let Some(s) = cli.seed {
        cfg.train.seed = s;
    }
    cfg.train.validate()?;
    let splits = cfg.data.load()?;
    let (manifest, checkpoint) = run_one(&cfg.data, &splits, &cfg.train)?;
    let path = runs_dir(&cfg.out).join(format!("{}.json", manifest.hash));
    manifest.save(&path)?;
    if let Some(err) = &manifest.error {
        bail!("training failed: {err} (manifest {})", path.display());
    }
    if let (Some(ck), Some(p)) = (checkpoint, &a.checkpoint) {
        ck.save(p)?;
    }
    print_manifest(&manifest, &path);
    Ok(())
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> Result<()> {
    let mut cfg = load_config(cli, &a.overrides)?;
    if let Some(s) = cli.seed {
        cfg.data.data_seed = s;
    }
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    let outcome = run_sweep(&cfg)?;
    for m in outcome.failures() {
        eprintln!(
            "run {} ({} λ={} seed={}) failed: {}",
            m.hash,
            m.config.variant,
            m.config.lambda,
            m.seed,
            m.error.as_deref().unwrap_or("incomplete")
        );
    }
    let files = emit_reports(&outcome.manifests, &cfg.out)?;
    println!(
        "{} runs ({} trained, {} reused); reports in {}",
        outcome.manifests.len(),
        outcome.computed,
        outcome.reused,
        cfg.out.display()
    );
    for p in [&files.runs, &files.summary, &files.pareto, &files.selection] {
        println!("  {}", p.display());
    }
    Ok(())
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let preds = read_predictions(&a.predictions)?;
    println!("{}", format_report(&evaluate(&preds, Utopia::default())?));
    Ok(())
}

fn cmd_pareto(a: &ParetoArgs) -> Result<()> {
    let summary = summarize(&read_runs(&a.runs)?)?;
    let bytes = format_pareto(&pareto_rows(&summary))?;
    match &a.output {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => print_bytes(&bytes)?,
    }
    Ok(())
}

fn cmd_select(a: &SelectArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.slack) {
        bail!("--slack must lie in [0, 1], got {}", a.slack);
    }
    let summary = summarize(&read_runs(&a.runs)?)?;
    print_bytes(&format_selection(&selection_rows(&summary, &[a.slack])?)?)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenerateData(a) => cmd_generate(cli, a),
        Command::Train(a) => cmd_train(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Pareto(a) => cmd_pareto(a),
        Command::Select(a) => cmd_select(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
