use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracnls::experiments::{list_experiments, ExperimentKind, Status};

mod commands;
mod config;
mod manifest;

use commands::Outcome;
use config::{ConfigFile, SCHEMA};
use manifest::{inventory, write_atomic, RunManifest};

/// Pseudospectral experiments for the fractional Hartree equation with randomized data.
#[derive(Debug, Parser)]
#[command(name = "fracnls", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config with `schema = 1` and one table per subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the master seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for ensembles; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Evolve one datum and record conservation diagnostics.
    Simulate,
    /// Draw an ensemble of randomized data.
    Randomize,
    McTail,
    Khintchine,
    BilinearAnnulus,
    BilinearBall,
    Strichartz,
    XsbTransfer,
    Smoothing,
    Conservation,
    /// List experiment kinds with the estimate each one probes.
    List,
}

impl Command {
    fn name(self) -> &'static str {
        match self.experiment() {
            Some(k) => k.name(),
            None => match self {
                Command::Simulate => "simulate",
                Command::Randomize => "randomize",
                _ => "list",
            },
        }
    }

    fn experiment(self) -> Option<ExperimentKind> {
        Some(match self {
            Command::McTail => ExperimentKind::McTail,
            Command::Khintchine => ExperimentKind::Khintchine,
            Command::BilinearAnnulus => ExperimentKind::BilinearAnnulus,
            Command::BilinearBall => ExperimentKind::BilinearBall,
            Command::Strichartz => ExperimentKind::Strichartz,
            Command::XsbTransfer => ExperimentKind::XsbTransfer,
            Command::Smoothing => ExperimentKind::Smoothing,
            Command::Conservation => ExperimentKind::Conservation,
            _ => return None,
        })
    }
}

/// Stdout writes that tolerate a closed pipe (`fracnls list | head`).
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn list(json: bool) {
    if json {
        let items: Vec<_> = ExperimentKind::ALL
            .iter()
            .map(|k| serde_json::json!({ "name": k.name(), "anchor": k.anchor() }))
            .collect();
        emit(&format!("{}\n", serde_json::to_string_pretty(&items).expect("static json")));
    } else {
        emit(&list_experiments());
    }
}

fn execute(cli: &Cli, out: &Path) -> Result<Outcome, String> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile {
            schema: SCHEMA,
            ..ConfigFile::default()
        },
    };
    let run = || match cli.command {
        Command::Simulate => commands::simulate(file, cli.seed, out),
        Command::Randomize => commands::randomize(file, cli.seed, out),
        cmd => commands::run_experiment(cmd.experiment().expect("experiment command"), file, cli.seed),
    };
    match cli.jobs {
        Some(0) => Err("--jobs must be at least 1".into()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| format!("cannot start worker pool: {e}"))?
            .install(run),
        None => run(),
    }
}

fn write_outputs(cli: &Cli, out: &Path, outcome: &Outcome, started: String) -> Result<(), String> {
    let io = |e: std::io::Error| format!("writing to {}: {e}", out.display());
    let report = &outcome.report;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| e.to_string())?;
    write_atomic(&out.join("report.csv"), &csv).map_err(io)?;
    let mut summary = serde_json::to_vec_pretty(&report.summary()).map_err(|e| e.to_string())?;
    summary.push(b'\n');
    write_atomic(&out.join("summary.json"), &summary).map_err(io)?;

    let mut files = outcome.files.clone();
    files.extend(["report.csv".to_string(), "summary.json".to_string()]);
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        config_hash: report.provenance.config_hash.clone(),
        seed: report.provenance.seed,
        version: report.provenance.version.clone(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        status: report.status().to_string(),
        outputs: inventory(out, &files).map_err(io)?,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| e.to_string())?;
    bytes.push(b'\n');
    write_atomic(&out.join("manifest.json"), &bytes).map_err(io)
}

fn print_report(cli: &Cli, out: &Path, outcome: &Outcome) {
    let report = &outcome.report;
    if cli.json {
        emit(&format!("{}\n", serde_json::to_string_pretty(&report.summary()).expect("summary is valid json")));
        return;
    }
    let mut text = format!("{}: {}\n", cli.command.name(), report.status());
    for v in &report.verdicts {
        text += &format!("  {:<12} {}: {}\n", v.status.to_string(), v.criterion, v.detail);
    }
    for f in &report.fits {
        text += &format!(
            "  fit {} = {:.4} ± {:.4} (95% CI [{:.4}, {:.4}], {} points)\n",
            f.name, f.estimate, f.stderr, f.ci95.0, f.ci95.1, f.points
        );
    }
    for n in &report.notes {
        text += &format!("  note: {n}\n");
    }
    text += &format!("outputs in {}\n", out.display());
    emit(&text);
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Command::List = cli.command {
        list(cli.json);
        return ExitCode::SUCCESS;
    }
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("fracnls-out").join(cli.command.name()));
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return ExitCode::from(1);
    }
    let started = chrono::Utc::now().to_rfc3339();
    let outcome = match execute(&cli, &out) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    if let Err(msg) = write_outputs(&cli, &out, &outcome, started) {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    print_report(&cli, &out, &outcome);
    ExitCode::from(match outcome.report.status() {
        Status::Pass => 0,
        Status::Fail => 2,
        Status::Inconclusive => 3,
    })
}
