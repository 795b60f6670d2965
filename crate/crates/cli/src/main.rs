use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fsa_scr::config::PipelineConfig;
use fsa_scr::diagnostics::Warning;
use fsa_scr::pipeline::{cmd_fit, cmd_losses, cmd_scr, cmd_tests, ScrSelection};
use fsa_scr::{Error, Result};
use serde::Serialize;

/// One-year losses, pooling tests, fits and SCR reports from yearly
/// insurer reports.
#[derive(Debug, Parser)]
#[command(name = "fsa-scr", version)]
struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for every random stream, overriding `seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Accident years in the loss ratio, overriding `losses.loss_ratio_years`.
    #[arg(long, global = true, value_name = "N")]
    m: Option<u32>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the loss panel from the report CSV.
    Losses,
    /// Levene and Spearman tests on the loss panel.
    Tests,
    /// Normal, pooled, GP and joint Home / Motor other fits.
    Fit,
    /// SCR per company under the selected approaches.
    Scr {
        /// internal, model1, model2, standard or all.
        #[arg(long, default_value = "all")]
        which: String,
    },
    /// Print the default configuration as TOML.
    PrintDefaults,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Losses => "losses",
            Command::Tests => "tests",
            Command::Fit => "fit",
            Command::Scr { .. } => "scr",
            Command::PrintDefaults => "print-defaults",
        }
    }
}

#[derive(Serialize)]
struct ErrorEntry {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    command: &'a str,
    status: &'a str,
    exit_code: u8,
    seed: Option<u64>,
    outputs: Vec<String>,
    counts: serde_json::Map<String, serde_json::Value>,
    warnings: Vec<Warning>,
    errors: Vec<ErrorEntry>,
}

#[derive(Default)]
struct Outcome {
    outputs: Vec<String>,
    counts: serde_json::Map<String, serde_json::Value>,
    warnings: Vec<Warning>,
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    if let Command::PrintDefaults = cli.command {
        return match toml::to_string_pretty(&PipelineConfig::default()) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(3)
            }
        };
    }

    let mut out_dir = cli.out.clone();
    let mut seed = None;
    let result = load_config(&cli).and_then(|config| {
        let dir = out_dir
            .get_or_insert_with(|| config.output.dir.clone())
            .clone();
        seed = Some(config.seed);
        fs::create_dir_all(&dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        run(&cli.command, &config, &dir)
    });

    let (outcome, errors, code) = match result {
        Ok(o) => (o, Vec::new(), 0),
        Err(e) => {
            let code = exit_code(&e);
            let entry = ErrorEntry {
                kind: e.kind(),
                message: e.to_string(),
            };
            (Outcome::default(), vec![entry], code)
        }
    };
    if !errors.is_empty() {
        let doc = serde_json::json!({ "errors": &errors });
        eprintln!("{doc}");
    }
    let summary = RunSummary {
        command: cli.command.name(),
        status: if code == 0 { "ok" } else { "error" },
        exit_code: code,
        seed,
        outputs: outcome.outputs,
        counts: outcome.counts,
        warnings: outcome.warnings,
        errors,
    };
    if let Some(dir) = out_dir.filter(|d| d.is_dir()) {
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        if let Err(e) = fs::write(dir.join("run_summary.json"), text + "\n") {
            eprintln!("cannot write run summary: {e}");
        }
    }
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    ExitCode::from(code)
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let mut config: PipelineConfig = toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            // Input paths are relative to the config file.
            let base = path.parent().unwrap_or(Path::new(""));
            if let Some(reports) = config.input.reports.as_mut() {
                if reports.is_relative() {
                    *reports = base.join(&*reports);
                }
            }
            config
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(m) = cli.m {
        config.losses.loss_ratio_years = m;
    }
    config.validate()?;
    Ok(config)
}

fn write(dir: &Path, name: &str, contents: &str, outcome: &mut Outcome) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| Error::Io { path, source })?;
    outcome.outputs.push(name.to_string());
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn count(outcome: &mut Outcome, key: &str, n: usize) {
    outcome.counts.insert(key.to_string(), n.into());
}

fn run(command: &Command, config: &PipelineConfig, dir: &Path) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    match command {
        Command::Losses => {
            let report = cmd_losses(config)?;
            write(dir, "losses.csv", &report.panel.to_csv(), &mut outcome)?;
            write(dir, "losses_diagnostics.json", &json(&report), &mut outcome)?;
            count(&mut outcome, "rows_read", report.rows_read);
            count(&mut outcome, "loss_records", report.panel.len());
            count(&mut outcome, "rejections", report.rejections.len());
            count(&mut outcome, "excluded", report.panel.excluded.len());
            count(&mut outcome, "skipped_pairs", report.panel.skipped.len());
            outcome.warnings = report.warnings;
        }
        Command::Tests => {
            let report = cmd_tests(config)?;
            write(dir, "levene.csv", &report.levene_csv(), &mut outcome)?;
            write(dir, "spearman.csv", &report.spearman_csv(), &mut outcome)?;
            write(dir, "tests.json", &json(&report), &mut outcome)?;
            count(&mut outcome, "levene_tests", report.levene.len());
            count(&mut outcome, "spearman_pairs", report.spearman.len());
            outcome.warnings = report.warnings;
        }
        Command::Fit => {
            let report = cmd_fit(config)?;
            write(dir, "fit.json", &json(&report), &mut outcome)?;
            count(&mut outcome, "normal_fits", report.normal.len());
            count(&mut outcome, "joint_observations", report.joint.years.len());
            outcome.warnings = report.warnings;
        }
        Command::Scr { which } => {
            let which: ScrSelection = which.parse()?;
            let report = cmd_scr(config, which)?;
            write(dir, "scr.csv", &report.to_csv(), &mut outcome)?;
            if !report.sigma_table.is_empty() {
                write(
                    dir,
                    "sigma_table.csv",
                    &report.sigma_table_csv(),
                    &mut outcome,
                )?;
            }
            write(dir, "scr.json", &json(&report), &mut outcome)?;
            count(&mut outcome, "companies", report.rows.len());
            outcome.warnings = report.warnings;
        }
        Command::PrintDefaults => unreachable!("handled before configuration is loaded"),
    }
    Ok(outcome)
}
