use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use resloss::batch::{self, CorpusFormat, CorpusSpec, RunConfig, CONFIG_ENV};
use resloss::circle::extract_quality_factors;
use resloss::io::{ingest_trace_file, TraceMetadata};
use resloss::report::{emit_table, FitReport};
use resloss::sweep::SweepKind;
use resloss::{Error, Result};

const DEFAULT_CONFIG_NAME: &str = "resloss.toml";

#[derive(Parser)]
#[command(name = "resloss", version, about = "Resonator loss characterization")]
struct Cli {
    /// Configuration file, or a directory containing resloss.toml.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    Power,
    Temperature,
}

impl From<Sweep> for SweepKind {
    fn from(s: Sweep) -> Self {
        match s {
            Sweep::Power => SweepKind::PowerSweep,
            Sweep::Temperature => SweepKind::TemperatureSweep,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    S2p,
    Archive,
}

#[derive(Subcommand)]
enum Command {
    /// Batch analysis of trace files.
    Fit {
        /// Trace files or glob patterns (added to the config inputs).
        inputs: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        force: bool,
        #[arg(long, value_enum)]
        sweep: Option<Sweep>,
    },
    /// Generate a synthetic trace corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        force: bool,
        #[arg(long, value_enum)]
        sweep: Option<Sweep>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Sample presets to include, e.g. T-LA1,T-LA2.
        #[arg(long, value_delimiter = ',')]
        samples: Vec<String>,
    },
    /// Fit a single trace and print the result as JSON.
    Circle {
        file: PathBuf,
        /// Applied power when the file has no sidecar, dBm.
        #[arg(long, allow_negative_numbers = true)]
        p_app_dbm: Option<f64>,
        /// Temperature when the file has no sidecar, K.
        #[arg(long)]
        temperature: Option<f64>,
    },
    /// Re-render the summary table of a saved report.
    Table {
        /// report.json, or a directory containing it.
        report: PathBuf,
    },
}

/// `--config`, else the environment variable, else ./resloss.toml if present.
fn resolve_config(flag: Option<PathBuf>) -> Option<PathBuf> {
    let candidate = flag.or_else(|| {
        Path::new(DEFAULT_CONFIG_NAME)
            .exists()
            .then(|| DEFAULT_CONFIG_NAME.into())
    })?;
    Some(if candidate.is_dir() {
        candidate.join(DEFAULT_CONFIG_NAME)
    } else {
        candidate
    })
}

fn load_toml<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| resloss::error::IoError::Os {
                path: p.into(),
                source: e,
            })?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config_path = resolve_config(cli.config);
    match cli.command {
        Command::Fit {
            inputs,
            out,
            jobs,
            seed,
            force,
            sweep,
        } => {
            let mut config = match &config_path {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            config.inputs.extend(inputs);
            if let Some(o) = out {
                config.out = Some(o);
            }
            if let Some(j) = jobs {
                config.jobs = j;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(s) = sweep {
                config.sweep = s.into();
            }
            config.validate()?;
            let out = config
                .out
                .clone()
                .ok_or_else(|| Error::Config("no output directory (--out)".into()))?;
            batch::prepare_output_dir(&out, force)?;
            let report = batch::run_batch(&config)?;
            batch::write_outputs(&report, &out)?;
            print!("{}", emit_table(&report));
            for f in &report.failures {
                eprintln!(
                    "failed: {}/{} [{}] {}",
                    f.sample_id, f.resonator_id, f.stage, f.message
                );
            }
            if !report.all_converged() {
                let total = report.resonators.len();
                let failed = report.resonators.iter().filter(|r| r.fit.is_none()).count();
                return Err(Error::FitFailures {
                    failed: failed.max(1),
                    total,
                });
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            out,
            seed,
            force,
            sweep,
            format,
            samples,
        } => {
            let mut spec: CorpusSpec = load_toml(config_path.as_deref())?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(s) = sweep {
                spec.sweep = s.into();
            }
            if let Some(f) = format {
                spec.format = match f {
                    Format::Csv => CorpusFormat::Csv,
                    Format::S2p => CorpusFormat::Touchstone,
                    Format::Archive => CorpusFormat::Archive,
                };
            }
            if !samples.is_empty() {
                spec.samples = samples
                    .iter()
                    .map(|id| {
                        batch::SamplePreset::reference(id)
                            .ok_or_else(|| Error::Config(format!("unknown sample preset `{id}`")))
                    })
                    .collect::<Result<_>>()?;
            }
            batch::prepare_output_dir(&out, force)?;
            let files = batch::generate_corpus(&spec, &out)?;
            println!("wrote {} trace files to {}", files.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Circle {
            file,
            p_app_dbm,
            temperature,
        } => {
            let defaults = TraceMetadata {
                p_app_dbm: p_app_dbm.or(Some(-100.0)),
                temperature_k: temperature.or(Some(0.0257)),
                ..Default::default()
            };
            for labeled in ingest_trace_file(&file, &defaults)? {
                let fit = extract_quality_factors(&labeled.trace)?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&fit).expect("result serializes")
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Table { report } => {
            let path = if report.is_dir() {
                report.join("report.json")
            } else {
                report
            };
            print!("{}", emit_table(&FitReport::load(&path)?));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
