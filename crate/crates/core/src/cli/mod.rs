//! Command-line front end of the `qpt` binary.

mod commands;
mod config;
mod document;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};

pub use commands::{
    figure, fingerprint_document, simulate, sweep, FigureData, FingerprintDocument, SweepRow, FIGURES,
};
pub use config::{
    mhz_to_rad, rad_to_mhz, DecoherenceConfig, GateConfig, OutputFormat, RunConfig, Tolerances, MHZ, NS,
    PER_US,
};
pub use document::{grid_csv, ChiDocument, GateHeader, OutputsDocument, Units};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qpt", version, about = "Two-qubit process tomography and decoherence fingerprinting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the evolution map of a configured gate and write its χ-matrix.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Gaussian noise on the tomography outputs; needs --seed.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the sixteen tomography outputs to this file.
        #[arg(long)]
        outputs: Option<PathBuf>,
    },
    /// Reconstruct χ from a file of sixteen output density matrices.
    Qpt {
        input: PathBuf,
        /// Supplies the basis and, if the input has none, the gate context.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Identify decoherence mechanisms in a Pauli-basis χ document.
    Fingerprint {
        input: PathBuf,
        /// Overrides the gate context of the document.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Run the least-squares refinement.
        #[arg(long)]
        refine: bool,
        /// Standard deviation of entry noise in the input.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Recompute the table of nonzero-element counts.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Write plot data (Re/Im grids and annotations) for a figure.
    Figure {
        /// fig1, fig2, fig3 or fig4.
        name: String,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vary one parameter of a configuration over a list of values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// A decoherence field, `duration_ns`, `coupling_mhz` or `detuning_mhz`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
}

/// Parses arguments, runs the command and returns the exit code. Errors go
/// to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_consistency_failure() {
        EXIT_CONSISTENCY
    } else {
        EXIT_CONFIG
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { path: p.display().to_string(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

fn execute(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Simulate { config, out, format, noise, seed, tol, outputs } => {
            let mut cfg = RunConfig::load(config)?;
            if let Some(t) = tol {
                cfg.tolerances.qpt = *t;
            }
            let noise = match (noise, seed) {
                (Some(s), Some(seed)) => Some((*s, *seed)),
                (Some(_), None) => return Err(Error::invalid("seed", "--noise requires an explicit --seed")),
                (None, _) => None,
            };
            let (doc, outs) = simulate(&cfg, noise)?;
            if let Some(p) = outputs {
                emit(Some(p), &outs.to_json())?;
            }
            let text = match format.unwrap_or(cfg.format) {
                OutputFormat::Json => doc.to_json(),
                OutputFormat::Csv => doc.to_csv(),
            };
            emit(out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Qpt { input, config, out, format, tol } => {
            let data = OutputsDocument::load(input)?;
            let cfg = config.as_deref().map(RunConfig::load).transpose()?;
            let doc = commands::qpt(&data, cfg.as_ref(), *tol)?;
            let text = match format.or(cfg.map(|c| c.format)).unwrap_or_default() {
                OutputFormat::Json => doc.to_json(),
                OutputFormat::Csv => doc.to_csv(),
            };
            emit(out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Fingerprint { input, config, out, format, refine, noise } => {
            let doc = ChiDocument::load(input)?;
            let gate = match config {
                Some(p) => Some(RunConfig::load(p)?.gate_spec()?),
                None => None,
            };
            let report = fingerprint_document(&doc, gate, *refine, noise.unwrap_or(0.0))?;
            let text = match format.unwrap_or_default() {
                OutputFormat::Json => report.to_json(),
                OutputFormat::Csv => report.to_csv(),
            };
            emit(out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Table1 { out, format } => {
            let t = crate::analysis::table1()?;
            let text = match format {
                Some(OutputFormat::Json) => {
                    let mut s = serde_json::to_string_pretty(&t).expect("table serializes");
                    s.push('\n');
                    s
                }
                Some(OutputFormat::Csv) => commands::table1_csv(&t),
                None => commands::table1_text(&t),
            };
            emit(out.as_deref(), &text)?;
            Ok(if t.all_match() { EXIT_OK } else { EXIT_CONSISTENCY })
        }
        Command::Figure { name, out } => {
            let data = figure(name)?;
            let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)
                .map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
            for (file, text) in data.files() {
                emit(Some(&dir.join(file)), &text)?;
            }
            Ok(EXIT_OK)
        }
        Command::Sweep { config, param, values, out, format } => {
            let cfg = RunConfig::load(config)?;
            let rows = sweep(&cfg, param, values)?;
            let text = match format.unwrap_or(cfg.format) {
                OutputFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&rows).expect("sweep serializes");
                    s.push('\n');
                    s
                }
                OutputFormat::Csv => commands::sweep_csv(&rows),
            };
            emit(out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
    }
}
