use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use invsim::harness::report::write_file;
use invsim::harness::{emit_tables, load_summaries, run_batch, BatchError, ExperimentConfig};

const EXIT_EPISODE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "invsim", version, about = "Run inventory simulation experiments and report metrics")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every seed of an experiment and write logs and reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replace the configured seeds with 1..=N.
        #[arg(long)]
        seeds: Option<u64>,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize one or more batch directories: prints the cost table and
    /// writes `table.csv` and `bullwhip.csv` into the input directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Check a config without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn run(config: PathBuf, seeds: Option<u64>, out: Option<PathBuf>) -> Result<(), ExitCode> {
    let mut cfg = load(&config)?;
    if let Some(n) = seeds {
        cfg.seeds = (1..=n).collect();
    }
    match run_batch(&cfg, out.as_deref()) {
        Ok(report) => {
            let s = &report.summary;
            let ok = s.seeds.len() - s.failures.len();
            println!("{}: {} of {} seeds completed, output in {}", s.label, ok, s.seeds.len(), report.out_dir.display());
            for f in &s.failures {
                eprintln!("seed {} failed [{}]: {}", f.seed, f.code, f.error);
            }
            if report.failed() {
                return Err(ExitCode::from(EXIT_EPISODE));
            }
            Ok(())
        }
        Err(BatchError::Config(problems)) => {
            for p in problems {
                eprintln!("error: {p}");
            }
            Err(ExitCode::from(EXIT_CONFIG))
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(EXIT_EPISODE))
        }
    }
}

fn report(input: PathBuf, format: Format) -> anyhow::Result<()> {
    let summaries = load_summaries(&input)?;
    let tables = emit_tables(&summaries)?;
    write_file(&input.join("table.csv"), &tables.table_csv)?;
    write_file(&input.join("bullwhip.csv"), &tables.bullwhip_csv)?;
    match format {
        Format::Csv => print!("{}", tables.table_csv),
        Format::Json => println!("{}", serde_json::to_string_pretty(&tables)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run { config, seeds, out } => run(config, seeds, out),
        Cmd::Report { input, format } => report(input, format).map_err(|e| {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }),
        Cmd::Validate { config } => load(&config).and_then(|cfg| match cfg.validate() {
            Ok(()) => {
                println!("ok: {} on {}, {} seeds", cfg.label(), cfg.env.id(), cfg.seeds.len());
                Ok(())
            }
            Err(problems) => {
                for p in problems {
                    eprintln!("error: {p}");
                }
                Err(ExitCode::from(EXIT_CONFIG))
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
