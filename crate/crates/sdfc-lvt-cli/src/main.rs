use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sdfc_lvt_cli::{Command, OutputFormat, RunOptions};

#[derive(Parser)]
#[command(
    name = "sdfc-lvt",
    about = "Sub-band dual frequency conjugate LVT radar parameter estimation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count (default: all cores). Outputs are byte-identical
    /// for any value.
    #[arg(long)]
    threads: Option<usize>,
    /// Table output format; JSON is written in addition to CSV.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Write synthetic raw echo data, its sidecar header, and the truth table.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the full estimation chain on synthetic or ingested data.
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        /// Raw complex binary (little-endian f32 interleaved pairs) to
        /// ingest instead of synthesizing.
        #[arg(long, requires = "data_header")]
        data: Option<PathBuf>,
        /// Sidecar header (JSON) describing --data.
        #[arg(long, requires = "data")]
        data_header: Option<PathBuf>,
    },
    /// Predicted vs measured product SNR over the configured SNR list.
    SnrCurve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo RMSE curve with the printed variance bounds.
    RmseCurve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Cross-term loci table and difference-plane heatmap.
    Crossterm {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Deterministic self-check battery.
    Selftest {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, data, data_header) = match cli.command {
        CliCommand::Simulate { common } => (Command::Simulate, common, None, None),
        CliCommand::Estimate {
            common,
            data,
            data_header,
        } => (Command::Estimate, common, data, data_header),
        CliCommand::SnrCurve { common } => (Command::SnrCurve, common, None, None),
        CliCommand::RmseCurve { common } => (Command::RmseCurve, common, None, None),
        CliCommand::Crossterm { common } => (Command::Crossterm, common, None, None),
        CliCommand::Selftest { common } => (Command::Selftest, common, None, None),
    };
    let options = RunOptions {
        seed: common.seed,
        format: match common.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        },
        data,
        data_header,
    };
    match sdfc_lvt_cli::run_from_path(command, &common.config, &common.out, &options, common.threads)
    {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
