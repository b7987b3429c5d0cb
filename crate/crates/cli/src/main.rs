use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use fastdvm_cli::{bench, farey, run, table1, CliError, GlobalOptions};

#[derive(Parser, Debug)]
#[command(name = "fastdvm", version, about = "Discrete-velocity Boltzmann collision experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output prefix; files are written as PREFIX_<kind>.csv
    #[arg(long, global = true, value_name = "PREFIX")]
    out: Option<String>,

    /// Single-threaded reductions and byte-identical CSV output
    #[arg(long, global = true)]
    deterministic: bool,

    /// Abort with exit code 4 once this many seconds have elapsed
    #[arg(long, global = true, value_name = "S")]
    budget_seconds: Option<f64>,

    /// Worker threads for the fast operator's direction loop
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time-integrate one configuration
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// L1 error against BKW over grid sizes and direction orders
    Table1 {
        #[arg(long)]
        config: PathBuf,
    },
    /// Wall-clock timings and complexity fits
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Farey-series sizes and line counts
    Farey {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        min_order: usize,
        #[arg(long, default_value_t = 50)]
        max_order: usize,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let budget = match cli.budget_seconds {
        Some(s) if !(s > 0.0 && s.is_finite()) => {
            return Err(CliError::Config(format!("--budget-seconds must be > 0, got {s}")))
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    let opts = GlobalOptions {
        out: cli.out,
        deterministic: cli.deterministic,
        budget,
        threads: cli.threads,
    };
    match cli.command {
        Command::Run { config } => {
            let summary = run::cmd_run(&config, &opts)?;
            println!("{}", summary.line());
        }
        Command::Table1 { config } => {
            let (table, path) = table1::cmd_table1(&config, &opts)?;
            table.write_csv(std::io::stdout().lock())?;
            eprintln!("wrote {}", path.display());
        }
        Command::Bench { config } => {
            let (report, cells, fits) = bench::cmd_bench(&config, &opts)?;
            report.write_fits_csv(std::io::stdout().lock())?;
            eprintln!("wrote {} and {}", cells.display(), fits.display());
        }
        Command::Farey {
            dim,
            min_order,
            max_order,
        } => {
            let (rows, path) = farey::cmd_farey(dim, min_order, max_order, &opts)?;
            eprintln!("{} rows, wrote {}", rows.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fastdvm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
