use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nmsse_cli::{CliError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "nmsse", version, about = "Stochastic hierarchy propagation of open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config, or a meta.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Master seed, replacing `run.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, replacing `run.threads`.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory, replacing `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        Overrides {
            seed: self.seed,
            threads: self.threads,
            out: self.out.clone(),
        }
        .apply(&mut cfg);
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the ensemble and write populations.csv and meta.json.
    Run(Common),
    /// Compare sampled noise correlators with their targets.
    NoiseCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        realizations: usize,
        #[arg(long, default_value_t = 51)]
        points: usize,
    },
    /// Check the basis ODE and its reconstruction of the adjusted correlation function.
    BasisCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Add this amount to one entry of the basis matrix.
        #[arg(long)]
        perturb_eta: Option<f64>,
        /// Entry perturbed by --perturb-eta, as `row,col`.
        #[arg(long, value_parser = parse_entry, default_value = "0,0")]
        entry: (usize, usize),
    },
    /// Exact diagonalization reference for a single-mode bath.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        n_boson: usize,
    },
    /// Column-wise comparison of two CSV files on the same time grid.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Absolute tolerance; the default absorbs round-off only.
        #[arg(long, default_value_t = 1e-12)]
        abs_tol: f64,
        /// Allowed deviation in units of the combined standard error.
        #[arg(long, default_value_t = 0.0)]
        se_factor: f64,
        /// Comma-separated columns; defaults to every shared value column.
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
    },
}

fn parse_entry(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(',').ok_or("expected row,col")?;
    Ok((
        r.trim().parse().map_err(|e| format!("{e}"))?,
        c.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn execute(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Run(common) => {
            let cfg = common.load()?;
            let s = nmsse_cli::run(&cfg)?;
            eprintln!(
                "{} trajectories ({} aborted), dimension {}, {:.2} s -> {}",
                s.result.n_traj,
                s.result.n_aborted,
                s.result.dimension,
                s.wall_time,
                s.directory.display()
            );
            Ok(true)
        }
        Command::NoiseCheck {
            common,
            realizations,
            points,
        } => {
            let cfg = common.load()?;
            nmsse_cli::noise_check(&cfg, realizations, points)?;
            Ok(true)
        }
        Command::BasisCheck {
            common,
            points,
            perturb_eta,
            entry,
        } => {
            let cfg = common.load()?;
            let perturb = perturb_eta.map(|d| (entry.0, entry.1, d));
            let r = nmsse_cli::basis_check(&cfg, points, perturb)?;
            println!(
                "max residual {:.3e}: {}",
                r.max_residual,
                if r.flagged { "FLAGGED" } else { "ok" }
            );
            Ok(true)
        }
        Command::Oracle { common, n_boson } => {
            let cfg = common.load()?;
            nmsse_cli::oracle(&cfg, n_boson)?;
            Ok(true)
        }
        Command::Compare {
            a,
            b,
            abs_tol,
            se_factor,
            columns,
        } => {
            let (ta, tb) = (nmsse_cli::read_table(&a)?, nmsse_cli::read_table(&b)?);
            let report = nmsse_cli::compare(&ta, &tb, abs_tol, se_factor, columns.as_deref())?;
            println!("{report}");
            Ok(report.pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
