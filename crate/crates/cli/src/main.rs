use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scri::run::{
    cmd_fit, cmd_flow, cmd_geometry_check, cmd_indexset, cmd_solve, cmd_verify, default_config_toml, Outcome,
    RunConfig, OUTPUT_ROOT_ENV,
};
use scri::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "scri", version, about = "Radiation fields near null infinity")]
struct Cli {
    /// TOML config; defaults are used for anything it omits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the default config and exit.
    #[arg(long)]
    print_default_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the configured metric models and their boundary constants.
    GeometryCheck,
    /// Linearization at the radial set, null-seed classification and sample trajectories.
    Flow,
    /// Evolve the configured source and write a checkpoint and null slices.
    Solve,
    /// Front-face expansion fit, log-coefficient check and tail fit.
    Fit,
    /// Resonance index sets for a list of exponents.
    Indexset(IndexsetArgs),
    /// Run every acceptance criterion.
    Verify,
}

#[derive(Args)]
struct IndexsetArgs {
    /// Resonance `re,im,k`; repeat for several (default from the config).
    #[arg(long = "e0", allow_hyphen_values = true)]
    e0: Vec<String>,
    /// Treat the mass term as nonzero.
    #[arg(long, conflicts_with = "m_zero")]
    m_nonzero: bool,
    /// Treat the mass term as zero.
    #[arg(long)]
    m_zero: bool,
    #[arg(long)]
    depth: Option<f64>,
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, Error> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            RunConfig::from_toml(&text)
        }
    }
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parse(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.print_default_config {
        print!("{}", default_config_toml());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no subcommand given; see --help");
        return ExitCode::from(EXIT_USAGE);
    };
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("invalid thread count {n}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let mut cfg = match load_config(cli.config.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match command {
        Command::GeometryCheck => cmd_geometry_check(&cfg),
        Command::Flow => cmd_flow(&cfg),
        Command::Solve => cmd_solve(&cfg),
        Command::Fit => cmd_fit(&cfg),
        Command::Indexset(a) => {
            if !a.e0.is_empty() {
                cfg.indexset.e0 = a.e0;
            }
            if a.m_nonzero {
                cfg.indexset.m_nonzero = true;
            }
            if a.m_zero {
                cfg.indexset.m_nonzero = false;
            }
            if let Some(d) = a.depth {
                cfg.indexset.depth = d;
            }
            cfg.validate().and_then(|_| cmd_indexset(&cfg))
        }
        Command::Verify => cmd_verify(&cfg),
    };
    match result {
        Ok(Outcome { passed, dir, summary }) => {
            for line in &summary {
                println!("{line}");
            }
            println!("outputs in {} (root override: {OUTPUT_ROOT_ENV})", dir.display());
            if passed {
                ExitCode::SUCCESS
            } else {
                println!("invariant check failed");
                ExitCode::from(EXIT_FAIL)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
