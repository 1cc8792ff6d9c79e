use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smrelay::cli::{
    cmd_diversity_fit, cmd_dmt_theory, cmd_hamiltonian, cmd_outage_sweep, cmd_verify, CliError, Regime, SchemeConfig,
    VerifyOptions,
};

#[derive(Parser)]
#[command(name = "smrelay", version, about = "Switching Markovian AF relay simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file (TOML). Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Number of relays K.
    #[arg(long)]
    relays: Option<usize>,
    /// Number of sub-blocks N.
    #[arg(long)]
    subblocks: Option<usize>,
    /// `no-interference` or `interference`.
    #[arg(long)]
    regime: Option<String>,
    /// Multiplexing gains, `a:step:b` or comma-separated.
    #[arg(long)]
    r: Option<String>,
    /// SNR points in dB, `a:step:b` or comma-separated.
    #[arg(long = "snr-db")]
    snr_db: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<SchemeConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => SchemeConfig::load(path)?,
            None => SchemeConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.relays {
            cfg.relays = v;
        }
        if let Some(v) = self.subblocks {
            cfg.subblocks = v;
        }
        if let Some(v) = &self.regime {
            cfg.regime = Regime::parse(v)?;
        }
        if let Some(v) = &self.r {
            cfg.r = smrelay::cli::parse_gain_list(v)?;
        }
        if let Some(v) = &self.snr_db {
            cfg.snr_db = smrelay::cli::parse_gain_list(v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form DMT curves and the LP oracle as CSV.
    DmtTheory {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo outage probabilities over the (r, SNR) grid as CSV.
    OutageSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Fit diversity slopes to an outage-sweep CSV.
    DiversityFit {
        /// Input produced by `outage-sweep`.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the oracle checks; exits 1 if any fails.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Realizations per check.
        #[arg(long, default_value_t = 100)]
        realizations: u64,
        /// Write F, H_T and P_N of the first realization to this file.
        #[arg(long = "dump-matrices")]
        dump_matrices: Option<PathBuf>,
        /// Negative control: corrupt one F entry so the signal check fails.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Find a relay ordering whose neighbours do not interfere.
    Hamiltonian {
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::DmtTheory { common, out } => {
            let cfg = common.resolve()?;
            let rows = cmd_dmt_theory(&cfg, &out)?;
            eprintln!("wrote {rows} rows to {}", out.display());
        }
        Command::OutageSweep { common, out, workers } => {
            let cfg = common.resolve()?;
            let rows = cmd_outage_sweep(&cfg, &out, workers)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::DiversityFit { input, out } => {
            let fits = cmd_diversity_fit(&input, &out)?;
            eprintln!("wrote {} fits to {}", fits.len(), out.display());
        }
        Command::Verify {
            common,
            realizations,
            dump_matrices,
            inject_fault,
        } => {
            let cfg = common.resolve()?;
            let opts = VerifyOptions {
                realizations,
                inject_fault,
                dump_matrices,
            };
            let report = cmd_verify(&cfg, &opts)?;
            print!("{}", report.render());
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Hamiltonian { common } => {
            let cfg = common.resolve()?;
            match cmd_hamiltonian(&cfg)? {
                Some(order) => {
                    let s: Vec<String> = order.iter().map(|v| v.to_string()).collect();
                    println!("{}", s.join(" "));
                }
                None => println!("none"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
