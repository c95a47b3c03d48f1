use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use staticgate::bath::FieldStatistics;
use staticgate::hamiltonians::CouplingConstants;
use staticgate::Representation;
use staticgate_cli::commands::{self, IdentityOptions};
use staticgate_cli::config::{parse_representation, ExperimentConfig};
use staticgate_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "staticgate", version, about = "Static spin-gate network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a network and report sizes, solution counts and warnings.
    Validate {
        #[arg(long)]
        network: PathBuf,
    },
    /// Spectrum of the network Hamiltonian with a ground-space check.
    Spectrum {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value = "pair", value_parser = parse_representation)]
        rep: Representation,
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long, default_value_t = 0.0)]
        g_prime: f64,
        #[arg(long, default_value_t = 0.0)]
        j: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum and kernel of the two-node Ising wire.
    WireSpectrum {
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relax a network under the configured engine and measure the nodes.
    Relax {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sliced actual-versus-comparison run with take-off analysis.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual ladders of the single-step projection identity.
    IdentityCheck {
        /// Network, seed, g and bath are taken from here unless given explicitly.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Validate { network } => commands::validate(&network),
        Command::Spectrum { network, rep, g, g_prime, j, out } => {
            let c = CouplingConstants::new(g, g_prime, j)?;
            commands::spectrum(&network, rep, &c, out.as_deref())
        }
        Command::WireSpectrum { g, out } => commands::wire_spectrum(g, out.as_deref()),
        Command::Relax { config, seed, out } => {
            commands::relax(&ExperimentConfig::load(&config)?, seed, out.as_deref())
        }
        Command::Compare { config, seed, out } => {
            commands::compare(&ExperimentConfig::load(&config)?, seed, out.as_deref())
        }
        Command::IdentityCheck { config, network, seed, out } => {
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            let mut opts = IdentityOptions::default();
            if let Some(c) = &cfg {
                opts.g = c.couplings.g;
                opts.fields = FieldStatistics { sigma_b: c.bath.sigma_b, t_c: c.bath.t_c };
            }
            let network = network
                .or_else(|| cfg.as_ref().map(ExperimentConfig::network_path))
                .ok_or_else(|| CliError::Usage("identity-check needs --network or --config".into()))?;
            let seed = seed
                .or(cfg.as_ref().map(|c| c.seed))
                .ok_or_else(|| CliError::Usage("identity-check needs --seed or --config".into()))?;
            commands::identity_check(&network, seed, opts, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
