mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use freudlab::ladder::Format;
use freudlab::{FreudError, Grid};

use commands::{CheckArgs, DensityArgs, MomentsArgs, RmuArgs, ScanArgs};
use config::{load_config, ConfigError};

/// Recurrence coefficients, moments and level densities for even polynomial weights.
#[derive(Parser)]
#[command(name = "freudlab", version)]
struct Cli {
    /// Fixed working precision in bits (overrides FREUDLAB_PRECISION_BITS).
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory (default: the configuration's out_dir, else ".").
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Recurrence table R_0..R_count with residue bands and regime segments.
    Rmu {
        #[command(flatten)]
        common: Common,
        /// Largest table index (default N).
        #[arg(long)]
        count: Option<usize>,
        /// Residue modulus (default d).
        #[arg(long = "mod")]
        modulus: Option<usize>,
        /// Structure-detection window (default 2 * modulus).
        #[arg(long)]
        window: Option<usize>,
    },
    /// Finite-N and asymptotic level density.
    Density {
        #[command(flatten)]
        common: Common,
        /// Sampling grid lo:hi:points.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<Grid>,
    },
    /// Global moments M_k.
    Moments {
        #[command(flatten)]
        common: Common,
        /// Comma-separated even orders (default 2, 4, ..., 2d-2).
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
    },
    /// Freud-equation residuals of the reference table.
    FreudCheck {
        #[command(flatten)]
        common: Common,
        /// Largest table index (default N).
        #[arg(long)]
        count: Option<usize>,
    },
    /// The generalized Freud equation, or a moment summand with --moment.
    Equation {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value = "latex")]
        format: Format,
        /// Render the ladder sum of M_k instead.
        #[arg(long)]
        moment: Option<usize>,
    },
    /// Sextic sweep over a4 towards the critical value.
    ScanA4 {
        #[command(flatten)]
        common: Common,
        /// Comma-separated a4 values; "c" is the critical value.
        #[arg(long, allow_hyphen_values = true)]
        a4: Option<String>,
        /// Table length per value (default N).
        #[arg(long)]
        count: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<Vec<String>> {
    let bits = cli.precision_bits;
    match cli.command {
        Command::Rmu {
            common,
            count,
            modulus,
            window,
        } => {
            let cfg = load_config(&common.config)?;
            commands::rmu(
                &cfg,
                RmuArgs {
                    count,
                    modulus,
                    window,
                    out_dir: common.out_dir,
                    precision_bits: bits,
                },
            )
        }
        Command::Density { common, grid } => {
            let cfg = load_config(&common.config)?;
            commands::density(
                &cfg,
                DensityArgs {
                    grid,
                    out_dir: common.out_dir,
                    precision_bits: bits,
                },
            )
        }
        Command::Moments { common, orders } => {
            let cfg = load_config(&common.config)?;
            if let Some(o) = orders.iter().flatten().find(|o| *o % 2 == 1 || **o == 0) {
                return Err(ConfigError::Option(format!(
                    "moment order {o} must be even and positive"
                ))
                .into());
            }
            commands::moments(
                &cfg,
                MomentsArgs {
                    orders,
                    out_dir: common.out_dir,
                    precision_bits: bits,
                },
            )
        }
        Command::FreudCheck { common, count } => {
            let cfg = load_config(&common.config)?;
            commands::freud_check(
                &cfg,
                CheckArgs {
                    count,
                    out_dir: common.out_dir,
                    precision_bits: bits,
                },
            )
        }
        Command::Equation { d, format, moment } => commands::equation(d, moment, format),
        Command::ScanA4 { common, a4, count } => {
            let cfg = load_config(&common.config)?;
            let a4c = freudlab::potential::critical_a4(cfg.potential.a(2), cfg.potential.a(6))?;
            let a4_values = a4.map(|s| commands::parse_a4_list(&s, a4c)).transpose()?;
            commands::scan_a4(
                &cfg,
                ScanArgs {
                    a4_values,
                    count,
                    out_dir: common.out_dir,
                    precision_bits: bits,
                },
            )
        }
    }
}

/// 2 configuration, 3 precision exhaustion, 4 range/fit/domain, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<FreudError>() {
            return match e {
                FreudError::InvalidPotential(_) | FreudError::Input(_) | FreudError::Parse(_) => 2,
                FreudError::Precision { .. } => 3,
                FreudError::Range { .. }
                | FreudError::Fit(_)
                | FreudError::Domain(_)
                | FreudError::UnsupportedDegree { .. }
                | FreudError::Ambiguous { .. }
                | FreudError::SingularStep { .. } => 4,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("freudlab: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
