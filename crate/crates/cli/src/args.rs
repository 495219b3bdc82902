use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "swapfid",
    version,
    about = "Fidelity, device and rate calculations for heralded entanglement swapping"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

// Options shared by every subcommand. Parameters are layered: `--preset`,
// then `--config`, then each `--set`.
#[derive(Debug, Args)]
pub struct Common {
    /// Parameter file of `key = value unit` lines
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Built-in parameter set (see `swapfid presets`)
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// Override one parameter, e.g. `--set eta_b="30 dB"`
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Output file, `-` for stdout
    #[arg(long, global = true, value_name = "PATH|-", default_value = "-")]
    pub out: String,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for Monte Carlo checks
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Worker threads (0: one per core); results do not depend on it
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate fidelities and rates over one swept parameter
    FidelitySweep,
    /// SFG probability of a cavity and/or waveguide
    Device,
    /// Linear-optics vs SFG swapping rates and the pair-probability trade
    RateCompare {
        /// Overrides `p_sfg`
        #[arg(long)]
        p_sfg: Option<f64>,
        /// Clock rate in Hz; overrides `clock`
        #[arg(long)]
        clock: Option<f64>,
    },
    /// Compare closed forms against exact-sum and Monte Carlo oracles
    Verify {
        /// Scenario grid (CSV with header eps_a,eps_b,eta_a,eta_b,p_sfg)
        #[arg(long, value_name = "PATH")]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 200)]
        n_max: u64,
        /// Perturb the closed forms to check that failures are caught
        #[arg(long, hide = true)]
        mutate: bool,
    },
    /// Run the Fock-space checks of the SFG heralding picture
    FockCheck,
    /// List the built-in presets
    Presets,
}
