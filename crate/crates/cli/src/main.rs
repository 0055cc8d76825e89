use std::path::PathBuf;
use std::process::ExitCode;

use ablation_cli::{
    cmd_calibrate, cmd_compare, cmd_dump_grid, cmd_dump_source, cmd_simulate, default_out_dir,
    parse_list, CalibrateArgs,
};
use clap::{Parser, Subcommand};

/// Laser thermal ablation simulator.
#[derive(Parser)]
#[command(name = "ablation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write probe, trace, snapshot and manifest files.
    Simulate {
        config: PathBuf,
        #[arg(long, short, default_value_os_t = default_out_dir())]
        out: PathBuf,
        /// Override a config entry, e.g. `--set numerics.dt=2e-4`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Fit S0 from the initial slope of measured data and search beta.
    Calibrate {
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Length of the initial-slope window, s.
        #[arg(long, default_value_t = 60.0)]
        slope_window: f64,
        /// Comma-separated beta candidates, 1/m².
        /// An empty list skips the beta search.
        #[arg(long, default_value = "20,40,80")]
        betas: String,
        /// Use the fitted S0 for the beta runs.
        #[arg(long)]
        chain_s0: bool,
        /// Report CSV path; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Compare a simulated probe CSV against measured data.
    Compare {
        sim: PathBuf,
        data: PathBuf,
        /// Metrics CSV path.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write the grid nodes with their boundary tags.
    DumpGrid {
        config: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Write the dimensionless source at every node.
    DumpSource {
        config: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match &cli.command {
        Command::Simulate { config, out, set } => cmd_simulate(config, out, set),
        Command::Calibrate {
            config,
            data,
            slope_window,
            betas,
            chain_s0,
            out,
            set,
        } => {
            let betas = match parse_list(betas) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: --betas: {e}");
                    return ExitCode::from(2);
                }
            };
            cmd_calibrate(&CalibrateArgs {
                config,
                data,
                slope_window: *slope_window,
                betas: &betas,
                chain_s0: *chain_s0,
                out: out.as_deref(),
                overrides: set,
            })
        }
        Command::Compare { sim, data, out } => cmd_compare(sim, data, out.as_deref()),
        Command::DumpGrid { config, out, set } => cmd_dump_grid(config, out.as_deref(), set),
        Command::DumpSource { config, out, set } => cmd_dump_source(config, out.as_deref(), set),
    };
    ExitCode::from(code as u8)
}
