//! Subcommand implementations behind the `ablation` binary. Each command
//! returns the process exit status.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use ablation_core::calibration::{fit_beta, fit_s0_from_slope, write_report, BetaFit};
use ablation_core::config::{apply_overrides, load_config, render_manifest};
use ablation_core::experiment::{compare_series, load_probe_csv};
use ablation_core::solver::{write_probe_csv, write_snapshot_csv, write_trace_csv};
use ablation_core::source::write_source_csv;
use ablation_core::{Error, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_STABILITY: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

/// Maps an engine error onto the documented exit codes.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::Validation { .. }
        | Error::Resolution(_)
        | Error::Domain { .. }
        | Error::Csv { .. }
        | Error::EmptySeries => EXIT_CONFIG,
        Error::Instability { .. } => EXIT_STABILITY,
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        _ => EXIT_FAILURE,
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

fn io_err(path: &Path, e: io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

/// File when a path is given, stdout otherwise.
fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn scenario(config: &Path, overrides: &[String]) -> Result<Scenario, Error> {
    let mut s = load_config(config)?;
    apply_overrides(&mut s, overrides)?;
    s.validate()?;
    Ok(s)
}

pub fn cmd_simulate(config: &Path, out_dir: &Path, overrides: &[String]) -> i32 {
    match simulate(config, out_dir, overrides) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e),
    }
}

fn simulate(config: &Path, out_dir: &Path, overrides: &[String]) -> Result<(), Error> {
    let s = scenario(config, overrides)?;
    let manifest = render_manifest(&s)?;
    let solver = s.solver()?;
    let probe = s.probe(solver.grid())?;
    let init = solver.initial_state(s.physical.theta0, s.physical.w0);
    let res = solver.run_from(init, &probe, &s.sim_config())?;
    if res.stability.warning() {
        eprintln!(
            "warning: diffusion number {:.4} > 0.25, the discrete maximum principle may not hold",
            res.stability.nu
        );
    }

    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let path = out_dir.join("manifest.cfg");
    fs::write(&path, manifest).map_err(|e| io_err(&path, e))?;
    let write =
        |name: &str, f: &dyn Fn(&mut BufWriter<File>) -> io::Result<()>| -> Result<(), Error> {
            let path = out_dir.join(name);
            let mut w = create(&path)?;
            f(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| io_err(&path, e))
        };
    write("probe.csv", &|w| write_probe_csv(&res, w))?;
    write("trace.csv", &|w| write_trace_csv(&res, w))?;
    for snap in &res.snapshots {
        write(&format!("snapshot_{:07}.csv", snap.step), &|w| {
            write_snapshot_csv(solver.grid(), snap, w)
        })?;
    }
    eprintln!(
        "{} steps, ν = {:.4}, final probe temperature {:.3} °C -> {}",
        res.steps,
        res.stability.nu,
        res.probe.temperatures().last().copied().unwrap_or(f64::NAN),
        out_dir.display()
    );
    Ok(())
}

pub struct CalibrateArgs<'a> {
    pub config: &'a Path,
    pub data: &'a Path,
    pub slope_window: f64,
    /// β candidates; empty skips the β search.
    pub betas: &'a [f64],
    /// Run the β candidates with the fitted S₀ instead of the configured one.
    pub chain_s0: bool,
    pub out: Option<&'a Path>,
    pub overrides: &'a [String],
}

pub fn cmd_calibrate(args: &CalibrateArgs<'_>) -> i32 {
    match calibrate(args) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e),
    }
}

fn calibrate(args: &CalibrateArgs<'_>) -> Result<(), Error> {
    let s = scenario(args.config, args.overrides)?;
    let data = load_probe_csv(args.data)?;
    let grid = s.grid()?;
    let sp = s.source_params(&grid)?;
    let s0 = fit_s0_from_slope(
        &data,
        &s.physical,
        &sp,
        s.probe_position(),
        args.slope_window,
    )?;
    eprintln!("S0 from initial slope: {s0}");
    let mut base = s;
    if args.chain_s0 {
        base.s0 = s0;
    }
    let beta: Option<BetaFit<f64>> = if args.betas.is_empty() {
        None
    } else {
        let runner = |b: f64| {
            let mut c = base;
            c.beta = b;
            c.run().map(|r| r.probe)
        };
        let fit = fit_beta(&data, runner, args.betas)?;
        eprintln!("selected beta = {} (rmse {} °C)", fit.beta, fit.rmse);
        Some(fit)
    };
    let mut out = sink(args.out)?;
    write_report(Some(s0), beta.as_ref(), &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::Io(e.to_string()))
}

pub fn cmd_compare(sim: &Path, data: &Path, out: Option<&Path>) -> i32 {
    match compare(sim, data, out) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e),
    }
}

fn compare(sim: &Path, data: &Path, out: Option<&Path>) -> Result<(), Error> {
    let sim = load_probe_csv(sim)?;
    let meas = load_probe_csv(data)?;
    let metrics = compare_series(&sim, &meas)?;
    if let Some(path) = out {
        let mut w = create(path)?;
        metrics
            .write_csv(&mut w)
            .and_then(|_| metrics.write_summary(&mut w))
            .and_then(|_| w.flush())
            .map_err(|e| io_err(path, e))?;
    }
    let stdout = io::stdout();
    metrics
        .write_summary(stdout.lock())
        .map_err(|e| Error::Io(e.to_string()))
}

pub fn cmd_dump_grid(config: &Path, out: Option<&Path>, overrides: &[String]) -> i32 {
    let run = || -> Result<(), Error> {
        let grid = scenario(config, overrides)?.grid()?;
        let mut w = sink(out)?;
        grid.write_csv(&mut w).and_then(|_| w.flush())?;
        Ok(())
    };
    run().map_or_else(|e| report(&e), |_| EXIT_OK)
}

pub fn cmd_dump_source(config: &Path, out: Option<&Path>, overrides: &[String]) -> i32 {
    let run = || -> Result<(), Error> {
        let s = scenario(config, overrides)?;
        let grid = s.grid()?;
        let sp = s.source_params(&grid)?;
        let mut w = sink(out)?;
        write_source_csv(&grid, &sp, &mut w).and_then(|_| w.flush())?;
        Ok(())
    };
    run().map_or_else(|e| report(&e), |_| EXIT_OK)
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        })
        .collect()
}

pub fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(
            exit_code(&Error::Config {
                line: 1,
                reason: String::new()
            }),
            2
        );
        assert_eq!(
            exit_code(&Error::Instability {
                nu: 1.0,
                suggested_dt: 0.1
            }),
            3
        );
        assert_eq!(exit_code(&Error::Divergence { step: 1, node: 2 }), 4);
        assert_eq!(exit_code(&Error::Comparison(String::new())), 1);
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("20, 40,80").unwrap(), vec![20.0, 40.0, 80.0]);
        assert_eq!(parse_list("").unwrap(), Vec::<f64>::new());
        assert!(parse_list("20,x").is_err());
    }
}
