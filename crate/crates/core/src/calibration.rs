//! Parameter estimation from a measured probe series: S₀ from the initial
//! heating slope, β by grid search over full simulations.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiment::{compare_series, ProbeSeries};
use crate::params::PhysicalParams;
use crate::scalar::Real;
use crate::source::{source_dimless, SourceParams};

/// Least-squares slope of the samples in `[t0, t0 + window]`.
pub fn initial_slope<T: Real>(data: &ProbeSeries<T>, window: T) -> Result<T> {
    let t0 = data.start().ok_or(Error::EmptySeries)?;
    let (t, y) = data.window(t0, t0 + window);
    if t.len() < 3 {
        return Err(Error::Calibration(format!(
            "slope window of {window} s holds {} samples, need at least 3",
            t.len()
        )));
    }
    let n = T::from_usize(t.len()).unwrap();
    let mt = t.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let sxx: T = t.iter().map(|&v| (v - mt) * (v - mt)).sum();
    let sxy: T = t.iter().zip(&y).map(|(&a, &b)| (a - mt) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Estimates S₀ from the 0-D heating balance `ρ c dθ/dt = S₀ S̃(probe)`,
/// with the slope taken over the first `window` seconds.
pub fn fit_s0_from_slope<T: Real>(
    data: &ProbeSeries<T>,
    p: &PhysicalParams<T>,
    sp: &SourceParams<T>,
    probe: (T, T),
    window: T,
) -> Result<T> {
    let shape = source_dimless(probe.0, probe.1, sp);
    if !(shape >= T::lit(1e-6)) {
        return Err(Error::Conditioning(format!(
            "source at the probe is {shape}, below 1e-6"
        )));
    }
    let m = initial_slope(data, window)?;
    if !(m > T::zero()) {
        return Err(Error::Calibration(format!(
            "initial slope {m} K/s is not positive"
        )));
    }
    Ok(p.tissue_heat_capacity() * m / shape)
}

/// Outcome of one β candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaCandidate<T> {
    pub beta: T,
    /// `Err` holds the reason the run or comparison failed.
    pub rmse: std::result::Result<T, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaFit<T> {
    pub beta: T,
    pub rmse: T,
    /// All candidates in input order.
    pub candidates: Vec<BetaCandidate<T>>,
}

/// Grid search for β. `runner` simulates the probe series for one β;
/// candidates run concurrently and are ranked by RMSE against `data`,
/// ties going to the smaller β.
pub fn fit_beta<T, F>(data: &ProbeSeries<T>, runner: F, betas: &[T]) -> Result<BetaFit<T>>
where
    T: Real,
    F: Fn(T) -> Result<ProbeSeries<T>> + Sync,
{
    if betas.is_empty() {
        return Err(Error::Calibration("no β candidates".into()));
    }
    let candidates: Vec<BetaCandidate<T>> = betas
        .par_iter()
        .map(|&beta| BetaCandidate {
            beta,
            rmse: runner(beta)
                .and_then(|sim| compare_series(&sim, data))
                .map(|d| d.rmse)
                .map_err(|e| e.to_string()),
        })
        .collect();
    let best = candidates
        .iter()
        .filter_map(|c| c.rmse.as_ref().ok().map(|&r| (c.beta, r)))
        .filter(|(_, r)| r.is_finite())
        .min_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap()
                .then(a.0.partial_cmp(&b.0).unwrap())
        });
    match best {
        Some((beta, rmse)) => Ok(BetaFit {
            beta,
            rmse,
            candidates,
        }),
        None => Err(Error::Calibration("every β candidate failed".into())),
    }
}

/// Report rows `parameter,value,rmse_C,status`.
pub fn write_report<T: Real, W: std::io::Write>(
    s0: Option<T>,
    beta: Option<&BetaFit<T>>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "parameter,value,rmse_C,status")?;
    if let Some(s0) = s0 {
        writeln!(out, "s0,{s0},,fitted")?;
    }
    if let Some(fit) = beta {
        for c in &fit.candidates {
            match &c.rmse {
                Ok(r) if c.beta == fit.beta => writeln!(out, "beta,{},{r},selected", c.beta)?,
                Ok(r) => writeln!(out, "beta,{},{r},ok", c.beta)?,
                Err(e) => writeln!(out, "beta,{},,failed: {}", c.beta, e.replace(',', ";"))?,
            }
        }
    }
    Ok(())
}
