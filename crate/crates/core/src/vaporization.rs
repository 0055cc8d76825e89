//! Vaporization closure: experimental water-content curve, source damper
//! and the vaporization rate Γ(θ) with its exponential surrogate.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Surrogate `Γ_fit(θ) = a · exp(b θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit<T> {
    pub a: T,
    pub b: T,
    /// Coefficient of determination in the original (non-log) space.
    pub r_squared: T,
}

impl<T: Real> ExpFit<T> {
    pub fn eval(&self, theta: T) -> T {
        self.a * (self.b * theta).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VapParams<T> {
    /// Lower vaporization threshold, °C
    pub theta_vap1: T,
    /// Upper vaporization threshold, °C
    pub theta_vap2: T,
    /// Residual water fraction below which the damper switches off
    pub w_vap: T,
    /// Damper exponent γ
    pub gamma_exp: T,
    /// Typical source intensity S̄ (units of S₀)
    pub s_bar: T,
    /// Tissue volumetric heat capacity ρ_ts c_ts, J/(m³·K); turns S̄ into
    /// a heating rate.
    pub heat_capacity: T,
    /// Calibrated surrogate; `None` until [`calibrate_surrogate`] runs.
    pub fit: Option<ExpFit<T>>,
}

impl<T: Real> VapParams<T> {
    /// 75/100 °C thresholds, 5 % residual water, γ = 5.
    pub fn ex_vivo(s_bar: T, heat_capacity: T) -> Self {
        Self {
            theta_vap1: T::lit(75.0),
            theta_vap2: T::lit(100.0),
            w_vap: T::lit(0.05),
            gamma_exp: T::lit(5.0),
            s_bar,
            heat_capacity,
            fit: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta_vap1 < self.theta_vap2) {
            return Err(invalid("vap.theta1", "require theta1 < theta2"));
        }
        if !(self.w_vap > T::zero() && self.w_vap < T::lit(0.2)) {
            return Err(invalid(
                "vap.w_vap",
                format!("must lie in (0, 0.2), got {}", self.w_vap),
            ));
        }
        if !(self.gamma_exp > T::zero()) {
            return Err(invalid("vap.gamma_exponent", "must be > 0"));
        }
        if !(self.s_bar > T::zero()) {
            return Err(invalid("vap.s_bar", "must be > 0"));
        }
        if !(self.heat_capacity > T::zero()) {
            return Err(invalid("tissue.rho", "heat capacity must be > 0"));
        }
        if let Some(fit) = &self.fit {
            if !(fit.a > T::zero()) || !fit.a.is_finite() || !fit.b.is_finite() {
                return Err(invalid(
                    "vap.fitA",
                    "surrogate needs fitA > 0 and finite fitB",
                ));
            }
        }
        Ok(())
    }

    /// Heating rate S̄/(ρ c), K/s.
    pub fn heating_rate(&self) -> T {
        self.s_bar / self.heat_capacity
    }
}

/// Water content fitted on ex-vivo liver, piecewise in θ (°C).
/// Values are on the curve's own scale: 778 at room temperature.
pub fn water_content<T: Real>(theta: T) -> T {
    let k = T::lit(778.0);
    if theta <= T::lit(103.0) {
        k * (T::one() - ((theta - T::lit(106.0)) / T::lit(3.42)).exp())
    } else if theta <= T::lit(104.0) {
        k * (((T::lit(0.03713) * theta - T::lit(11.47)) * theta + T::lit(1182.0)) * theta
            - T::lit(40582.0))
    } else {
        k * ((theta - T::lit(80.0)) / T::lit(34.37)).exp()
    }
}

/// Analytic derivative of [`water_content`]; joints take the left branch.
pub fn water_content_derivative<T: Real>(theta: T) -> T {
    let k = T::lit(778.0);
    if theta <= T::lit(103.0) {
        -k * ((theta - T::lit(106.0)) / T::lit(3.42)).exp() / T::lit(3.42)
    } else if theta <= T::lit(104.0) {
        k * ((T::lit(3.0 * 0.03713) * theta - T::lit(2.0 * 11.47)) * theta + T::lit(1182.0))
    } else {
        k * ((theta - T::lit(80.0)) / T::lit(34.37)).exp() / T::lit(34.37)
    }
}

/// [`water_content`] as a mass fraction (778 → 0.778).
pub fn water_fraction<T: Real>(theta: T) -> T {
    water_content(theta) / T::lit(1000.0)
}

/// Damper on the source term, in [0, 1].
pub fn modulation<T: Real>(theta: T, w: T, vp: &VapParams<T>) -> T {
    if theta >= vp.theta_vap1 && theta <= vp.theta_vap2 && w > vp.w_vap {
        ((vp.theta_vap2 - theta) / (vp.theta_vap2 - vp.theta_vap1)).powf(vp.gamma_exp)
    } else {
        T::one()
    }
}

fn gamma_closure<T: Real>(theta: T, vp: &VapParams<T>, damper: T) -> Result<T> {
    let w = water_content(theta);
    if !(w > T::zero()) {
        return Err(Error::Singularity {
            theta: theta.to_f64_lossy(),
        });
    }
    Ok(-water_content_derivative(theta) / w * vp.heating_rate() * damper)
}

/// Vaporization rate (1/s) from the water-content curve, with the damper
/// evaluated at `w = W(θ)` as a fraction.
pub fn gamma_raw<T: Real>(theta: T, vp: &VapParams<T>) -> Result<T> {
    let damper = modulation(theta, water_fraction(theta), vp);
    gamma_closure(theta, vp, damper)
}

/// Same closure with the damper held at one.
pub fn gamma_undamped<T: Real>(theta: T, vp: &VapParams<T>) -> Result<T> {
    gamma_closure(theta, vp, T::one())
}

/// Which form of the closure to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    Damped,
    Undamped,
}

/// Tabulates Γ on `[lo, hi]` at spacing `step`, endpoints included.
pub fn sample_gamma<T: Real>(
    vp: &VapParams<T>,
    lo: T,
    hi: T,
    step: T,
    closure: Closure,
) -> Result<Vec<(T, T)>> {
    if !(step > T::zero()) || !(hi >= lo) {
        return Err(Error::Fit(format!(
            "bad sampling window [{lo}, {hi}] step {step}"
        )));
    }
    let n = ((hi - lo) / step + T::lit(1e-9))
        .floor()
        .to_usize()
        .unwrap_or(0);
    (0..=n)
        .map(|k| {
            let theta = lo + T::from_usize(k).unwrap() * step;
            let g = match closure {
                Closure::Damped => gamma_raw(theta, vp)?,
                Closure::Undamped => gamma_undamped(theta, vp)?,
            };
            Ok((theta, g))
        })
        .collect()
}

/// Least-squares fit of `ln Γ = ln a + b θ`.
pub fn fit_gamma_exponential<T: Real>(samples: &[(T, T)]) -> Result<ExpFit<T>> {
    if samples.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    if let Some((theta, g)) = samples
        .iter()
        .find(|(_, g)| !(*g > T::zero()) || !g.is_finite())
    {
        return Err(Error::Fit(format!("non-positive rate {g} at {theta} °C")));
    }
    let n = T::from_usize(samples.len()).unwrap();
    let mean_t = samples.iter().map(|s| s.0).sum::<T>() / n;
    let mean_y = samples.iter().map(|s| s.1.ln()).sum::<T>() / n;
    let sxx: T = samples.iter().map(|s| (s.0 - mean_t).powi(2)).sum();
    let spread = samples
        .iter()
        .map(|s| (s.0 - mean_t).abs())
        .fold(T::zero(), T::max);
    if !(spread > T::epsilon() * mean_t.abs().max(T::one())) {
        return Err(Error::Rank("all samples share one temperature".into()));
    }
    let sxy: T = samples
        .iter()
        .map(|s| (s.0 - mean_t) * (s.1.ln() - mean_y))
        .sum();
    let b = sxy / sxx;
    let ln_a = mean_y - b * mean_t;
    let a = ln_a.exp();
    let mean_g = samples.iter().map(|s| s.1).sum::<T>() / n;
    let ss_tot: T = samples.iter().map(|s| (s.1 - mean_g).powi(2)).sum();
    let ss_res: T = samples
        .iter()
        .map(|s| (s.1 - (ln_a + b * s.0).exp()).powi(2))
        .sum();
    let r_squared = if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else {
        T::one()
    };
    Ok(ExpFit { a, b, r_squared })
}

/// Evaluates the calibrated surrogate.
pub fn gamma_fitted<T: Real>(theta: T, vp: &VapParams<T>) -> Result<T> {
    vp.fit.map(|f| f.eval(theta)).ok_or(Error::NotCalibrated)
}

/// Fits the surrogate to the undamped closure on 60–100 °C at 0.5 °C.
pub fn calibrate_surrogate<T: Real>(vp: &VapParams<T>) -> Result<ExpFit<T>> {
    let samples = sample_gamma(
        vp,
        T::lit(60.0),
        T::lit(100.0),
        T::lit(0.5),
        Closure::Undamped,
    )?;
    fit_gamma_exponential(&samples)
}

/// R² of `fit` against the undamped closure on the calibration window.
pub fn surrogate_r_squared<T: Real>(fit: &ExpFit<T>, vp: &VapParams<T>) -> Result<T> {
    let samples = sample_gamma(
        vp,
        T::lit(60.0),
        T::lit(100.0),
        T::lit(0.5),
        Closure::Undamped,
    )?;
    let n = T::from_usize(samples.len()).unwrap();
    let mean = samples.iter().map(|s| s.1).sum::<T>() / n;
    let ss_tot: T = samples.iter().map(|s| (s.1 - mean).powi(2)).sum();
    let ss_res: T = samples.iter().map(|s| (s.1 - fit.eval(s.0)).powi(2)).sum();
    Ok(T::one() - ss_res / ss_tot)
}

/// Rows `theta_C,gamma_raw_per_s,gamma_undamped_per_s,gamma_fit_per_s`.
pub fn write_gamma_csv<T: Real, W: std::io::Write>(
    vp: &VapParams<T>,
    lo: T,
    hi: T,
    step: T,
    mut out: W,
) -> Result<()> {
    let damped = sample_gamma(vp, lo, hi, step, Closure::Damped)?;
    writeln!(
        out,
        "theta_C,gamma_raw_per_s,gamma_undamped_per_s,gamma_fit_per_s"
    )?;
    for (theta, raw) in damped {
        let undamped = gamma_undamped(theta, vp)?;
        let fit = gamma_fitted(theta, vp)?;
        writeln!(out, "{theta},{raw},{undamped},{fit}")?;
    }
    Ok(())
}
