//! Physical parameters, the nondimensionalization and the derived
//! coefficient groups of the dimensionless bioheat / water system.
//!
//! With `θ̃ = (θ − θ_ref)/Δθ_c`, `x̃ = x/L`, `r̃ = r/R`, `t̃ = t/t_c` the
//! temperature equation becomes
//!
//! ```text
//! ∂θ̃/∂t̃ = (t_c/t_D)[∂²θ̃/∂x̃² + (L²/R²)(1/r̃)∂(r̃ ∂θ̃/∂r̃)/∂r̃]
//!          − b t_c ω θ̃ + (t_c/t_S) S̃ f(θ, w)
//! ∂w/∂t̃  = −(t_c Γ_c) Γ̃(θ) w
//! ```

use crate::error::{invalid, Result};
use crate::geometry::Geometry;
use crate::scalar::Real;

/// Dimensional material, boundary and initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T> {
    /// Specific heat of tissue, J/(kg·K)
    pub c_ts: T,
    /// Specific heat of blood, J/(kg·K)
    pub c_bl: T,
    /// Tissue density, kg/m³
    pub rho_ts: T,
    /// Blood density, kg/m³
    pub rho_bl: T,
    /// Tissue conductivity, W/(m·K)
    pub k_ts: T,
    /// Blood perfusion rate, 1/s
    pub omega: T,
    /// Blood temperature, °C
    pub theta_bl: T,
    /// Ambient temperature, °C
    pub theta_amb: T,
    /// Coolant temperature, °C
    pub theta_cool: T,
    /// Ambient heat-transfer coefficient, W/(m²·K)
    pub alpha_amb: T,
    /// Coolant heat-transfer coefficient, W/(m²·K)
    pub alpha_cool: T,
    /// Temperature scale Δθ_c, K
    pub delta_theta_c: T,
    /// Initial temperature, °C
    pub theta0: T,
    /// Initial water fraction
    pub w0: T,
}

impl<T: Real> PhysicalParams<T> {
    /// Ex-vivo porcine liver: densities, heats and conductivity from the
    /// literature tables, room-temperature start, no perfusion.
    ///
    /// The boundary coefficients and coolant temperature are assumed
    /// values; no measured figures exist for them.
    pub fn porcine_liver() -> Self {
        Self {
            c_ts: T::lit(3640.0),
            c_bl: T::lit(3617.0),
            rho_ts: T::lit(1137.0),
            rho_bl: T::lit(1060.0),
            k_ts: T::lit(0.518),
            omega: T::zero(),
            theta_bl: T::lit(37.0),
            theta_amb: T::lit(20.0),
            theta_cool: T::lit(20.0),
            alpha_amb: T::lit(10.0),
            alpha_cool: T::lit(500.0),
            delta_theta_c: T::lit(80.0),
            theta0: T::lit(20.0),
            w0: T::lit(0.778),
        }
    }

    /// Volumetric heat capacity ρ_ts·c_ts, J/(m³·K).
    pub fn tissue_heat_capacity(&self) -> T {
        self.rho_ts * self.c_ts
    }

    /// Reference temperature of the nondimensionalization.
    ///
    /// Without perfusion the blood temperature plays no role in the
    /// equations, so the ambient temperature is used instead.
    pub fn reference_temperature(&self) -> T {
        if self.omega == T::zero() {
            self.theta_amb
        } else {
            self.theta_bl
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_ts", self.c_ts),
            ("c_bl", self.c_bl),
            ("rho_ts", self.rho_ts),
            ("rho_bl", self.rho_bl),
            ("k_ts", self.k_ts),
            ("theta_bl", self.theta_bl),
            ("alpha_amb", self.alpha_amb),
            ("alpha_cool", self.alpha_cool),
            ("delta_theta_c", self.delta_theta_c),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.omega >= T::zero()) || !self.omega.is_finite() {
            return Err(invalid(
                "omega",
                format!("must be >= 0, got {}", self.omega),
            ));
        }
        let temps = [
            ("theta0", self.theta0),
            ("theta_amb", self.theta_amb),
            ("theta_cool", self.theta_cool),
        ];
        for (name, v) in temps {
            if !(v >= T::zero() && v <= T::lit(110.0)) {
                return Err(invalid(name, format!("must lie in [0, 110] °C, got {v}")));
            }
        }
        if !(self.w0 > T::zero() && self.w0 <= T::one()) {
            return Err(invalid(
                "w0",
                format!("must lie in (0, 1], got {}", self.w0),
            ));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> PhysicalParams<U> {
        PhysicalParams {
            c_ts: self.c_ts.cast(),
            c_bl: self.c_bl.cast(),
            rho_ts: self.rho_ts.cast(),
            rho_bl: self.rho_bl.cast(),
            k_ts: self.k_ts.cast(),
            omega: self.omega.cast(),
            theta_bl: self.theta_bl.cast(),
            theta_amb: self.theta_amb.cast(),
            theta_cool: self.theta_cool.cast(),
            alpha_amb: self.alpha_amb.cast(),
            alpha_cool: self.alpha_cool.cast(),
            delta_theta_c: self.delta_theta_c.cast(),
            theta0: self.theta0.cast(),
            w0: self.w0.cast(),
        }
    }
}

/// Choice of the characteristic time `t_c`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TimeScaleMode<T> {
    /// `t_c = t_S`, which makes the source coefficient exactly one.
    #[default]
    Irradiation,
    /// Explicit value in seconds.
    Explicit(T),
}

/// Derived time scales and the coefficients of the dimensionless system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups<T> {
    /// Perfusion ratio ρ_bl c_bl / (ρ_ts c_ts)
    pub b: T,
    /// Irradiation time scale, s
    pub t_s: T,
    /// Diffusive time scale on L, s
    pub t_d: T,
    /// Characteristic time, s
    pub t_c: T,
    /// Characteristic vaporization rate, 1/s
    pub gamma_c: T,
    /// Characteristic irradiation intensity (S₀)
    pub s_c: T,
    pub coef_diff: T,
    pub coef_perf: T,
    pub coef_src: T,
    pub coef_vap: T,
    /// L²/R²
    pub aspect: T,
    /// Reference temperature of θ̃, °C
    pub theta_ref: T,
    /// Δθ_c, K
    pub delta_theta: T,
}

pub fn build_groups<T: Real>(
    p: &PhysicalParams<T>,
    geom: &Geometry<T>,
    s0: T,
    t_c_mode: TimeScaleMode<T>,
    gamma_c: T,
) -> Result<DimensionlessGroups<T>> {
    p.validate()?;
    geom.validate()?;
    if !(s0 > T::zero()) || !s0.is_finite() {
        return Err(invalid("s0", format!("must be > 0, got {s0}")));
    }
    if !(gamma_c > T::zero()) || !gamma_c.is_finite() {
        return Err(invalid("gamma_c", format!("must be > 0, got {gamma_c}")));
    }
    let heat_cap = p.tissue_heat_capacity();
    let b = p.rho_bl * p.c_bl / heat_cap;
    let s_c = s0;
    let t_s = heat_cap * p.delta_theta_c / s_c;
    let t_d = heat_cap * geom.length * geom.length / p.k_ts;
    let t_c = match t_c_mode {
        TimeScaleMode::Irradiation => t_s,
        TimeScaleMode::Explicit(t) => {
            if !(t > T::zero()) || !t.is_finite() {
                return Err(invalid("t_c", format!("must be > 0, got {t}")));
            }
            t
        }
    };
    let coef_src = match t_c_mode {
        TimeScaleMode::Irradiation => T::one(),
        TimeScaleMode::Explicit(_) => t_c / t_s,
    };
    Ok(DimensionlessGroups {
        b,
        t_s,
        t_d,
        t_c,
        gamma_c,
        s_c,
        coef_diff: t_c / t_d,
        coef_perf: b * t_c * p.omega,
        coef_src,
        coef_vap: t_c * gamma_c,
        aspect: (geom.length * geom.length) / (geom.radius * geom.radius),
        theta_ref: p.reference_temperature(),
        delta_theta: p.delta_theta_c,
    })
}

impl<T: Real> DimensionlessGroups<T> {
    /// Physical seconds to dimensionless time.
    pub fn time_to_dimensionless(&self, seconds: T) -> T {
        seconds / self.t_c
    }

    pub fn time_to_seconds(&self, t: T) -> T {
        t * self.t_c
    }
}

/// `(θ − θ_ref)/Δθ_c`.
pub fn to_dimensionless<T: Real>(theta: T, g: &DimensionlessGroups<T>) -> T {
    (theta - g.theta_ref) / g.delta_theta
}

/// Inverse of [`to_dimensionless`], `θ_ref + Δθ_c θ̃`.
pub fn from_dimensionless<T: Real>(theta: T, g: &DimensionlessGroups<T>) -> T {
    g.theta_ref + g.delta_theta * theta
}
