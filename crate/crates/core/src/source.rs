//! Gaussian laser source around the radiating tip.

use crate::error::{invalid, Result};
use crate::geometry::{Geometry, Grid};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams<T> {
    /// Intensity scale S₀, treated as a volumetric power density (W/m³)
    pub s0: T,
    /// Decay parameter β, 1/m²
    pub beta: T,
    pub r_app: T,
    pub x_rad1: T,
    pub x_rad2: T,
}

impl<T: Real> SourceParams<T> {
    pub fn new(s0: T, beta: T, geom: &Geometry<T>) -> Result<Self> {
        let sp = Self {
            s0,
            beta,
            r_app: geom.r_app,
            x_rad1: geom.x_rad1,
            x_rad2: geom.x_rad2,
        };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > T::zero()) || !self.s0.is_finite() {
            return Err(invalid(
                "source.s0",
                format!("must be > 0, got {}", self.s0),
            ));
        }
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return Err(invalid(
                "source.beta",
                format!("must be > 0, got {}", self.beta),
            ));
        }
        Ok(())
    }

    pub fn with_beta(&self, beta: T) -> Self {
        Self { beta, ..*self }
    }
}

/// Axial profile: one on the radiating interval, Gaussian tails outside.
pub fn axial_profile<T: Real>(x: T, sp: &SourceParams<T>) -> T {
    if x <= sp.x_rad1 {
        let d = x - sp.x_rad1;
        (-sp.beta * d * d).exp()
    } else if x < sp.x_rad2 {
        T::one()
    } else {
        let d = x - sp.x_rad2;
        (-sp.beta * d * d).exp()
    }
}

pub fn radial_profile<T: Real>(r: T, sp: &SourceParams<T>) -> T {
    let d = r - sp.r_app;
    (-sp.beta * d * d).exp()
}

/// Dimensionless source `S/S₀` at a point given in metres.
pub fn source_dimless<T: Real>(x: T, r: T, sp: &SourceParams<T>) -> T {
    axial_profile(x, sp) * radial_profile(r, sp)
}

/// Gaussian-beam peak irradiance `2 P₀ / (π a²)` (W/m² for P₀ in W, a in m).
///
/// This is a surface density and only an order-of-magnitude guide; the
/// solver's `s0` is volumetric and is normally calibrated from data.
pub fn s0_from_beam<T: Real>(power: T, waist: T) -> T {
    T::lit(2.0) * power / (T::PI() * waist * waist)
}

/// Evaluates the dimensionless source at every grid node.
pub fn source_field<T: Real>(grid: &Grid<T>, sp: &SourceParams<T>) -> Vec<T> {
    (0..grid.len())
        .map(|k| {
            let (x, r) = grid.position_m(k);
            source_dimless(x, r, sp)
        })
        .collect()
}

pub fn write_source_csv<T: Real, W: std::io::Write>(
    grid: &Grid<T>,
    sp: &SourceParams<T>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "x_m,r_m,source")?;
    for (k, s) in source_field(grid, sp).into_iter().enumerate() {
        let (x, r) = grid.position_m(k);
        writeln!(out, "{x},{r},{s}")?;
    }
    Ok(())
}
