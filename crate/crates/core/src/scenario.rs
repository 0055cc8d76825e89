//! A fully resolved run description and the plumbing that turns it into
//! a solver, a probe and a simulation result.

use crate::error::{invalid, Result};
use crate::experiment::{locate_probe, ProbeWeights};
use crate::geometry::{build_grid, Geometry, Grid};
use crate::params::{build_groups, DimensionlessGroups, PhysicalParams, TimeScaleMode};
use crate::solver::{BoundaryData, SimConfig, SimResult, Solver};
use crate::source::{source_field, SourceParams};
use crate::vaporization::{calibrate_surrogate, ExpFit, VapParams};

/// Vaporization settings as configured; the surrogate coefficients are
/// fitted on demand when left unset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VapSettings {
    pub theta1: f64,
    pub theta2: f64,
    pub w_vap: f64,
    pub gamma_exponent: f64,
    pub fit_a: Option<f64>,
    pub fit_b: Option<f64>,
    /// Characteristic rate Γ_c, 1/s
    pub gamma_c: f64,
    /// Typical intensity S̄; `None` uses the source intensity.
    pub s_bar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    /// Dimensionless spacing in both directions
    pub dx: f64,
    /// Dimensionless time step
    pub dt: f64,
    /// End time, s
    pub t_end: f64,
    pub t_c_mode: TimeScaleMode<f64>,
    pub snapshot_every: usize,
    /// Probe sampling cadence, s
    pub probe_interval: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Probe position is stored in `geometry.probe_x`/`probe_r`.
    pub geometry: Geometry<f64>,
    /// Added to the configured probe x to reach grid coordinates, m
    pub probe_x_offset: f64,
    pub physical: PhysicalParams<f64>,
    pub endcaps_ambient: bool,
    pub s0: f64,
    pub beta: f64,
    /// Laser switch-off time, s
    pub off_time: Option<f64>,
    pub vap: VapSettings,
    pub numerics: Numerics,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::p34f47()
    }
}

impl Scenario {
    /// Case P34F47: 34 W for 1200 s on ex-vivo porcine liver.
    pub fn p34f47() -> Self {
        Self {
            geometry: Geometry::default_applicator(),
            probe_x_offset: 0.0,
            physical: PhysicalParams::porcine_liver(),
            endcaps_ambient: true,
            s0: 7.63e5,
            beta: 40.0,
            off_time: None,
            vap: VapSettings {
                theta1: 75.0,
                theta2: 100.0,
                w_vap: 0.05,
                gamma_exponent: 5.0,
                fit_a: None,
                fit_b: None,
                gamma_c: 1e-2,
                s_bar: None,
            },
            numerics: Numerics {
                dx: 1.0 / 50.0,
                dt: 4e-4,
                t_end: 1200.0,
                t_c_mode: TimeScaleMode::Irradiation,
                snapshot_every: 0,
                probe_interval: 1.0,
            },
        }
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        build_grid(&self.geometry, self.numerics.dx)
    }

    pub fn groups(&self) -> Result<DimensionlessGroups<f64>> {
        build_groups(
            &self.physical,
            &self.geometry,
            self.s0,
            self.numerics.t_c_mode,
            self.vap.gamma_c,
        )
    }

    /// Source parameters on the snapped applicator of `grid`.
    pub fn source_params(&self, grid: &Grid<f64>) -> Result<SourceParams<f64>> {
        SourceParams::new(self.s0, self.beta, grid.geometry())
    }

    /// Vaporization parameters with the surrogate resolved.
    pub fn vap_params(&self) -> Result<VapParams<f64>> {
        let v = &self.vap;
        let mut vp = VapParams {
            theta_vap1: v.theta1,
            theta_vap2: v.theta2,
            w_vap: v.w_vap,
            gamma_exp: v.gamma_exponent,
            s_bar: v.s_bar.unwrap_or(self.s0),
            heat_capacity: self.physical.tissue_heat_capacity(),
            fit: None,
        };
        vp.validate()?;
        vp.fit = Some(match (v.fit_a, v.fit_b) {
            (Some(a), Some(b)) => ExpFit {
                a,
                b,
                r_squared: f64::NAN,
            },
            (None, None) => calibrate_surrogate(&vp)?,
            _ => return Err(invalid("vap.fitA", "fitA and fitB must be given together")),
        });
        vp.validate()?;
        Ok(vp)
    }

    pub fn sim_config(&self) -> SimConfig<f64> {
        SimConfig {
            dt: self.numerics.dt,
            t_end: self.numerics.t_end,
            snapshot_every: self.numerics.snapshot_every,
            probe_interval: self.numerics.probe_interval,
            source_off_time: self.off_time,
        }
    }

    /// Probe position in grid coordinates, m.
    pub fn probe_position(&self) -> (f64, f64) {
        (
            self.geometry.probe_x + self.probe_x_offset,
            self.geometry.probe_r,
        )
    }

    pub fn probe(&self, grid: &Grid<f64>) -> Result<ProbeWeights<f64>> {
        let (x, r) = self.probe_position();
        locate_probe(grid, x, r)
    }

    pub fn solver(&self) -> Result<Solver<f64>> {
        self.validate()?;
        let grid = self.grid()?;
        let groups = self.groups()?;
        let sp = self.source_params(&grid)?;
        let source = source_field(&grid, &sp);
        let boundary = BoundaryData::from_physical(&self.physical, &groups, self.endcaps_ambient);
        Solver::new(grid, groups, boundary, source, self.vap_params()?)
    }

    /// Builds the solver, checks stability and integrates to `t_end`.
    pub fn run(&self) -> Result<SimResult<f64>> {
        let solver = self.solver()?;
        let probe = self.probe(solver.grid())?;
        let init = solver.initial_state(self.physical.theta0, self.physical.w0);
        solver.run_from(init, &probe, &self.sim_config())
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.numerics;
        if !(n.t_end >= 0.0) || !n.t_end.is_finite() {
            return Err(invalid(
                "numerics.t_end",
                format!("must be >= 0, got {}", n.t_end),
            ));
        }
        if !(n.probe_interval > 0.0) || !n.probe_interval.is_finite() {
            return Err(invalid("numerics.probe_interval", "must be > 0"));
        }
        if !(n.dt > 0.0) || !n.dt.is_finite() {
            return Err(invalid("numerics.dt", format!("must be > 0, got {}", n.dt)));
        }
        if let Some(t) = self.off_time {
            if !(t >= 0.0) {
                return Err(invalid("source.off_time", "must be >= 0"));
            }
        }
        if !(self.physical.w0 >= 0.0 && self.physical.w0 <= 1.0) {
            return Err(invalid("init.w0", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_groups() {
        let g = Scenario::p34f47().groups().unwrap();
        assert!((g.b - 0.9264).abs() < 1e-4);
        assert!((1.0 / g.t_d - 1.2516e-5).abs() < 1e-8);
        assert!((g.t_s - 433.9).abs() < 0.1);
        assert_eq!(g.coef_src, 1.0);
    }

    #[test]
    fn surrogate_is_fitted_when_unset() {
        let s = Scenario::p34f47();
        let vp = s.vap_params().unwrap();
        let fit = vp.fit.unwrap();
        assert!(fit.r_squared > 0.95);
        let mut fixed = s;
        fixed.vap.fit_a = Some(fit.a);
        fixed.vap.fit_b = Some(fit.b);
        assert_eq!(fixed.vap_params().unwrap().fit.unwrap().a, fit.a);
        fixed.vap.fit_b = None;
        assert!(fixed.vap_params().is_err());
    }

    #[test]
    fn probe_inside_tissue() {
        let s = Scenario::p34f47();
        let grid = s.grid().unwrap();
        assert!(s.probe(&grid).is_ok());
        let mut off = s;
        off.probe_x_offset = 1.0;
        assert!(off.probe(&grid).is_err());
    }

    #[test]
    fn short_run_heats_probe() {
        let mut s = Scenario::p34f47();
        s.numerics.t_end = 30.0;
        let res = s.run().unwrap();
        assert_eq!(res.probe.len(), 31);
        let t = res.probe.temperatures();
        assert_eq!(t[0], 20.0);
        assert!(t[30] > 24.0 && t[30] < 27.0, "{}", t[30]);
    }
}
