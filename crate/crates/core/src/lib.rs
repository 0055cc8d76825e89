//! Laser thermal ablation on an axisymmetric cylinder: a Pennes bioheat
//! equation coupled to tissue water vaporization, discretised with an
//! explicit finite-difference scheme.
//!
//! The numerical kernels are generic over [`Real`]; the `*64` aliases fix
//! the scalar to `f64`, which is what the configuration and CLI layers use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod config;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod params;
pub mod scalar;
pub mod scenario;
pub mod solver;
pub mod source;
pub mod vaporization;

pub use calibration::{fit_beta, fit_s0_from_slope, BetaFit};
pub use config::{apply_overrides, load_config, parse_config, render_manifest};
pub use error::{Error, Result};
pub use experiment::{
    compare_series, load_probe_csv, locate_probe, parse_probe_csv, sample_probe, DiffMetrics,
    ProbeSeries, ProbeWeights,
};
pub use geometry::{build_grid, classify, BoundaryTag, Geometry, Grid, Node, Region};
pub use params::{
    build_groups, from_dimensionless, to_dimensionless, DimensionlessGroups, PhysicalParams,
    TimeScaleMode,
};
pub use scalar::Real;
pub use scenario::{Numerics, Scenario, VapSettings};
pub use solver::{stability_check, BoundaryData, SimConfig, SimResult, Solver, Stability, State};
pub use source::{source_dimless, source_field, SourceParams};
pub use vaporization::{
    calibrate_surrogate, gamma_fitted, gamma_raw, gamma_undamped, modulation, water_content,
    ExpFit, VapParams,
};

pub type Geometry64 = Geometry<f64>;
pub type Grid64 = Grid<f64>;
pub type PhysicalParams64 = PhysicalParams<f64>;
pub type Groups64 = DimensionlessGroups<f64>;
pub type SourceParams64 = SourceParams<f64>;
pub type VapParams64 = VapParams<f64>;
pub type Solver64 = Solver<f64>;
pub type SimResult64 = SimResult<f64>;
pub type ProbeSeries64 = ProbeSeries<f64>;
pub type DiffMetrics64 = DiffMetrics<f64>;
