//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are errors,
//! except the `derived.*` block that [`render_manifest`] appends, so a
//! manifest can be fed back as a configuration.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::TimeScaleMode;
use crate::scenario::Scenario;
use crate::vaporization::surrogate_r_squared;

/// Every accepted key, in manifest order.
pub const KEYS: &[&str] = &[
    "geometry.L",
    "geometry.R",
    "geometry.r_app",
    "geometry.x_rad1",
    "geometry.x_rad2",
    "probe.x",
    "probe.r",
    "probe.x_offset",
    "tissue.k",
    "tissue.rho",
    "tissue.c",
    "blood.rho",
    "blood.c",
    "blood.omega",
    "blood.theta_bl",
    "bc.alpha_amb",
    "bc.alpha_cool",
    "bc.theta_amb",
    "bc.theta_cool",
    "bc.endcaps_ambient",
    "source.s0",
    "source.beta",
    "source.off_time",
    "vap.theta1",
    "vap.theta2",
    "vap.w_vap",
    "vap.gamma_exponent",
    "vap.fitA",
    "vap.fitB",
    "vap.gamma_c",
    "vap.s_bar",
    "init.theta0",
    "init.w0",
    "numerics.dx",
    "numerics.dt",
    "numerics.t_end",
    "numerics.t_c_mode",
    "numerics.snapshot_every",
    "numerics.probe_interval",
];

/// The bundled P34F47 configuration.
pub const P34F47_CFG: &str = include_str!("../../../configs/p34f47.cfg");

fn config_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Config {
        line,
        reason: reason.into(),
    }
}

/// Splits one `key = value` assignment, stripping comments.
fn split_assignment(raw: &str, line: usize) -> Result<Option<(String, String)>> {
    let body = raw.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return Ok(None);
    }
    let (k, v) = body
        .split_once('=')
        .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{body}`")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return Err(config_err(
            line,
            format!("expected `key = value`, got `{body}`"),
        ));
    }
    Ok(Some((k.to_string(), v.to_string())))
}

fn number(v: &str, key: &str, line: usize) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| config_err(line, format!("{key}: `{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(config_err(line, format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn optional(v: &str, key: &str, line: usize) -> Result<Option<f64>> {
    match v {
        "none" | "auto" => Ok(None),
        _ => number(v, key, line).map(Some),
    }
}

/// Applies one assignment to `s`. `line` is only used in errors.
pub fn apply(s: &mut Scenario, key: &str, v: &str, line: usize) -> Result<()> {
    let num = || number(v, key, line);
    match key {
        "geometry.L" => s.geometry.length = num()?,
        "geometry.R" => s.geometry.radius = num()?,
        "geometry.r_app" => s.geometry.r_app = num()?,
        "geometry.x_rad1" => s.geometry.x_rad1 = num()?,
        "geometry.x_rad2" => s.geometry.x_rad2 = num()?,
        "probe.x" => s.geometry.probe_x = num()?,
        "probe.r" => s.geometry.probe_r = num()?,
        "probe.x_offset" => s.probe_x_offset = num()?,
        "tissue.k" => s.physical.k_ts = num()?,
        "tissue.rho" => s.physical.rho_ts = num()?,
        "tissue.c" => s.physical.c_ts = num()?,
        "blood.rho" => s.physical.rho_bl = num()?,
        "blood.c" => s.physical.c_bl = num()?,
        "blood.omega" => s.physical.omega = num()?,
        "blood.theta_bl" => s.physical.theta_bl = num()?,
        "bc.alpha_amb" => s.physical.alpha_amb = num()?,
        "bc.alpha_cool" => s.physical.alpha_cool = num()?,
        "bc.theta_amb" => s.physical.theta_amb = num()?,
        "bc.theta_cool" => s.physical.theta_cool = num()?,
        "bc.endcaps_ambient" => {
            s.endcaps_ambient = match v {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => {
                    return Err(config_err(
                        line,
                        format!("{key}: expected true or false, got `{v}`"),
                    ))
                }
            }
        }
        "source.s0" => s.s0 = num()?,
        "source.beta" => s.beta = num()?,
        "source.off_time" => s.off_time = optional(v, key, line)?,
        "vap.theta1" => s.vap.theta1 = num()?,
        "vap.theta2" => s.vap.theta2 = num()?,
        "vap.w_vap" => s.vap.w_vap = num()?,
        "vap.gamma_exponent" => s.vap.gamma_exponent = num()?,
        "vap.fitA" => s.vap.fit_a = optional(v, key, line)?,
        "vap.fitB" => s.vap.fit_b = optional(v, key, line)?,
        "vap.gamma_c" => s.vap.gamma_c = num()?,
        "vap.s_bar" => s.vap.s_bar = optional(v, key, line)?,
        "init.theta0" => s.physical.theta0 = num()?,
        "init.w0" => s.physical.w0 = num()?,
        "numerics.dx" => s.numerics.dx = num()?,
        "numerics.dt" => s.numerics.dt = num()?,
        "numerics.t_end" => s.numerics.t_end = num()?,
        "numerics.t_c_mode" => {
            s.numerics.t_c_mode = if v.eq_ignore_ascii_case("ts") {
                TimeScaleMode::Irradiation
            } else {
                TimeScaleMode::Explicit(num()?)
            }
        }
        "numerics.snapshot_every" => {
            s.numerics.snapshot_every = v.parse().map_err(|_| {
                config_err(line, format!("{key}: `{v}` is not a non-negative integer"))
            })?
        }
        "numerics.probe_interval" => s.numerics.probe_interval = num()?,
        k if k.starts_with("derived.") => {}
        _ => return Err(config_err(line, format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Parses configuration text on top of the P34F47 defaults.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut s = Scenario::p34f47();
    let mut seen = std::collections::HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        if let Some((k, v)) = split_assignment(raw, line)? {
            if let Some(prev) = seen.insert(k.clone(), line) {
                return Err(config_err(
                    line,
                    format!("`{k}` already set on line {prev}"),
                ));
            }
            apply(&mut s, &k, &v, line)?;
        }
    }
    Ok(s)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(0, format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Applies `key=value` overrides, as given to `--set`.
pub fn apply_overrides<S: AsRef<str>>(s: &mut Scenario, overrides: &[S]) -> Result<()> {
    for o in overrides {
        let o = o.as_ref();
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| config_err(0, format!("override `{o}` is not key=value")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.starts_with("derived.") {
            return Err(config_err(0, format!("`{k}` is derived and cannot be set")));
        }
        apply(s, k, v, 0).map_err(|e| match e {
            Error::Config { reason, .. } => config_err(0, format!("--set {reason}")),
            e => e,
        })?;
    }
    Ok(())
}

fn opt(v: Option<f64>, none: &str) -> String {
    v.map_or_else(|| none.to_string(), |x| x.to_string())
}

/// Value of `key` in `s`, formatted so that parsing it back is exact.
pub fn value_of(s: &Scenario, key: &str) -> Option<String> {
    let g = &s.geometry;
    let p = &s.physical;
    let v = &s.vap;
    let n = &s.numerics;
    Some(match key {
        "geometry.L" => g.length.to_string(),
        "geometry.R" => g.radius.to_string(),
        "geometry.r_app" => g.r_app.to_string(),
        "geometry.x_rad1" => g.x_rad1.to_string(),
        "geometry.x_rad2" => g.x_rad2.to_string(),
        "probe.x" => g.probe_x.to_string(),
        "probe.r" => g.probe_r.to_string(),
        "probe.x_offset" => s.probe_x_offset.to_string(),
        "tissue.k" => p.k_ts.to_string(),
        "tissue.rho" => p.rho_ts.to_string(),
        "tissue.c" => p.c_ts.to_string(),
        "blood.rho" => p.rho_bl.to_string(),
        "blood.c" => p.c_bl.to_string(),
        "blood.omega" => p.omega.to_string(),
        "blood.theta_bl" => p.theta_bl.to_string(),
        "bc.alpha_amb" => p.alpha_amb.to_string(),
        "bc.alpha_cool" => p.alpha_cool.to_string(),
        "bc.theta_amb" => p.theta_amb.to_string(),
        "bc.theta_cool" => p.theta_cool.to_string(),
        "bc.endcaps_ambient" => s.endcaps_ambient.to_string(),
        "source.s0" => s.s0.to_string(),
        "source.beta" => s.beta.to_string(),
        "source.off_time" => opt(s.off_time, "none"),
        "vap.theta1" => v.theta1.to_string(),
        "vap.theta2" => v.theta2.to_string(),
        "vap.w_vap" => v.w_vap.to_string(),
        "vap.gamma_exponent" => v.gamma_exponent.to_string(),
        "vap.fitA" => opt(v.fit_a, "auto"),
        "vap.fitB" => opt(v.fit_b, "auto"),
        "vap.gamma_c" => v.gamma_c.to_string(),
        "vap.s_bar" => opt(v.s_bar, "auto"),
        "init.theta0" => p.theta0.to_string(),
        "init.w0" => p.w0.to_string(),
        "numerics.dx" => n.dx.to_string(),
        "numerics.dt" => n.dt.to_string(),
        "numerics.t_end" => n.t_end.to_string(),
        "numerics.t_c_mode" => match n.t_c_mode {
            TimeScaleMode::Irradiation => "TS".into(),
            TimeScaleMode::Explicit(t) => t.to_string(),
        },
        "numerics.snapshot_every" => n.snapshot_every.to_string(),
        "numerics.probe_interval" => n.probe_interval.to_string(),
        _ => return None,
    })
}

/// Renders the resolved scenario: surrogate and S̄ filled in, every key
/// listed, followed by the derived dimensionless groups.
pub fn render_manifest(s: &Scenario) -> Result<String> {
    let mut resolved = *s;
    let vp = s.vap_params()?;
    let fit = vp.fit.expect("resolved");
    resolved.vap.fit_a = Some(fit.a);
    resolved.vap.fit_b = Some(fit.b);
    resolved.vap.s_bar = Some(vp.s_bar);
    let g = s.groups()?;
    let grid = s.grid()?;

    let mut out = String::from("# resolved run parameters\n");
    for key in KEYS {
        writeln!(
            out,
            "{key} = {}",
            value_of(&resolved, key).expect("known key")
        )
        .unwrap();
    }
    out.push_str("\n# derived (ignored on load)\n");
    let derived = [
        ("b", g.b),
        ("t_S", g.t_s),
        ("t_D", g.t_d),
        ("t_c", g.t_c),
        ("gamma_c", g.gamma_c),
        ("coef_diff", g.coef_diff),
        ("coef_perf", g.coef_perf),
        ("coef_src", g.coef_src),
        ("coef_vap", g.coef_vap),
        ("aspect", g.aspect),
        ("theta_ref", g.theta_ref),
        ("delta_theta", g.delta_theta),
        ("fit_r_squared", surrogate_r_squared(&fit, &vp)?),
        ("r_app_snapped", grid.geometry().r_app),
        ("x_rad1_snapped", grid.geometry().x_rad1),
        ("x_rad2_snapped", grid.geometry().x_rad2),
    ];
    for (k, v) in derived {
        writeln!(out, "derived.{k} = {v}").unwrap();
    }
    writeln!(out, "derived.nx = {}", grid.nx()).unwrap();
    writeln!(out, "derived.nr = {}", grid.nr()).unwrap();
    Ok(out)
}
