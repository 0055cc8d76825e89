//! Explicit finite-difference integration of the dimensionless system.
//!
//! Temperature advances by forward Euler, water content by the exact
//! exponential step at frozen temperature. Both updates read only the
//! level-n fields, so nodes can be updated in any order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiment::{ProbeSeries, ProbeWeights};
use crate::geometry::Grid;
use crate::params::{from_dimensionless, to_dimensionless, DimensionlessGroups, PhysicalParams};
use crate::scalar::Real;
use crate::vaporization::{gamma_fitted, modulation, VapParams};

/// Neighbour directions in stencil order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    XMinus = 0,
    XPlus = 1,
    RMinus = 2,
    RPlus = 3,
}

/// How the value beyond a node in one direction is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link<T> {
    /// Real neighbour node.
    Node(usize),
    /// Zero-flux ghost equal to the opposite neighbour.
    Mirror(usize),
    /// Robin ghost `θ[inner] + coef (ext − θ[node])`, `coef = 2 h α / k`.
    Robin { inner: usize, coef: T, ext: T },
}

/// Dimensionless boundary data for the Robin closures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData<T> {
    /// α_amb / k_ts, 1/m
    pub amb_ratio: T,
    /// α_cool / k_ts, 1/m
    pub cool_ratio: T,
    /// Dimensionless ambient temperature
    pub theta_amb: T,
    /// Dimensionless coolant temperature
    pub theta_cool: T,
    /// Whether the end faces exchange heat with the ambient.
    pub endcaps_ambient: bool,
}

impl<T: Real> BoundaryData<T> {
    pub fn from_physical(
        p: &PhysicalParams<T>,
        g: &DimensionlessGroups<T>,
        endcaps_ambient: bool,
    ) -> Self {
        Self {
            amb_ratio: p.alpha_amb / p.k_ts,
            cool_ratio: p.alpha_cool / p.k_ts,
            theta_amb: to_dimensionless(p.theta_amb, g),
            theta_cool: to_dimensionless(p.theta_cool, g),
            endcaps_ambient,
        }
    }

    /// All faces insulated.
    pub fn insulated() -> Self {
        Self {
            amb_ratio: T::zero(),
            cool_ratio: T::zero(),
            theta_amb: T::zero(),
            theta_cool: T::zero(),
            endcaps_ambient: false,
        }
    }
}

/// Per-node neighbour links, boundary ghosts included.
#[derive(Debug, Clone)]
pub struct BoundaryClosure<T> {
    links: Vec<[Link<T>; 4]>,
}

impl<T: Real> BoundaryClosure<T> {
    pub fn links(&self, node: usize) -> &[Link<T>; 4] {
        &self.links[node]
    }

    /// Value seen by `node` in direction `dir`.
    pub fn neighbour_value(&self, field: &[T], node: usize, dir: Dir) -> T {
        match self.links[node][dir as usize] {
            Link::Node(k) | Link::Mirror(k) => field[k],
            Link::Robin { inner, coef, ext } => field[inner] + coef * (ext - field[node]),
        }
    }
}

/// Builds the ghost closure: Robin on ambient, coolant and radiating
/// faces, mirror on the axis and on insulated end faces. The re-entrant
/// tip corner gets coolant ghosts on both of its applicator-facing sides.
pub fn apply_boundary<T: Real>(grid: &Grid<T>, bc: &BoundaryData<T>) -> BoundaryClosure<T> {
    let (hx, hr) = grid.spacing_m();
    let two = T::lit(2.0);
    let app = grid.applicator();
    let nr = grid.nr();
    let links = grid
        .nodes()
        .iter()
        .map(|n| {
            let (i, j) = (n.i, n.j);
            let at = |ii: usize, jj: usize| grid.index(ii, jj);
            let opposite = |ii: usize, jj: usize| {
                at(ii, jj)
                    .unwrap_or_else(|| panic!("boundary node ({i}, {j}) lacks an inner neighbour"))
            };
            let amb = |inner: usize, h: T| {
                if bc.amb_ratio > T::zero() {
                    Link::Robin {
                        inner,
                        coef: two * h * bc.amb_ratio,
                        ext: bc.theta_amb,
                    }
                } else {
                    Link::Mirror(inner)
                }
            };
            let cool = |inner: usize, h: T| {
                if bc.cool_ratio > T::zero() {
                    Link::Robin {
                        inner,
                        coef: two * h * bc.cool_ratio,
                        ext: bc.theta_cool,
                    }
                } else {
                    Link::Mirror(inner)
                }
            };
            let endcap = |inner: usize| {
                if bc.endcaps_ambient {
                    amb(inner, hx)
                } else {
                    Link::Mirror(inner)
                }
            };
            let corner = app.is_some_and(|a| i == a.i_tip && j == a.j_wall);

            let x_minus = match (i > 0).then(|| at(i - 1, j)).flatten() {
                Some(m) if !corner => Link::Node(m),
                _ => {
                    let inner = opposite(i + 1, j);
                    if i == 0 {
                        endcap(inner)
                    } else {
                        cool(inner, hx)
                    }
                }
            };
            let x_plus = match at(i + 1, j) {
                Some(p) => Link::Node(p),
                None => endcap(opposite(i - 1, j)),
            };
            let r_minus = match (j > 0).then(|| at(i, j - 1)).flatten() {
                Some(m) if !corner => Link::Node(m),
                _ => {
                    let inner = opposite(i, j + 1);
                    if j == 0 {
                        Link::Mirror(inner)
                    } else {
                        cool(inner, hr)
                    }
                }
            };
            let r_plus = match (j < nr).then(|| at(i, j + 1)).flatten() {
                Some(p) => Link::Node(p),
                None => amb(opposite(i, j - 1), hr),
            };
            [x_minus, x_plus, r_minus, r_plus]
        })
        .collect();
    BoundaryClosure { links }
}

/// Dimensionless cylindrical Laplacian at one node,
/// `∂²θ/∂x² + (L²/R²)(1/r)∂(r ∂θ/∂r)/∂r`, with second-order central
/// differences. On the axis the radial part becomes `2 ∂²θ/∂r²`.
pub fn laplacian_cyl<T: Real>(
    field: &[T],
    grid: &Grid<T>,
    closure: &BoundaryClosure<T>,
    aspect: T,
    node: usize,
) -> T {
    let n = grid.node(node);
    let two = T::lit(2.0);
    let c = field[node];
    let xm = closure.neighbour_value(field, node, Dir::XMinus);
    let xp = closure.neighbour_value(field, node, Dir::XPlus);
    let rm = closure.neighbour_value(field, node, Dir::RMinus);
    let rp = closure.neighbour_value(field, node, Dir::RPlus);
    let dx2 = grid.dx() * grid.dx();
    let dr2 = grid.dr() * grid.dr();
    let axial = (xm - two * c + xp) / dx2;
    let radial = if n.j == 0 {
        two * (rm - two * c + rp) / dr2
    } else {
        let half = T::one() / (two * T::from_usize(n.j).unwrap());
        ((T::one() + half) * rp - two * c + (T::one() - half) * rm) / dr2
    };
    axial + aspect * radial
}

/// Laplacian with the closure folded into an affine stencil per node.
#[derive(Debug, Clone)]
struct CompiledOperator<T> {
    center: Vec<T>,
    neighbours: Vec<[(usize, T); 4]>,
    constant: Vec<T>,
}

impl<T: Real> CompiledOperator<T> {
    fn new(grid: &Grid<T>, closure: &BoundaryClosure<T>, aspect: T) -> Self {
        let two = T::lit(2.0);
        let dx2 = grid.dx() * grid.dx();
        let dr2 = grid.dr() * grid.dr();
        let mut center = Vec::with_capacity(grid.len());
        let mut neighbours = Vec::with_capacity(grid.len());
        let mut constant = Vec::with_capacity(grid.len());
        for (k, n) in grid.nodes().iter().enumerate() {
            let (wm, wp) = if n.j == 0 {
                (two * aspect / dr2, two * aspect / dr2)
            } else {
                let half = T::one() / (two * T::from_usize(n.j).unwrap());
                (
                    aspect * (T::one() - half) / dr2,
                    aspect * (T::one() + half) / dr2,
                )
            };
            let weights = [T::one() / dx2, T::one() / dx2, wm, wp];
            let mut c = -two / dx2 - (wm + wp);
            let mut b = T::zero();
            let mut nb = [(k, T::zero()); 4];
            for (d, link) in closure.links(k).iter().enumerate() {
                let w = weights[d];
                match *link {
                    Link::Node(m) | Link::Mirror(m) => nb[d] = (m, w),
                    Link::Robin { inner, coef, ext } => {
                        nb[d] = (inner, w);
                        c -= w * coef;
                        b += w * coef * ext;
                    }
                }
            }
            center.push(c);
            neighbours.push(nb);
            constant.push(b);
        }
        Self {
            center,
            neighbours,
            constant,
        }
    }

    #[inline]
    fn apply(&self, field: &[T], k: usize) -> T {
        let nb = &self.neighbours[k];
        self.center[k] * field[k]
            + nb[0].1 * field[nb[0].0]
            + nb[1].1 * field[nb[1].0]
            + nb[2].1 * field[nb[2].0]
            + nb[3].1 * field[nb[3].0]
            + self.constant[k]
    }
}

/// Fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    /// Dimensionless temperature per node
    pub theta: Vec<T>,
    /// Water fraction per node
    pub w: Vec<T>,
    /// Elapsed dimensionless time
    pub t: T,
    pub step_index: usize,
}

impl<T: Real> State<T> {
    pub fn uniform(n: usize, theta: T, w: T) -> Self {
        Self {
            theta: vec![theta; n],
            w: vec![w; n],
            t: T::zero(),
            step_index: 0,
        }
    }
}

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    /// Dimensionless time step
    pub dt: T,
    /// Physical end time, s
    pub t_end: T,
    /// Steps between field snapshots; 0 disables snapshots.
    pub snapshot_every: usize,
    /// Probe sampling interval, s
    pub probe_interval: T,
    /// Physical time after which the laser is off, s
    pub source_off_time: Option<T>,
}

/// Diffusion number of the explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability<T> {
    pub nu: T,
}

impl<T: Real> Stability<T> {
    /// Above 0.25 the discrete maximum principle is no longer guaranteed.
    pub fn warning(&self) -> bool {
        self.nu > T::lit(0.25)
    }
}

/// `ν = dt · coef_diff · (1/dx² + aspect/dr²)`; rejects ν > 0.5.
pub fn stability_check<T: Real>(
    g: &DimensionlessGroups<T>,
    grid: &Grid<T>,
    dt: T,
) -> Result<Stability<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(crate::error::invalid(
            "numerics.dt",
            format!("must be > 0, got {dt}"),
        ));
    }
    let per_dt =
        g.coef_diff * (T::one() / (grid.dx() * grid.dx()) + g.aspect / (grid.dr() * grid.dr()));
    let nu = dt * per_dt;
    if nu > T::lit(0.5) {
        return Err(Error::Instability {
            nu: nu.to_f64_lossy(),
            suggested_dt: (T::lit(0.25) / per_dt).to_f64_lossy(),
        });
    }
    Ok(Stability { nu })
}

/// Field dump at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub step: usize,
    pub time_s: T,
    pub temperature_c: Vec<T>,
    pub water_percent: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct SimResult<T> {
    /// Probe temperature, °C
    pub probe: ProbeSeries<T>,
    /// Probe water content, %, aligned with `probe`
    pub water_percent: Vec<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub final_state: State<T>,
    pub steps: usize,
    pub stability: Stability<T>,
}

impl<T: Real> SimResult<T> {
    /// (temperature °C, water %) pairs at the probe.
    pub fn trace(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.probe
            .temperatures()
            .iter()
            .copied()
            .zip(self.water_percent.iter().copied())
    }
}

/// Everything needed to advance the coupled system on one grid.
#[derive(Debug, Clone)]
pub struct Solver<T> {
    grid: Grid<T>,
    groups: DimensionlessGroups<T>,
    closure: BoundaryClosure<T>,
    operator: CompiledOperator<T>,
    source: Vec<T>,
    vap: VapParams<T>,
}

impl<T: Real> Solver<T> {
    /// `source` is the dimensionless source per node. The vaporization
    /// surrogate must be calibrated.
    pub fn new(
        grid: Grid<T>,
        groups: DimensionlessGroups<T>,
        boundary: BoundaryData<T>,
        source: Vec<T>,
        vap: VapParams<T>,
    ) -> Result<Self> {
        if source.len() != grid.len() {
            return Err(crate::error::invalid(
                "source",
                format!("field has {} values for {} nodes", source.len(), grid.len()),
            ));
        }
        vap.validate()?;
        if vap.fit.is_none() {
            return Err(Error::NotCalibrated);
        }
        let closure = apply_boundary(&grid, &boundary);
        let operator = CompiledOperator::new(&grid, &closure, groups.aspect);
        Ok(Self {
            grid,
            groups,
            closure,
            operator,
            source,
            vap,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn groups(&self) -> &DimensionlessGroups<T> {
        &self.groups
    }

    pub fn closure(&self) -> &BoundaryClosure<T> {
        &self.closure
    }

    pub fn vap(&self) -> &VapParams<T> {
        &self.vap
    }

    pub fn source(&self) -> &[T] {
        &self.source
    }

    /// Discrete Laplacian of `field` at every node.
    pub fn laplacian(&self, field: &[T]) -> Vec<T> {
        (0..field.len())
            .map(|k| self.operator.apply(field, k))
            .collect()
    }

    /// Vaporization rate per unit dimensionless time at dimensional
    /// temperature `theta_c`; the surrogate input is capped at θ_vap2.
    pub fn vaporization_rate(&self, theta_c: T) -> T {
        let g = gamma_fitted(theta_c.min(self.vap.theta_vap2), &self.vap)
            .expect("surrogate checked at construction");
        self.groups.coef_vap * (g / self.groups.gamma_c)
    }

    /// Advances `cur` by `dt` into `next`. `source_on` scales the laser.
    pub fn step_into(
        &self,
        cur: &State<T>,
        next: &mut State<T>,
        dt: T,
        source_on: bool,
    ) -> Result<()> {
        let g = &self.groups;
        let src_scale = if source_on { g.coef_src } else { T::zero() };
        let nodes = self.grid.len();
        next.theta.resize(nodes, T::zero());
        next.w.resize(nodes, T::zero());
        let chunk = (nodes / rayon::current_num_threads().max(1)).max(256);
        next.theta
            .par_chunks_mut(chunk)
            .zip(next.w.par_chunks_mut(chunk))
            .enumerate()
            .for_each(|(c, (th_out, w_out))| {
                let base = c * chunk;
                for (off, (th, w)) in th_out.iter_mut().zip(w_out.iter_mut()).enumerate() {
                    let k = base + off;
                    let theta = cur.theta[k];
                    let water = cur.w[k];
                    let theta_c = from_dimensionless(theta, g);
                    let f = modulation(theta_c, water, &self.vap);
                    let rhs = g.coef_diff * self.operator.apply(&cur.theta, k)
                        - g.coef_perf * theta
                        + src_scale * self.source[k] * f;
                    *th = theta + dt * rhs;
                    *w = water * (-self.vaporization_rate(theta_c) * dt).exp();
                }
            });
        next.t = cur.t + dt;
        next.step_index = cur.step_index + 1;
        if let Some(node) = next
            .theta
            .iter()
            .zip(&next.w)
            .position(|(t, w)| !t.is_finite() || !w.is_finite())
        {
            return Err(Error::Divergence {
                step: next.step_index,
                node,
            });
        }
        Ok(())
    }

    /// Single step returning a new state.
    pub fn step(&self, state: &State<T>, dt: T) -> Result<State<T>> {
        let mut next = state.clone();
        self.step_into(state, &mut next, dt, true)?;
        Ok(next)
    }

    /// Uniform initial state from dimensional θ0 and w0.
    pub fn initial_state(&self, theta0_c: T, w0: T) -> State<T> {
        State::uniform(
            self.grid.len(),
            to_dimensionless(theta0_c, &self.groups),
            w0,
        )
    }

    /// Integrates from `initial` to `cfg.t_end`, sampling the probe at
    /// multiples of `cfg.probe_interval` (and at `t_end`).
    pub fn run_from(
        &self,
        initial: State<T>,
        probe: &ProbeWeights<T>,
        cfg: &SimConfig<T>,
    ) -> Result<SimResult<T>> {
        let stability = stability_check(&self.groups, &self.grid, cfg.dt)?;
        if !(cfg.t_end >= T::zero()) || !cfg.t_end.is_finite() {
            return Err(crate::error::invalid("numerics.t_end", "must be >= 0"));
        }
        if !(cfg.probe_interval > T::zero()) {
            return Err(crate::error::invalid(
                "numerics.probe_interval",
                "must be > 0",
            ));
        }
        let g = &self.groups;
        let t_end = g.time_to_dimensionless(cfg.t_end);
        let off = cfg.source_off_time.map(|s| g.time_to_dimensionless(s));
        let sample = |s: &State<T>| {
            (
                from_dimensionless(probe.sample(&s.theta), g),
                probe.sample(&s.w) * T::lit(100.0),
            )
        };
        let snapshot = |s: &State<T>| Snapshot {
            step: s.step_index,
            time_s: g.time_to_seconds(s.t),
            temperature_c: s.theta.iter().map(|&v| from_dimensionless(v, g)).collect(),
            water_percent: s.w.iter().map(|&v| v * T::lit(100.0)).collect(),
        };

        let mut times = Vec::new();
        let mut temps = Vec::new();
        let mut water = Vec::new();
        let mut snapshots = Vec::new();

        let mut cur = initial;
        let (th0, w0) = sample(&cur);
        times.push(T::zero());
        temps.push(th0);
        water.push(w0);
        if cfg.snapshot_every > 0 {
            snapshots.push(snapshot(&cur));
        }
        let mut next_tick = 1usize;
        let tick_time = |k: usize| T::from_usize(k).unwrap() * cfg.probe_interval;
        let mut next = cur.clone();
        let tiny = cfg.dt * T::lit(1e-9);
        while t_end - cur.t > tiny {
            let h = cfg.dt.min(t_end - cur.t);
            let source_on = off.is_none_or(|o| cur.t < o);
            self.step_into(&cur, &mut next, h, source_on)?;
            if t_end - next.t <= tiny {
                next.t = t_end;
            }
            let (a_s, b_s) = (g.time_to_seconds(cur.t), g.time_to_seconds(next.t));
            let (a_th, a_w) = sample(&cur);
            let (b_th, b_w) = sample(&next);
            while tick_time(next_tick) <= b_s * (T::one() + T::lit(1e-12))
                && tick_time(next_tick) <= cfg.t_end
            {
                let ts = tick_time(next_tick);
                let frac = ((ts - a_s) / (b_s - a_s)).max(T::zero()).min(T::one());
                times.push(ts);
                temps.push(a_th + frac * (b_th - a_th));
                water.push(a_w + frac * (b_w - a_w));
                next_tick += 1;
            }
            std::mem::swap(&mut cur, &mut next);
            if cfg.snapshot_every > 0 && cur.step_index.is_multiple_of(cfg.snapshot_every) {
                snapshots.push(snapshot(&cur));
            }
        }
        if cfg.t_end > *times.last().unwrap() {
            let (th, w) = sample(&cur);
            times.push(cfg.t_end);
            temps.push(th);
            water.push(w);
        }
        let steps = cur.step_index;
        Ok(SimResult {
            probe: ProbeSeries::new(times, temps)?,
            water_percent: water,
            snapshots,
            final_state: cur,
            steps,
            stability,
        })
    }
}

/// Writes `time_s,temperature_C,water_percent`.
pub fn write_probe_csv<T: Real, W: std::io::Write>(
    res: &SimResult<T>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "time_s,temperature_C,water_percent")?;
    for ((t, th), w) in res
        .probe
        .times()
        .iter()
        .zip(res.probe.temperatures())
        .zip(&res.water_percent)
    {
        writeln!(out, "{t},{th},{w}")?;
    }
    Ok(())
}

/// Writes `temperature_C,water_percent`.
pub fn write_trace_csv<T: Real, W: std::io::Write>(
    res: &SimResult<T>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "temperature_C,water_percent")?;
    for (th, w) in res.trace() {
        writeln!(out, "{th},{w}")?;
    }
    Ok(())
}

/// Writes `x_m,r_m,temperature_C,water_percent`.
pub fn write_snapshot_csv<T: Real, W: std::io::Write>(
    grid: &Grid<T>,
    snap: &Snapshot<T>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "x_m,r_m,temperature_C,water_percent")?;
    for k in 0..grid.len() {
        let (x, r) = grid.position_m(k);
        writeln!(
            out,
            "{x},{r},{},{}",
            snap.temperature_c[k], snap.water_percent[k]
        )?;
    }
    Ok(())
}
