//! Axisymmetric tissue domain and its node lattice.
//!
//! The (x, r) half-plane section of the tissue cylinder is the union of two
//! rectangles around the applicator, which enters along the axis at x = 0
//! and ends at x = x_rad2:
//!
//! ```text
//!  r=R +------------------------------------+
//!      |            region A    |           |
//! r_app+=========cool====+==rad=+ region B  |
//!      |  applicator            |           |
//!  r=0 +------------------------+--- sym ---+
//!     x=0                x_rad1 x_rad2      x=L
//! ```

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<T> {
    /// Cylinder length L, m
    pub length: T,
    /// Cylinder radius R, m
    pub radius: T,
    /// Applicator radius, m
    pub r_app: T,
    /// Start of the radiating tip, m
    pub x_rad1: T,
    /// End of the radiating tip (applicator tip), m
    pub x_rad2: T,
    pub probe_x: T,
    pub probe_r: T,
}

impl<T: Real> Geometry<T> {
    /// 10 cm × 6 cm tissue cylinder with the P34F47 probe.
    ///
    /// Applicator radius and tip extent are assumed values (1.5 mm,
    /// 20–50 mm).
    pub fn default_applicator() -> Self {
        Self {
            length: T::lit(0.1),
            radius: T::lit(0.06),
            r_app: T::lit(1.5e-3),
            x_rad1: T::lit(20e-3),
            x_rad2: T::lit(50e-3),
            probe_x: T::lit(23.8e-3),
            probe_r: T::lit(11.2e-3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        if !(self.length > z) {
            return Err(invalid("geometry.L", "must be > 0"));
        }
        if !(self.radius > z) {
            return Err(invalid("geometry.R", "must be > 0"));
        }
        if !(self.x_rad1 > z && self.x_rad1 < self.x_rad2 && self.x_rad2 < self.length) {
            return Err(invalid(
                "geometry.x_rad1",
                "require 0 < x_rad1 < x_rad2 < L",
            ));
        }
        if !(self.r_app > z && self.r_app < self.radius) {
            return Err(invalid("geometry.r_app", "require 0 < r_app < R"));
        }
        if !self.contains(self.probe_x, self.probe_r) {
            return Err(invalid(
                "probe.x",
                format!(
                    "probe ({}, {}) m must lie in the tissue, outside the applicator",
                    self.probe_x, self.probe_r
                ),
            ));
        }
        Ok(())
    }

    /// Closure of the tissue domain, applicator interior excluded.
    pub fn contains(&self, x: T, r: T) -> bool {
        let eps = self.tolerance();
        let in_box = x >= -eps && x <= self.length + eps && r >= -eps && r <= self.radius + eps;
        let in_applicator = x < self.x_rad2 - eps && r < self.r_app - eps;
        in_box && !in_applicator
    }

    fn tolerance(&self) -> T {
        T::lit(1e-9) * self.length.max(self.radius)
    }

    pub fn cast<U: Real>(&self) -> Geometry<U> {
        Geometry {
            length: self.length.cast(),
            radius: self.radius.cast(),
            r_app: self.r_app.cast(),
            x_rad1: self.x_rad1.cast(),
            x_rad2: self.x_rad2.cast(),
            probe_x: self.probe_x.cast(),
            probe_r: self.probe_r.cast(),
        }
    }
}

/// Boundary classification of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Interior,
    /// Tissue–air surface
    Ambient,
    /// Cooled applicator shaft
    Coolant,
    /// Radiating tip: side wall and end face
    Radiating,
    /// Axis beyond the applicator tip
    Symmetry,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 5] = [
        BoundaryTag::Interior,
        BoundaryTag::Ambient,
        BoundaryTag::Coolant,
        BoundaryTag::Radiating,
        BoundaryTag::Symmetry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Interior => "interior",
            BoundaryTag::Ambient => "ambient",
            BoundaryTag::Coolant => "coolant",
            BoundaryTag::Radiating => "radiating",
            BoundaryTag::Symmetry => "symmetry",
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn on_segment<T: Real>(v: T, lo: T, hi: T, eps: T) -> bool {
    v >= lo - eps && v <= hi + eps
}

fn near<T: Real>(a: T, b: T, eps: T) -> bool {
    (a - b).abs() <= eps
}

/// Classifies a point of the closed domain. Boundary segments are closed;
/// points shared by several segments resolve by
/// radiating > coolant > ambient > symmetry.
pub fn classify<T: Real>(geom: &Geometry<T>, x: T, r: T) -> Result<BoundaryTag> {
    if !geom.contains(x, r) {
        return Err(Error::Domain {
            x: x.to_f64_lossy(),
            r: r.to_f64_lossy(),
        });
    }
    let eps = geom.tolerance();
    let z = T::zero();
    let radiating = (near(r, geom.r_app, eps) && on_segment(x, geom.x_rad1, geom.x_rad2, eps))
        || (near(x, geom.x_rad2, eps) && on_segment(r, z, geom.r_app, eps));
    if radiating {
        return Ok(BoundaryTag::Radiating);
    }
    if near(r, geom.r_app, eps) && on_segment(x, z, geom.x_rad1, eps) {
        return Ok(BoundaryTag::Coolant);
    }
    let ambient = near(r, geom.radius, eps)
        || near(x, geom.length, eps)
        || (near(x, z, eps) && on_segment(r, geom.r_app, geom.radius, eps));
    if ambient {
        return Ok(BoundaryTag::Ambient);
    }
    if near(r, z, eps) && on_segment(x, geom.x_rad2, geom.length, eps) {
        return Ok(BoundaryTag::Symmetry);
    }
    Ok(BoundaryTag::Interior)
}

/// Membership of a node in the two subrectangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Around the applicator shaft: r ≥ r_app, x ≤ x_rad2
    A,
    /// Beyond the tip: x ≥ x_rad2
    B,
    /// Shared column x = x_rad2, r ≥ r_app
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T> {
    pub i: usize,
    pub j: usize,
    /// Dimensionless x/L
    pub x: T,
    /// Dimensionless r/R
    pub r: T,
    pub tag: BoundaryTag,
    pub region: Region,
}

/// Distances (m) moved by applicator features when snapped to grid lines.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SnapReport<T> {
    pub r_app: T,
    pub x_rad1: T,
    pub x_rad2: T,
}

/// Applicator footprint in grid indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApplicatorIndices {
    pub i_rad1: usize,
    pub i_tip: usize,
    pub j_wall: usize,
}

/// Node lattice over the tissue section. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Grid<T> {
    nx: usize,
    nr: usize,
    dx: T,
    dr: T,
    geometry: Geometry<T>,
    applicator: Option<ApplicatorIndices>,
    snap: SnapReport<T>,
    nodes: Vec<Node<T>>,
    lookup: Vec<Option<usize>>,
    row_starts: Vec<usize>,
}

fn cells_for<T: Real>(h: T, what: &str) -> Result<usize> {
    if !(h > T::zero() && h <= T::one()) {
        return Err(Error::Resolution(format!(
            "{what} = {h} must lie in (0, 1]"
        )));
    }
    let n = (T::one() / h).round();
    if ((n * h) - T::one()).abs() > T::lit(1e-6) {
        return Err(Error::Resolution(format!("{what} = {h} does not divide 1")));
    }
    n.to_usize()
        .ok_or_else(|| Error::Resolution(format!("{what} = {h} gives no cell count")))
}

/// Builds the lattice with equal dimensionless spacing in x and r.
pub fn build_grid<T: Real>(geom: &Geometry<T>, dx: T) -> Result<Grid<T>> {
    Grid::new(geom, dx, dx)
}

impl<T: Real> Grid<T> {
    pub fn new(geom: &Geometry<T>, dx: T, dr: T) -> Result<Self> {
        geom.validate()?;
        let nx = cells_for(dx, "dx")?;
        let nr = cells_for(dr, "dr")?;
        let hx = dx * geom.length;
        let hr = dr * geom.radius;
        let snap_index = |v: T, h: T| (v / h).round().to_usize().unwrap_or(0);
        let i_rad1 = snap_index(geom.x_rad1, hx);
        let i_tip = snap_index(geom.x_rad2, hx);
        let j_wall = snap_index(geom.r_app, hr);
        if j_wall < 1 {
            return Err(Error::Resolution(format!(
                "applicator radius {} m spans fewer than 2 radial nodes at dr = {} m",
                geom.r_app, hr
            )));
        }
        if j_wall >= nr {
            return Err(Error::Resolution(
                "applicator radius reaches the outer face".into(),
            ));
        }
        if i_rad1 < 1 || i_rad1 >= i_tip {
            return Err(Error::Resolution(format!(
                "radiating tip [{}, {}] m is not resolved at dx = {} m",
                geom.x_rad1, geom.x_rad2, hx
            )));
        }
        if i_tip >= nx {
            return Err(Error::Resolution(
                "applicator tip reaches the far end face".into(),
            ));
        }
        let mut snapped = *geom;
        snapped.r_app = T::from_usize(j_wall).unwrap() * hr;
        snapped.x_rad1 = T::from_usize(i_rad1).unwrap() * hx;
        snapped.x_rad2 = T::from_usize(i_tip).unwrap() * hx;
        let snap = SnapReport {
            r_app: (snapped.r_app - geom.r_app).abs(),
            x_rad1: (snapped.x_rad1 - geom.x_rad1).abs(),
            x_rad2: (snapped.x_rad2 - geom.x_rad2).abs(),
        };
        if !snapped.contains(snapped.probe_x, snapped.probe_r) {
            return Err(invalid(
                "probe.x",
                "probe falls inside the snapped applicator",
            ));
        }
        let app = ApplicatorIndices {
            i_rad1,
            i_tip,
            j_wall,
        };
        let tag_of = |i: usize, j: usize| -> Option<(BoundaryTag, Region)> {
            if i < i_tip && j < j_wall {
                return None;
            }
            let tag = if (j == j_wall && i >= i_rad1 && i <= i_tip) || (i == i_tip && j <= j_wall) {
                BoundaryTag::Radiating
            } else if j == j_wall && i <= i_rad1 {
                BoundaryTag::Coolant
            } else if j == nr || i == nx || (i == 0 && j >= j_wall) {
                BoundaryTag::Ambient
            } else if j == 0 && i >= i_tip {
                BoundaryTag::Symmetry
            } else {
                BoundaryTag::Interior
            };
            let region = if i == i_tip && j >= j_wall {
                Region::Interface
            } else if i < i_tip {
                Region::A
            } else {
                Region::B
            };
            Some((tag, region))
        };
        Ok(Self::assemble(
            nx,
            nr,
            dx,
            dr,
            snapped,
            Some(app),
            snap,
            tag_of,
        ))
    }

    /// Full cylinder without an applicator: outer faces ambient, the whole
    /// axis symmetric. Used for verification problems.
    pub fn plain_cylinder(length: T, radius: T, dx: T, dr: T) -> Result<Self> {
        let nx = cells_for(dx, "dx")?;
        let nr = cells_for(dr, "dr")?;
        if !(length > T::zero() && radius > T::zero()) {
            return Err(invalid("geometry.L", "cylinder extents must be > 0"));
        }
        let geometry = Geometry {
            length,
            radius,
            r_app: T::zero(),
            x_rad1: T::zero(),
            x_rad2: T::zero(),
            probe_x: length / T::lit(2.0),
            probe_r: radius / T::lit(2.0),
        };
        let tag_of = |i: usize, j: usize| {
            let tag = if j == nr || i == nx || i == 0 {
                BoundaryTag::Ambient
            } else if j == 0 {
                BoundaryTag::Symmetry
            } else {
                BoundaryTag::Interior
            };
            Some((tag, Region::B))
        };
        Ok(Self::assemble(
            nx,
            nr,
            dx,
            dr,
            geometry,
            None,
            SnapReport::default(),
            tag_of,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        nx: usize,
        nr: usize,
        dx: T,
        dr: T,
        geometry: Geometry<T>,
        applicator: Option<ApplicatorIndices>,
        snap: SnapReport<T>,
        tag_of: impl Fn(usize, usize) -> Option<(BoundaryTag, Region)>,
    ) -> Self {
        let mut nodes = Vec::with_capacity((nx + 1) * (nr + 1));
        let mut lookup = vec![None; (nx + 1) * (nr + 1)];
        let mut row_starts = Vec::with_capacity(nx + 2);
        for i in 0..=nx {
            row_starts.push(nodes.len());
            for j in 0..=nr {
                if let Some((tag, region)) = tag_of(i, j) {
                    lookup[i * (nr + 1) + j] = Some(nodes.len());
                    nodes.push(Node {
                        i,
                        j,
                        x: T::from_usize(i).unwrap() * dx,
                        r: T::from_usize(j).unwrap() * dr,
                        tag,
                        region,
                    });
                }
            }
        }
        row_starts.push(nodes.len());
        Self {
            nx,
            nr,
            dx,
            dr,
            geometry,
            applicator,
            snap,
            nodes,
            lookup,
            row_starts,
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn dr(&self) -> T {
        self.dr
    }

    /// Geometry with the applicator features moved onto grid lines.
    pub fn geometry(&self) -> &Geometry<T> {
        &self.geometry
    }

    pub fn applicator(&self) -> Option<ApplicatorIndices> {
        self.applicator
    }

    pub fn snap_report(&self) -> &SnapReport<T> {
        &self.snap
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &Node<T> {
        &self.nodes[idx]
    }

    /// Global index of lattice point (i, j), `None` inside the applicator
    /// or off the lattice.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        if i > self.nx || j > self.nr {
            return None;
        }
        self.lookup[i * (self.nr + 1) + j]
    }

    /// Half-open ranges of global indices, one per x-column.
    pub fn rows(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.row_starts.windows(2).map(|w| w[0]..w[1])
    }

    /// Global indices of one subrectangle, shared interface included.
    pub fn region_indices(&self, region: Region) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.region == region || n.region == Region::Interface)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn count_tag(&self, tag: BoundaryTag) -> usize {
        self.nodes.iter().filter(|n| n.tag == tag).count()
    }

    /// Node coordinates in metres.
    pub fn position_m(&self, idx: usize) -> (T, T) {
        let n = &self.nodes[idx];
        (n.x * self.geometry.length, n.r * self.geometry.radius)
    }

    /// Grid spacings in metres.
    pub fn spacing_m(&self) -> (T, T) {
        (
            self.dx * self.geometry.length,
            self.dr * self.geometry.radius,
        )
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x_m,r_m,tag")?;
        for k in 0..self.len() {
            let (x, r) = self.position_m(k);
            writeln!(out, "{},{},{}", x, r, self.nodes[k].tag)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid<f64> {
        build_grid(&Geometry::default_applicator(), 1.0 / 50.0).unwrap()
    }

    #[test]
    fn far_column_has_full_radius() {
        let g = grid();
        let count = g.nodes().iter().filter(|n| n.i == g.nx()).count();
        assert_eq!(count, 51);
    }

    #[test]
    fn applicator_tags() {
        let g = grid();
        let geom = *g.geometry();
        let app = g.applicator().unwrap();
        let k = g.index(app.i_tip - 1, app.j_wall).unwrap();
        assert_eq!(g.node(k).tag, BoundaryTag::Radiating);
        assert_eq!(
            classify(&geom, geom.x_rad2 - geom.length / 50.0, geom.r_app).unwrap(),
            BoundaryTag::Radiating
        );
        assert_eq!(
            classify(&geom, geom.x_rad1 / 2.0, geom.r_app).unwrap(),
            BoundaryTag::Coolant
        );
        let k = g.index(app.i_rad1 / 2, app.j_wall).unwrap();
        assert_eq!(g.node(k).tag, BoundaryTag::Coolant);
    }

    #[test]
    fn classify_faces() {
        let geom = Geometry::<f64>::default_applicator();
        assert_eq!(
            classify(&geom, geom.length / 2.0, geom.radius).unwrap(),
            BoundaryTag::Ambient
        );
        assert_eq!(
            classify(&geom, geom.length - geom.length / 50.0, 0.0).unwrap(),
            BoundaryTag::Symmetry
        );
        assert_eq!(classify(&geom, 0.07, 0.03).unwrap(), BoundaryTag::Interior);
        assert!(matches!(
            classify(&geom, 0.01, 0.0005),
            Err(Error::Domain { .. })
        ));
        assert!(classify(&geom, 0.2, 0.01).is_err());
    }

    #[test]
    fn reentrant_corner_priority() {
        let geom = Geometry::<f64>::default_applicator();
        let (x, r) = (geom.x_rad2, geom.r_app);
        // brute-force segment membership
        let eps = 1e-12;
        let on_side = (r - geom.r_app).abs() < eps && x >= geom.x_rad1 && x <= geom.x_rad2;
        let on_face = (x - geom.x_rad2).abs() < eps && r >= 0.0 && r <= geom.r_app;
        assert!(on_side && on_face);
        assert_eq!(classify(&geom, x, r).unwrap(), BoundaryTag::Radiating);
    }

    #[test]
    fn symmetry_only_beyond_tip() {
        let g = grid();
        let app = g.applicator().unwrap();
        for n in g.nodes() {
            if n.tag == BoundaryTag::Symmetry {
                assert_eq!(n.j, 0);
                assert!(n.i > app.i_tip);
            }
        }
        assert!(g.index(0, 0).is_none());
    }

    #[test]
    fn counts_and_regions() {
        let g = grid();
        let total: usize = BoundaryTag::ALL.iter().map(|&t| g.count_tag(t)).sum();
        assert_eq!(total, g.len());
        let app = g.applicator().unwrap();
        assert_eq!(g.len(), 51 * 51 - app.i_tip * app.j_wall);
        let a = g.region_indices(Region::A);
        let b = g.region_indices(Region::B);
        let shared = a.iter().filter(|k| b.contains(k)).count();
        assert_eq!(shared, 51 - app.j_wall);
        assert_eq!(a.len() + b.len() - shared, g.len());
        let mut seen = std::collections::HashSet::new();
        for n in g.nodes() {
            assert!(seen.insert((n.i, n.j)));
        }
    }

    #[test]
    fn classify_reproduces_grid_tags() {
        let g = grid();
        let geom = *g.geometry();
        for k in 0..g.len() {
            let (x, r) = g.position_m(k);
            assert_eq!(classify(&geom, x, r).unwrap(), g.node(k).tag, "node {k}");
        }
    }

    #[test]
    fn snapping_is_reported() {
        let g = grid();
        let s = g.snap_report();
        assert!((s.r_app - 0.3e-3).abs() < 1e-12);
        assert!(s.x_rad1 < 1e-12 && s.x_rad2 < 1e-12);
    }

    #[test]
    fn resolution_errors() {
        let geom = Geometry::<f64>::default_applicator();
        assert!(matches!(
            build_grid(&geom, 1.0 / 10.0),
            Err(Error::Resolution(_))
        ));
        assert!(matches!(build_grid(&geom, 0.3), Err(Error::Resolution(_))));
    }

    #[test]
    fn plain_cylinder_tags() {
        let g = Grid::<f64>::plain_cylinder(1.0, 1.0, 0.1, 0.1).unwrap();
        assert_eq!(g.len(), 121);
        assert_eq!(g.count_tag(BoundaryTag::Symmetry), 9);
        assert_eq!(g.count_tag(BoundaryTag::Interior), 81);
    }
}
