//! Probe time series: CSV exchange, probe sampling on the grid and
//! simulated-versus-measured comparison metrics.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::scalar::Real;

/// Time-stamped temperatures at one location.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries<T> {
    times: Vec<T>,
    temperatures: Vec<T>,
    pub label: Option<String>,
}

impl<T: Real> ProbeSeries<T> {
    /// Requires equal lengths and strictly increasing times.
    pub fn new(times: Vec<T>, temperatures: Vec<T>) -> Result<Self> {
        if times.len() != temperatures.len() {
            return Err(Error::Csv {
                line: 0,
                reason: format!(
                    "{} times but {} temperatures",
                    times.len(),
                    temperatures.len()
                ),
            });
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Csv {
                line: k + 2,
                reason: "timestamps must be strictly increasing".into(),
            });
        }
        Ok(Self {
            times,
            temperatures,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn temperatures(&self) -> &[T] {
        &self.temperatures
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> Option<T> {
        self.times.first().copied()
    }

    pub fn end(&self) -> Option<T> {
        self.times.last().copied()
    }

    /// Linear interpolation; `None` outside the covered time range.
    pub fn interpolate(&self, t: T) -> Option<T> {
        let (first, last) = (self.start()?, self.end()?);
        if t < first || t > last {
            return None;
        }
        let hi = self.times.partition_point(|&s| s < t);
        if hi < self.len() && self.times[hi] == t {
            return Some(self.temperatures[hi]);
        }
        let lo = hi - 1;
        let frac = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        Some(self.temperatures[lo] + frac * (self.temperatures[hi] - self.temperatures[lo]))
    }

    /// Restriction to `[from, to]`, both inclusive.
    pub fn window(&self, from: T, to: T) -> (Vec<T>, Vec<T>) {
        self.times
            .iter()
            .zip(&self.temperatures)
            .filter(|(t, _)| **t >= from && **t <= to)
            .map(|(t, v)| (*t, *v))
            .unzip()
    }
}

fn parse_field(s: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Csv {
        line,
        reason: format!("cannot parse {what} `{}`", s.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Csv {
            line,
            reason: format!("{what} is not finite"),
        });
    }
    Ok(v)
}

/// Parses `time_s,temperature_C` CSV text. Rows are sorted by time;
/// duplicate timestamps are rejected.
pub fn parse_probe_csv(text: &str) -> Result<ProbeSeries<f64>> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((n, l)) => break (n + 1, l),
            None => return Err(Error::EmptySeries),
        }
    };
    let cols: Vec<_> = header
        .1
        .split(',')
        .map(|c| c.trim().trim_start_matches('\u{feff}'))
        .collect();
    if cols.len() < 2 || cols[0] != "time_s" || cols[1] != "temperature_C" {
        return Err(Error::Csv {
            line: header.0,
            reason: format!(
                "expected header `time_s,temperature_C`, got `{}`",
                header.1.trim()
            ),
        });
    }
    let mut rows = Vec::new();
    for (n, raw) in lines {
        let line = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parts: Vec<_> = raw.split(',').collect();
        if parts.len() < 2 {
            return Err(Error::Csv {
                line,
                reason: "expected two columns".into(),
            });
        }
        let t = parse_field(parts[0], line, "time")?;
        let v = parse_field(parts[1], line, "temperature")?;
        if !(v > -50.0 && v < 150.0) {
            return Err(Error::Csv {
                line,
                reason: format!("temperature {v} °C outside (-50, 150)"),
            });
        }
        rows.push((t, v, line));
    }
    if rows.is_empty() {
        return Err(Error::EmptySeries);
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Csv {
            line: w[1].2.max(w[0].2),
            reason: format!("duplicate timestamp {}", w[1].0),
        });
    }
    let (times, temps) = rows.into_iter().map(|(t, v, _)| (t, v)).unzip();
    ProbeSeries::new(times, temps)
}

pub fn load_probe_csv(path: impl AsRef<Path>) -> Result<ProbeSeries<f64>> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_probe_csv(&text).map(|s| s.with_label(path.display().to_string()))
}

/// Writes `time_s,temperature_C` with shortest round-trip formatting.
pub fn write_probe_series<T: Real, W: std::io::Write>(
    series: &ProbeSeries<T>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "time_s,temperature_C")?;
    for (t, v) in series.times().iter().zip(series.temperatures()) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

/// Bilinear interpolation weights of a point over its enclosing cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeWeights<T> {
    pub nodes: [usize; 4],
    pub weights: [T; 4],
}

impl<T: Real> ProbeWeights<T> {
    pub fn sample(&self, field: &[T]) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&k, &w)| {
                if w == T::zero() {
                    T::zero()
                } else {
                    w * field[k]
                }
            })
            .sum()
    }
}

/// Locates a point given in metres on the grid.
pub fn locate_probe<T: Real>(grid: &Grid<T>, x: T, r: T) -> Result<ProbeWeights<T>> {
    let (hx, hr) = grid.spacing_m();
    let geom = grid.geometry();
    let outside = || Error::Domain {
        x: x.to_f64_lossy(),
        r: r.to_f64_lossy(),
    };
    if !geom.contains(x, r) || !x.is_finite() || !r.is_finite() {
        return Err(outside());
    }
    let cell = |v: T, h: T, n: usize| -> (usize, T) {
        let mut s = (v / h).max(T::zero());
        if (s - s.round()).abs() < T::lit(1e-9) {
            s = s.round();
        }
        let i = s.floor().to_usize().unwrap_or(0).min(n - 1);
        let frac = (s - T::from_usize(i).unwrap()).max(T::zero()).min(T::one());
        (i, frac)
    };
    let (i, tx) = cell(x, hx, grid.nx());
    let (j, tr) = cell(r, hr, grid.nr());
    let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
    let weights = [
        (T::one() - tx) * (T::one() - tr),
        tx * (T::one() - tr),
        (T::one() - tx) * tr,
        tx * tr,
    ];
    let mut nodes = [0usize; 4];
    for (slot, ((ci, cj), w)) in corners.iter().zip(&weights).enumerate() {
        match grid.index(*ci, *cj) {
            Some(k) => nodes[slot] = k,
            None if *w == T::zero() => nodes[slot] = usize::MAX,
            None => return Err(outside()),
        }
    }
    // unused corners point at a valid node so sampling never indexes out of range
    let fallback = *nodes
        .iter()
        .find(|&&k| k != usize::MAX)
        .ok_or_else(outside)?;
    for k in nodes.iter_mut() {
        if *k == usize::MAX {
            *k = fallback;
        }
    }
    Ok(ProbeWeights { nodes, weights })
}

/// Bilinear value of a nodal field at (x, r) in metres.
pub fn sample_probe<T: Real>(field: &[T], grid: &Grid<T>, x: T, r: T) -> Result<T> {
    Ok(locate_probe(grid, x, r)?.sample(field))
}

/// Simulated-minus-measured differences on the common time range.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMetrics<T> {
    pub times: Vec<T>,
    /// Per-time difference, °C
    pub diffs: Vec<T>,
    pub max_abs: T,
    pub rmse: T,
    pub fraction_within_1c: T,
}

/// Interpolates `sim` onto the measurement timestamps inside the overlap
/// of both series; neither series is extrapolated.
pub fn compare_series<T: Real>(
    sim: &ProbeSeries<T>,
    meas: &ProbeSeries<T>,
) -> Result<DiffMetrics<T>> {
    let (Some(s0), Some(s1), Some(m0), Some(m1)) =
        (sim.start(), sim.end(), meas.start(), meas.end())
    else {
        return Err(Error::Comparison("empty series".into()));
    };
    let (from, to) = (s0.max(m0), s1.min(m1));
    if from > to {
        return Err(Error::Comparison(format!(
            "no time overlap: sim [{s0}, {s1}] s, measured [{m0}, {m1}] s"
        )));
    }
    let (times, measured) = meas.window(from, to);
    if times.is_empty() {
        return Err(Error::Comparison(
            "no measurement inside the overlap".into(),
        ));
    }
    let diffs: Vec<T> = times
        .iter()
        .zip(&measured)
        .map(|(&t, &m)| sim.interpolate(t).expect("inside overlap") - m)
        .collect();
    let n = T::from_usize(diffs.len()).unwrap();
    let max_abs = diffs.iter().map(|d| d.abs()).fold(T::zero(), T::max);
    let rmse = (diffs.iter().map(|d| *d * *d).sum::<T>() / n)
        .sqrt()
        .min(max_abs);
    let within = diffs.iter().filter(|d| d.abs() <= T::one()).count();
    Ok(DiffMetrics {
        times,
        diffs,
        max_abs,
        rmse,
        fraction_within_1c: T::from_usize(within).unwrap() / n,
    })
}

impl<T: Real> DiffMetrics<T> {
    pub fn summary_line(&self) -> String {
        format!("{},{},{}", self.max_abs, self.rmse, self.fraction_within_1c)
    }

    /// `time_s,diff_C` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time_s,diff_C")?;
        for (t, d) in self.times.iter().zip(&self.diffs) {
            writeln!(out, "{t},{d}")?;
        }
        Ok(())
    }

    /// Header plus the one summary line.
    pub fn write_summary<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "max_abs_C,rmse_C,fraction_within_1C")?;
        writeln!(out, "{}", self.summary_line())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Geometry};

    fn series(times: &[f64], temps: &[f64]) -> ProbeSeries<f64> {
        ProbeSeries::new(times.to_vec(), temps.to_vec()).unwrap()
    }

    #[test]
    fn parses_two_rows() {
        let s = parse_probe_csv("time_s,temperature_C\n0,20\n1.5,21.25\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.temperatures(), &[20.0, 21.25]);
    }

    #[test]
    fn header_only_is_empty() {
        assert_eq!(
            parse_probe_csv("time_s,temperature_C\n"),
            Err(Error::EmptySeries)
        );
        assert_eq!(parse_probe_csv(""), Err(Error::EmptySeries));
    }

    #[test]
    fn duplicate_timestamp_names_line() {
        let err = parse_probe_csv("time_s,temperature_C\n0,20\n1,21\n1,22\n").unwrap_err();
        match err {
            Error::Csv { line, reason } => {
                assert_eq!(line, 4);
                assert!(reason.contains("duplicate"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn malformed_and_out_of_range_rows() {
        let err = parse_probe_csv("time_s,temperature_C\n0,20\nx,21\n").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }));
        let err = parse_probe_csv("time_s,temperature_C\n0,20\n1\n").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }));
        let err = parse_probe_csv("time_s,temperature_C\n0,200\n").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 2, .. }));
        let err = parse_probe_csv("t,T\n0,20\n").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 1, .. }));
    }

    #[test]
    fn rows_are_sorted() {
        let s = parse_probe_csv("time_s,temperature_C\n2,22\n0,20\n1,21\n").unwrap();
        assert_eq!(s.times(), &[0.0, 1.0, 2.0]);
        assert_eq!(s.temperatures(), &[20.0, 21.0, 22.0]);
    }

    fn grid() -> Grid<f64> {
        build_grid(&Geometry::default_applicator(), 1.0 / 50.0).unwrap()
    }

    #[test]
    fn probe_on_constant_and_bilinear_fields() {
        let g = grid();
        let c = vec![3.25; g.len()];
        assert_eq!(sample_probe(&c, &g, 0.0238, 0.0112).unwrap(), 3.25);
        let lin: Vec<f64> = (0..g.len())
            .map(|k| {
                let (x, r) = g.position_m(k);
                1.0 + 20.0 * x - 7.0 * r + 300.0 * x * r
            })
            .collect();
        for (x, r) in [
            (0.0238, 0.0112),
            (0.09, 0.059),
            (0.051, 0.0003),
            (0.1, 0.06),
        ] {
            let v = sample_probe(&lin, &g, x, r).unwrap();
            let exact = 1.0 + 20.0 * x - 7.0 * r + 300.0 * x * r;
            assert!((v - exact).abs() < 1e-12, "({x}, {r}): {v} vs {exact}");
        }
    }

    #[test]
    fn probe_at_node_is_exact() {
        let g = grid();
        let field: Vec<f64> = (0..g.len()).map(|k| (k as f64).sin()).collect();
        for k in [0, 100, 777, g.len() - 1] {
            let (x, r) = g.position_m(k);
            assert_eq!(sample_probe(&field, &g, x, r).unwrap(), field[k]);
        }
    }

    #[test]
    fn probe_outside_domain() {
        let g = grid();
        let f = vec![0.0; g.len()];
        assert!(matches!(
            sample_probe(&f, &g, 0.2, 0.01),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            sample_probe(&f, &g, 0.01, 0.0005),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn compare_identical_and_offset() {
        let m = series(&[0.0, 1.0, 2.0, 3.0], &[20.0, 21.0, 23.0, 26.0]);
        let d = compare_series(&m, &m).unwrap();
        assert_eq!((d.max_abs, d.rmse, d.fraction_within_1c), (0.0, 0.0, 1.0));

        let shifted = |off: f64| {
            series(
                &[0.0, 1.0, 2.0, 3.0],
                &[20.0 + off, 21.0 + off, 23.0 + off, 26.0 + off],
            )
        };
        let d = compare_series(&shifted(0.5), &m).unwrap();
        assert!((d.max_abs - 0.5).abs() < 1e-12 && (d.rmse - 0.5).abs() < 1e-12);
        assert_eq!(d.fraction_within_1c, 1.0);
        let d = compare_series(&shifted(2.0), &m).unwrap();
        assert_eq!(d.fraction_within_1c, 0.0);
    }

    #[test]
    fn compare_restricts_to_overlap() {
        let sim = series(&[0.0, 10.0], &[20.0, 30.0]);
        let meas = series(&[5.0, 7.5, 10.0, 12.0], &[25.0, 27.0, 30.0, 31.0]);
        let d = compare_series(&sim, &meas).unwrap();
        assert_eq!(d.times, vec![5.0, 7.5, 10.0]);
        assert!((d.diffs[1] - 0.5).abs() < 1e-12);
        let far = series(&[20.0, 30.0], &[20.0, 30.0]);
        assert!(matches!(
            compare_series(&sim, &far),
            Err(Error::Comparison(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_series() -> impl Strategy<Value = ProbeSeries<f64>> {
            prop::collection::vec((0.01f64..5.0, -40.0f64..140.0), 2..40).prop_map(|rows| {
                let mut t = 0.0;
                let (times, temps) = rows
                    .into_iter()
                    .map(|(dt, v)| {
                        t += dt;
                        (t, v)
                    })
                    .unzip();
                ProbeSeries::new(times, temps).unwrap()
            })
        }

        proptest! {
            #[test]
            fn csv_round_trip(s in arb_series()) {
                let mut buf = Vec::new();
                write_probe_series(&s, &mut buf).unwrap();
                let back = parse_probe_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
                prop_assert_eq!(back.times(), s.times());
                prop_assert_eq!(back.temperatures(), s.temperatures());
            }

            #[test]
            fn swap_negates_differences(times in prop::collection::vec(0.0f64..100.0, 2..20), a in prop::collection::vec(0.0f64..100.0, 20), b in prop::collection::vec(0.0f64..100.0, 20)) {
                let mut t = times.clone();
                t.sort_by(f64::total_cmp);
                t.dedup();
                prop_assume!(t.len() >= 2);
                let n = t.len();
                let s1 = ProbeSeries::new(t.clone(), a[..n].to_vec()).unwrap();
                let s2 = ProbeSeries::new(t, b[..n].to_vec()).unwrap();
                let d12 = compare_series(&s1, &s2).unwrap();
                let d21 = compare_series(&s2, &s1).unwrap();
                for (x, y) in d12.diffs.iter().zip(&d21.diffs) {
                    prop_assert!((x + y).abs() < 1e-9);
                }
                prop_assert!((d12.max_abs - d21.max_abs).abs() < 1e-9);
                prop_assert!((d12.rmse - d21.rmse).abs() < 1e-9);
                prop_assert!(d12.max_abs >= d12.rmse && d12.rmse >= 0.0);
                prop_assert!((0.0..=1.0).contains(&d12.fraction_within_1c));
            }
        }
    }
}
