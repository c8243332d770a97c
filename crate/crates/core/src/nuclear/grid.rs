use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative spacing tolerance for uniformity checks.
const UNIFORM_TOL: f64 = 1e-9;

/// Default cap on the number of grid points handled explicitly.
pub const DEFAULT_MAX_GRID_POINTS: usize = 1 << 24;

/// Grid-point cap, overridable with `QCAT_MAX_GRID`.
pub fn max_grid_points() -> usize {
    std::env::var("QCAT_MAX_GRID")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_GRID_POINTS)
}

/// One uniformly spaced grid dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvrAxis {
    pub points: usize,
    pub x_min: f64,
    pub dx: f64,
    pub mass: f64,
}

impl DvrAxis {
    pub fn new(points: usize, x_min: f64, dx: f64, mass: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::invalid(format!("axis needs at least 2 points, got {points}")));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::invalid(format!("grid spacing must be positive, got {dx}")));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        Ok(DvrAxis { points, x_min, dx, mass })
    }

    /// `points` equally spaced coordinates from `x_min` to `x_max` inclusive.
    pub fn spanning(points: usize, x_min: f64, x_max: f64, mass: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::invalid(format!("axis needs at least 2 points, got {points}")));
        }
        Self::new(points, x_min, (x_max - x_min) / (points - 1) as f64, mass)
    }

    pub fn from_coordinates(coords: &[f64], mass: f64) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid("axis needs at least 2 points"));
        }
        let dx = coords[1] - coords[0];
        for (i, w) in coords.windows(2).enumerate() {
            let step = w[1] - w[0];
            if !(step > 0.0) || (step - dx).abs() > UNIFORM_TOL * dx.abs().max(1.0) {
                return Err(Error::NonUniformGrid { index: i + 1 });
            }
        }
        Self::new(coords.len(), coords[0], dx, mass)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coordinate(i)).collect()
    }

    pub fn x_max(&self) -> f64 {
        self.coordinate(self.points - 1)
    }

    /// Index of the grid point nearest to `x`, if `x` lies within half a
    /// spacing of the grid.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let f = ((x - self.x_min) / self.dx).round();
        (f >= 0.0 && f < self.points as f64).then_some(f as usize)
    }
}

/// Product grid; flat indices are row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvrGrid {
    pub axes: Vec<DvrAxis>,
}

impl DvrGrid {
    pub fn new(axes: Vec<DvrAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("grid needs at least one axis"));
        }
        Ok(DvrGrid { axes })
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    /// Total point count, refusing grids above [`max_grid_points`].
    pub fn n_points(&self) -> Result<usize> {
        check_grid_size(&self.shape(), max_grid_points())
    }

    /// Stride of axis `a` in the flat index.
    pub fn stride(&self, a: usize) -> usize {
        self.axes[a + 1..].iter().map(|x| x.points).product()
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for a in (0..self.dims()).rev() {
            idx[a] = flat % self.axes[a].points;
            flat /= self.axes[a].points;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.points + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat).iter().zip(&self.axes).map(|(&i, a)| a.coordinate(i)).collect()
    }
}

/// Product of the axis lengths, or a cap error reporting the full count.
pub fn check_grid_size(shape: &[usize], cap: usize) -> Result<usize> {
    let mut total: Option<usize> = Some(1);
    for &l in shape {
        total = total.and_then(|t| t.checked_mul(l));
    }
    match total {
        Some(t) if t <= cap => Ok(t),
        _ => Err(Error::CapExceeded {
            what: "DVR grid".into(),
            requested: describe_grid_count(shape),
            cap: format!("{cap} grid points"),
        }),
    }
}

/// Human-readable product such as `256^15 = 1.329e36 grid points`.
pub fn describe_grid_count(shape: &[usize]) -> String {
    let log10: f64 = shape.iter().map(|&l| (l as f64).log10()).sum();
    let mantissa = 10f64.powf(log10 - log10.floor());
    let approx = format!("{mantissa:.3}e{}", log10.floor() as i64);
    let uniform = shape.windows(2).all(|w| w[0] == w[1]);
    let expr = if uniform && shape.len() > 1 {
        format!("{}^{}", shape[0], shape.len())
    } else {
        shape.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("x")
    };
    format!("{expr} = {approx} grid points")
}

/// Potential energy surfaces and diabatic couplings tabulated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvrSystem {
    pub grid: DvrGrid,
    pub surfaces: Vec<Vec<f64>>,
    /// Keyed by `(I, J)` with `I < J`; `V_JI = V_IJ`.
    pub couplings: BTreeMap<(usize, usize), Vec<f64>>,
}

impl DvrSystem {
    pub fn new(grid: DvrGrid, surfaces: Vec<Vec<f64>>) -> Result<Self> {
        let n = grid.n_points()?;
        if surfaces.is_empty() {
            return Err(Error::invalid("system needs at least one surface"));
        }
        for s in &surfaces {
            if s.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: s.len() });
            }
        }
        Ok(DvrSystem { grid, surfaces, couplings: BTreeMap::new() })
    }

    /// Tabulates `f(surface, coordinates)` on every grid point.
    pub fn from_fn(grid: DvrGrid, n_surfaces: usize, f: impl Fn(usize, &[f64]) -> f64) -> Result<Self> {
        let n = grid.n_points()?;
        let surfaces = (0..n_surfaces)
            .map(|s| (0..n).map(|g| f(s, &grid.point(g))).collect())
            .collect();
        Self::new(grid, surfaces)
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, values: Vec<f64>) -> Result<()> {
        let s = self.n_surfaces();
        if i >= s || j >= s {
            return Err(Error::IndexOutOfRange { index: i.max(j), limit: s });
        }
        if i == j {
            return Err(Error::invalid("a surface cannot couple to itself"));
        }
        let n = self.n_points();
        if values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: values.len() });
        }
        self.couplings.insert((i.min(j), i.max(j)), values);
        Ok(())
    }

    pub fn coupling(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.couplings.get(&(i.min(j), i.max(j))).map(|v| v.as_slice())
    }

    pub fn n_surfaces(&self) -> usize {
        self.surfaces.len()
    }

    pub fn n_points(&self) -> usize {
        self.surfaces[0].len()
    }

    pub fn surface(&self, index: usize) -> Result<&[f64]> {
        self.surfaces
            .get(index)
            .map(|s| s.as_slice())
            .ok_or(Error::IndexOutOfRange { index, limit: self.surfaces.len() })
    }

    /// Parses the PES grid text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .peekable();
        let (ln, first) = lines.next().ok_or_else(|| Error::parse(1, "empty PES file"))?;
        let dims: usize = header_value(first, "dims").ok_or_else(|| Error::parse(ln, "expected `dims=M`"))?;
        let mut axes = Vec::with_capacity(dims);
        for a in 0..dims {
            let (ln, line) = lines.next().ok_or_else(|| Error::parse(None, "missing axis line"))?;
            let rest = line
                .strip_prefix("axis")
                .and_then(|r| r.split_once(':'))
                .filter(|(idx, _)| idx.trim().parse() == Ok(a))
                .map(|(_, r)| r)
                .ok_or_else(|| Error::parse(ln, format!("expected `axis {a}: L x_min dx mass`")))?;
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::parse(ln, "axis line needs L x_min dx mass"));
            }
            let points = fields[0].parse().map_err(|_| Error::parse(ln, "bad point count"))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(ln, format!("bad number `{s}`")));
            axes.push(DvrAxis::new(points, num(fields[1])?, num(fields[2])?, num(fields[3])?).map_err(|e| Error::parse(ln, e.to_string()))?);
        }
        let (ln, line) = lines.next().ok_or_else(|| Error::parse(None, "missing `surfaces=S`"))?;
        let n_surfaces: usize = header_value(line, "surfaces").ok_or_else(|| Error::parse(ln, "expected `surfaces=S`"))?;
        if n_surfaces == 0 {
            return Err(Error::parse(ln, "at least one surface required"));
        }
        let mut with_couplings = false;
        if let Some(&(ln, line)) = lines.peek() {
            if line.starts_with("couplings") {
                let v: String = header_value(line, "couplings").ok_or_else(|| Error::parse(ln, "expected `couplings=yes|no`"))?;
                with_couplings = match v.as_str() {
                    "yes" => true,
                    "no" => false,
                    _ => return Err(Error::parse(ln, "expected `couplings=yes|no`")),
                };
                lines.next();
            }
        }
        let grid = DvrGrid::new(axes)?;
        let n = grid.n_points()?;
        let pairs = coupling_pairs(n_surfaces);
        let columns = n_surfaces + if with_couplings { pairs.len() } else { 0 };
        let mut surfaces = vec![Vec::with_capacity(n); n_surfaces];
        let mut couplings = vec![Vec::with_capacity(n); if with_couplings { pairs.len() } else { 0 }];
        let mut rows = 0;
        for (ln, line) in lines {
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(ln, format!("bad value `{t}`"))))
                .collect::<Result<_>>()?;
            if values.len() != columns {
                return Err(Error::parse(ln, format!("expected {columns} columns, found {}", values.len())));
            }
            if rows == n {
                return Err(Error::parse(ln, format!("more than {n} grid rows")));
            }
            for (s, v) in values[..n_surfaces].iter().enumerate() {
                surfaces[s].push(*v);
            }
            for (c, v) in values[n_surfaces..].iter().enumerate() {
                couplings[c].push(*v);
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::parse(None, format!("expected {n} grid rows, found {rows}")));
        }
        let mut sys = DvrSystem::new(grid, surfaces)?;
        for (&(i, j), values) in pairs.iter().zip(couplings) {
            sys.set_coupling(i, j, values)?;
        }
        Ok(sys)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&crate::error::read_text(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("dims={}\n", self.grid.dims());
        for (a, ax) in self.grid.axes.iter().enumerate() {
            let _ = writeln!(out, "axis {a}: {} {:e} {:e} {:e}", ax.points, ax.x_min, ax.dx, ax.mass);
        }
        let _ = writeln!(out, "surfaces={}", self.n_surfaces());
        let pairs = coupling_pairs(self.n_surfaces());
        let with_couplings = !self.couplings.is_empty();
        if with_couplings {
            out.push_str("couplings=yes\n");
        }
        for g in 0..self.n_points() {
            let mut row: Vec<String> = self.surfaces.iter().map(|s| format!("{:e}", s[g])).collect();
            if with_couplings {
                for &(i, j) in &pairs {
                    row.push(format!("{:e}", self.coupling(i, j).map_or(0.0, |c| c[g])));
                }
            }
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn coupling_pairs(s: usize) -> Vec<(usize, usize)> {
    (0..s).flat_map(|i| (i + 1..s).map(move |j| (i, j))).collect()
}

fn header_value<T: std::str::FromStr>(line: &str, key: &str) -> Option<T> {
    let (k, v) = line.split_once('=')?;
    (k.trim() == key).then(|| v.trim().parse().ok()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonuniform_coordinates_are_rejected() {
        assert!(matches!(
            DvrAxis::from_coordinates(&[0.0, 1.0, 2.5], 1.0),
            Err(Error::NonUniformGrid { index: 2 })
        ));
        assert!(DvrAxis::from_coordinates(&[0.0, -1.0], 1.0).is_err());
        let ax = DvrAxis::from_coordinates(&[-1.0, -0.5, 0.0, 0.5], 2.0).unwrap();
        assert_eq!(ax.dx, 0.5);
        assert_eq!(ax.x_max(), 0.5);
    }

    #[test]
    fn axis_validation() {
        assert!(DvrAxis::new(1, 0.0, 1.0, 1.0).is_err());
        assert!(DvrAxis::new(4, 0.0, 0.0, 1.0).is_err());
        assert!(DvrAxis::new(4, 0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn ravel_roundtrip_last_axis_fastest() {
        let ax = |n| DvrAxis::new(n, 0.0, 1.0, 1.0).unwrap();
        let g = DvrGrid::new(vec![ax(3), ax(4), ax(2)]).unwrap();
        assert_eq!(g.stride(0), 8);
        assert_eq!(g.stride(2), 1);
        assert_eq!(g.unravel(1), vec![0, 0, 1]);
        for f in 0..24 {
            assert_eq!(g.ravel(&g.unravel(f)), f);
        }
    }

    #[test]
    fn oversize_grid_reports_count() {
        let err = check_grid_size(&[256; 15], DEFAULT_MAX_GRID_POINTS).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("256^15"), "{msg}");
        assert!(msg.contains("e36"), "{msg}");
    }

    #[test]
    fn pes_text_roundtrip() {
        let ax = DvrAxis::new(3, -1.0, 1.0, 1836.0).unwrap();
        let ay = DvrAxis::new(2, 0.0, 0.5, 1.0).unwrap();
        let grid = DvrGrid::new(vec![ax, ay]).unwrap();
        let mut sys = DvrSystem::from_fn(grid, 2, |s, x| s as f64 + x[0] * x[0] + 0.1 * x[1]).unwrap();
        sys.set_coupling(1, 0, vec![0.01; 6]).unwrap();
        let parsed = DvrSystem::parse(&sys.to_text()).unwrap();
        assert_eq!(parsed, sys);
        assert_eq!(parsed.coupling(1, 0).unwrap()[3], 0.01);
    }

    #[test]
    fn pes_parse_errors_carry_lines() {
        let text = "dims=1\naxis 0: 2 0.0 1.0 1.0\nsurfaces=1\n0.0\nx\n";
        let err = DvrSystem::parse(text).unwrap_err();
        assert!(err.to_string().contains("line 5"), "{err}");
        assert!(DvrSystem::parse("dims=1\naxis 0: 2 0.0 1.0 1.0\nsurfaces=1\n0.0\n").is_err());
    }
}
