//! Grid-sampled nonnegative functions and their rearrangements.
//!
//! A [`GridFunction`] samples `f` at the centers of a uniform lattice over
//! the cube `[-H, H]^d`. Polarization pairs each cell center with its
//! reflected lookup cell and takes the pointwise max on the origin side and
//! min on the far side, which keeps thresholding and monotonicity exact on
//! the grid. The Schwarz symmetrization reassigns the sorted multiset of cell
//! values to cells ordered by distance from the origin, so it preserves mass
//! exactly and is idempotent bit for bit.

use crate::geom::Reflection;
use crate::{parameter_error, unit_ball_volume, unit_sphere_area, Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Geometry of a uniform lattice over `[-H, H]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub dim: usize,
    pub half_width: f64,
    pub cells_per_axis: usize,
}

impl GridGeometry {
    pub fn new(dim: usize, half_width: f64, cells_per_axis: usize) -> Result<Self> {
        if dim == 0 || dim > 8 {
            return Err(Error::Dimension(dim));
        }
        if !(half_width > 0.0) {
            return Err(parameter_error("half_width", "must be positive"));
        }
        if cells_per_axis == 0 {
            return Err(parameter_error("cells_per_axis", "must be positive"));
        }
        if (cells_per_axis as f64).powi(dim as i32) > 1e8 {
            return Err(parameter_error("cells_per_axis", "grid too large"));
        }
        Ok(Self { dim, half_width, cells_per_axis })
    }

    pub fn cell_size(&self) -> f64 {
        2.0 * self.half_width / self.cells_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_size().powi(self.dim as i32)
    }

    pub fn total_cells(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    /// Center coordinates of the cell with the given flat (row-major) index.
    pub fn center(&self, flat: usize, out: &mut [f64]) {
        let m = self.cells_per_axis;
        let h = self.cell_size();
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            let i = rest % m;
            rest /= m;
            out[axis] = -self.half_width + (i as f64 + 0.5) * h;
        }
    }

    /// Flat index of the cell containing `x`, or `None` outside the cube.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let m = self.cells_per_axis;
        let h = self.cell_size();
        let mut flat = 0usize;
        for &xi in x {
            if !(-self.half_width..self.half_width).contains(&xi) {
                // right edge belongs to the last cell
                if xi == self.half_width {
                    flat = flat * m + (m - 1);
                    continue;
                }
                return None;
            }
            let i = (((xi + self.half_width) / h) as usize).min(m - 1);
            flat = flat * m + i;
        }
        Some(flat)
    }
}

/// A nonnegative function sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    geom: GridGeometry,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(geom: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geom.total_cells() {
            return Err(parameter_error(
                "values",
                format!("expected {} cells, got {}", geom.total_cells(), values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(parameter_error("values", "must be finite and nonnegative"));
        }
        Ok(Self { geom, values })
    }

    pub fn zero(geom: GridGeometry) -> Self {
        Self { geom, values: vec![0.0; geom.total_cells()] }
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geom
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Verify the support lies inside the centered ball of radius `l`
    /// (cell-center semantics) and `l <= H`.
    pub fn check_support_radius(&self, l: f64) -> Result<()> {
        if l > self.geom.half_width {
            return Err(parameter_error(
                "support_radius",
                format!("L = {l} exceeds grid half-width {}", self.geom.half_width),
            ));
        }
        let mut center = vec![0.0; self.geom.dim];
        for (i, v) in self.values.iter().enumerate() {
            if *v > 0.0 {
                self.geom.center(i, &mut center);
                let r = crate::geom::norm(&center);
                if r > l {
                    return Err(parameter_error(
                        "support_radius",
                        format!("cell at distance {r} holds value {v} outside B_{l}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Total mass `sum(values) * h^d`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.geom.cell_volume()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Polarize raw cell values on `geom` with respect to `r`, writing into
/// `out`.
pub(crate) fn polarize_values(
    geom: &GridGeometry,
    values: &[f64],
    r: &Reflection,
    out: &mut Vec<f64>,
) {
    let d = geom.dim;
    debug_assert_eq!(r.dim(), d);
    debug_assert_eq!(values.len(), geom.total_cells());
    out.clear();
    out.reserve(values.len());
    let m = geom.cells_per_axis;
    let h = geom.cell_size();
    let pole = r.pole();
    let half = crate::geom::dot(pole, pole) / 2.0;
    let mut idx = vec![0usize; d];
    let mut center = vec![0.0f64; d];
    let mut mirrored = vec![0.0f64; d];
    for c in center.iter_mut() {
        *c = -geom.half_width + 0.5 * h;
    }
    for (flat, &v) in values.iter().enumerate() {
        if flat > 0 {
            // advance the multi-index odometer (row-major: last axis fastest)
            let mut axis = d;
            loop {
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < m {
                    center[axis] += h;
                    break;
                }
                idx[axis] = 0;
                center[axis] = -geom.half_width + 0.5 * h;
            }
        }
        let s = crate::geom::dot(&center, pole) - half;
        let out_v = if s.abs() <= crate::geom::BOUNDARY_TOL {
            v
        } else {
            mirrored.copy_from_slice(&center);
            let coef = 2.0 * s / (2.0 * half);
            for (mi, pi) in mirrored.iter_mut().zip(pole) {
                *mi -= coef * pi;
            }
            let looked = geom.cell_of(&mirrored).map_or(0.0, |j| values[j]);
            if s < 0.0 {
                v.max(looked)
            } else {
                v.min(looked)
            }
        };
        out.push(out_v);
    }
}

/// The polarization `f^sigma`: pointwise max of `f` and the reflected lookup
/// on the origin side, pointwise min on the far side, unchanged on the
/// hyperplane. Lookups outside the grid read as zero.
pub fn polarize(f: &GridFunction, r: &Reflection) -> GridFunction {
    let mut out = Vec::new();
    polarize_values(&f.geom, &f.values, r, &mut out);
    GridFunction { geom: f.geom, values: out }
}

/// Cell ordering used by the Schwarz symmetrization: by distance of the cell
/// center from the origin, ties broken lexicographically by coordinates.
pub fn schwarz_order(geom: &GridGeometry) -> Vec<u32> {
    let n = geom.total_cells();
    let mut center = vec![0.0; geom.dim];
    let mut keyed: Vec<(f64, u32)> = (0..n)
        .map(|flat| {
            geom.center(flat, &mut center);
            let r2 = center.iter().map(|c| c * c).sum::<f64>();
            (r2, flat as u32)
        })
        .collect();
    // Lexicographic coordinate order on ties coincides with row-major flat
    // order, so a stable sort on the radius alone realizes the tie rule.
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    keyed.into_iter().map(|(_, flat)| flat).collect()
}

/// The discrete symmetric decreasing rearrangement: the sorted multiset of
/// values reassigned to cells in [`schwarz_order`]. Mass is preserved
/// exactly and the operation is idempotent.
pub fn schwarz(f: &GridFunction) -> GridFunction {
    let order = schwarz_order(&f.geom);
    schwarz_with_order(f, &order)
}

pub(crate) fn schwarz_with_order(f: &GridFunction, order: &[u32]) -> GridFunction {
    let mut sorted = f.values.clone();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut out = vec![0.0; f.values.len()];
    for (rank, &flat) in order.iter().enumerate() {
        out[flat as usize] = sorted[rank];
    }
    GridFunction { geom: f.geom, values: out }
}

/// `sum |f - g| h^d` over cells. The grids must agree exactly.
pub fn l1_distance(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if f.geom != g.geom {
        return Err(Error::GridMismatch);
    }
    Ok(l1_distance_unchecked(&f.values, &g.values) * f.geom.cell_volume())
}

pub(crate) fn l1_distance_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// One row of a [`LevelProfile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelEntry {
    pub threshold: f64,
    /// Measure of the super-level set `{f > t}` (cell count times `h^d`).
    pub measure: f64,
    /// Radius of the centered ball with that measure.
    pub radius: f64,
}

/// Super-level measures and level-set radii over a threshold grid.
#[derive(Debug, Clone)]
pub struct LevelProfile {
    pub entries: Vec<LevelEntry>,
    pub ball_volume: f64,
    pub sphere_area: f64,
}

/// Measure and radius of `{f > t}` per threshold. Thresholds must be
/// strictly increasing and nonnegative.
pub fn level_profile(f: &GridFunction, thresholds: &[f64]) -> Result<LevelProfile> {
    validate_thresholds(thresholds)?;
    let d = f.geom.dim;
    let kappa = unit_ball_volume(d);
    let vol = f.geom.cell_volume();
    let entries = thresholds
        .iter()
        .map(|&t| {
            let count = f.values.iter().filter(|v| **v > t).count();
            let measure = count as f64 * vol;
            let radius = (measure / kappa).powf(1.0 / d as f64);
            LevelEntry { threshold: t, measure, radius }
        })
        .collect();
    Ok(LevelProfile {
        entries,
        ball_volume: kappa,
        sphere_area: unit_sphere_area(d),
    })
}

fn validate_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(parameter_error("thresholds", "must be nonempty"));
    }
    if thresholds[0] < 0.0 {
        return Err(parameter_error("thresholds", "must be nonnegative"));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(parameter_error("thresholds", "must be strictly increasing"));
    }
    Ok(())
}

/// Trapezoid integral over `t` of the perimeter of the symmetrized
/// super-level set, `omega_d r_f(t)^(d-1)` (zero where the set is empty).
/// The thresholds must start at 0 and reach `max f`.
pub fn perimeter_integral(f: &GridFunction, thresholds: &[f64]) -> Result<f64> {
    validate_thresholds(thresholds)?;
    if thresholds[0] != 0.0 || *thresholds.last().unwrap() < f.max_value() {
        return Err(parameter_error(
            "thresholds",
            "must cover [0, max f] for the perimeter integral",
        ));
    }
    let profile = level_profile(f, thresholds)?;
    let d = f.geom.dim;
    let perim = |e: &LevelEntry| {
        if e.measure == 0.0 {
            0.0
        } else {
            profile.sphere_area * e.radius.powi(d as i32 - 1)
        }
    };
    let mut total = 0.0;
    for pair in profile.entries.windows(2) {
        let dt = pair[1].threshold - pair[0].threshold;
        total += 0.5 * (perim(&pair[0]) + perim(&pair[1])) * dt;
    }
    Ok(total)
}

/// Indicator of the ball of the given center and radius, sampled at cell
/// centers (a cell belongs to the ball iff its center does).
pub fn indicator_ball(geom: GridGeometry, center: &[f64], radius: f64) -> GridFunction {
    sample_radial(geom, center, |dist| if dist <= radius { 1.0 } else { 0.0 })
}

/// Radial profile shapes for [`radial_bump`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpProfile {
    /// `1 - u`
    Cone,
    /// `1 - u^2`
    Parabolic,
    /// `cos(pi u / 2)`
    Cosine,
}

/// A bump `profile(|x - center| / radius)` supported on the ball of the
/// given radius; monotone decreasing along rays from the center.
pub fn radial_bump(
    geom: GridGeometry,
    center: &[f64],
    radius: f64,
    profile: BumpProfile,
) -> GridFunction {
    sample_radial(geom, center, |dist| {
        let u = dist / radius;
        if u > 1.0 {
            0.0
        } else {
            match profile {
                BumpProfile::Cone => 1.0 - u,
                BumpProfile::Parabolic => 1.0 - u * u,
                BumpProfile::Cosine => (std::f64::consts::FRAC_PI_2 * u).cos(),
            }
        }
    })
}

fn sample_radial(geom: GridGeometry, center: &[f64], value: impl Fn(f64) -> f64) -> GridFunction {
    assert_eq!(center.len(), geom.dim);
    let mut c = vec![0.0; geom.dim];
    let values = (0..geom.total_cells())
        .map(|flat| {
            geom.center(flat, &mut c);
            let dist = crate::geom::distance(&c, center);
            value(dist)
        })
        .collect();
    GridFunction { geom, values }
}

/// Snap a 1-d reflection so its fixed point lies on the half-cell lattice.
/// The snapped reflection maps cell centers to cell centers exactly, making
/// polarization an exact pairwise rearrangement of cell values.
pub fn snap_reflection_1d(r: &Reflection, geom: &GridGeometry) -> Result<Reflection> {
    if r.dim() != 1 || geom.dim != 1 {
        return Err(Error::Dimension(geom.dim));
    }
    let h2 = geom.cell_size() / 2.0;
    let fixed = r.pole()[0] / 2.0;
    let k = ((fixed + geom.half_width) / h2).round();
    let mut snapped = -geom.half_width + k * h2;
    if snapped == 0.0 {
        snapped = h2; // a zero pole would fix the origin
    }
    Reflection::from_pole_coords(vec![2.0 * snapped])
}

/// CSV grid format: header `d,H,m`, then one cell value per line in
/// row-major order.
pub fn to_csv(f: &GridFunction) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{},{},{}",
        f.geom.dim, f.geom.half_width, f.geom.cells_per_axis
    )
    .unwrap();
    for v in &f.values {
        writeln!(out, "{v}").unwrap();
    }
    out
}

pub fn from_csv_str(text: &str) -> Result<GridFunction> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields.len() != 3 {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `d,H,m`, got `{header}`"),
        });
    }
    let parse_field = |i: usize, name: &str| -> Result<f64> {
        fields[i].parse::<f64>().map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad {name}: {e}"),
        })
    };
    let d = parse_field(0, "dimension")? as usize;
    let h = parse_field(1, "half-width")?;
    let m = parse_field(2, "cells-per-axis")? as usize;
    let geom = GridGeometry::new(d, h, m)?;
    let mut values = Vec::with_capacity(geom.total_cells());
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|e| Error::Parse {
            line: lineno + 1,
            message: format!("bad value `{line}`: {e}"),
        })?;
        values.push(v);
    }
    if values.len() != geom.total_cells() {
        return Err(Error::Parse {
            line: values.len() + 1,
            message: format!(
                "expected {} values, found {}",
                geom.total_cells(),
                values.len()
            ),
        });
    }
    GridFunction::new(geom, values)
}

pub fn from_csv(path: impl AsRef<Path>) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path)?;
    from_csv_str(&text)
}

pub fn write_csv(f: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_csv(f))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{sample_reflection, Point};
    use crate::rng::RngStream;
    use proptest::prelude::*;
    use rand::Rng;

    fn grid_1d(h_width: f64, m: usize) -> GridGeometry {
        GridGeometry::new(1, h_width, m).unwrap()
    }

    fn indicator_interval(geom: GridGeometry, a: f64, b: f64) -> GridFunction {
        let mut c = [0.0];
        let values = (0..geom.total_cells())
            .map(|i| {
                geom.center(i, &mut c);
                if c[0] > a && c[0] < b {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        GridFunction::new(geom, values).unwrap()
    }

    #[test]
    fn polarize_interval_example() {
        // f = indicator of [2,3], reflection about the point 1 (pole 2):
        // [2,3] lies on the far side and mirrors onto [-1,0].
        let geom = grid_1d(4.0, 64);
        let f = indicator_interval(geom, 2.0, 3.0);
        let r = Reflection::from_pole(Point::new(vec![2.0])).unwrap();
        let out = polarize(&f, &r);
        let expected = indicator_interval(geom, -1.0, 0.0);
        assert_eq!(out.values(), expected.values());
    }

    #[test]
    fn polarize_fixes_radial_functions_1d() {
        let geom = grid_1d(2.0, 128);
        let f = indicator_ball(geom, &[0.0], 0.75);
        let mut rng = RngStream::new(21, 0).rng();
        for _ in 0..50 {
            let r = sample_reflection(1.0, 1, &mut rng).unwrap();
            let r = snap_reflection_1d(&r, &geom).unwrap();
            let out = polarize(&f, &r);
            assert_eq!(out.values(), f.values());
        }
    }

    #[test]
    fn polarize_zero_is_zero() {
        let geom = GridGeometry::new(2, 1.0, 16).unwrap();
        let f = GridFunction::zero(geom);
        let r = Reflection::from_pole(Point::new(vec![0.3, 0.4])).unwrap();
        assert_eq!(polarize(&f, &r).values(), f.values());
    }

    #[test]
    fn schwarz_three_cell_example() {
        // centers -h, 0, h with values (3,1,2) -> (2,3,1)
        let geom = grid_1d(1.5, 3);
        let f = GridFunction::new(geom, vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(schwarz(&f).values(), &[2.0, 3.0, 1.0]);
    }

    #[test]
    fn schwarz_centers_interval() {
        let geom = grid_1d(4.0, 32); // h = 0.25, edges aligned with +-0.5
        let f = indicator_interval(geom, 2.0, 3.0);
        let out = schwarz(&f);
        let expected = indicator_interval(geom, -0.5, 0.5);
        assert_eq!(out.values(), expected.values());
        // total mass preserved exactly
        assert_eq!(out.mass(), f.mass());
    }

    #[test]
    fn schwarz_idempotent_and_fixes_radial() {
        let geom = GridGeometry::new(2, 1.0, 24).unwrap();
        let f = radial_bump(geom, &[0.0, 0.0], 0.8, BumpProfile::Parabolic);
        let once = schwarz(&f);
        let twice = schwarz(&once);
        assert_eq!(once.values(), twice.values());
        assert_eq!(once.values(), f.values());
    }

    #[test]
    fn l1_examples() {
        let geom = grid_1d(4.0, 64);
        let f = indicator_interval(geom, 2.0, 3.0);
        let g = indicator_interval(geom, -0.5, 0.5);
        assert_eq!(l1_distance(&f, &f).unwrap(), 0.0);
        let d = l1_distance(&f, &g).unwrap();
        assert!((d - 2.0).abs() <= geom.cell_volume() + 1e-12, "d = {d}");
        assert_eq!(d, l1_distance(&g, &f).unwrap());
        let other = GridFunction::zero(grid_1d(4.0, 32));
        assert!(matches!(l1_distance(&f, &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn level_profile_ball_indicator() {
        let geom = GridGeometry::new(2, 1.5, 192).unwrap();
        let f = indicator_ball(geom, &[0.0, 0.0], 1.0);
        let profile = level_profile(&f, &[0.5]).unwrap();
        let e = profile.entries[0];
        let h = geom.cell_size();
        assert!((e.measure - std::f64::consts::PI).abs() < 8.0 * h, "m = {}", e.measure);
        assert!((e.radius - 1.0).abs() < 4.0 * h);
        // t >= max f: empty level set
        let profile = level_profile(&f, &[1.0, 2.0]).unwrap();
        assert_eq!(profile.entries[0].measure, 0.0);
        assert_eq!(profile.entries[0].radius, 0.0);
        // monotone radius
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let profile = level_profile(&f, &ts).unwrap();
        for w in profile.entries.windows(2) {
            assert!(w[1].radius <= w[0].radius);
        }
    }

    #[test]
    fn perimeter_integral_examples() {
        // d=2 indicator of B_r: integral of Per = 2 pi r over t in [0,1)
        let geom = GridGeometry::new(2, 1.5, 128).unwrap();
        let f = indicator_ball(geom, &[0.0, 0.0], 1.0);
        let ts: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let p = perimeter_integral(&f, &ts).unwrap();
        let expect = 2.0 * std::f64::consts::PI;
        assert!(
            (p - expect).abs() < 0.15,
            "perimeter integral {p} vs {expect}"
        );
        // d=1 interval: perimeter of an interval is 2 points
        let geom = grid_1d(4.0, 64);
        let f = indicator_interval(geom, 2.0, 3.0);
        let p = perimeter_integral(&f, &ts).unwrap();
        assert!((p - 2.0).abs() < 0.02, "interval perimeter integral {p}");
        // zero function
        let z = GridFunction::zero(geom);
        assert_eq!(perimeter_integral(&z, &ts).unwrap(), 0.0);
    }

    #[test]
    fn indicator_mass_converges_to_ball_volume() {
        let errs: Vec<f64> = [48usize, 96]
            .iter()
            .map(|&m| {
                let geom = GridGeometry::new(2, 1.5, m).unwrap();
                let f = indicator_ball(geom, &[0.0, 0.0], 1.0);
                (f.mass() - std::f64::consts::PI).abs()
            })
            .collect();
        assert!(errs[1] < errs[0]);
        assert!(errs[1] < 0.05);
    }

    #[test]
    fn bump_monotone_along_rays() {
        let geom = GridGeometry::new(2, 1.0, 64).unwrap();
        let f = radial_bump(geom, &[0.2, -0.1], 0.6, BumpProfile::Cone);
        let mut c = vec![0.0; 2];
        // walk the +x ray from the bump center in cell steps
        let start = geom.cell_of(&[0.2, -0.1]).unwrap();
        geom.center(start, &mut c);
        let row = start / 64;
        let col = start % 64;
        let mut prev = f64::INFINITY;
        for j in col..64 {
            let v = f.values()[row * 64 + j];
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let geom = GridGeometry::new(2, 1.25, 8).unwrap();
        let f = radial_bump(geom, &[0.1, 0.0], 0.9, BumpProfile::Cosine);
        let text = to_csv(&f);
        let back = from_csv_str(&text).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.geometry(), f.geometry());

        let bad = "2,1.25,8\n0.5\nnot-a-number\n";
        match from_csv_str(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn snapped_reflection_preserves_mass_exactly() {
        let geom = grid_1d(1.5, 96);
        let f = indicator_interval(geom, -0.046875, 0.453125);
        let mut rng = RngStream::new(33, 0).rng();
        for _ in 0..200 {
            let r = sample_reflection(0.5, 1, &mut rng).unwrap();
            let r = snap_reflection_1d(&r, &geom).unwrap();
            let out = polarize(&f, &r);
            assert_eq!(out.mass(), f.mass());
        }
    }

    #[test]
    fn mass_drift_shrinks_with_resolution() {
        // generic (unsnapped) reflections in d=2: |mass drift| = O(h)
        let drift = |m: usize| {
            let geom = GridGeometry::new(2, 1.0, m).unwrap();
            let f = indicator_ball(geom, &[0.3, 0.0], 0.45);
            let mut rng = RngStream::new(8, 0).rng();
            let mut total = 0.0;
            let samples = 400;
            for _ in 0..samples {
                let r = sample_reflection(1.0, 2, &mut rng).unwrap();
                total += (polarize(&f, &r).mass() - f.mass()).abs();
            }
            total / samples as f64
        };
        let coarse = drift(32);
        let fine = drift(128);
        assert!(fine < coarse, "drift {fine} !< {coarse}");
        let h = 2.0 / 128.0;
        assert!(fine < h, "drift {fine} too large for h = {h}");
    }

    #[test]
    fn distance_to_schwarz_never_increases_much() {
        // exact in d=1 snapped mode; O(h) slack for generic d=2 reflections
        let geom = grid_1d(1.5, 128);
        let f = indicator_interval(geom, -0.046875, 0.453125);
        let fstar = schwarz(&f);
        let base = l1_distance(&f, &fstar).unwrap();
        let mut rng = RngStream::new(55, 0).rng();
        for _ in 0..1000 {
            let r = sample_reflection(0.5, 1, &mut rng).unwrap();
            let r = snap_reflection_1d(&r, &geom).unwrap();
            let out = polarize(&f, &r);
            let dist = l1_distance(&out, &fstar).unwrap();
            assert!(dist <= base + 1e-12, "{dist} > {base}");
        }

        let geom2 = GridGeometry::new(2, 1.0, 64).unwrap();
        let g = indicator_ball(geom2, &[0.35, 0.1], 0.4);
        let gstar = schwarz(&g);
        let base2 = l1_distance(&g, &gstar).unwrap();
        let h = geom2.cell_size();
        let slack = 24.0 * h * h; // misread cells sit in an O(h) band of the plane
        for _ in 0..1000 {
            let r = sample_reflection(1.0, 2, &mut rng).unwrap();
            let out = polarize(&g, &r);
            let dist = l1_distance(&out, &gstar).unwrap();
            assert!(dist <= base2 + slack, "{dist} > {base2} + {slack}");
        }
    }

    proptest! {
        /// Thresholding commutes with polarization exactly on the grid.
        #[test]
        fn threshold_commutes_with_polarization(
            seed in 0u64..500,
            t in 0.05f64..0.95,
        ) {
            let geom = GridGeometry::new(2, 1.0, 24).unwrap();
            let mut rng = RngStream::new(seed, 1).rng();
            let values: Vec<f64> = (0..geom.total_cells()).map(|_| rng.gen::<f64>()).collect();
            let f = GridFunction::new(geom, values).unwrap();
            let r = sample_reflection(1.0, 2, &mut rng).unwrap();
            let pf = polarize(&f, &r);
            // indicator of {polarize(f) > t}
            let lhs: Vec<f64> = pf.values().iter().map(|v| f64::from(*v > t)).collect();
            // polarize applied to the indicator of {f > t}
            let ind = GridFunction::new(
                geom,
                f.values().iter().map(|v| f64::from(*v > t)).collect(),
            ).unwrap();
            let rhs = polarize(&ind, &r);
            prop_assert_eq!(lhs, rhs.values().to_vec());
        }

        /// f <= g cellwise implies polarize(f) <= polarize(g) cellwise.
        #[test]
        fn polarization_is_monotone(seed in 0u64..500) {
            let geom = GridGeometry::new(2, 1.0, 24).unwrap();
            let mut rng = RngStream::new(seed, 2).rng();
            let f_vals: Vec<f64> = (0..geom.total_cells()).map(|_| rng.gen::<f64>()).collect();
            let g_vals: Vec<f64> = f_vals.iter().map(|v| v + rng.gen::<f64>()).collect();
            let f = GridFunction::new(geom, f_vals).unwrap();
            let g = GridFunction::new(geom, g_vals).unwrap();
            let r = sample_reflection(1.0, 2, &mut rng).unwrap();
            let pf = polarize(&f, &r);
            let pg = polarize(&g, &r);
            for (a, b) in pf.values().iter().zip(pg.values()) {
                prop_assert!(a <= b);
            }
        }
    }
}
