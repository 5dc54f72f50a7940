//! Points, hyperplane reflections and the radial pole sampler.
//!
//! A reflection is parametrized by its pole `sigma(0)`, the image of the
//! origin. The fixed hyperplane is the perpendicular bisector of the segment
//! from the origin to the pole; the open half-space containing the origin is
//! `Plus`, the far side `Minus`. Reflections fixing the origin (pole at the
//! origin) are excluded.

use crate::{parameter_error, Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Absolute tolerance on `<x, pole> - |pole|^2/2` below which a point is
/// classified as lying on the fixed hyperplane.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A point of R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        let coords = coords.into();
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    pub fn origin(d: usize) -> Self {
        Self { coords: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point::new(coords)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Which side of the fixed hyperplane a point lies on. `Plus` is the open
/// half-space containing the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
    Boundary,
}

/// A hyperplane reflection encoded by its pole `sigma(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    pole: Vec<f64>,
    pole_norm2: f64,
}

impl Reflection {
    /// The reflection mapping the origin to `pole`. The fixed hyperplane is
    /// `{x : <x, pole> = |pole|^2 / 2}`.
    pub fn from_pole(pole: Point) -> Result<Self> {
        Self::from_pole_coords(pole.coords)
    }

    pub fn from_pole_coords(pole: Vec<f64>) -> Result<Self> {
        let n2 = dot(&pole, &pole);
        if n2 == 0.0 {
            return Err(Error::ZeroPole);
        }
        Ok(Self { pole, pole_norm2: n2 })
    }

    /// The unique reflection mapping `x` to `y` (`x != y`, `|x| != |y|`).
    ///
    /// Its pole is the image of the origin; when `|x| == |y|` the fixed
    /// hyperplane passes through the origin, the pole degenerates to the
    /// origin and the reflection falls outside the sampled family.
    pub fn mapping(x: &Point, y: &Point) -> Result<Self> {
        let pole = pole_of_mapping(&x.coords, &y.coords)?;
        Self::from_pole_coords(pole).map_err(|_| Error::OriginFixed)
    }

    pub fn dim(&self) -> usize {
        self.pole.len()
    }

    /// The pole `sigma(0)`.
    pub fn pole(&self) -> &[f64] {
        &self.pole
    }

    pub fn pole_norm(&self) -> f64 {
        self.pole_norm2.sqrt()
    }

    /// Unit normal of the fixed hyperplane, oriented from the origin side to
    /// the pole side.
    pub fn unit_normal(&self) -> Vec<f64> {
        let n = self.pole_norm();
        self.pole.iter().map(|c| c / n).collect()
    }

    /// Signed offset of the fixed hyperplane from the origin (`|pole| / 2`).
    pub fn offset(&self) -> f64 {
        self.pole_norm() / 2.0
    }

    /// Apply the reflection to `x` in place.
    pub fn reflect_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.pole.len());
        let coef = 2.0 * (dot(x, &self.pole) - self.pole_norm2 / 2.0) / self.pole_norm2;
        for (xi, pi) in x.iter_mut().zip(&self.pole) {
            *xi -= coef * pi;
        }
    }

    pub fn reflect(&self, x: &Point) -> Point {
        let mut out = x.coords.clone();
        self.reflect_in_place(&mut out);
        Point::new(out)
    }

    /// Classify `x` relative to the fixed hyperplane.
    pub fn classify_slice(&self, x: &[f64]) -> Side {
        let s = dot(x, &self.pole) - self.pole_norm2 / 2.0;
        if s.abs() <= BOUNDARY_TOL {
            Side::Boundary
        } else if s < 0.0 {
            Side::Plus
        } else {
            Side::Minus
        }
    }

    pub fn classify(&self, x: &Point) -> Side {
        self.classify_slice(&x.coords)
    }
}

fn pole_of_mapping(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(x.len(), y.len());
    let dist = distance(x, y);
    if dist == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    // T_x(y) = <x + y, u> u with u the unit normal (y - x)/|y - x|
    let mut u: Vec<f64> = x.iter().zip(y).map(|(a, b)| (b - a) / dist).collect();
    let c = x.iter().zip(y).zip(&u).map(|((a, b), ui)| (a + b) * ui).sum::<f64>();
    for ui in &mut u {
        *ui *= c;
    }
    Ok(u)
}

/// `T_x(y) = sigma_{x,y}(0)` — the pole of the reflection mapping `x` to `y`.
pub fn pole_map(x: &Point, y: &Point) -> Result<Point> {
    pole_of_mapping(&x.coords, &y.coords).map(Point::new)
}

/// The change-of-variables factor `(|T_x(y)| / |x-y|)^(d-1)` of the map
/// `y -> T_x(y)`.
pub fn jacobian_factor(x: &Point, y: &Point) -> Result<f64> {
    let d = x.dim();
    let pole = pole_of_mapping(&x.coords, &y.coords)?;
    let ratio = norm(&pole) / distance(&x.coords, &y.coords);
    Ok(ratio.powi(d as i32 - 1))
}

/// Draw a pole for the radially uniform reflection measure on support radius
/// `L`: radius uniform on `(0, 2L]`, direction uniform on the unit sphere.
/// This realizes the pole density `(2 L omega_d)^-1 |x|^-(d-1)` on `B_2L`.
pub fn sample_pole_into(l: f64, rng: &mut impl Rng, out: &mut [f64]) {
    let d = out.len();
    debug_assert!(l > 0.0 && d >= 1);
    // 1 - U in (0, 1], so the radius never degenerates to a zero pole.
    let radius = 2.0 * l * (1.0 - rng.gen::<f64>());
    loop {
        let mut n2 = 0.0;
        for o in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *o = g;
            n2 += g * g;
        }
        if n2 > 0.0 {
            let scale = radius / n2.sqrt();
            for o in out.iter_mut() {
                *o *= scale;
            }
            return;
        }
    }
}

/// `sample_pole_into` packaged as a [`Reflection`].
pub fn sample_reflection(l: f64, d: usize, rng: &mut impl Rng) -> Result<Reflection> {
    if l <= 0.0 {
        return Err(parameter_error("L", format!("must be positive, got {l}")));
    }
    if d == 0 {
        return Err(Error::Dimension(0));
    }
    let mut pole = vec![0.0; d];
    sample_pole_into(l, rng, &mut pole);
    Reflection::from_pole_coords(pole)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec())
    }

    #[test]
    fn from_pole_fixed_plane() {
        // pole (2,0): fixed plane x1 = 1; pole (0,5): fixed plane x2 = 2.5
        let r = Reflection::from_pole(pt(&[2.0, 0.0])).unwrap();
        assert_eq!(r.unit_normal(), vec![1.0, 0.0]);
        assert_eq!(r.offset(), 1.0);
        let r = Reflection::from_pole(pt(&[0.0, 5.0])).unwrap();
        assert_eq!(r.unit_normal(), vec![0.0, 1.0]);
        assert_eq!(r.offset(), 2.5);
        assert!(matches!(
            Reflection::from_pole(pt(&[0.0, 0.0])),
            Err(Error::ZeroPole)
        ));
    }

    #[test]
    fn reflect_examples() {
        let r = Reflection::from_pole(pt(&[2.0, 0.0])).unwrap();
        assert_eq!(r.reflect(&pt(&[0.0, 0.0])).coords, vec![2.0, 0.0]);
        assert_eq!(r.reflect(&pt(&[1.0, 5.0])).coords, vec![1.0, 5.0]);
        assert_eq!(r.reflect(&pt(&[3.0, 1.0])).coords, vec![-1.0, 1.0]);
        // reflect(pole) = origin
        assert_eq!(r.reflect(&pt(&[2.0, 0.0])).coords, vec![0.0, 0.0]);
    }

    #[test]
    fn classify_examples() {
        let r = Reflection::from_pole(pt(&[2.0, 0.0])).unwrap();
        assert_eq!(r.classify(&pt(&[0.0, 0.0])), Side::Plus);
        assert_eq!(r.classify(&pt(&[3.0, 0.0])), Side::Minus);
        assert_eq!(r.classify(&pt(&[1.0, 7.0])), Side::Boundary);
    }

    #[test]
    fn mapping_examples() {
        let r = Reflection::mapping(&pt(&[1.0, 0.0]), &pt(&[3.0, 0.0])).unwrap();
        assert_eq!(r.pole(), &[4.0, 0.0]);
        assert_eq!(r.offset(), 2.0);
        // maps x to y
        assert_eq!(r.reflect(&pt(&[1.0, 0.0])).coords, vec![3.0, 0.0]);
        assert!(matches!(
            Reflection::mapping(&pt(&[1.0, 2.0]), &pt(&[1.0, 2.0])),
            Err(Error::CoincidentPoints)
        ));
        // consistency with from_pole: sigma_{0,p}(0) = p
        let r = Reflection::mapping(&pt(&[0.0, 0.0]), &pt(&[2.0, 0.0])).unwrap();
        assert_eq!(r.pole(), &[2.0, 0.0]);
        // |x| == |y| has no pole
        assert!(matches!(
            Reflection::mapping(&pt(&[1.0, 0.0]), &pt(&[0.0, 1.0])),
            Err(Error::OriginFixed)
        ));
    }

    /// Central finite-difference Jacobian determinant of y -> T_x(y).
    fn numeric_jacobian_det(x: &Point, y: &Point) -> f64 {
        let d = x.dim();
        let eps = 1e-5;
        let mut cols = vec![vec![0.0; d]; d];
        for j in 0..d {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp.coords[j] += eps;
            ym.coords[j] -= eps;
            let tp = pole_map(x, &yp).unwrap();
            let tm = pole_map(x, &ym).unwrap();
            for i in 0..d {
                cols[j][i] = (tp.coords[i] - tm.coords[i]) / (2.0 * eps);
            }
        }
        match d {
            1 => cols[0][0],
            2 => cols[0][0] * cols[1][1] - cols[0][1] * cols[1][0],
            3 => {
                cols[0][0] * (cols[1][1] * cols[2][2] - cols[1][2] * cols[2][1])
                    - cols[1][0] * (cols[0][1] * cols[2][2] - cols[0][2] * cols[2][1])
                    + cols[2][0] * (cols[0][1] * cols[1][2] - cols[0][2] * cols[1][1])
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn jacobian_examples() {
        // d=2: x=(1,0), y=(3,0): |T|=4, |x-y|=2, factor 2
        let f = jacobian_factor(&pt(&[1.0, 0.0]), &pt(&[3.0, 0.0])).unwrap();
        assert_relative_eq!(f, 2.0, max_relative = 1e-12);
        // d=1: exponent 0
        let f = jacobian_factor(&pt(&[0.3]), &pt(&[-0.9])).unwrap();
        assert_eq!(f, 1.0);
        // d=3, x=0: T_0(y) = y so the ratio is 1
        let y = pt(&[0.4, -0.2, 0.7]);
        let t = pole_map(&pt(&[0.0, 0.0, 0.0]), &y).unwrap();
        for (a, b) in t.coords.iter().zip(&y.coords) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        assert_relative_eq!(
            jacobian_factor(&pt(&[0.0, 0.0, 0.0]), &y).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = RngStream::new(11, 0).rng();
        for d in [2usize, 3] {
            for _ in 0..20 {
                let x = pt(&(0..d).map(|_| rng.gen_range(-0.8..0.8)).collect::<Vec<_>>());
                let y = pt(&(0..d).map(|_| rng.gen_range(-0.8..0.8)).collect::<Vec<_>>());
                if distance(&x.coords, &y.coords) < 0.2 {
                    continue;
                }
                if (x.norm() - y.norm()).abs() < 0.05 {
                    continue; // near-degenerate pole
                }
                let analytic = jacobian_factor(&x, &y).unwrap();
                let numeric = numeric_jacobian_det(&x, &y).abs();
                assert_relative_eq!(analytic, numeric, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn involution_isometry_side_exchange() {
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..10_000 {
            let d = 1 + (rng.gen::<u64>() % 3) as usize;
            let r = sample_reflection(1.0, d, &mut rng).unwrap();
            let x = Point::new((0..d).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
            let y = Point::new((0..d).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
            let rx = r.reflect(&x);
            let rrx = r.reflect(&rx);
            assert!(distance(&rrx.coords, &x.coords) < 1e-10, "involution");
            let dist_before = distance(&x.coords, &y.coords);
            let dist_after = distance(&rx.coords, &r.reflect(&y).coords);
            assert!((dist_before - dist_after).abs() < 1e-10, "isometry");
            // side exchange and distance reduction toward the origin,
            // away from the boundary tolerance band
            let margin = (dot(&x.coords, r.pole()) - r.pole_norm().powi(2) / 2.0).abs();
            if margin > 1e-9 {
                match r.classify(&x) {
                    Side::Minus => {
                        assert_eq!(r.classify(&rx), Side::Plus);
                        assert!(rx.norm() < x.norm(), "reflection moves Minus side inward");
                    }
                    Side::Plus => assert_eq!(r.classify(&rx), Side::Minus),
                    Side::Boundary => {}
                }
            }
        }
    }

    #[test]
    fn sampler_radius_and_symmetry() {
        let l = 1.0;
        let n = 100_000;
        let mut rng = RngStream::new(17, 0).rng();
        let mut radii = Vec::with_capacity(n);
        let mut mean = [0.0f64; 2];
        for _ in 0..n {
            let r = sample_reflection(l, 2, &mut rng).unwrap();
            let rho = r.pole_norm();
            assert!(rho > 0.0 && rho <= 2.0 * l);
            radii.push(rho);
            mean[0] += r.pole()[0];
            mean[1] += r.pole()[1];
        }
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // P(|pole| <= s) = s / (2L): sup distance of the empirical CDF
        let mut sup = 0.0f64;
        for (i, s) in radii.iter().enumerate() {
            let f = s / (2.0 * l);
            sup = sup.max((i as f64 / n as f64 - f).abs());
            sup = sup.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(sup < 0.01, "radius CDF sup distance {sup}");
        // spherical symmetry: mean pole within 3 standard errors of the origin
        // (per-coordinate std of the pole is sqrt(E rho^2 / 2) = sqrt(2/3))
        let se = (2.0f64 / 3.0).sqrt() / (n as f64).sqrt();
        for c in mean {
            assert!((c / n as f64).abs() < 3.0 * se);
        }
        assert!(sample_reflection(0.0, 2, &mut rng).is_err());
    }
}
