//! Quadrature for the singular radial kernel `|x - y|^-(d-1)`.
//!
//! Every integral here reduces to one-dimensional quadratures. Two distinct
//! reductions are used, which gives the tests independent routes to the same
//! constants:
//!
//! * *sphere averages*: integrate the kernel average over spheres `|y| = r`
//!   (singular ring at `r = |x|`, handled by adaptive refinement);
//! * *kernel-centered polar coordinates*: around the singular point the
//!   Jacobian `s^(d-1)` cancels the kernel exactly, leaving the smooth
//!   fraction of each sphere `|z| = s` that lies inside the domain.
//!
//! Monte Carlo cross-checks live in [`mc`]; they sample the kernel-adapted
//! radial law directly, so the estimators are bounded (Bernoulli-like) even
//! though the kernel itself has unbounded second moment.

use crate::rearrange::{schwarz, GridFunction};
use crate::{parameter_error, unit_ball_volume, unit_sphere_area, Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerance request for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub rel: f64,
    pub abs_floor: f64,
    pub max_panels: usize,
}

impl QuadTol {
    pub fn rel(rel: f64) -> Self {
        Self { rel, abs_floor: 1e-300, max_panels: 4000 }
    }
}

impl Default for QuadTol {
    fn default() -> Self {
        QuadTol::rel(REL_TOL_RADIAL)
    }
}

/// Default relative tolerance for one-dimensional radial quadratures.
pub const REL_TOL_RADIAL: f64 = 1e-6;
/// Default relative tolerance for double (nested) integrals.
pub const REL_TOL_DOUBLE: f64 = 1e-4;
/// Tolerance used for inner integrals of nested quadratures.
const REL_TOL_INNER: f64 = 1e-9;

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    let val = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (val, err)
}

struct Segment {
    err: f64,
    a: f64,
    b: f64,
    val: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Interval endpoints are never evaluated, so integrable endpoint
/// singularities (logarithmic or sqrt-type) are refined automatically.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: QuadTol) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (val, err) = gk15(&f, a, b);
    if !val.is_finite() {
        return Err(Error::Tolerance(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { err, a, b, val });
    let mut total_val = val;
    let mut total_err = err;
    let mut panels = 1usize;
    while total_err > (tol.rel * total_val.abs()).max(tol.abs_floor) {
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; accept what we have
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        if !(lv.is_finite() && rv.is_finite()) {
            return Err(Error::Tolerance(format!(
                "integrand not finite near [{}, {}]",
                worst.a, worst.b
            )));
        }
        total_val += lv + rv - worst.val;
        total_err += le + re - worst.err;
        heap.push(Segment { err: le, a: worst.a, b: mid, val: lv });
        heap.push(Segment { err: re, a: mid, b: worst.b, val: rv });
        panels += 1;
        if panels > tol.max_panels {
            return Err(Error::Tolerance(format!(
                "error {total_err:.3e} above target after {panels} panels"
            )));
        }
    }
    Ok(total_val)
}

/// Average of `|x - y|^-(d-1)` over the sphere `|y| = r`, for `|x| = a`.
///
/// Diverges when `r = a` for `d >= 2` (the singular ring), which is
/// reported as a tolerance error.
pub fn sphere_average_kernel_at(a: f64, r: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Dimension(0));
    }
    if a < 0.0 || r < 0.0 {
        return Err(parameter_error("radius", "must be nonnegative"));
    }
    if d == 1 {
        return Ok(1.0);
    }
    if r == 0.0 {
        return Ok(a.powi(1 - d as i32));
    }
    if a == 0.0 {
        return Ok(r.powi(1 - d as i32));
    }
    if a == r {
        return Err(Error::Tolerance(format!(
            "kernel average diverges on the singular ring r = {r}"
        )));
    }
    let p = (d as f64 - 1.0) / 2.0;
    let tol = QuadTol::rel(REL_TOL_INNER);
    // |x - y|^2 = (a - r)^2 + 4 a r sin^2(theta/2): no cancellation near the ring
    let gap2 = (a - r) * (a - r);
    match d {
        2 => {
            let v = integrate(
                |theta: f64| {
                    let s = (theta / 2.0).sin();
                    (gap2 + 4.0 * a * r * s * s).powf(-0.5)
                },
                0.0,
                std::f64::consts::PI,
                tol,
            )?;
            Ok(v / std::f64::consts::PI)
        }
        3 => {
            let v = integrate(
                |mu: f64| (gap2 + 2.0 * a * r * (1.0 - mu)).recip(),
                -1.0,
                1.0,
                tol,
            )?;
            Ok(v / 2.0)
        }
        _ => {
            let weight = integrate(|mu: f64| (1.0 - mu * mu).powf((d as f64 - 3.0) / 2.0), -1.0, 1.0, tol)?;
            let v = integrate(
                |mu: f64| {
                    (1.0 - mu * mu).powf((d as f64 - 3.0) / 2.0)
                        * (gap2 + 2.0 * a * r * (1.0 - mu)).powf(-p)
                },
                -1.0,
                1.0,
                tol,
            )?;
            Ok(v / weight)
        }
    }
}

/// [`sphere_average_kernel_at`] with the kernel centered at a unit vector.
pub fn sphere_average_kernel(rho: f64, d: usize) -> Result<f64> {
    sphere_average_kernel_at(1.0, rho, d)
}

/// `(omega_d lambda)^-1 * integral over B_lambda of |u - y|^-(d-1) dy`
/// with `|u| = 1`, computed by radial reduction over the sphere average.
/// Always at most 1.
pub fn kernel_ball_integral(lambda: f64, d: usize) -> Result<f64> {
    if !(0.0 < lambda && lambda <= 1.0) {
        return Err(parameter_error("lambda", "must lie in (0, 1]"));
    }
    let v = integrate(
        |r| r.powi(d as i32 - 1) * sphere_average_kernel_at(1.0, r, d).unwrap_or(f64::NAN),
        0.0,
        lambda,
        QuadTol::rel(REL_TOL_RADIAL),
    )?;
    Ok(v / lambda)
}

/// `integral over B_radius(m) of |z|^-(d-1) dz` where `|m| = center_dist`,
/// via kernel-centered polar coordinates: the integrand reduces to
/// `omega_d` times the fraction of each sphere `|z| = s` inside the ball.
pub fn ball_kernel_mass(center_dist: f64, radius: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Dimension(0));
    }
    if radius < 0.0 || center_dist < 0.0 {
        return Err(parameter_error("radius", "must be nonnegative"));
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    let omega = unit_sphere_area(d);
    if center_dist == 0.0 {
        return Ok(omega * radius);
    }
    let full_up_to = (radius - center_dist).max(0.0);
    let lo = (center_dist - radius).abs();
    let hi = center_dist + radius;
    let partial = integrate(
        |s| sphere_inside_fraction(s, center_dist, radius, d),
        lo,
        hi,
        QuadTol::rel(REL_TOL_RADIAL),
    )?;
    Ok(omega * (full_up_to + partial))
}

/// Fraction of the sphere `|z| = s` (centered at the origin) lying inside
/// the ball of the given radius centered at distance `center_dist`.
fn sphere_inside_fraction(s: f64, center_dist: f64, radius: f64, d: usize) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    let cs = (s * s + center_dist * center_dist - radius * radius) / (2.0 * s * center_dist);
    if cs <= -1.0 {
        return 1.0;
    }
    if cs >= 1.0 {
        return 0.0;
    }
    match d {
        1 => 0.5,
        2 => cs.acos() / std::f64::consts::PI,
        3 => (1.0 - cs) / 2.0,
        _ => {
            let p = (d as f64 - 3.0) / 2.0;
            let tol = QuadTol::rel(REL_TOL_INNER);
            let num = integrate(|mu: f64| (1.0 - mu * mu).powf(p), cs, 1.0, tol).unwrap_or(0.0);
            let den = integrate(|mu: f64| (1.0 - mu * mu).powf(p), -1.0, 1.0, tol).unwrap_or(1.0);
            num / den
        }
    }
}

/// `eta_d`: the average of `|u - y|^-(d-1)` over the unit ball, `|u| = 1`.
pub fn eta(d: usize) -> Result<f64> {
    Ok(ball_kernel_mass(1.0, 1.0, d)? / unit_ball_volume(d))
}

/// `gamma_d = (omega_d m(B_1))^-1 * double integral over B_1 x B_1 of
/// |x - y|^-(d-1)`, by reducing the double integral to a radial integral of
/// [`ball_kernel_mass`].
pub fn gamma_const(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Dimension(0));
    }
    let omega = unit_sphere_area(d);
    let kappa = unit_ball_volume(d);
    let double = integrate(
        |r| {
            omega * r.powi(d as i32 - 1) * ball_kernel_mass(r, 1.0, d).unwrap_or(f64::NAN)
        },
        0.0,
        1.0,
        QuadTol::rel(REL_TOL_RADIAL),
    )?;
    Ok(double / (omega * kappa))
}

/// `b_d = 1 - gamma_d / 2`, the geometric lower-bound base.
pub fn lower_bound_base(d: usize) -> Result<f64> {
    Ok(1.0 - gamma_const(d)? / 2.0)
}

/// `integral over B_1 of w(|y|) |u - y|^-(d-1) dy` with `|u| = 1`, in
/// kernel-centered polar coordinates (the integrand is smooth; the cap cut
/// `|u + z| < 1` becomes a range in the polar angle).
pub fn weighted_unit_ball_kernel(w: impl Fn(f64) -> f64 + Copy, d: usize) -> Result<f64> {
    let tol = QuadTol::rel(REL_TOL_RADIAL);
    let inner_tol = QuadTol::rel(REL_TOL_INNER);
    match d {
        0 => Err(Error::Dimension(0)),
        1 => Ok(2.0 * integrate(&w, 0.0, 1.0, tol)?),
        2 => integrate(
            |s: f64| {
                let phi0 = (-s / 2.0).clamp(-1.0, 1.0).acos();
                // |u + z| with |z| = s at polar angle phi from u:
                // (1-s)^2 + 4 s cos^2(phi/2), robust near s = 1, phi = pi
                2.0 * integrate(
                    |phi: f64| {
                        let c = (phi / 2.0).cos();
                        w(((1.0 - s) * (1.0 - s) + 4.0 * s * c * c).sqrt())
                    },
                    phi0,
                    std::f64::consts::PI,
                    inner_tol,
                )
                .unwrap_or(f64::NAN)
            },
            0.0,
            2.0,
            tol,
        ),
        3 => integrate(
            |s: f64| {
                2.0 * std::f64::consts::PI
                    * integrate(
                        |mu: f64| w(((1.0 - s) * (1.0 - s) + 2.0 * s * (1.0 + mu)).sqrt()),
                        -1.0,
                        -s / 2.0,
                        inner_tol,
                    )
                    .unwrap_or(f64::NAN)
            },
            0.0,
            2.0,
            tol,
        ),
        _ => {
            let p = (d as f64 - 3.0) / 2.0;
            let omega_slice = unit_sphere_area(d - 1);
            integrate(
                |s: f64| {
                    omega_slice
                        * integrate(
                            |mu: f64| {
                                (1.0 - mu * mu).powf(p)
                                    * w(((1.0 - s) * (1.0 - s) + 2.0 * s * (1.0 + mu)).sqrt())
                            },
                            -1.0,
                            -s / 2.0,
                            inner_tol,
                        )
                        .unwrap_or(f64::NAN)
                },
                0.0,
                2.0,
                tol,
            )
        }
    }
}

/// `phi_n(x) = (2 L omega_d)^-1 * integral over B_|x| of |y|^n |x-y|^-(d-1)`,
/// by radial reduction over sphere averages at the actual `|x|` (so the
/// scaling property is a measured outcome, not built in).
pub fn phi_n(x_norm: f64, n: u32, d: usize, l: f64) -> Result<f64> {
    if x_norm <= 0.0 {
        return Err(parameter_error("x", "must be nonzero"));
    }
    if l <= 0.0 {
        return Err(parameter_error("L", "must be positive"));
    }
    let omega = unit_sphere_area(d);
    if d == 1 {
        return Ok(x_norm.powi(n as i32 + 1) / (2.0 * l * (n as f64 + 1.0)));
    }
    let v = integrate(
        |r: f64| {
            r.powi(d as i32 - 1 + n as i32)
                * sphere_average_kernel_at(x_norm, r, d).unwrap_or(f64::NAN)
        },
        0.0,
        x_norm,
        QuadTol::rel(REL_TOL_RADIAL),
    )?;
    Ok(omega * v / (2.0 * l * omega))
}

/// Kernel value averaged over a ball with the volume of one grid cell;
/// replaces the singular same-cell kernel evaluation in cell-pair sums.
pub fn cell_kernel_average(cell_size: f64, d: usize) -> f64 {
    let r_eq = (cell_size.powi(d as i32) / unit_ball_volume(d)).powf(1.0 / d as f64);
    d as f64 * r_eq.powi(1 - d as i32)
}

/// `(L omega_d)^-1 * double integral over A0(t) x B0(t) of |x-y|^-(d-1)`,
/// where `A0 = {f > t >= f*}` and `B0 = {f* > t >= f}` on the grid of `f`.
pub fn drop_double_integral(f: &GridFunction, t: f64, l: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(parameter_error("t", "must be nonnegative"));
    }
    if l <= 0.0 {
        return Err(parameter_error("L", "must be positive"));
    }
    let fstar = schwarz(f);
    let geom = f.geometry();
    let d = geom.dim;
    let mut center = vec![0.0; d];
    let mut a_cells: Vec<f64> = Vec::new();
    let mut b_cells: Vec<f64> = Vec::new();
    for (i, (&v, &vs)) in f.values().iter().zip(fstar.values()).enumerate() {
        if v > t && vs <= t {
            geom.center(i, &mut center);
            a_cells.extend_from_slice(&center);
        } else if vs > t && v <= t {
            geom.center(i, &mut center);
            b_cells.extend_from_slice(&center);
        }
    }
    let h = geom.cell_size();
    let same_cell = cell_kernel_average(h, d);
    let p = d as i32 - 1;
    let mut sum = 0.0;
    for a in a_cells.chunks_exact(d) {
        for b in b_cells.chunks_exact(d) {
            let dist = crate::geom::distance(a, b);
            sum += if dist == 0.0 {
                same_cell
            } else {
                dist.powi(-p)
            };
        }
    }
    let omega = unit_sphere_area(d);
    Ok(sum * geom.cell_volume().powi(2) / (l * omega))
}

/// Monte Carlo cross-checks for the kernel integrals.
///
/// All estimators draw the displacement from the kernel-adapted radial law
/// (radius uniform, direction uniform), turning the singular kernel into a
/// bounded indicator integrand.
pub mod mc {
    use super::*;
    use crate::geom::sample_pole_into;
    use crate::rng::run_trials;
    use crate::stats::Accumulator;
    use rand::Rng;

    #[derive(Debug, Clone, Copy)]
    pub struct McEstimate {
        pub value: f64,
        pub stderr: f64,
    }

    fn sample_unit_ball(d: usize, rng: &mut impl Rng, out: &mut [f64]) {
        // direction via the pole sampler (radius discarded), radius by
        // inverse CDF
        sample_pole_into(0.5, rng, out);
        let norm = crate::geom::norm(out);
        let r = rng.gen::<f64>().powf(1.0 / d as f64);
        for o in out.iter_mut() {
            *o *= r / norm;
        }
    }

    /// Estimate `integral over B_1 of w(|y|) |u-y|^-(d-1) dy`.
    fn ball_kernel_weighted(
        w: impl Fn(f64) -> f64 + Sync,
        d: usize,
        samples: u64,
        seed: u64,
    ) -> McEstimate {
        let omega = unit_sphere_area(d);
        let acc = run_trials(
            samples,
            seed,
            Accumulator::default,
            |_t, rng, acc| {
                let mut z = vec![0.0; d];
                // displacement law: radius uniform on (0, 2], direction uniform;
                // density (2 omega_d)^-1 |z|^-(d-1)
                sample_pole_into(1.0, rng, &mut z);
                z[0] += 1.0; // y = u + z
                let r = crate::geom::norm(&z);
                acc.push(if r <= 1.0 { 2.0 * omega * w(r) } else { 0.0 });
            },
            |a, b| a.merge(&b),
        );
        McEstimate { value: acc.mean(), stderr: acc.stderr() }
    }

    /// Monte Carlo `eta_d`.
    pub fn eta(d: usize, samples: u64, seed: u64) -> McEstimate {
        let e = ball_kernel_weighted(|_| 1.0, d, samples, seed);
        let k = unit_ball_volume(d);
        McEstimate { value: e.value / k, stderr: e.stderr / k }
    }

    /// Monte Carlo `gamma_d` (the double-ball kernel average).
    pub fn gamma(d: usize, samples: u64, seed: u64) -> McEstimate {
        // gamma_d = 2 P(|x + z| <= 1), x uniform in B_1, z kernel-radial
        let acc = run_trials(
            samples,
            seed,
            Accumulator::default,
            |_t, rng, acc| {
                let mut x = vec![0.0; d];
                let mut z = vec![0.0; d];
                sample_unit_ball(d, rng, &mut x);
                sample_pole_into(1.0, rng, &mut z);
                for (xi, zi) in x.iter_mut().zip(&z) {
                    *xi += zi;
                }
                acc.push(if crate::geom::norm(&x) <= 1.0 { 2.0 } else { 0.0 });
            },
            |a, b| a.merge(&b),
        );
        McEstimate { value: acc.mean(), stderr: acc.stderr() }
    }

    /// Monte Carlo moment coefficient `c_k` for support radius `l`.
    pub fn coefficient(k: u32, d: usize, l: f64, samples: u64, seed: u64) -> McEstimate {
        let e = ball_kernel_weighted(|r| 1.0 - r.powi(k as i32), d, samples, seed);
        let scale = 2.0 * l * unit_sphere_area(d);
        McEstimate { value: e.value / scale, stderr: e.stderr / scale }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gk_integrates_polynomials_exactly() {
        let v = integrate(|x| x.powi(10), 0.0, 1.0, QuadTol::rel(1e-12)).unwrap();
        assert_relative_eq!(v, 1.0 / 11.0, max_relative = 1e-14);
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, QuadTol::rel(1e-12)).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-13);
    }

    #[test]
    fn gk_handles_endpoint_singularities() {
        // integrable log endpoint
        let v = integrate(|x: f64| x.ln(), 0.0, 1.0, QuadTol::rel(1e-10)).unwrap();
        assert_relative_eq!(v, -1.0, max_relative = 1e-9);
        // sqrt endpoint
        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, QuadTol::rel(1e-10)).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-9);
    }

    /// Complete elliptic integral route: in d=2 the sphere average equals
    /// `1 / agm(1 + rho, 1 - rho)`.
    fn agm(mut a: f64, mut b: f64) -> f64 {
        for _ in 0..64 {
            let (na, nb) = ((a + b) / 2.0, (a * b).sqrt());
            if (na - nb).abs() < 1e-16 * na.abs() {
                return na;
            }
            a = na;
            b = nb;
        }
        a
    }

    #[test]
    fn sphere_average_kernel_values() {
        // d=1: kernel exponent 0
        assert_eq!(sphere_average_kernel(0.3, 1).unwrap(), 1.0);
        assert_eq!(sphere_average_kernel(0.9999, 1).unwrap(), 1.0);
        // rho = 0
        assert_eq!(sphere_average_kernel(0.0, 2).unwrap(), 1.0);
        assert_eq!(sphere_average_kernel(0.0, 3).unwrap(), 1.0);
        // d=2 against the AGM closed form
        for rho in [0.1, 0.5, 0.8, 0.95] {
            let v = sphere_average_kernel(rho, 2).unwrap();
            assert_relative_eq!(v, 1.0 / agm(1.0 + rho, 1.0 - rho), max_relative = 1e-8);
        }
        // d=3 against the log closed form
        for rho in [0.2, 0.5, 0.9] {
            let v = sphere_average_kernel(rho, 3).unwrap();
            let exact = ((1.0 + rho) / (1.0 - rho)).ln() / (2.0 * rho);
            assert_relative_eq!(v, exact, max_relative = 1e-8);
        }
        // singular ring
        assert!(sphere_average_kernel(1.0, 2).is_err());
        assert!(sphere_average_kernel(1.0, 3).is_err());
    }

    #[test]
    fn sphere_average_self_convergence() {
        // value stable under a tolerance refinement (d=2, rho=0.5)
        let coarse = sphere_average_kernel(0.5, 2).unwrap();
        let v = integrate(
            |theta: f64| (1.25 - (theta.cos())).powf(-0.5),
            0.0,
            std::f64::consts::PI,
            QuadTol::rel(1e-13),
        )
        .unwrap()
            / std::f64::consts::PI;
        assert!((coarse - v).abs() <= 1e-6 * v.abs());
    }

    #[test]
    fn kernel_ball_integral_values() {
        // d=1: exactly 1 for every lambda
        for lambda in [0.2, 0.7, 1.0] {
            assert_relative_eq!(kernel_ball_integral(lambda, 1).unwrap(), 1.0, max_relative = 1e-12);
        }
        // lambda = 1 equals eta_d / d
        for d in [2usize, 3] {
            let v = kernel_ball_integral(1.0, d).unwrap();
            let e = eta(d).unwrap();
            assert_relative_eq!(v, e / d as f64, max_relative = 1e-5);
        }
        // never exceeds 1
        for d in [1usize, 2, 3] {
            for lambda in [0.1, 0.4, 0.9, 1.0] {
                assert!(kernel_ball_integral(lambda, d).unwrap() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn eta_closed_forms() {
        // closed forms 1, 4/pi, 3/2; advertised quadrature tolerance 1e-6
        assert_relative_eq!(eta(1).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(eta(2).unwrap(), 4.0 / std::f64::consts::PI, max_relative = 1e-6);
        assert_relative_eq!(eta(3).unwrap(), 1.5, max_relative = 1e-6);
    }

    #[test]
    fn eta_against_monte_carlo() {
        for d in [2usize, 3] {
            let q = eta(d).unwrap();
            let m = mc::eta(d, 2_000_000, 99);
            assert!(
                (q - m.value).abs() < 3.0 * m.stderr,
                "d={d}: quad {q} vs mc {} +- {}",
                m.value,
                m.stderr
            );
        }
    }

    #[test]
    fn gamma_closed_forms_and_monte_carlo() {
        // d=1: double integral 4, omega = kappa = 2
        assert!((gamma_const(1).unwrap() - 1.0).abs() < 1e-10);
        // classical values: 8/(3 pi) for the disk, 3/4 for the ball
        assert_relative_eq!(
            gamma_const(2).unwrap(),
            8.0 / (3.0 * std::f64::consts::PI),
            max_relative = 1e-6
        );
        assert_relative_eq!(gamma_const(3).unwrap(), 0.75, max_relative = 1e-6);
        for d in [2usize, 3] {
            let q = gamma_const(d).unwrap();
            let m = mc::gamma(d, 2_000_000, 17);
            assert!(
                (q - m.value).abs() < 3.0 * m.stderr,
                "d={d}: quad {q} vs mc {} +- {}",
                m.value,
                m.stderr
            );
        }
        // b_d = 1 - gamma_d / 2
        assert!((lower_bound_base(1).unwrap() - 0.5).abs() < 1e-10);
        assert!(lower_bound_base(2).unwrap() > 0.5);
        assert!(lower_bound_base(3).unwrap() > 0.5);
    }

    #[test]
    fn weighted_kernel_matches_series_in_d3() {
        // J_k = 2 pi * int_0^1 rho^{k+1} ln((1+rho)/(1-rho)) d rho
        //     = 4 pi * sum over odd j of 1 / (j (k + j + 2))
        for k in [0u32, 1, 2, 5] {
            let mut series = 0.0;
            let mut j = 1u64;
            loop {
                series += 1.0 / (j as f64 * (k as f64 + j as f64 + 2.0));
                j += 2;
                if j > 4_000_001 {
                    break;
                }
            }
            let exact = 4.0 * std::f64::consts::PI * series;
            let v = weighted_unit_ball_kernel(|r| r.powi(k as i32), 3).unwrap();
            assert_relative_eq!(v, exact, max_relative = 1e-4);
        }
    }

    #[test]
    fn weighted_kernel_total_matches_eta() {
        for d in [1usize, 2, 3] {
            let total = weighted_unit_ball_kernel(|_| 1.0, d).unwrap();
            let e = eta(d).unwrap() * unit_ball_volume(d);
            assert_relative_eq!(total, e, max_relative = 1e-5);
        }
    }

    #[test]
    fn phi_scaling_property() {
        for d in [2usize, 3] {
            for n in [0u32, 1, 2] {
                let a = 0.35;
                let v1 = phi_n(a, n, d, 1.0).unwrap();
                let v2 = phi_n(2.0 * a, n, d, 1.0).unwrap();
                assert!(v1 >= 0.0);
                assert_relative_eq!(v2, 2.0f64.powi(n as i32 + 1) * v1, max_relative = 1e-4);
            }
        }
        // d=1 closed form: phi_0 = a / (2L)
        assert_relative_eq!(phi_n(0.4, 0, 1, 1.0).unwrap(), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn drop_integral_d1_fixture() {
        // f = indicator of [2,3] on [-4,4], t = 0.5, L = 4:
        // (L omega_1)^-1 * 1 * 1 = 0.125
        use crate::rearrange::{GridFunction, GridGeometry};
        let geom = GridGeometry::new(1, 4.0, 64).unwrap();
        let mut c = [0.0];
        let values: Vec<f64> = (0..64)
            .map(|i| {
                geom.center(i, &mut c);
                f64::from(c[0] > 2.0 && c[0] < 3.0)
            })
            .collect();
        let f = GridFunction::new(geom, values).unwrap();
        let v = drop_double_integral(&f, 0.5, 4.0).unwrap();
        assert_relative_eq!(v, 0.125, max_relative = 1e-12);
        // f already symmetric: A0 empty, drop 0
        let fstar = schwarz(&f);
        assert_eq!(drop_double_integral(&fstar, 0.5, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn coefficient_monotonicity_inputs() {
        // c_k integrand grows with k pointwise; the weighted kernels must too
        let mut prev = 0.0;
        for k in 1..=6 {
            let v = weighted_unit_ball_kernel(|r| 1.0 - r.powi(k), 2).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        // bounded by the full kernel ball integral
        let full = weighted_unit_ball_kernel(|_| 1.0, 2).unwrap();
        assert!(prev <= full);
    }
}
