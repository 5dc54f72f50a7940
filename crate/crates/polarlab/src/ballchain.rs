//! Random polarization of balls: the distance chain and everything exact
//! about it.
//!
//! A ball polarizes to itself or to its mirror image, whichever center lies
//! on the origin side, so the dynamics reduce to the chain `X_n` of center
//! distances. The chain law is explicit — `P(X_{n+1} <= b | X_n = x)` is the
//! kernel mass of `B_b` seen from `x` — which yields moment recurrences with
//! coefficients `c_k`, a closed binomial representation of `E X_n`, complete
//! monotonicity of the coefficient products (the Hausdorff moment condition),
//! closed forms in d = 1, and two comparison chains that bound the full chain
//! in the stochastic order.

use crate::geom::{self, Point};
use crate::quad;
use crate::rng::run_trials;
use crate::stats::{self, Accumulator};
use crate::{parameter_error, unit_ball_volume, unit_sphere_area, Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A ball undergoing random polarization: only the center moves, the radius
/// never changes.
#[derive(Debug, Clone, PartialEq)]
pub struct BallState {
    pub center: Point,
    pub radius: f64,
    pub support_radius: f64,
}

impl BallState {
    /// Requires `|center| + radius < support_radius` and `radius > 0`.
    pub fn new(center: Point, radius: f64, support_radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(parameter_error("radius", "must be positive"));
        }
        if center.norm() + radius >= support_radius {
            return Err(parameter_error(
                "center",
                format!(
                    "|center| + radius = {} must stay below L = {support_radius}",
                    center.norm() + radius
                ),
            ));
        }
        Ok(Self { center, radius, support_radius })
    }

    /// `X_n`: the distance of the center from the origin.
    pub fn distance_from_origin(&self) -> f64 {
        self.center.norm()
    }
}

/// Polarize the ball: keep the center if it lies on the origin side of the
/// hyperplane (or on it), otherwise reflect it. `|center|` never increases.
pub fn polarize_ball(b: &BallState, r: &geom::Reflection) -> BallState {
    let mut out = b.clone();
    if matches!(r.classify(&b.center), geom::Side::Minus) {
        r.reflect_in_place(&mut out.center.coords);
    }
    out
}

/// Per-step moment estimates of a simulated chain.
#[derive(Debug, Clone)]
pub struct ChainStatistics {
    pub dim: usize,
    pub support_radius: f64,
    pub z0: f64,
    pub seed: u64,
    pub trials: u64,
    pub max_moment: usize,
    /// `(steps + 1) * max_moment` accumulators, row major in `(n, k - 1)`.
    moments: Vec<Accumulator>,
    /// Per-trial recurrence residuals `X_n^k - X_{n-1}^k + c_k X_{n-1}^(k+1)`
    /// for `n >= 1`, `k < max_moment`, when a coefficient table was supplied.
    residuals: Option<Vec<Accumulator>>,
    residual_moments: usize,
    /// Chain values at the final step, one per trial, when requested.
    pub final_samples: Option<Vec<f64>>,
}

impl ChainStatistics {
    pub fn steps(&self) -> usize {
        self.moments.len() / self.max_moment - 1
    }

    fn idx(&self, n: usize, k: usize) -> usize {
        assert!(k >= 1 && k <= self.max_moment, "moment order {k}");
        n * self.max_moment + (k - 1)
    }

    /// Sample mean of `X_n^k`.
    pub fn moment(&self, n: usize, k: usize) -> f64 {
        self.moments[self.idx(n, k)].mean()
    }

    pub fn moment_stderr(&self, n: usize, k: usize) -> f64 {
        self.moments[self.idx(n, k)].stderr()
    }

    /// `z_n`: the mean distance at step `n`.
    pub fn mean_distance(&self, n: usize) -> f64 {
        self.moment(n, 1)
    }

    pub fn mean_distance_stderr(&self, n: usize) -> f64 {
        self.moment_stderr(n, 1)
    }

    fn residual_acc(&self, n: usize, k: usize) -> Option<&Accumulator> {
        let table = self.residuals.as_ref()?;
        if n == 0 || k == 0 || k > self.residual_moments {
            return None;
        }
        table.get((n - 1) * self.residual_moments + (k - 1))
    }

    /// CSV with a metadata comment line, then `n,k,moment,stderr,trials`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(
            out,
            "# d={},L={},z0={},seed={},trials={}",
            self.dim, self.support_radius, self.z0, self.seed, self.trials
        )
        .unwrap();
        writeln!(out, "n,k,moment,stderr,trials").unwrap();
        for n in 0..=self.steps() {
            for k in 1..=self.max_moment {
                writeln!(
                    out,
                    "{n},{k},{},{},{}",
                    self.moment(n, k),
                    self.moment_stderr(n, k),
                    self.trials
                )
                .unwrap();
            }
        }
        out
    }
}

/// Full set of knobs for the chain simulator.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub x0: Point,
    pub radius: f64,
    pub support_radius: f64,
    pub steps: usize,
    pub trials: u64,
    pub seed: u64,
    pub max_moment: usize,
    pub record_final_samples: bool,
    /// Accumulate per-trial recurrence residuals against these coefficients.
    pub residual_table: Option<CoefficientTable>,
}

impl ChainConfig {
    pub fn new(
        x0: Point,
        radius: f64,
        support_radius: f64,
        steps: usize,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            x0,
            radius,
            support_radius,
            steps,
            trials,
            seed,
            max_moment: 4,
            record_final_samples: false,
            residual_table: None,
        }
    }
}

struct ChainAcc {
    moments: Vec<Accumulator>,
    residuals: Vec<Accumulator>,
    finals: Vec<f64>,
}

/// Simulate the distance chain of `trials` independent polarization
/// sequences applied to the ball `x0 + B_radius` (moments up to order 4).
pub fn simulate_chain(
    x0: &Point,
    radius: f64,
    support_radius: f64,
    steps: usize,
    trials: u64,
    seed: u64,
) -> Result<ChainStatistics> {
    run_chain(&ChainConfig::new(
        x0.clone(),
        radius,
        support_radius,
        steps,
        trials,
        seed,
    ))
}

pub fn run_chain(cfg: &ChainConfig) -> Result<ChainStatistics> {
    BallState::new(cfg.x0.clone(), cfg.radius, cfg.support_radius)?;
    if cfg.trials == 0 {
        return Err(parameter_error("trials", "must be at least 1"));
    }
    if cfg.max_moment == 0 || cfg.max_moment > 16 {
        return Err(parameter_error("max_moment", "must lie in 1..=16"));
    }
    if let Some(table) = &cfg.residual_table {
        if table.dim != cfg.x0.dim() || table.support_radius != cfg.support_radius {
            return Err(parameter_error(
                "residual_table",
                "coefficient table geometry does not match the chain",
            ));
        }
        if table.len() < cfg.max_moment {
            return Err(parameter_error(
                "residual_table",
                "table too short for the requested moments",
            ));
        }
    }
    let d = cfg.x0.dim();
    let k_max = cfg.max_moment;
    let res_k = if cfg.residual_table.is_some() { k_max - 1 } else { 0 };
    let coeffs: Vec<f64> = cfg
        .residual_table
        .as_ref()
        .map(|t| (1..=res_k).map(|k| t.coefficient(k)).collect())
        .unwrap_or_default();
    let l = cfg.support_radius;
    let steps = cfg.steps;

    let acc = run_trials(
        cfg.trials,
        cfg.seed,
        || ChainAcc {
            moments: vec![Accumulator::default(); (steps + 1) * k_max],
            residuals: vec![Accumulator::default(); steps * res_k],
            finals: Vec::new(),
        },
        |_trial, rng, acc| {
            let mut x = cfg.x0.coords.clone();
            let mut pole = vec![0.0; d];
            let mut pows = vec![0.0; k_max + 1];
            let mut prev_pows = vec![0.0; k_max + 1];
            let mut dist = geom::norm(&x);
            fill_powers(&mut pows, dist);
            push_moments(&mut acc.moments[..k_max], &pows);
            for step in 1..=steps {
                geom::sample_pole_into(l, rng, &mut pole);
                let pole_n2 = geom::dot(&pole, &pole);
                let s = geom::dot(&x, &pole) - pole_n2 / 2.0;
                if s > geom::BOUNDARY_TOL {
                    // center on the far side: reflect it toward the origin
                    let coef = 2.0 * s / pole_n2;
                    for (xi, pi) in x.iter_mut().zip(&pole) {
                        *xi -= coef * pi;
                    }
                    dist = geom::norm(&x);
                }
                std::mem::swap(&mut pows, &mut prev_pows);
                fill_powers(&mut pows, dist);
                let base = step * k_max;
                push_moments(&mut acc.moments[base..base + k_max], &pows);
                for (k, ck) in coeffs.iter().enumerate() {
                    // pows[i] holds X^(i+1)
                    let r = pows[k] - prev_pows[k] + ck * prev_pows[k + 1];
                    acc.residuals[(step - 1) * res_k + k].push(r);
                }
            }
            if cfg.record_final_samples {
                acc.finals.push(dist);
            }
        },
        merge_chain_acc,
    );

    Ok(ChainStatistics {
        dim: d,
        support_radius: l,
        z0: cfg.x0.norm(),
        seed: cfg.seed,
        trials: cfg.trials,
        max_moment: k_max,
        moments: acc.moments,
        residuals: cfg.residual_table.as_ref().map(|_| acc.residuals),
        residual_moments: res_k,
        final_samples: cfg.record_final_samples.then_some(acc.finals),
    })
}

fn merge_chain_acc(a: &mut ChainAcc, b: ChainAcc) {
    for (x, y) in a.moments.iter_mut().zip(&b.moments) {
        x.merge(y);
    }
    for (x, y) in a.residuals.iter_mut().zip(&b.residuals) {
        x.merge(y);
    }
    a.finals.extend_from_slice(&b.finals);
}

fn fill_powers(pows: &mut [f64], x: f64) {
    let mut p = 1.0;
    for slot in pows.iter_mut() {
        p *= x;
        *slot = p;
    }
}

fn push_moments(accs: &mut [Accumulator], pows: &[f64]) {
    for (acc, p) in accs.iter_mut().zip(pows) {
        acc.push(*p);
    }
}

/// Moment-recurrence coefficients `c_k` with their partial products.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub dim: usize,
    pub support_radius: f64,
    values: Vec<f64>,
}

impl CoefficientTable {
    /// Build `c_0..c_max_k`: the closed form `k / ((k+1) 2L)` in d = 1, the
    /// kernel quadrature otherwise.
    pub fn build(dim: usize, support_radius: f64, max_k: usize) -> Result<Self> {
        if support_radius <= 0.0 {
            return Err(parameter_error("L", "must be positive"));
        }
        let mut values = Vec::with_capacity(max_k + 1);
        for k in 0..=max_k {
            values.push(coefficient(k as u32, dim, support_radius)?);
        }
        // c_k nondecreasing for k >= 1: the integrand 1 - |y|^k grows with k
        for pair in values.windows(2).skip(1) {
            if pair[1] + 1e-12 < pair[0] {
                return Err(Error::Tolerance(format!(
                    "coefficients not monotone: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { dim, support_radius, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// `prod_{i=0}^{k} c_i`.
    pub fn product(&self, k: usize) -> f64 {
        self.values[..=k].iter().product()
    }
}

/// `c_k = (2 L omega_d)^-1 * integral over B_1 of (1 - |y|^k) |u-y|^-(d-1)`,
/// with `c_0 = 1` by convention.
pub fn coefficient(k: u32, d: usize, support_radius: f64) -> Result<f64> {
    if support_radius <= 0.0 {
        return Err(parameter_error("L", "must be positive"));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if d == 1 {
        return Ok(k as f64 / ((k as f64 + 1.0) * 2.0 * support_radius));
    }
    let moment = quad::weighted_unit_ball_kernel(|r| 1.0 - r.powi(k as i32), d)?;
    Ok(moment / (2.0 * support_radius * unit_sphere_area(d)))
}

// ---------------------------------------------------------------------------
// exact arithmetic
// ---------------------------------------------------------------------------

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn binomial(n: usize, k: usize) -> BigInt {
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// Coefficients as exact rationals: closed form for d = 1 (from the exact
/// rational value of `L`), the measured quadrature values otherwise.
fn rational_coefficients(d: usize, l: f64, up_to: usize) -> Result<Vec<BigRational>> {
    if d == 1 {
        let two_l = BigRational::from_integer(2.into()) * rational(l);
        Ok((0..=up_to)
            .map(|k| {
                if k == 0 {
                    BigRational::one()
                } else {
                    BigRational::new(BigInt::from(k), BigInt::from(k + 1)) / &two_l
                }
            })
            .collect())
    } else {
        (0..=up_to)
            .map(|k| coefficient(k as u32, d, l).map(rational))
            .collect()
    }
}

/// Decimal digits the alternating sum may cancel before the evaluation is
/// refused (the inputs carry roughly 15-16 digits).
const MAX_CANCELLATION_DIGITS: i32 = 12;

/// The binomial representation
/// `z_n = sum_k C(n,k) (-1)^k z0^(k+1) prod_{i<=k} c_i`, evaluated in exact
/// rational arithmetic so round-off never enters the alternating sum; only
/// the cancellation of the inputs' own error budget is checked.
pub fn zn_exact(z0: f64, d: usize, l: f64, n: usize) -> Result<f64> {
    if !(0.0 < z0 && z0 < l) {
        return Err(parameter_error("z0", "must lie in (0, L)"));
    }
    let cs = rational_coefficients(d, l, n)?;
    let (value, amplification) = zn_exact_rational(&rational(z0), &cs, n);
    let amp = amplification.to_f64().unwrap_or(f64::INFINITY);
    if amp > 10f64.powi(MAX_CANCELLATION_DIGITS) {
        return Err(Error::Unstable { n, digits: MAX_CANCELLATION_DIGITS as u32 });
    }
    Ok(value.to_f64().unwrap_or(f64::NAN))
}

/// Rational evaluation of the representation together with the cancellation
/// factor `sum |terms| / |result|`.
pub(crate) fn zn_exact_rational(
    z0: &BigRational,
    cs: &[BigRational],
    n: usize,
) -> (BigRational, BigRational) {
    let mut sum = BigRational::zero();
    let mut abs_sum = BigRational::zero();
    let mut z_pow = z0.clone(); // z0^(k+1)
    let mut c_prod = BigRational::one();
    for (k, ck) in cs.iter().enumerate().take(n + 1) {
        c_prod *= ck;
        let term = BigRational::from_integer(binomial(n, k)) * &z_pow * &c_prod;
        abs_sum += term.abs();
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        z_pow *= z0;
    }
    let amp = if sum.is_zero() { abs_sum.clone() } else { abs_sum / sum.abs() };
    (sum, amp)
}

/// Residual of the moment recurrence
/// `E X_n^k - E X_{n-1}^k + c_k E X_{n-1}^(k+1)` with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct ResidualEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// When the chain was simulated with the same coefficient table the residual
/// was accumulated per trial (exact standard error of the combination);
/// otherwise it is assembled from marginal moments with a conservative
/// error bound.
pub fn moment_recurrence_residual(
    stats: &ChainStatistics,
    table: &CoefficientTable,
    n: usize,
    k: usize,
) -> Result<ResidualEstimate> {
    if n == 0 || n > stats.steps() {
        return Err(parameter_error("n", "must lie in 1..=steps"));
    }
    if k == 0 || k + 1 > stats.max_moment {
        return Err(parameter_error("k", "chain lacks moment k+1"));
    }
    if let Some(acc) = stats.residual_acc(n, k) {
        return Ok(ResidualEstimate { value: acc.mean(), stderr: acc.stderr() });
    }
    let ck = table.coefficient(k);
    let value = stats.moment(n, k) - stats.moment(n - 1, k) + ck * stats.moment(n - 1, k + 1);
    let stderr = (stats.moment_stderr(n, k).powi(2)
        + stats.moment_stderr(n - 1, k).powi(2)
        + (ck * stats.moment_stderr(n - 1, k + 1)).powi(2))
    .sqrt();
    Ok(ResidualEstimate { value, stderr })
}

/// Outcome of the complete-monotonicity (Hausdorff moment) check on the
/// coefficient products.
#[derive(Debug, Clone)]
pub struct HausdorffReport {
    pub all_nonnegative: bool,
    /// Most negative difference found (0 when everything is nonnegative).
    pub worst_violation: f64,
    /// Relative tolerance granted per difference for quadrature error.
    pub tolerance_scale: f64,
    pub checked_differences: usize,
}

/// Check `(-1)^n Delta^n prod_{i<=j} c_i >= 0` for all `n <= n_max`,
/// `j <= j_max`, differencing over `j`. The table must extend to
/// `n_max + j_max`. Each difference is granted `rel_tol` times its absolute
/// term sum to absorb quadrature error in the coefficients.
pub fn hausdorff_sign_check(
    table: &CoefficientTable,
    n_max: usize,
    j_max: usize,
    rel_tol: f64,
) -> Result<HausdorffReport> {
    if table.len() <= n_max + j_max {
        return Err(parameter_error(
            "table",
            format!("needs coefficients up to {}", n_max + j_max),
        ));
    }
    let products: Vec<f64> = (0..=n_max + j_max).map(|i| table.product(i)).collect();
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut checked = 0;
    for n in 0..=n_max {
        for j in 0..=j_max {
            let mut value = 0.0;
            let mut scale = 0.0;
            for k in 0..=n {
                let c = binomial(n, k).to_f64().unwrap();
                let term = c * products[j + k];
                scale += term;
                value += if k % 2 == 0 { term } else { -term };
            }
            checked += 1;
            if value < -rel_tol * scale {
                ok = false;
                worst = worst.min(value);
            }
        }
    }
    Ok(HausdorffReport {
        all_nonnegative: ok,
        worst_violation: worst,
        tolerance_scale: rel_tol,
        checked_differences: checked,
    })
}

/// Exact rational version of the sign check for the d = 1 closed-form
/// coefficients: no tolerance at all.
pub fn hausdorff_sign_check_exact_d1(l: f64, n_max: usize, j_max: usize) -> Result<bool> {
    let cs = rational_coefficients(1, l, n_max + j_max)?;
    let mut products = Vec::with_capacity(cs.len());
    let mut p = BigRational::one();
    for c in &cs {
        p *= c;
        products.push(p.clone());
    }
    for n in 0..=n_max {
        for j in 0..=j_max {
            let mut value = BigRational::zero();
            for k in 0..=n {
                let term = BigRational::from_integer(binomial(n, k)) * &products[j + k];
                if k % 2 == 0 {
                    value += term;
                } else {
                    value -= term;
                }
            }
            if value < BigRational::zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `E X_n^k` from the d = 1 moment measure (uniform on `[0, 1/(2L)]`),
/// evaluated in exact rational arithmetic.
pub fn moment_via_mu_d1(k: usize, n: usize, z0: f64, l: f64) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    let z0_r = rational(z0);
    let two_l = BigRational::from_integer(2.into()) * rational(l);
    let b = two_l.recip(); // upper end of the support of mu
    // prefactor z0^k / prod_{i=0}^{k-1} c_i
    let cs = rational_coefficients(1, l, k)?;
    let mut prefactor = BigRational::one();
    for c in cs.iter().take(k) {
        prefactor /= c;
    }
    for _ in 0..k {
        prefactor *= &z0_r;
    }
    // integral of x^(k-1) (1 - z0 x)^n over mu
    //   = 2L * sum_j C(n,j) (-z0)^j B^(k+j) / (k+j)
    let mut integral = BigRational::zero();
    let mut z0_j = BigRational::one();
    let mut b_pow = BigRational::one();
    for _ in 0..k {
        b_pow *= &b;
    }
    for j in 0..=n {
        let term = BigRational::from_integer(binomial(n, j)) * &z0_j * &b_pow
            / BigRational::from_integer((k + j).into());
        if j % 2 == 0 {
            integral += term;
        } else {
            integral -= term;
        }
        z0_j *= &z0_r;
        b_pow *= &b;
    }
    integral *= two_l;
    Ok((prefactor * integral).to_f64().unwrap_or(f64::NAN))
}

// ---------------------------------------------------------------------------
// symmetric-difference geometry
// ---------------------------------------------------------------------------

/// Volume of the intersection of two balls of radius `r` with centers `s`
/// apart (two equal spherical caps of height `r - s/2`).
pub fn ball_intersection_volume(r: f64, s: f64, d: usize) -> Result<f64> {
    if r < 0.0 || s < 0.0 {
        return Err(parameter_error("radius", "must be nonnegative"));
    }
    if s >= 2.0 * r {
        return Ok(0.0);
    }
    Ok(match d {
        1 => 2.0 * r - s,
        2 => 2.0 * r * r * (s / (2.0 * r)).acos() - s / 2.0 * (4.0 * r * r - s * s).sqrt(),
        3 => std::f64::consts::PI * (2.0 * r - s).powi(2) * (4.0 * r + s) / 12.0,
        _ => {
            // 2 kappa_{d-1} * integral over [s/2, r] of (r^2 - t^2)^((d-1)/2)
            2.0 * unit_ball_volume(d - 1)
                * quad::integrate(
                    |t: f64| (r * r - t * t).powf((d as f64 - 1.0) / 2.0),
                    s / 2.0,
                    r,
                    quad::QuadTol::rel(1e-10),
                )?
        }
    })
}

/// `|B_r symdiff (x + B_r)|` for `|x| = s`; `2 kappa_d r^d` once the balls
/// are disjoint.
pub fn symdiff_balls(r: f64, s: f64, d: usize) -> Result<f64> {
    let ball = unit_ball_volume(d) * r.powi(d as i32);
    Ok(2.0 * (ball - ball_intersection_volume(r, s, d)?))
}

/// The symmetric-difference display exactly as printed in the source
/// material (coefficient `r^(d-1) omega_d`), kept for the discrepancy
/// report; the first-principles coefficient is `2 kappa_{d-1} r^d`.
pub fn symdiff_printed_formula(r: f64, s: f64, d: usize) -> Result<f64> {
    let ball = unit_ball_volume(d) * r.powi(d as i32);
    let upper = (s / (2.0 * r)).clamp(-1.0, 1.0).acos();
    let integral = quad::integrate(
        |t: f64| t.sin().powi(d as i32),
        0.0,
        upper,
        quad::QuadTol::rel(1e-10),
    )?;
    Ok(2.0 * (ball - r.powi(d as i32 - 1) * unit_sphere_area(d) * integral))
}

/// First-principles slope of the symmetric difference at `s = 0`:
/// `2 kappa_{d-1} r^(d-1)`.
pub fn symdiff_slope_exact(r: f64, d: usize) -> f64 {
    let kappa_slice = if d == 1 { 1.0 } else { unit_ball_volume(d - 1) };
    2.0 * kappa_slice * r.powi(d as i32 - 1)
}

/// Perimeter of `B_r`: `omega_d r^(d-1)`.
pub fn ball_perimeter(r: f64, d: usize) -> f64 {
    unit_sphere_area(d) * r.powi(d as i32 - 1)
}

/// Finite-difference slope of [`symdiff_balls`] at `s = 0+` (one-sided at
/// zero, step `r * 1e-4`).
pub fn symdiff_slope_at_zero(r: f64, d: usize) -> Result<f64> {
    if r <= 0.0 {
        return Err(parameter_error("r", "must be positive"));
    }
    let h = r * 1e-4;
    Ok(symdiff_balls(r, h, d)? / h)
}

// ---------------------------------------------------------------------------
// comparison chains
// ---------------------------------------------------------------------------

/// The projected chain: each sampled pole is replaced by a pole of equal
/// magnitude along the initial direction (signed by the inner product), and
/// the 1-d polarization step is applied on that line. The magnitude is
/// uniform on `(0, 2L]`, so the result has the d = 1 chain law regardless of
/// the ambient dimension.
pub fn projected_chain(
    x0: &Point,
    support_radius: f64,
    steps: usize,
    trials: u64,
    seed: u64,
    max_moment: usize,
    record_final_samples: bool,
) -> Result<ChainStatistics> {
    let d = x0.dim();
    let x0_norm = x0.norm();
    if x0_norm == 0.0 {
        return Err(parameter_error("x0", "must be nonzero"));
    }
    if support_radius <= x0_norm {
        return Err(parameter_error("L", "must exceed |x0|"));
    }
    let unit: Vec<f64> = x0.coords.iter().map(|c| c / x0_norm).collect();
    let l = support_radius;
    let acc = run_trials(
        trials,
        seed,
        || ChainAcc {
            moments: vec![Accumulator::default(); (steps + 1) * max_moment],
            residuals: Vec::new(),
            finals: Vec::new(),
        },
        |_trial, rng, acc| {
            let mut pole = vec![0.0; d];
            let mut pows = vec![0.0; max_moment];
            let mut c = x0_norm; // signed coordinate along the initial direction
            fill_powers(&mut pows, c.abs());
            push_moments(&mut acc.moments[..max_moment], &pows);
            for step in 1..=steps {
                geom::sample_pole_into(l, rng, &mut pole);
                let q = geom::dot(&unit, &pole).signum() * geom::norm(&pole);
                let s = c * q - q * q / 2.0;
                if s > geom::BOUNDARY_TOL {
                    c = q - c;
                }
                fill_powers(&mut pows, c.abs());
                let base = step * max_moment;
                push_moments(&mut acc.moments[base..base + max_moment], &pows);
            }
            if record_final_samples {
                acc.finals.push(c.abs());
            }
        },
        merge_chain_acc,
    );
    Ok(ChainStatistics {
        dim: d,
        support_radius: l,
        z0: x0_norm,
        seed,
        trials,
        max_moment,
        moments: acc.moments,
        residuals: None,
        residual_moments: 0,
        final_samples: record_final_samples.then_some(acc.finals),
    })
}

/// `F_x(t)`: distribution function of `min(U, x)` with `U` uniform on
/// `[0, 2L]` — 1 for `t >= x`, else `t / (2L)`.
pub fn min_uniform_cdf(x: f64, t: f64, l: f64) -> f64 {
    if t >= x {
        1.0
    } else {
        t / (2.0 * l)
    }
}

/// Initial condition for the order-statistic chain.
#[derive(Debug, Clone, Copy)]
pub enum OrderStatStart {
    /// Plain d-th order statistic of `n + d` uniforms.
    Free,
    /// Reject initial configurations until the starting value lands in
    /// `value +- window`.
    At { value: f64, window: f64 },
}

/// The order-statistic comparison chain: `Y_n` is the d-th smallest of
/// `n + d` uniforms on `[0, gamma]`, simulated by growing one pooled sample
/// per step. Paths are monotone and the step law is the Markov kernel
/// `P(Y_{n+1} <= b | Y_n = y) = (b / gamma)(b / y)^(d-1)` for `b < y`.
pub fn order_statistic_chain(
    start: OrderStatStart,
    gamma: f64,
    d: usize,
    steps: usize,
    trials: u64,
    seed: u64,
    max_moment: usize,
    record_final_samples: bool,
) -> Result<ChainStatistics> {
    if gamma <= 0.0 {
        return Err(parameter_error("gamma", "must be positive"));
    }
    if d == 0 {
        return Err(Error::Dimension(0));
    }
    if let OrderStatStart::At { value, window } = start {
        if !(0.0 < value && value <= gamma) {
            return Err(parameter_error("value", "must lie in (0, gamma]"));
        }
        if window <= 0.0 {
            return Err(parameter_error("window", "must be positive"));
        }
    }
    use rand::Rng;
    let acc = run_trials(
        trials,
        seed,
        || ChainAcc {
            moments: vec![Accumulator::default(); (steps + 1) * max_moment],
            residuals: Vec::new(),
            finals: Vec::new(),
        },
        |_trial, rng, acc| {
            let mut pool = vec![0.0f64; d];
            loop {
                for slot in pool.iter_mut() {
                    *slot = gamma * rng.gen::<f64>();
                }
                pool.sort_by(|a, b| a.partial_cmp(b).unwrap());
                match start {
                    OrderStatStart::Free => break,
                    OrderStatStart::At { value, window } => {
                        if (pool[d - 1] - value).abs() <= window {
                            break;
                        }
                    }
                }
            }
            let mut pows = vec![0.0; max_moment];
            fill_powers(&mut pows, pool[d - 1]);
            push_moments(&mut acc.moments[..max_moment], &pows);
            for step in 1..=steps {
                let u = gamma * rng.gen::<f64>();
                if u < pool[d - 1] {
                    // insert u, dropping the current d-th smallest
                    let mut i = d - 1;
                    while i > 0 && pool[i - 1] > u {
                        pool[i] = pool[i - 1];
                        i -= 1;
                    }
                    pool[i] = u;
                }
                fill_powers(&mut pows, pool[d - 1]);
                let base = step * max_moment;
                push_moments(&mut acc.moments[base..base + max_moment], &pows);
            }
            if record_final_samples {
                acc.finals.push(pool[d - 1]);
            }
        },
        merge_chain_acc,
    );
    let z0 = match start {
        OrderStatStart::Free => f64::NAN,
        OrderStatStart::At { value, .. } => value,
    };
    Ok(ChainStatistics {
        dim: d,
        support_radius: gamma,
        z0,
        seed,
        trials,
        max_moment,
        moments: acc.moments,
        residuals: None,
        residual_moments: 0,
        final_samples: record_final_samples.then_some(acc.finals),
    })
}

/// Candidate scale constants for the order-statistic comparison, in the
/// order `(2 L d / eta_d, 2 L d eta_d)`. The kernel inequality
/// `P(X_{n+1} <= b | x) <= (b / 2L)(b/x)^(d-1) eta_d / d` matches the
/// order-statistic kernel `(b / gamma)(b/x)^(d-1)` only for the first one;
/// the second is what the printed bound displays. Both coincide at d = 1.
pub fn gamma_candidates(l: f64, d: usize) -> Result<(f64, f64)> {
    let eta = quad::eta(d)?;
    Ok((2.0 * l * d as f64 / eta, 2.0 * l * d as f64 * eta))
}

/// The numerically validated scale for the order-statistic chain.
pub fn validated_gamma(l: f64, d: usize) -> Result<f64> {
    Ok(gamma_candidates(l, d)?.0)
}

/// KS distance of `n X_n` from the exponential law with mean `2L`, for the
/// d = 1 chain started at `z0`.
pub fn exponential_limit_ks(
    l: f64,
    z0: f64,
    steps: usize,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    if !(0.0 < z0 && z0 < l) {
        return Err(parameter_error("z0", "must lie in (0, L)"));
    }
    let mut cfg = ChainConfig::new(Point::new(vec![z0]), (l - z0) / 2.0, l, steps, trials, seed);
    cfg.max_moment = 1;
    cfg.record_final_samples = true;
    let stats = run_chain(&cfg)?;
    let mut scaled: Vec<f64> = stats
        .final_samples
        .unwrap()
        .iter()
        .map(|x| steps as f64 * x)
        .collect();
    Ok(stats::ks_statistic(&mut scaled, stats::exponential_cdf(2.0 * l)))
}

/// The elementary sandwich for `z_n = E X_n`: lower
/// `(n+1)^-1 (1 - (1 - z0/4L)^(n+1))` — the exponent taken positive, since
/// the printed negative exponent makes the bound negative — and upper
/// `1 / (c_1 n)`.
#[derive(Debug, Clone, Copy)]
pub struct SandwichBounds {
    pub z0: f64,
    pub support_radius: f64,
    pub c1: f64,
}

impl SandwichBounds {
    pub fn new(z0: f64, l: f64, table: &CoefficientTable) -> Self {
        Self { z0, support_radius: l, c1: table.coefficient(1) }
    }

    pub fn lower(&self, n: usize) -> f64 {
        let base = 1.0 - self.z0 / (4.0 * self.support_radius);
        (1.0 - base.powi(n as i32 + 1)) / (n as f64 + 1.0)
    }

    /// The printed variant with the negative exponent, kept for the
    /// discrepancy report.
    pub fn lower_printed(&self, n: usize) -> f64 {
        let base = 1.0 - self.z0 / (4.0 * self.support_radius);
        (1.0 - base.powi(-(n as i32 + 1))) / (n as f64 + 1.0)
    }

    pub fn upper(&self, n: usize) -> f64 {
        assert!(n >= 1);
        1.0 / (self.c1 * n as f64)
    }
}
