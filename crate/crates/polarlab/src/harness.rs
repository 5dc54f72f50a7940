//! Monte Carlo driver for grid functions: the expected L1 distance to the
//! symmetric decreasing rearrangement after `n` random polarizations, with
//! the three bound checks attached (the 1/n upper bound, the geometric lower
//! bound, and the asymptotic limsup target for `n z_n`).

use crate::geom::{self, Reflection};
use crate::quad;
use crate::rearrange::{
    l1_distance_unchecked, perimeter_integral, polarize_values, schwarz_order, schwarz_with_order,
    snap_reflection_1d, GridFunction,
};
use crate::rng::run_trials;
use crate::stats::Accumulator;
use crate::{parameter_error, unit_ball_volume, Result};

/// Configuration of one convergence experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dim: usize,
    /// Support radius `L` (the reflection measure's scale).
    pub support_radius: f64,
    /// Grid half-width `H >= L`.
    pub half_width: f64,
    pub cells_per_axis: usize,
    pub steps: usize,
    pub trials: u64,
    pub seed: u64,
    /// Threshold grid for level-set quantities (strictly increasing,
    /// starting at 0, reaching past `max f`).
    pub thresholds: Vec<f64>,
    /// Worker threads; 0 uses the ambient thread pool.
    pub threads: usize,
    /// In d = 1, snap reflections to the half-cell lattice so polarization
    /// is an exact cell rearrangement.
    pub snap_d1: bool,
}

impl ExperimentConfig {
    pub fn new(dim: usize, support_radius: f64, half_width: f64, cells_per_axis: usize) -> Self {
        Self {
            dim,
            support_radius,
            half_width,
            cells_per_axis,
            steps: 100,
            trials: 1000,
            seed: 0,
            thresholds: (0..=100).map(|i| i as f64 / 100.0).collect(),
            threads: 0,
            snap_d1: true,
        }
    }

    fn validate(&self, f: &GridFunction) -> Result<()> {
        let geom = f.geometry();
        if geom.dim != self.dim
            || geom.half_width != self.half_width
            || geom.cells_per_axis != self.cells_per_axis
        {
            return Err(crate::Error::GridMismatch);
        }
        if self.half_width < self.support_radius {
            return Err(parameter_error("half_width", "grid must cover B_L"));
        }
        if self.trials == 0 {
            return Err(parameter_error("trials", "must be at least 1"));
        }
        f.check_support_radius(self.support_radius)?;
        Ok(())
    }
}

/// Per-step estimates of `z_n` plus every bound the experiment checks.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub dim: usize,
    pub support_radius: f64,
    pub half_width: f64,
    pub cells_per_axis: usize,
    pub trials: u64,
    pub seed: u64,
    /// `z_0 = ||f - f*||_1` on the grid (deterministic).
    pub z0: f64,
    /// `z_n` for `n = 0..=steps`.
    pub mean_dist: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `c_n = n z_n`.
    pub scaled: Vec<f64>,
    /// `2 d m(B_2L) ||f||_inf / n` (infinite at n = 0).
    pub upper_bound: Vec<f64>,
    /// `b_d^n z_0`.
    pub lower_bound: Vec<f64>,
    /// `L 2^(d+1) * integral of Per({f > t}*) dt`.
    pub limsup_target: f64,
    /// `b_d = 1 - gamma_d / 2`.
    pub lower_base: f64,
    /// O(h) mass slack granted to the bound verdicts.
    pub grid_slack: f64,
}

impl ConvergenceReport {
    pub fn steps(&self) -> usize {
        self.mean_dist.len() - 1
    }

    /// CSV: metadata comments, then
    /// `n,z_n,stderr,c_n,upper_bound,lower_bound,limsup_target`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(
            out,
            "# d={},L={},H={},m={},steps={},trials={},seed={}",
            self.dim,
            self.support_radius,
            self.half_width,
            self.cells_per_axis,
            self.steps(),
            self.trials,
            self.seed
        )
        .unwrap();
        writeln!(
            out,
            "# z0={},b_d={},limsup_target={},grid_slack={}",
            self.z0, self.lower_base, self.limsup_target, self.grid_slack
        )
        .unwrap();
        writeln!(out, "n,z_n,stderr,c_n,upper_bound,lower_bound,limsup_target").unwrap();
        for n in 0..=self.steps() {
            writeln!(
                out,
                "{n},{},{},{},{},{},{}",
                self.mean_dist[n],
                self.stderr[n],
                self.scaled[n],
                self.upper_bound[n],
                self.lower_bound[n],
                self.limsup_target
            )
            .unwrap();
        }
        out
    }
}

/// Estimate `z_n = E ||f^(sigma_1..sigma_n) - f*||_1` by applying `steps`
/// sampled reflections cumulatively per trial, and attach the bounds.
pub fn estimate_zn(f: &GridFunction, cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate(f)?;
    match cfg.threads {
        0 => estimate_zn_inner(f, cfg),
        threads => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| parameter_error("threads", e.to_string()))?;
            pool.install(|| estimate_zn_inner(f, cfg))
        }
    }
}

fn estimate_zn_inner(f: &GridFunction, cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let geometry = f.geometry();
    let d = geometry.dim;
    let order = schwarz_order(&geometry);
    let fstar = schwarz_with_order(f, &order);
    let cell_vol = geometry.cell_volume();
    let z0 = l1_distance_unchecked(f.values(), fstar.values()) * cell_vol;
    let steps = cfg.steps;
    let l = cfg.support_radius;
    let snap = cfg.snap_d1 && d == 1;

    let acc = run_trials(
        cfg.trials,
        cfg.seed,
        || vec![Accumulator::default(); steps],
        |_trial, rng, acc| {
            let mut current = f.values().to_vec();
            let mut next = Vec::with_capacity(current.len());
            let mut pole = vec![0.0; d];
            for step_acc in acc.iter_mut() {
                geom::sample_pole_into(l, rng, &mut pole);
                let mut refl = Reflection::from_pole_coords(pole.clone()).expect("nonzero pole");
                if snap {
                    refl = snap_reflection_1d(&refl, &geometry).expect("1-d grid");
                }
                polarize_values(&geometry, &current, &refl, &mut next);
                std::mem::swap(&mut current, &mut next);
                step_acc.push(l1_distance_unchecked(&current, fstar.values()) * cell_vol);
            }
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                x.merge(y);
            }
        },
    );

    let mut mean_dist = Vec::with_capacity(steps + 1);
    let mut stderr = Vec::with_capacity(steps + 1);
    mean_dist.push(z0);
    stderr.push(0.0);
    for a in &acc {
        mean_dist.push(a.mean());
        stderr.push(a.stderr());
    }
    let scaled: Vec<f64> = mean_dist
        .iter()
        .enumerate()
        .map(|(n, z)| n as f64 * z)
        .collect();

    let sup_norm = f.max_value();
    let ball_2l = unit_ball_volume(d) * (2.0 * l).powi(d as i32);
    let upper_bound: Vec<f64> = (0..=steps)
        .map(|n| {
            if n == 0 {
                f64::INFINITY
            } else {
                2.0 * d as f64 * ball_2l * sup_norm / n as f64
            }
        })
        .collect();
    let lower_base = quad::lower_bound_base(d)?;
    let lower_bound: Vec<f64> = (0..=steps)
        .map(|n| lower_base.powi(n as i32) * z0)
        .collect();
    let perim = perimeter_integral(f, &cfg.thresholds)?;
    let limsup_target = l * 2.0f64.powi(d as i32 + 1) * perim;
    let grid_slack = geometry.cell_size() * perim;

    Ok(ConvergenceReport {
        dim: d,
        support_radius: l,
        half_width: cfg.half_width,
        cells_per_axis: cfg.cells_per_axis,
        trials: cfg.trials,
        seed: cfg.seed,
        z0,
        mean_dist,
        stderr,
        scaled,
        upper_bound,
        lower_bound,
        limsup_target,
        lower_base,
        grid_slack,
    })
}

/// Fraction of the trailing steps used for the limsup verdict.
pub const TAIL_WINDOW: f64 = 0.25;
/// Multiplicative slack granted to the asymptotic limsup target.
pub const LIMSUP_SLACK: f64 = 0.25;

/// The three bound verdicts for a completed report.
#[derive(Debug, Clone)]
pub struct BoundVerdicts {
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub limsup_ok: bool,
    /// Largest `c_n` over the tail window.
    pub tail_max_scaled: f64,
    /// `limsup_target * (1 + LIMSUP_SLACK)`, the value compared against.
    pub limsup_threshold: f64,
    /// First step violating the upper bound, if any.
    pub upper_violation: Option<usize>,
    pub lower_violation: Option<usize>,
}

impl BoundVerdicts {
    pub fn all_ok(&self) -> bool {
        self.upper_ok && self.lower_ok && self.limsup_ok
    }
}

/// Check the report against its three bounds: the `1/n` upper bound and the
/// geometric lower bound per step (with 3 standard errors plus the O(h)
/// slack), and the tail-window maximum of `c_n` against the limsup target
/// with [`LIMSUP_SLACK`]. Requires at least 30 trials.
pub fn check_bounds(report: &ConvergenceReport) -> Result<BoundVerdicts> {
    if report.trials < 30 {
        return Err(parameter_error(
            "trials",
            "refusing verdicts below 30 trials",
        ));
    }
    let steps = report.steps();
    let mut upper_violation = None;
    let mut lower_violation = None;
    for n in 0..=steps {
        let z = report.mean_dist[n];
        let se3 = 3.0 * if n == 0 { 0.0 } else { report.stderr[n] };
        if z > report.upper_bound[n] + se3 + report.grid_slack && upper_violation.is_none() {
            upper_violation = Some(n);
        }
        if z < report.lower_bound[n] - se3 - report.grid_slack && lower_violation.is_none() {
            lower_violation = Some(n);
        }
    }
    let tail_start = ((steps as f64) * (1.0 - TAIL_WINDOW)).floor() as usize;
    let tail_start = tail_start.max(1);
    let tail_max_scaled = report.scaled[tail_start..]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let limsup_threshold = report.limsup_target * (1.0 + LIMSUP_SLACK);
    Ok(BoundVerdicts {
        upper_ok: upper_violation.is_none(),
        lower_ok: lower_violation.is_none(),
        limsup_ok: tail_max_scaled <= limsup_threshold,
        tail_max_scaled,
        limsup_threshold,
        upper_violation,
        lower_violation,
    })
}

/// Monte Carlo estimate of the expected one-step drop of
/// `m({f > t} symdiff {f* > t})` under one sampled reflection: mean and
/// standard error. Its expectation equals [`quad::drop_double_integral`].
pub fn one_step_drop_mc(f: &GridFunction, t: f64, cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    cfg.validate(f)?;
    if t < 0.0 {
        return Err(parameter_error("t", "must be nonnegative"));
    }
    let geometry = f.geometry();
    let d = geometry.dim;
    let order = schwarz_order(&geometry);
    let fstar = schwarz_with_order(f, &order);
    let cell_vol = geometry.cell_volume();
    let snap = cfg.snap_d1 && d == 1;
    let base: f64 = symdiff_count(f.values(), fstar.values(), t) as f64 * cell_vol;
    let l = cfg.support_radius;

    let acc = run_trials(
        cfg.trials,
        cfg.seed,
        Accumulator::default,
        |_trial, rng, acc| {
            let mut pole = vec![0.0; d];
            let mut out = Vec::with_capacity(f.values().len());
            geom::sample_pole_into(l, rng, &mut pole);
            let mut refl = Reflection::from_pole_coords(pole.clone()).expect("nonzero pole");
            if snap {
                refl = snap_reflection_1d(&refl, &geometry).expect("1-d grid");
            }
            polarize_values(&geometry, f.values(), &refl, &mut out);
            let after = symdiff_count(&out, fstar.values(), t) as f64 * cell_vol;
            acc.push(base - after);
        },
        |a, b| a.merge(&b),
    );
    Ok((acc.mean(), acc.stderr()))
}

fn symdiff_count(a: &[f64], b: &[f64], t: f64) -> usize {
    a.iter()
        .zip(b)
        .filter(|(x, y)| (**x > t) != (**y > t))
        .count()
}

/// Named grid fixtures shared by the experiments and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// d=1 off-center interval in `B_1/2` (grid-aligned endpoints).
    IntervalD1,
    /// d=2 off-center disk in `B_1`.
    DiskD2,
    /// d=2 off-center parabolic bump in `B_1`.
    BumpD2,
}

impl Fixture {
    pub fn parse(name: &str) -> Option<Fixture> {
        match name {
            "interval-d1" => Some(Fixture::IntervalD1),
            "disk-d2" => Some(Fixture::DiskD2),
            "bump-d2" => Some(Fixture::BumpD2),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Fixture::IntervalD1 => "interval-d1",
            Fixture::DiskD2 => "disk-d2",
            Fixture::BumpD2 => "bump-d2",
        }
    }

    pub fn all() -> [Fixture; 3] {
        [Fixture::IntervalD1, Fixture::DiskD2, Fixture::BumpD2]
    }

    pub fn dim(&self) -> usize {
        match self {
            Fixture::IntervalD1 => 1,
            _ => 2,
        }
    }

    pub fn support_radius(&self) -> f64 {
        match self {
            Fixture::IntervalD1 => 0.5,
            _ => 1.0,
        }
    }

    /// The fixture function at the given resolution, together with the
    /// matching experiment configuration.
    pub fn build(&self, cells_per_axis: usize) -> (GridFunction, ExperimentConfig) {
        use crate::rearrange::{indicator_ball, radial_bump, BumpProfile, GridGeometry};
        let d = self.dim();
        let l = self.support_radius();
        let geom = GridGeometry::new(d, l, cells_per_axis).unwrap();
        let f = match self {
            // center 13/64, radius 1/4: endpoints land on cell edges for
            // every m divisible by 64
            Fixture::IntervalD1 => indicator_ball(geom, &[13.0 / 64.0], 0.25),
            Fixture::DiskD2 => indicator_ball(geom, &[0.45, 0.0], 0.3),
            Fixture::BumpD2 => radial_bump(geom, &[0.4, 0.0], 0.45, BumpProfile::Parabolic),
        };
        let cfg = ExperimentConfig::new(d, l, l, cells_per_axis);
        (f, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrange::schwarz;

    #[test]
    fn symmetric_input_stays_near_zero() {
        let (f, mut cfg) = Fixture::DiskD2.build(64);
        cfg.steps = 30;
        cfg.trials = 64;
        cfg.seed = 3;
        let fstar = schwarz(&f);
        let report = estimate_zn(&fstar, &cfg).unwrap();
        assert_eq!(report.z0, 0.0);
        let floor = 4.0 * report.grid_slack;
        for n in 0..=report.steps() {
            assert!(
                report.mean_dist[n] <= floor,
                "n={n}: {} above the grid noise floor {floor}",
                report.mean_dist[n]
            );
        }
    }

    #[test]
    fn interval_fixture_matches_ball_chain_rate() {
        // the interval's L1 distance is twice the chain mean, so
        // z_n = 2 * 2L (1 - (1 - z0/2L)^(n+1)) / (n+1) exactly in the limit
        let (f, mut cfg) = Fixture::IntervalD1.build(128);
        cfg.steps = 120;
        cfg.trials = 3000;
        cfg.seed = 9;
        let report = estimate_zn(&f, &cfg).unwrap();
        let l = cfg.support_radius;
        let x0 = 13.0 / 64.0;
        let n = report.steps();
        let predict =
            2.0 * (2.0 * l * (1.0 - (1.0 - x0 / (2.0 * l)).powi(n as i32 + 1)) / (n as f64 + 1.0));
        let z = report.mean_dist[n];
        assert!(
            (z - predict).abs() < 3.0 * report.stderr[n] + 2.0 * report.grid_slack,
            "z_{n} = {z} vs ball-chain prediction {predict}"
        );
    }

    #[test]
    fn bound_verdicts_pass_at_small_scale() {
        let (f, mut cfg) = Fixture::IntervalD1.build(128);
        cfg.steps = 80;
        cfg.trials = 1500;
        cfg.seed = 12;
        let report = estimate_zn(&f, &cfg).unwrap();
        let verdicts = check_bounds(&report).unwrap();
        assert!(verdicts.all_ok(), "{verdicts:?}");
        // n=0: the lower bound is exactly z0
        assert_eq!(report.lower_bound[0], report.z0);
    }

    #[test]
    fn verdicts_refused_for_tiny_trials() {
        let (f, mut cfg) = Fixture::IntervalD1.build(64);
        cfg.steps = 5;
        cfg.trials = 10;
        let report = estimate_zn(&f, &cfg).unwrap();
        assert!(check_bounds(&report).is_err());
    }

    #[test]
    fn drop_identity_d1_fixture() {
        // indicator of [2,3] in B_4: quadrature value 0.125
        use crate::rearrange::{GridFunction, GridGeometry};
        let geom = GridGeometry::new(1, 4.0, 256).unwrap();
        let mut c = [0.0];
        let values: Vec<f64> = (0..256)
            .map(|i| {
                geom.center(i, &mut c);
                f64::from(c[0] > 2.0 && c[0] < 3.0)
            })
            .collect();
        let f = GridFunction::new(geom, values).unwrap();
        let mut cfg = ExperimentConfig::new(1, 4.0, 4.0, 256);
        cfg.trials = 6000;
        cfg.seed = 31;
        let (mc, se) = one_step_drop_mc(&f, 0.5, &cfg).unwrap();
        let quad_value = quad::drop_double_integral(&f, 0.5, 4.0).unwrap();
        assert!((quad_value - 0.125).abs() < 1e-12);
        assert!(
            (mc - quad_value).abs() < 3.0 * se,
            "mc {mc} +- {se} vs quadrature {quad_value}"
        );
        // symmetric input: drop identically zero
        let fstar = schwarz(&f);
        let (mc0, _) = one_step_drop_mc(&fstar, 0.5, &cfg).unwrap();
        assert_eq!(mc0, 0.0);
    }

    #[test]
    fn reports_are_thread_count_invariant() {
        let (f, mut cfg) = Fixture::DiskD2.build(48);
        cfg.steps = 20;
        cfg.trials = 300;
        cfg.seed = 77;
        cfg.threads = 1;
        let a = estimate_zn(&f, &cfg).unwrap().to_csv();
        cfg.threads = 4;
        let b = estimate_zn(&f, &cfg).unwrap().to_csv();
        assert_eq!(a, b);
    }
}
