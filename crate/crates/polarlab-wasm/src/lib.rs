//! Browser bindings: three interactive views of the polarization dynamics.
//!
//! * [`PolarizationDemo`] — watch a 2-d grid function converge to its
//!   symmetric decreasing rearrangement under random polarizations.
//! * [`rate_curve`] / [`rate_bounds`] — the scaled mean distance `n z_n` of
//!   the ball chain against its sandwich bounds.
//! * [`exponential_limit_overlay`] — empirical CDF of `n X_n` in d = 1 on
//!   top of the exponential limit.

use polarlab::ballchain::{ChainConfig, CoefficientTable, SandwichBounds};
use polarlab::geom::{sample_pole_into, Point, Reflection};
use polarlab::quad;
use polarlab::rearrange::{
    indicator_ball, l1_distance, polarize, radial_bump, schwarz, BumpProfile, GridFunction,
    GridGeometry,
};
use polarlab::rng::{ChaCha12Rng, RngStream};
use polarlab::stats::exponential_cdf;
use wasm_bindgen::prelude::*;

/// Interactive grid-function polarization.
#[wasm_bindgen]
pub struct PolarizationDemo {
    current: GridFunction,
    initial: GridFunction,
    target: GridFunction,
    rng: ChaCha12Rng,
    seed: u64,
    support_radius: f64,
    history: Vec<f64>,
}

#[wasm_bindgen]
impl PolarizationDemo {
    /// `kind`: "disk", "bump" or "two-bumps"; `cells` per axis (e.g. 96).
    #[wasm_bindgen(constructor)]
    pub fn new(kind: &str, cells: u32, seed: u64) -> Result<PolarizationDemo, JsError> {
        let geom = GridGeometry::new(2, 1.0, cells as usize)
            .map_err(|e| JsError::new(&e.to_string()))?;
        let f = match kind {
            "disk" => indicator_ball(geom, &[0.45, 0.0], 0.3),
            "bump" => radial_bump(geom, &[0.4, 0.0], 0.45, BumpProfile::Parabolic),
            "two-bumps" => {
                let a = radial_bump(geom, &[0.45, 0.25], 0.3, BumpProfile::Cone);
                let b = radial_bump(geom, &[-0.2, -0.45], 0.35, BumpProfile::Parabolic);
                let values: Vec<f64> = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| x.max(*y))
                    .collect();
                GridFunction::new(geom, values).map_err(|e| JsError::new(&e.to_string()))?
            }
            other => return Err(JsError::new(&format!("unknown kind `{other}`"))),
        };
        let target = schwarz(&f);
        let history = vec![l1_distance(&f, &target).map_err(|e| JsError::new(&e.to_string()))?];
        Ok(PolarizationDemo {
            current: f.clone(),
            initial: f,
            target,
            rng: RngStream::new(seed, 0).rng(),
            seed,
            support_radius: 1.0,
            history,
        })
    }

    /// Apply `count` random polarizations.
    pub fn step(&mut self, count: u32) {
        let mut pole = vec![0.0; 2];
        for _ in 0..count {
            sample_pole_into(self.support_radius, &mut self.rng, &mut pole);
            let refl = Reflection::from_pole_coords(pole.clone()).expect("nonzero pole");
            self.current = polarize(&self.current, &refl);
            self.history
                .push(l1_distance(&self.current, &self.target).expect("same grid"));
        }
    }

    pub fn reset(&mut self, seed: u64) {
        self.seed = seed;
        self.rng = RngStream::new(seed, 0).rng();
        self.current = self.initial.clone();
        self.history = vec![self.history[0]];
    }

    pub fn steps_taken(&self) -> u32 {
        (self.history.len() - 1) as u32
    }

    pub fn cells(&self) -> u32 {
        self.current.geometry().cells_per_axis as u32
    }

    /// L1 distance to the rearrangement after each step (index 0 = start).
    pub fn distance_history(&self) -> Vec<f64> {
        self.history.clone()
    }

    /// RGBA pixels of the current state, row-major `cells x cells`.
    pub fn render(&self) -> Vec<u8> {
        render_heatmap(&self.current)
    }

    /// RGBA pixels of the symmetric decreasing rearrangement (the fixed
    /// point the dynamics converge to).
    pub fn render_target(&self) -> Vec<u8> {
        render_heatmap(&self.target)
    }
}

fn render_heatmap(f: &GridFunction) -> Vec<u8> {
    let top = f.max_value().max(1e-12);
    let mut out = Vec::with_capacity(f.values().len() * 4);
    for v in f.values() {
        let u = (v / top).clamp(0.0, 1.0);
        let [r, g, b] = heat_color(u);
        out.extend_from_slice(&[r, g, b, 255]);
    }
    out
}

/// Dark-blue to yellow ramp through teal, close enough to the usual
/// perceptual maps for a demo.
fn heat_color(u: f64) -> [u8; 3] {
    let stops: [(f64, [f64; 3]); 5] = [
        (0.00, [13.0, 8.0, 135.0]),
        (0.25, [84.0, 2.0, 163.0]),
        (0.50, [186.0, 55.0, 107.0]),
        (0.75, [249.0, 140.0, 10.0]),
        (1.00, [240.0, 249.0, 33.0]),
    ];
    let mut lo = stops[0];
    let mut hi = stops[4];
    for w in stops.windows(2) {
        if u >= w[0].0 && u <= w[1].0 {
            lo = w[0];
            hi = w[1];
            break;
        }
    }
    let t = if hi.0 > lo.0 { (u - lo.0) / (hi.0 - lo.0) } else { 0.0 };
    let mix = |a: f64, b: f64| (a + t * (b - a)).round() as u8;
    [
        mix(lo.1[0], hi.1[0]),
        mix(lo.1[1], hi.1[1]),
        mix(lo.1[2], hi.1[2]),
    ]
}

/// `n z_n` of the ball chain for `n = 0..=steps`.
#[wasm_bindgen]
pub fn rate_curve(
    d: u32,
    l: f64,
    z0: f64,
    steps: u32,
    trials: u32,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let d = d as usize;
    let mut x0 = vec![0.0; d];
    x0[0] = z0;
    let mut cfg = ChainConfig::new(
        Point::new(x0),
        ((l - z0) / 2.0).max(1e-6),
        l,
        steps as usize,
        trials as u64,
        seed,
    );
    cfg.max_moment = 1;
    let stats = polarlab::ballchain::run_chain(&cfg).map_err(|e| JsError::new(&e.to_string()))?;
    Ok((0..=steps as usize)
        .map(|n| n as f64 * stats.mean_distance(n))
        .collect())
}

/// `[lower, upper]` asymptotes for the rate curve: `2 L d^2 / eta_d` (the
/// order-statistic comparison, exact at d = 1) and `1 / c_1`.
#[wasm_bindgen]
pub fn rate_bounds(d: u32, l: f64) -> Result<Vec<f64>, JsError> {
    let d = d as usize;
    let eta = quad::eta(d).map_err(|e| JsError::new(&e.to_string()))?;
    let table = CoefficientTable::build(d, l, 1).map_err(|e| JsError::new(&e.to_string()))?;
    let lower = 2.0 * l * (d * d) as f64 / eta;
    let upper = 1.0 / table.coefficient(1);
    Ok(vec![lower, upper])
}

/// Sandwich bounds per step, flattened `(lower_1, upper_1, lower_2, ...)`.
#[wasm_bindgen]
pub fn sandwich_curves(d: u32, l: f64, z0: f64, steps: u32) -> Result<Vec<f64>, JsError> {
    let table =
        CoefficientTable::build(d as usize, l, 1).map_err(|e| JsError::new(&e.to_string()))?;
    let bounds = SandwichBounds::new(z0, l, &table);
    let mut out = Vec::with_capacity(2 * steps as usize);
    for n in 1..=steps as usize {
        out.push(n as f64 * bounds.lower(n));
        out.push(n as f64 * bounds.upper(n));
    }
    Ok(out)
}

/// Empirical CDF of `n X_n` against the exponential limit, flattened as
/// `(t, empirical, exponential)` triples on a subsample of the sorted data.
#[wasm_bindgen]
pub fn exponential_limit_overlay(
    l: f64,
    z0: f64,
    steps: u32,
    trials: u32,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let mut cfg = ChainConfig::new(
        Point::new(vec![z0]),
        ((l - z0) / 2.0).max(1e-6),
        l,
        steps as usize,
        trials as u64,
        seed,
    );
    cfg.max_moment = 1;
    cfg.record_final_samples = true;
    let stats = polarlab::ballchain::run_chain(&cfg).map_err(|e| JsError::new(&e.to_string()))?;
    let mut scaled: Vec<f64> = stats
        .final_samples
        .expect("recorded")
        .iter()
        .map(|x| steps as f64 * x)
        .collect();
    scaled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cdf = exponential_cdf(2.0 * l);
    let n = scaled.len();
    let stride = (n / 400).max(1);
    let mut out = Vec::new();
    for (i, t) in scaled.iter().enumerate().step_by(stride) {
        out.push(*t);
        out.push((i + 1) as f64 / n as f64);
        out.push(cdf(*t));
    }
    Ok(out)
}
