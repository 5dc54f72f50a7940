//! Small statistics utilities: streaming moment accumulators, empirical
//! CDFs, the Kolmogorov-Smirnov statistic and DKW confidence bands.

/// Streaming sum / sum-of-squares accumulator for one scalar statistic.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.count += other.count;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Standard error of the mean (unbiased sample variance).
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        let n = self.count as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

/// Sorts in place and returns the one-sample KS statistic against a
/// continuous reference CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut sup = 0.0f64;
    for (i, x) in samples.iter().enumerate() {
        let f = cdf(*x);
        sup = sup.max((i as f64 / n - f).abs());
        sup = sup.max(((i + 1) as f64 / n - f).abs());
    }
    sup
}

/// Half-width of the DKW confidence band for one empirical CDF at level
/// `alpha`: `sqrt(ln(2/alpha) / (2 n))`.
pub fn dkw_band(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Largest signed excess of the first empirical CDF over the second,
/// `sup_t (F_a(t) - F_b(t))`, evaluated over the pooled sample points.
///
/// First-order stochastic domination of `a` over `b` (`P(a > t) >= P(b > t)`)
/// means this excess should not exceed the statistical band.
pub fn max_cdf_excess(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut max = f64::NEG_INFINITY;
    // F_a - F_b is piecewise constant, changing only at sample points.
    let mut ia = 0usize;
    let mut ib = 0usize;
    while ia < a.len() || ib < b.len() {
        let t = match (a.get(ia), b.get(ib)) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => break,
        };
        while ia < a.len() && a[ia] <= t {
            ia += 1;
        }
        while ib < b.len() && b[ib] <= t {
            ib += 1;
        }
        max = max.max(ia as f64 / na - ib as f64 / nb);
    }
    max
}

/// CDF of the exponential distribution with the given mean.
pub fn exponential_cdf(mean: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            1.0 - (-t / mean).exp()
        }
    }
}

/// CDF of the Gamma distribution with integer shape `k` and scale `theta`
/// (Erlang closed form).
pub fn gamma_cdf(shape: usize, scale: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let x = t / scale;
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..shape {
            term *= x / j as f64;
            sum += term;
        }
        1.0 - (-x).exp() * sum
    }
}
