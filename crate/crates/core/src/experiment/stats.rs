use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// 95% two-sided normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Success count at one rate on one size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rate: f64,
    pub successes: u64,
    pub trials: u64,
}

impl CurvePoint {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Logical error rate with a half-count continuity correction so the log stays finite.
    fn log_failure(&self, successes: u64) -> f64 {
        let failures = (self.trials - successes) as f64;
        ((failures + 0.5) / (self.trials as f64 + 1.0)).ln()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeCurve {
    pub n: usize,
    pub points: Vec<CurvePoint>,
}

/// One crossing between the curves of two consecutive sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub small: usize,
    pub large: usize,
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// Mean of the pairwise crossings; `None` when no pair crosses inside the grid.
    pub rate: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub crossings: Vec<PairCrossing>,
    pub curves: Vec<SizeCurve>,
    pub bootstrap_samples: usize,
    /// Fraction of bootstrap replicates that found a crossing.
    pub bootstrap_bracketed: f64,
}

impl ThresholdEstimate {
    pub fn bracketed(&self) -> bool {
        self.rate.is_some()
    }
}

/// Least-squares line through `(x, y)`.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Crossing of two curves sampled on the same rates, from straight-line fits
/// of log failure rate over the points around the first sign change of
/// their difference (large minus small goes from negative to positive).
fn crossing(rates: &[f64], small: &[f64], large: &[f64]) -> Option<f64> {
    let k = rates.len();
    let diff: Vec<f64> = (0..k).map(|i| large[i] - small[i]).collect();
    let i = (0..k.saturating_sub(1)).find(|&i| diff[i] < 0.0 && diff[i + 1] >= 0.0)?;
    let lo = i.saturating_sub(1);
    let hi = (i + 2).min(k - 1);
    let xs = &rates[lo..=hi];
    let (a1, b1) = fit_line(xs, &small[lo..=hi]);
    let (a2, b2) = fit_line(xs, &large[lo..=hi]);
    let fitted = if (b2 - b1).abs() > f64::EPSILON {
        (a1 - a2) / (b2 - b1)
    } else {
        f64::NAN
    };
    // a fit that lands outside the bracket falls back to linear interpolation
    if fitted.is_finite() && fitted >= rates[i] && fitted <= rates[i + 1] {
        Some(fitted)
    } else {
        let t = -diff[i] / (diff[i + 1] - diff[i]);
        Some(rates[i] + t * (rates[i + 1] - rates[i]))
    }
}

fn crossings_of(curves: &[SizeCurve], logs: &[Vec<f64>]) -> Vec<PairCrossing> {
    let rates: Vec<f64> = curves[0].points.iter().map(|p| p.rate).collect();
    (0..curves.len() - 1)
        .map(|i| PairCrossing {
            small: curves[i].n,
            large: curves[i + 1].n,
            rate: crossing(&rates, &logs[i], &logs[i + 1]),
        })
        .collect()
}

fn mean_crossing(c: &[PairCrossing]) -> Option<f64> {
    let found: Vec<f64> = c.iter().filter_map(|c| c.rate).collect();
    (!found.is_empty()).then(|| found.iter().sum::<f64>() / found.len() as f64)
}

/// Threshold from success-rate curves of at least two sizes sampled on a
/// shared, increasing rate grid. The interval is a parametric bootstrap:
/// every point is redrawn as binomial at its observed rate.
pub fn estimate_threshold(mut curves: Vec<SizeCurve>, bootstrap: usize, seed: u64) -> ThresholdEstimate {
    curves.sort_by_key(|c| c.n);
    let usable = curves.len() >= 2
        && curves.iter().all(|c| c.points.len() == curves[0].points.len())
        && curves[0].points.len() >= 2;
    if !usable {
        return ThresholdEstimate {
            rate: None,
            ci: None,
            crossings: Vec::new(),
            curves,
            bootstrap_samples: 0,
            bootstrap_bracketed: 0.0,
        };
    }
    let logs: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| c.points.iter().map(|p| p.log_failure(p.successes)).collect())
        .collect();
    let crossings = crossings_of(&curves, &logs);
    let rate = mean_crossing(&crossings);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(bootstrap);
    for _ in 0..bootstrap {
        let logs: Vec<Vec<f64>> = curves
            .iter()
            .map(|c| {
                c.points
                    .iter()
                    .map(|p| {
                        let s = Binomial::new(p.trials, p.success_rate())
                            .map(|b| b.sample(&mut rng))
                            .unwrap_or(p.successes);
                        p.log_failure(s)
                    })
                    .collect()
            })
            .collect();
        if let Some(r) = mean_crossing(&crossings_of(&curves, &logs)) {
            samples.push(r);
        }
    }
    let bracketed = if bootstrap > 0 {
        samples.len() as f64 / bootstrap as f64
    } else {
        0.0
    };
    samples.sort_by(f64::total_cmp);
    let ci = (rate.is_some() && samples.len() >= 2).then(|| {
        let q = |f: f64| samples[((samples.len() - 1) as f64 * f).round() as usize];
        (q(0.025), q(0.975))
    });
    ThresholdEstimate {
        rate,
        ci,
        crossings,
        curves,
        bootstrap_samples: bootstrap,
        bootstrap_bracketed: bracketed,
    }
}
