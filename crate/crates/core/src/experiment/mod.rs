//! Monte-Carlo harness: trials, success estimates and threshold sweeps.

mod faults;
mod output;
mod stats;
mod tables;

pub use faults::{single_fault_sweep, wizard_percolation_trial, FaultSweepReport};
pub use output::{config_hash, write_results_csv, CampaignMetadata, ResultRow, CSV_HEADER};
pub use stats::{estimate_threshold, wilson_interval, CurvePoint, PairCrossing, SizeCurve, ThresholdEstimate, Z95};
pub use tables::{
    auto_frequency, depolarising_fraction, fault_ratio, relative_strength, FaultRatio, FREQUENCY_STRENGTHS,
    Z_TO_X_RATIO,
};

use crate::cycle::{run_schedule, CheckFrequency, CycleConfig, CycleError, Schedule};
use crate::decoder::{DecodeMode, Decoder, DecoderError, DecoderWeights};
use crate::layout::{CodeLayout, LayoutError, Variant};
use crate::pauli_noise::{trial_rng, NoiseError, NoiseModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("trial {trial} (point seed {seed}) failed: {message}")]
    Trial { seed: u64, trial: u64, message: String },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// How many X rounds precede each Z round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyChoice {
    /// Tabulated optimum for the noise mix (X only under pure dephasing).
    Auto,
    XOnly,
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightChoice {
    /// Tabulated defaults for the local/global ratio.
    Auto,
    Manual(DecoderWeights),
}

/// A campaign over sizes and global error rates at one noise mix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub variant: Variant,
    pub sizes: Vec<usize>,
    pub p_global: Vec<f64>,
    /// `p_global / p_local`.
    pub ratio: f64,
    /// Depolarising over dephasing strength; 0 is pure dephasing.
    pub relative_strength: f64,
    pub frequency: FrequencyChoice,
    pub weights: WeightChoice,
    pub trials: u64,
    pub seed: u64,
    /// Defaults to standard for the plain code and risk-list otherwise.
    pub mode: Option<DecodeMode>,
    /// Noisy rounds per trial; defaults to three times the size.
    pub rounds: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(variant: Variant, sizes: Vec<usize>, p_global: Vec<f64>) -> Self {
        ExperimentConfig {
            variant,
            sizes,
            p_global,
            ratio: 1.0,
            relative_strength: 0.0,
            frequency: FrequencyChoice::Auto,
            weights: WeightChoice::Auto,
            trials: 40_000,
            seed: 0,
            mode: None,
            rounds: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.sizes.is_empty() || self.p_global.is_empty() {
            return bad("size and rate grids must be non-empty".into());
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return bad(format!("size {n} is below the minimum of 2"));
        }
        if !(self.ratio.is_finite() && self.ratio > 0.0) {
            return bad(format!("ratio p_g/p_d must be positive, got {}", self.ratio));
        }
        if !(self.relative_strength.is_finite() && self.relative_strength >= 0.0) {
            return bad(format!("relative strength must be non-negative, got {}", self.relative_strength));
        }
        if let Some(&p) = self.p_global.iter().find(|&&p| !(0.0..=1.0).contains(&p)) {
            return bad(format!("p_g = {p} is outside [0, 1]"));
        }
        if self.frequency == FrequencyChoice::XOnly && self.relative_strength > 0.0 {
            return bad("an X-only schedule cannot correct bit flips; use pure dephasing or a Z-check frequency".into());
        }
        if self.frequency == FrequencyChoice::Fixed(0) {
            return bad("frequency must be at least 1".into());
        }
        if let WeightChoice::Manual(w) = self.weights {
            w.validate()?;
        }
        Ok(())
    }

    pub fn mode(&self) -> DecodeMode {
        self.mode.unwrap_or(match self.variant {
            Variant::Standard => DecodeMode::Standard,
            Variant::Concatenated => DecodeMode::RiskList,
        })
    }

    pub fn point(&self, n: usize, p_global: f64) -> Point {
        let depolarising = depolarising_fraction(self.relative_strength);
        let frequency = match self.frequency {
            FrequencyChoice::XOnly => CheckFrequency::XOnly,
            FrequencyChoice::Fixed(f) => CheckFrequency::Ratio(f),
            FrequencyChoice::Auto => auto_frequency(self.variant, self.ratio, self.relative_strength),
        };
        let weights = match self.weights {
            WeightChoice::Auto => DecoderWeights::for_ratio(1.0 / self.ratio, n),
            WeightChoice::Manual(w) => w,
        };
        let mut point = Point {
            variant: self.variant,
            n,
            p_global,
            p_local: p_global / self.ratio,
            depolarising,
            frequency,
            weights,
            mode: self.mode(),
            rounds: self.rounds.unwrap_or(3 * n),
            seed: 0,
        };
        point.seed = point.derive_seed(self.seed);
        point
    }

    /// Every (size, rate) point, size-major.
    pub fn points(&self) -> Vec<Point> {
        self.sizes
            .iter()
            .flat_map(|&n| self.p_global.iter().map(move |&p| (n, p)))
            .map(|(n, p)| self.point(n, p))
            .collect()
    }
}

/// Fully resolved parameters of one data point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub variant: Variant,
    pub n: usize,
    pub p_global: f64,
    pub p_local: f64,
    /// Fraction of errors drawn from the depolarising channel.
    pub depolarising: f64,
    pub frequency: CheckFrequency,
    pub weights: DecoderWeights,
    pub mode: DecodeMode,
    pub rounds: usize,
    /// Seed of this point's trial streams, derived from the master seed.
    pub seed: u64,
}

impl Point {
    fn derive_seed(&self, master: u64) -> u64 {
        let key = format!(
            "{master}|{}|{}|{:?}|{:?}|{:?}|{:?}|{}|{}",
            self.variant, self.n, self.p_global, self.p_local, self.depolarising, self.frequency, self.mode, self.rounds
        );
        let digest = Sha256::digest(key.as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    pub fn model(&self) -> Result<NoiseModel, NoiseError> {
        NoiseModel::new(self.p_local, self.p_global, self.depolarising, self.seed)
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            frequency: self.frequency,
            total_rounds: self.rounds,
            final_perfect_round: true,
        }
    }

    /// X rounds per Z round as a number (0 for X only).
    pub fn frequency_value(&self) -> usize {
        match self.frequency {
            CheckFrequency::XOnly => 0,
            CheckFrequency::Ratio(f) => f,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub x_failed: bool,
    pub z_failed: bool,
    pub x_events: usize,
    pub z_events: usize,
    pub risk_entries: usize,
    pub micros: u64,
}

impl TrialOutcome {
    pub fn success(&self) -> bool {
        !self.x_failed && !self.z_failed
    }
}

/// Everything a trial needs that does not change between trials.
pub struct TrialContext {
    pub point: Point,
    pub layout: CodeLayout,
    pub model: NoiseModel,
    pub cycle: CycleConfig,
    pub schedule: Schedule,
}

impl TrialContext {
    pub fn new(point: Point) -> Result<Self, ExperimentError> {
        let layout = CodeLayout::build(point.variant, point.n)?;
        let model = point.model()?;
        let schedule = point.schedule();
        schedule.validate()?;
        point.weights.validate()?;
        Ok(TrialContext {
            cycle: CycleConfig::for_model(&model),
            point,
            layout,
            model,
            schedule,
        })
    }

    pub fn decoder(&self) -> Decoder<'_> {
        Decoder::new(&self.layout)
    }

    /// One trial on its own stream: schedule, decode, correct, adjudicate.
    pub fn run_trial(&self, decoder: &mut Decoder<'_>, trial: u64) -> Result<TrialOutcome, ExperimentError> {
        let start = Instant::now();
        let fail = |message: String| ExperimentError::Trial {
            seed: self.point.seed,
            trial,
            message,
        };
        let mut rng = trial_rng(self.point.seed, trial);
        let out = run_schedule(&self.layout, &self.model, self.cycle, &self.schedule, &mut rng)
            .map_err(|e| fail(e.to_string()))?;
        let list = match self.point.mode {
            DecodeMode::Wizard => &out.truth.phase_changes,
            _ => &out.risk,
        };
        let result = decoder
            .decode(&out.record, list, &self.point.weights, self.point.mode)
            .map_err(|e| fail(e.to_string()))?;
        let mut residual = out.truth.frame;
        result.apply(&self.layout, &mut residual);
        let verdict = self.layout.logical_parity(&residual).map_err(|e| fail(e.to_string()))?;
        Ok(TrialOutcome {
            x_failed: verdict.x_failed,
            z_failed: verdict.z_failed,
            x_events: result.x.events,
            z_events: result.z.events,
            risk_entries: out.risk.len(),
            micros: start.elapsed().as_micros() as u64,
        })
    }
}

/// Aggregated outcomes of one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub point: Point,
    pub trials: u64,
    pub successes: u64,
    pub x_failures: u64,
    pub z_failures: u64,
    pub ci: (f64, f64),
}

impl SuccessEstimate {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of the success rate.
    pub fn std_err(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    successes: u64,
    x_failures: u64,
    z_failures: u64,
}

impl Tally {
    fn add(mut self, o: &TrialOutcome) -> Self {
        self.successes += o.success() as u64;
        self.x_failures += o.x_failed as u64;
        self.z_failures += o.z_failed as u64;
        self
    }

    fn merge(self, o: Tally) -> Tally {
        Tally {
            successes: self.successes + o.successes,
            x_failures: self.x_failures + o.x_failures,
            z_failures: self.z_failures + o.z_failures,
        }
    }
}

/// Runs `trials` trials of `point` in parallel on the current rayon pool.
/// Counts are sums, so the result does not depend on scheduling.
pub fn estimate_success(point: Point, trials: u64) -> Result<SuccessEstimate, ExperimentError> {
    let ctx = TrialContext::new(point)?;
    let tally = (0..trials)
        .into_par_iter()
        .map_init(
            || ctx.decoder(),
            |dec, t| ctx.run_trial(dec, t).map(|o| Tally::default().add(&o)),
        )
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    Ok(SuccessEstimate {
        point,
        trials,
        successes: tally.successes,
        x_failures: tally.x_failures,
        z_failures: tally.z_failures,
        ci: wilson_interval(tally.successes, trials, Z95),
    })
}

/// Thread pool honouring an explicit count, else `SURFCAT_THREADS`, else all cores.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, ExperimentError> {
    let threads = threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))
}

pub const THREADS_ENV: &str = "SURFCAT_THREADS";

/// Estimates for every point of a campaign, size-major.
pub fn run_campaign(config: &ExperimentConfig) -> Result<Vec<SuccessEstimate>, ExperimentError> {
    config.validate()?;
    config
        .points()
        .into_iter()
        .map(|p| estimate_success(p, config.trials))
        .collect()
}

/// Threshold across the configured sizes from a finished campaign.
pub fn threshold_from(config: &ExperimentConfig, estimates: &[SuccessEstimate], bootstrap: usize) -> ThresholdEstimate {
    let curves = config
        .sizes
        .iter()
        .map(|&n| SizeCurve {
            n,
            points: estimates
                .iter()
                .filter(|e| e.point.n == n)
                .map(|e| CurvePoint {
                    rate: e.point.p_global,
                    successes: e.successes,
                    trials: e.trials,
                })
                .collect(),
        })
        .collect();
    estimate_threshold(curves, bootstrap, config.seed)
}

pub fn find_threshold(config: &ExperimentConfig, bootstrap: usize) -> Result<ThresholdEstimate, ExperimentError> {
    let estimates = run_campaign(config)?;
    Ok(threshold_from(config, &estimates, bootstrap))
}

/// One row of a ratio or strength sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub ratio: f64,
    pub relative_strength: f64,
    pub threshold: ThresholdEstimate,
}

/// Thresholds over a list of `(p_g/p_d, relative strength)` settings, each
/// with its own rate grid; frequencies and weights follow the base config.
pub fn sweep_ratio_curves(
    base: &ExperimentConfig,
    settings: &[(f64, f64, Vec<f64>)],
    bootstrap: usize,
) -> Result<Vec<SweepEntry>, ExperimentError> {
    settings
        .iter()
        .map(|(ratio, strength, grid)| {
            let cfg = ExperimentConfig {
                ratio: *ratio,
                relative_strength: *strength,
                p_global: grid.clone(),
                ..base.clone()
            };
            Ok(SweepEntry {
                ratio: *ratio,
                relative_strength: *strength,
                threshold: find_threshold(&cfg, bootstrap)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(variant: Variant) -> ExperimentConfig {
        ExperimentConfig {
            trials: 40,
            seed: 5,
            ..ExperimentConfig::new(variant, vec![3], vec![0.01])
        }
    }

    #[test]
    fn zero_noise_always_succeeds() {
        for variant in [Variant::Standard, Variant::Concatenated] {
            let mut cfg = small(variant);
            cfg.p_global = vec![0.0];
            cfg.relative_strength = 0.5;
            let est = estimate_success(cfg.point(3, 0.0), 50).unwrap();
            assert_eq!(est.successes, 50);
            assert_eq!(est.ci.1, 1.0);
        }
    }

    #[test]
    fn replay_is_exact() {
        let cfg = small(Variant::Concatenated);
        let ctx = TrialContext::new(cfg.point(4, 0.03)).unwrap();
        let mut dec = ctx.decoder();
        for t in 0..20 {
            let a = ctx.run_trial(&mut dec, t).unwrap();
            let b = ctx.run_trial(&mut dec, t).unwrap();
            assert_eq!((a.x_failed, a.z_failed, a.x_events), (b.x_failed, b.z_failed, b.x_events));
        }
    }

    #[test]
    fn thread_count_does_not_change_counts() {
        let cfg = small(Variant::Concatenated);
        let p = cfg.point(4, 0.03);
        let one = thread_pool(Some(1)).unwrap().install(|| estimate_success(p, 200)).unwrap();
        let three = thread_pool(Some(3)).unwrap().install(|| estimate_success(p, 200)).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn validation() {
        let mut cfg = small(Variant::Standard);
        assert!(cfg.validate().is_ok());
        cfg.frequency = FrequencyChoice::XOnly;
        cfg.relative_strength = 0.3;
        assert!(cfg.validate().is_err());
        let mut cfg = small(Variant::Standard);
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small(Variant::Standard);
        cfg.sizes.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seeds_differ_between_points() {
        let cfg = small(Variant::Standard);
        assert_ne!(cfg.point(4, 0.01).seed, cfg.point(4, 0.02).seed);
        assert_ne!(cfg.point(4, 0.01).seed, cfg.point(6, 0.01).seed);
        assert_eq!(cfg.point(4, 0.01).seed, cfg.point(4, 0.01).seed);
    }
}
