//! Command-line front end: config files, override flags, campaign runners and
//! artifact writers.

use crate::cycle::{run_schedule, SyndromeFixture};
use crate::decoder::{DecodeMode, DecoderWeights};
use crate::experiment::{
    config_hash, run_campaign, thread_pool, threshold_from, write_results_csv, CampaignMetadata, ExperimentConfig,
    ExperimentError, FrequencyChoice, ResultRow, SuccessEstimate, ThresholdEstimate, TrialContext, WeightChoice,
};
use crate::layout::{CodeLayout, Variant};
use crate::pauli_noise::trial_rng;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("malformed config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("writing {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for anything the user can fix in the invocation, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::ConfigRead { .. } | CliError::ConfigParse { .. } => 2,
            CliError::Experiment(ExperimentError::Config(_)) => 2,
            CliError::Experiment(ExperimentError::Decoder(crate::decoder::DecoderError::InvalidWeights(_))) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "surfcat", version, about = "Threshold campaigns for plain and phase-detection-concatenated surface codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Success rates over sizes and rates, plus the crossing estimate.
    Threshold(CommonArgs),
    /// Thresholds over several p_g/p_d ratios and noise mixes.
    Sweep(SweepArgs),
    /// Success rates only, no threshold fit.
    Curve(CommonArgs),
    /// Re-runs one trial and dumps its record and decode.
    SingleTrialReplay(ReplayArgs),
    /// Writes a syndrome record and risk list as a decoder fixture.
    FixtureDump(ReplayArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Flat TOML config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub variant: Option<String>,
    /// Comma-separated code sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Comma-separated global gate error rates.
    #[arg(long, value_delimiter = ',')]
    pub pg: Option<Vec<f64>>,
    /// Local error rate; fixes the ratio against a single p_g.
    #[arg(long)]
    pub pd: Option<f64>,
    /// p_g / p_d.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Depolarising strength relative to dephasing.
    #[arg(long = "f-depo")]
    pub f_depo: Option<f64>,
    /// Dephasing strength the depolarising strength is measured against.
    #[arg(long)]
    pub deph: Option<f64>,
    /// `auto`, `x-only`, or X rounds per Z round.
    #[arg(long)]
    pub frequency: Option<String>,
    /// Unlisted-block weight; any of z/t/cutoff switches to manual weights.
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Cutoff distance, or `none`.
    #[arg(long)]
    pub cutoff: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `standard`, `risk-list` or `wizard`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Worker threads; defaults to SURFCAT_THREADS, then all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated p_g/p_d ratios.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Comma-separated relative depolarising strengths.
    #[arg(long, value_delimiter = ',')]
    pub strengths: Option<Vec<f64>>,
}

#[derive(Debug, Args, Clone)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Point seed as printed by a failing run; overrides the derived one.
    #[arg(long)]
    pub point_seed: Option<u64>,
}

/// Flat key-value config file. Every key is optional except the version.
#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub variant: Option<String>,
    pub sizes: Option<Vec<usize>>,
    pub p_g: Option<Vec<f64>>,
    pub p_d: Option<f64>,
    pub ratio: Option<f64>,
    pub f_depo: Option<f64>,
    pub deph: Option<f64>,
    pub frequency: Option<toml::Value>,
    pub z: Option<f64>,
    pub t: Option<f64>,
    pub cutoff: Option<toml::Value>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub rounds: Option<usize>,
    pub bootstrap: Option<usize>,
    pub threads: Option<usize>,
    pub ratios: Option<Vec<f64>>,
    pub strengths: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ConfigFile = toml::from_str(&text).map_err(|e| CliError::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::ConfigParse {
                path: path.to_path_buf(),
                message: format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", file.schema_version),
            });
        }
        Ok(file)
    }
}

/// A validated campaign ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub bootstrap: usize,
    pub threads: Option<usize>,
    pub ratios: Vec<f64>,
    pub strengths: Vec<f64>,
    pub warnings: Vec<String>,
}

fn parse_frequency(s: &str) -> Result<FrequencyChoice, CliError> {
    match s.to_ascii_lowercase().replace('_', "-").as_str() {
        "auto" => Ok(FrequencyChoice::Auto),
        "x-only" | "xonly" => Ok(FrequencyChoice::XOnly),
        other => other
            .parse()
            .map(FrequencyChoice::Fixed)
            .map_err(|_| CliError::Invalid(format!("frequency `{s}` is not auto, x-only or a positive integer"))),
    }
}

fn toml_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Merges file values and flags (flags win) into a validated campaign.
pub fn resolve(args: &CommonArgs, ratios: Option<&[f64]>, strengths: Option<&[f64]>) -> Result<CampaignSpec, CliError> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile {
            schema_version: SCHEMA_VERSION,
            ..Default::default()
        },
    };
    let mut warnings = Vec::new();

    let variant: Variant = args
        .variant
        .clone()
        .or(file.variant)
        .unwrap_or_else(|| "concatenated".into())
        .parse()
        .map_err(CliError::Invalid)?;
    let sizes = args.sizes.clone().or(file.sizes).unwrap_or_else(|| vec![6, 8, 10]);
    let p_global = args.pg.clone().or(file.p_g).unwrap_or_else(|| vec![0.010, 0.012, 0.014, 0.016]);
    let mut config = ExperimentConfig::new(variant, sizes, p_global);

    let p_d = args.pd.or(file.p_d);
    let ratio = args.ratio.or(file.ratio);
    config.ratio = match (p_d, ratio) {
        (Some(_), Some(_)) => return Err(CliError::Invalid("give either p_d or ratio, not both".into())),
        (Some(pd), None) => {
            if config.p_global.len() != 1 {
                return Err(CliError::Invalid(
                    "p_d fixes the local rate, so it needs exactly one p_g; use --ratio with a p_g grid".into(),
                ));
            }
            if !(pd > 0.0) {
                return Err(CliError::Invalid(format!("p_d must be positive, got {pd}")));
            }
            config.p_global[0] / pd
        }
        (None, Some(r)) => r,
        (None, None) => 1.0,
    };
    if config.ratio < 1.0 {
        warnings.push(format!(
            "p_d exceeds p_g (p_g/p_d = {}); local gates noisier than global ones lie outside the studied regime",
            config.ratio
        ));
    }

    let deph = args.deph.or(file.deph).unwrap_or(1.0);
    if !(deph > 0.0) {
        return Err(CliError::Invalid(format!("dephasing strength must be positive, got {deph}")));
    }
    config.relative_strength = args.f_depo.or(file.f_depo).unwrap_or(0.0) / deph;

    if let Some(f) = args.frequency.clone().or(file.frequency.as_ref().map(toml_text)) {
        config.frequency = parse_frequency(&f)?;
    }
    if config.frequency == FrequencyChoice::XOnly && config.relative_strength > 0.0 {
        return Err(CliError::Invalid(
            "an X-only schedule never measures bit flips, so f_depo must be 0; pick a numeric or auto frequency".into(),
        ));
    }

    let z = args.z.or(file.z);
    let t = args.t.or(file.t);
    let cutoff = args.cutoff.clone().or(file.cutoff.as_ref().map(toml_text));
    if z.is_some() || t.is_some() || cutoff.is_some() {
        let base = DecoderWeights::for_ratio(1.0 / config.ratio, config.sizes[0]);
        let cutoff = match cutoff.as_deref() {
            None => base.cutoff,
            Some("none") | Some("inf") => None,
            Some(c) => Some(c.parse().map_err(|_| CliError::Invalid(format!("cutoff `{c}` is not a number or none")))?),
        };
        config.weights = WeightChoice::Manual(DecoderWeights {
            listed: 1.0,
            unlisted: z.or(base.unlisted),
            time: t.unwrap_or(base.time),
            cutoff,
        });
    }

    if let Some(t) = args.trials.or(file.trials) {
        config.trials = t;
    }
    if let Some(s) = args.seed.or(file.seed) {
        config.seed = s;
    }
    if let Some(m) = args.mode.clone().or(file.mode) {
        config.mode = Some(m.parse::<DecodeMode>().map_err(|e| CliError::Invalid(e.to_string()))?);
    }
    config.rounds = args.rounds.or(file.rounds);
    config.validate()?;

    let ratios = ratios.map(<[f64]>::to_vec).or(file.ratios).unwrap_or_else(|| vec![config.ratio]);
    let strengths = strengths
        .map(<[f64]>::to_vec)
        .or(file.strengths)
        .unwrap_or_else(|| vec![config.relative_strength]);
    for &r in &ratios {
        if !(r.is_finite() && r > 0.0) {
            return Err(CliError::Invalid(format!("ratio {r} must be positive")));
        }
    }
    for &s in &strengths {
        if !(s.is_finite() && s >= 0.0) {
            return Err(CliError::Invalid(format!("strength {s} must be non-negative")));
        }
        if s > 0.0 && config.frequency == FrequencyChoice::XOnly {
            return Err(CliError::Invalid("swept strengths above 0 need Z rounds; drop --frequency x-only".into()));
        }
    }

    Ok(CampaignSpec {
        config,
        out: args.out.clone(),
        bootstrap: args.bootstrap.or(file.bootstrap).unwrap_or(200),
        threads: args.threads.or(file.threads),
        ratios,
        strengths,
        warnings,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let wrap = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    fs::write(path, contents).map_err(wrap)
}

fn results_csv(hash: &str, config: &ExperimentConfig, estimates: &[SuccessEstimate]) -> Vec<u8> {
    let rows: Vec<ResultRow> = estimates.iter().map(|e| ResultRow::new(e, config.relative_strength)).collect();
    let mut buf = Vec::new();
    write_results_csv(&mut buf, hash, &rows).expect("writing to memory");
    buf
}

#[derive(Serialize)]
struct LayoutDump<'a> {
    config_hash: &'a str,
    layouts: Vec<serde_json::Value>,
}

fn layout_json(hash: &str, config: &ExperimentConfig) -> Result<Vec<u8>, CliError> {
    let layouts = config
        .sizes
        .iter()
        .map(|&n| {
            let layout = CodeLayout::build(config.variant, n).map_err(ExperimentError::from)?;
            Ok(serde_json::to_value(&layout).expect("layout serialises"))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(serde_json::to_vec_pretty(&LayoutDump { config_hash: hash, layouts }).expect("serialises"))
}

fn describe(t: &ThresholdEstimate) -> String {
    match (t.rate, t.ci) {
        (Some(r), Some((lo, hi))) => format!("{:.3}% (95% CI {:.3}% to {:.3}%)", 100.0 * r, 100.0 * lo, 100.0 * hi),
        (Some(r), None) => format!("{:.3}%", 100.0 * r),
        _ => "not bracketed by the rate grid".into(),
    }
}

fn summary_table(out: &mut dyn Write, estimates: &[SuccessEstimate]) -> std::io::Result<()> {
    writeln!(out, "{:>4} {:>9} {:>9} {:>4} {:>9}  95% CI", "n", "p_g", "p_d", "F", "success")?;
    for e in estimates {
        writeln!(
            out,
            "{:>4} {:>9.5} {:>9.5} {:>4} {:>9.5}  [{:.5}, {:.5}]",
            e.point.n,
            e.point.p_global,
            e.point.p_local,
            e.point.frequency_value(),
            e.rate(),
            e.ci.0,
            e.ci.1
        )?;
    }
    Ok(())
}

/// Runs one campaign, writing `results.csv`, `metadata.json` and `layout.json`.
fn execute_campaign(spec: &CampaignSpec, fit: bool, out: &mut dyn Write) -> Result<Option<ThresholdEstimate>, CliError> {
    let config = &spec.config;
    let hash = config_hash(config);
    let estimates = run_campaign(config)?;
    let threshold = (fit && config.sizes.len() >= 2).then(|| threshold_from(config, &estimates, spec.bootstrap));
    write_file(&spec.out.join("results.csv"), &results_csv(&hash, config, &estimates))?;
    let meta = CampaignMetadata::new(config, &estimates, threshold.clone());
    write_file(&spec.out.join("metadata.json"), meta.to_json().as_bytes())?;
    write_file(&spec.out.join("layout.json"), &layout_json(&hash, config)?)?;
    let io = |source| CliError::Output {
        path: spec.out.clone(),
        source,
    };
    writeln!(out, "config {hash}").map_err(io)?;
    summary_table(out, &estimates).map_err(io)?;
    if let Some(t) = &threshold {
        writeln!(out, "threshold {}", describe(t)).map_err(io)?;
    }
    Ok(threshold)
}

#[derive(Serialize)]
struct SweepRow {
    ratio: f64,
    f_depo: f64,
    config_hash: String,
    threshold: Option<f64>,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
}

fn execute_sweep(spec: &CampaignSpec, out: &mut dyn Write) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &ratio in &spec.ratios {
        for &strength in &spec.strengths {
            let mut sub = spec.clone();
            sub.config.ratio = ratio;
            sub.config.relative_strength = strength;
            if strength > 0.0 && sub.config.frequency == FrequencyChoice::XOnly {
                sub.config.frequency = FrequencyChoice::Auto;
            }
            sub.out = spec.out.join(format!("ratio{ratio}_fdepo{strength}"));
            writeln!(out, "== p_g/p_d = {ratio}, f_depo = {strength}").ok();
            let t = execute_campaign(&sub, true, out)?.expect("sweeps fit thresholds");
            rows.push(SweepRow {
                ratio,
                f_depo: strength,
                config_hash: config_hash(&sub.config),
                threshold: t.rate,
                ci_lo: t.ci.map(|c| c.0),
                ci_hi: t.ci.map(|c| c.1),
            });
        }
    }
    let hash = config_hash(&spec.config);
    let mut buf = Vec::new();
    writeln!(buf, "# config_hash={hash}").expect("memory");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in &rows {
            w.serialize(r).expect("memory");
        }
        w.flush().expect("memory");
    }
    write_file(&spec.out.join("sweep.csv"), &buf)
}

#[derive(Serialize)]
struct ReplayDump<'a> {
    config_hash: &'a str,
    point_seed: u64,
    trial: u64,
    outcome: crate::experiment::TrialOutcome,
    decode: serde_json::Value,
}

fn execute_replay(spec: &CampaignSpec, args: &ReplayArgs, dump_only: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let config = &spec.config;
    if config.sizes.len() != 1 || config.p_global.len() != 1 {
        return Err(CliError::Invalid("replay and fixture dumps need exactly one size and one p_g".into()));
    }
    let hash = config_hash(config);
    let mut point = config.point(config.sizes[0], config.p_global[0]);
    if let Some(s) = args.point_seed {
        point.seed = s;
    }
    let ctx = TrialContext::new(point)?;
    let mut rng = trial_rng(point.seed, args.trial);
    let output = run_schedule(&ctx.layout, &ctx.model, ctx.cycle, &ctx.schedule, &mut rng).map_err(ExperimentError::from)?;
    let mut fixture = SyndromeFixture::new(&ctx.layout, ctx.schedule, &output);
    fixture.config_hash = Some(hash.clone());
    let io = |source| CliError::Output {
        path: spec.out.clone(),
        source,
    };
    let fixture_path = spec.out.join(format!("fixture_seed{}_trial{}.json", point.seed, args.trial));
    write_file(&fixture_path, fixture.to_json().as_bytes())?;
    writeln!(out, "config {hash}\nfixture {}", fixture_path.display()).map_err(io)?;
    if dump_only {
        return Ok(());
    }

    let mut decoder = ctx.decoder();
    let outcome = ctx.run_trial(&mut decoder, args.trial)?;
    let list = match point.mode {
        DecodeMode::Wizard => &output.truth.phase_changes,
        _ => &output.risk,
    };
    let decode = decoder
        .decode(&output.record, list, &point.weights, point.mode)
        .map_err(ExperimentError::from)?;
    let dump = ReplayDump {
        config_hash: &hash,
        point_seed: point.seed,
        trial: args.trial,
        outcome,
        decode: serde_json::from_str(&decode.to_json()).expect("valid json"),
    };
    let path = spec.out.join(format!("replay_seed{}_trial{}.json", point.seed, args.trial));
    write_file(&path, &serde_json::to_vec_pretty(&dump).expect("serialises"))?;
    writeln!(
        out,
        "trial {} seed {}: {} (x_failed={}, z_failed={}, {} X events, {} Z events)\nreplay {}",
        args.trial,
        point.seed,
        if outcome.success() { "success" } else { "logical failure" },
        outcome.x_failed,
        outcome.z_failed,
        outcome.x_events,
        outcome.z_events,
        path.display()
    )
    .map_err(io)
}

/// Executes a parsed command on a pool sized by the campaign.
pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (spec, run): (CampaignSpec, Box<dyn Fn(&CampaignSpec, &mut dyn Write) -> Result<(), CliError> + Send + Sync>) = match command {
        Command::Threshold(a) => (resolve(a, None, None)?, Box::new(|s, o| execute_campaign(s, true, o).map(|_| ()))),
        Command::Curve(a) => (resolve(a, None, None)?, Box::new(|s, o| execute_campaign(s, false, o).map(|_| ()))),
        Command::Sweep(a) => (
            resolve(&a.common, a.ratios.as_deref(), a.strengths.as_deref())?,
            Box::new(execute_sweep),
        ),
        Command::SingleTrialReplay(a) => {
            let a2 = a.clone();
            (resolve(&a.common, None, None)?, Box::new(move |s, o| execute_replay(s, &a2, false, o)))
        }
        Command::FixtureDump(a) => {
            let a2 = a.clone();
            (resolve(&a.common, None, None)?, Box::new(move |s, o| execute_replay(s, &a2, true, o)))
        }
    };
    for w in &spec.warnings {
        writeln!(err, "warning: {w}").ok();
    }
    let pool = thread_pool(spec.threads)?;
    let mut buf = Vec::new();
    let result = pool.install(|| run(&spec, &mut buf));
    out.write_all(&buf).ok();
    result
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                write!(out, "{text}").ok();
            } else {
                write!(err, "{text}").ok();
            }
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            e.exit_code()
        }
    }
}
