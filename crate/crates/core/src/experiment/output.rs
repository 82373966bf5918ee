use super::{ExperimentConfig, SuccessEstimate, ThresholdEstimate};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;

pub const CSV_HEADER: [&str; 9] = ["variant", "n", "p_g", "p_d", "f_depo", "F", "success", "ci_lo", "ci_hi"];

/// One line of `results.csv`. `f_depo` is the depolarising-to-dephasing
/// strength and `F` is 0 for an X-only schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub variant: String,
    pub n: usize,
    pub p_g: f64,
    pub p_d: f64,
    pub f_depo: f64,
    #[serde(rename = "F")]
    pub frequency: usize,
    pub success: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl ResultRow {
    pub fn new(e: &SuccessEstimate, relative_strength: f64) -> Self {
        ResultRow {
            variant: e.point.variant.to_string(),
            n: e.point.n,
            p_g: e.point.p_global,
            p_d: e.point.p_local,
            f_depo: relative_strength,
            frequency: e.point.frequency_value(),
            success: e.rate(),
            ci_lo: e.ci.0,
            ci_hi: e.ci.1,
        }
    }
}

/// Hex SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let json = serde_json::to_string(config).expect("config serialises");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Writes the results table, preceded by a `#` line carrying the config hash.
pub fn write_results_csv<W: Write>(mut out: W, hash: &str, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(out, "# config_hash={hash}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub n: usize,
    pub p_g: f64,
    pub p_d: f64,
    pub seed: u64,
    pub trials: u64,
    pub successes: u64,
    pub x_failures: u64,
    pub z_failures: u64,
    pub ci: (f64, f64),
}

/// Everything needed to reproduce and audit a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignMetadata {
    pub provenance: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub points: Vec<PointSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdEstimate>,
}

impl CampaignMetadata {
    pub fn new(config: &ExperimentConfig, estimates: &[SuccessEstimate], threshold: Option<ThresholdEstimate>) -> Self {
        let hash = config_hash(config);
        CampaignMetadata {
            provenance: format!("surfcat {} config {}", env!("CARGO_PKG_VERSION"), &hash[..12]),
            config_hash: hash,
            config: config.clone(),
            points: estimates
                .iter()
                .map(|e| PointSummary {
                    n: e.point.n,
                    p_g: e.point.p_global,
                    p_d: e.point.p_local,
                    seed: e.point.seed,
                    trials: e.trials,
                    successes: e.successes,
                    x_failures: e.x_failures,
                    z_failures: e.z_failures,
                    ci: e.ci,
                })
                .collect(),
            threshold,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serialises")
    }
}
