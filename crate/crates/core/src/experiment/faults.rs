use super::ExperimentError;
use crate::cycle::{
    CheckFrequency, CorrectionQubit, CycleConfig, CycleEngine, Injected, Location, Noiseless, RiskList, RoundRecord,
    Schedule, SyndromeRecord,
};
use crate::decoder::{DecodeMode, Decoder, DecoderWeights};
use crate::layout::{CodeLayout, Variant};
use crate::pauli_noise::{trial_rng, Pauli, NON_IDENTITY_PAIRS};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultFailure {
    pub location: usize,
    pub kind: Location,
    pub fault: (Pauli, Pauli),
    pub x_failed: bool,
    pub z_failed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultSweepReport {
    pub variant: Variant,
    pub n: usize,
    pub mode: DecodeMode,
    pub correction: CorrectionQubit,
    pub locations: usize,
    pub faults: usize,
    pub failures: Vec<FaultFailure>,
}

/// Injects every non-identity Pauli at every noisy location of the schedule,
/// one at a time, and decodes each run. Without Z rounds only phase faults
/// (products of I and Z) are injected.
pub fn single_fault_sweep(
    variant: Variant,
    n: usize,
    mode: DecodeMode,
    frequency: CheckFrequency,
    correction: CorrectionQubit,
) -> Result<FaultSweepReport, ExperimentError> {
    let layout = CodeLayout::build(variant, n)?;
    let schedule = Schedule::for_size(n, frequency);
    let config = CycleConfig::new(correction);
    let weights = DecoderWeights::for_ratio(1.0, n);
    let (_, census) = CycleEngine::new(&layout, config, Injected::enumerate()).run_schedule(&schedule)?;
    let mut decoder = Decoder::new(&layout);
    let mut report = FaultSweepReport {
        variant,
        n,
        mode,
        correction,
        locations: census.locations.len(),
        faults: 0,
        failures: Vec::new(),
    };
    for (location, &kind) in census.locations.iter().enumerate() {
        let faults: Vec<(Pauli, Pauli)> = match kind {
            Location::One(..) => Pauli::NON_IDENTITY.iter().map(|&p| (p, Pauli::I)).collect(),
            Location::Two(_) => NON_IDENTITY_PAIRS.to_vec(),
        };
        let phase_only = !schedule.has_z_rounds();
        for fault in faults {
            if phase_only && (fault.0.x_bit() || fault.1.x_bit()) {
                continue;
            }
            report.faults += 1;
            let engine = CycleEngine::new(&layout, config, Injected::at(location, fault));
            let (out, _) = engine.run_schedule(&schedule)?;
            let list = match mode {
                DecodeMode::Wizard => &out.truth.phase_changes,
                _ => &out.risk,
            };
            let result = decoder.decode(&out.record, list, &weights, mode)?;
            let mut residual = out.truth.frame;
            result.apply(&layout, &mut residual);
            let verdict = layout.logical_parity(&residual)?;
            if !verdict.success() {
                report.failures.push(FaultFailure {
                    location,
                    kind,
                    fault,
                    x_failed: verdict.x_failed,
                    z_failed: verdict.z_failed,
                });
            }
        }
    }
    Ok(report)
}

/// One trial of the oracle-list decoder against independent phase errors on
/// the data blocks with probability `rate`, read out by one perfect round.
/// Returns whether the logical phase survived.
pub fn wizard_percolation_trial(
    layout: &CodeLayout,
    decoder: &mut Decoder<'_>,
    rate: f64,
    seed: u64,
    trial: u64,
) -> Result<bool, ExperimentError> {
    let mut rng = trial_rng(seed, trial);
    let mut engine = CycleEngine::new(layout, CycleConfig::new(CorrectionQubit::First), Noiseless);
    engine.set_noisy(false);
    let mut list = RiskList::default();
    for b in 0..layout.num_blocks() {
        if rng.random::<f64>() < rate {
            layout.apply_block_z(&mut engine.frame, b);
            list.insert(b, 0);
        }
    }
    let record = SyndromeRecord {
        rounds: vec![RoundRecord {
            index: 0,
            perfect: true,
            detections: None,
            x_checks: Some(engine.run_x_check_round()),
            z_checks: None,
        }],
    };
    let weights = DecoderWeights::for_ratio(1.0, layout.n);
    let result = decoder.decode(&record, &list, &weights, DecodeMode::Wizard)?;
    let mut residual = engine.frame;
    result.apply(layout, &mut residual);
    Ok(layout.logical_parity(&residual)?.success())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percolation_extremes() {
        let layout = CodeLayout::build(Variant::Concatenated, 6).unwrap();
        let mut dec = Decoder::new(&layout);
        assert!((0..20).all(|t| wizard_percolation_trial(&layout, &mut dec, 0.0, 1, t).unwrap()));
        // every block flipped: the error is a product of stabilisers and logicals
        let all = (0..20)
            .map(|t| wizard_percolation_trial(&layout, &mut dec, 1.0, 1, t).unwrap())
            .collect::<Vec<_>>();
        assert!(all.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn small_sweep_is_clean() {
        let r = single_fault_sweep(
            Variant::Concatenated,
            3,
            DecodeMode::RiskList,
            CheckFrequency::Ratio(1),
            CorrectionQubit::Second,
        )
        .unwrap();
        assert!(r.locations > 0);
        assert!(r.failures.is_empty(), "{:?}", &r.failures[..r.failures.len().min(5)]);
    }
}
