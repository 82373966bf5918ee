//! Gate-level execution of the stabiliser-check schedule.
//!
//! Every preparation, gate and measurement is followed by a draw from a
//! [`NoiseSource`]; the resulting Pauli is folded into the ground-truth
//! frame. A round is either an X round (preceded by in-block error detection
//! for the concatenated code) or a Z round. Gates of a check round are
//! applied slot by slot across all checks, which is the usual parallel
//! schedule: within one slot no qubit is touched twice.

use crate::layout::{BlockQubits, CheckType, CodeLayout, Slot, Variant};
use crate::pauli_noise::{sample_one_qubit, sample_two_qubit, Basis, NoiseModel, Pauli, PauliFrame, Tier, TrialRng};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CycleError {
    #[error("error detection needs the concatenated layout")]
    NotConcatenated,
    #[error("schedule needs at least one round and a frequency of at least one")]
    EmptySchedule,
}

/// Supplies the error that follows each circuit location.
pub trait NoiseSource {
    /// Error at a preparation or measurement in `basis`.
    fn one(&mut self, tier: Tier, basis: Basis) -> Pauli;
    fn two(&mut self, tier: Tier) -> (Pauli, Pauli);
}

/// Errors drawn from a [`NoiseModel`] on a per-trial stream.
pub struct Sampled<'a> {
    pub model: &'a NoiseModel,
    pub rng: &'a mut TrialRng,
}

impl NoiseSource for Sampled<'_> {
    #[inline]
    fn one(&mut self, tier: Tier, _: Basis) -> Pauli {
        sample_one_qubit(self.model.rate(tier), self.model.depolarising, self.rng)
    }

    #[inline]
    fn two(&mut self, tier: Tier) -> (Pauli, Pauli) {
        sample_two_qubit(self.model.rate(tier), self.model.depolarising, self.rng)
    }
}

pub struct Noiseless;

impl NoiseSource for Noiseless {
    fn one(&mut self, _: Tier, _: Basis) -> Pauli {
        Pauli::I
    }

    fn two(&mut self, _: Tier) -> (Pauli, Pauli) {
        (Pauli::I, Pauli::I)
    }
}

/// Kind of a circuit location, in the order the engine visits them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Location {
    /// Preparation or measurement in the given basis.
    One(Tier, Basis),
    Two(Tier),
}

/// Fires a fixed fault at one location and is silent elsewhere. Also records
/// the kind of every location it passes, which enumerates the circuit.
#[derive(Default)]
pub struct Injected {
    pub target: Option<usize>,
    pub fault: (Pauli, Pauli),
    pub locations: Vec<Location>,
}

impl Injected {
    pub fn at(target: usize, fault: (Pauli, Pauli)) -> Self {
        Injected {
            target: Some(target),
            fault,
            locations: Vec::new(),
        }
    }

    pub fn enumerate() -> Self {
        Injected::default()
    }
}

impl NoiseSource for Injected {
    fn one(&mut self, tier: Tier, basis: Basis) -> Pauli {
        let here = self.locations.len();
        self.locations.push(Location::One(tier, basis));
        if self.target == Some(here) {
            self.fault.0
        } else {
            Pauli::I
        }
    }

    fn two(&mut self, tier: Tier) -> (Pauli, Pauli) {
        let here = self.locations.len();
        self.locations.push(Location::Two(tier));
        if self.target == Some(here) {
            self.fault
        } else {
            (Pauli::I, Pauli::I)
        }
    }
}

/// How often Z rounds are interleaved with X rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckFrequency {
    /// No Z rounds at all (pure dephasing).
    XOnly,
    /// `F` X rounds followed by one Z round.
    Ratio(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub frequency: CheckFrequency,
    pub total_rounds: usize,
    pub final_perfect_round: bool,
}

impl Schedule {
    /// `3n` rounds closed by a perfect round.
    pub fn for_size(n: usize, frequency: CheckFrequency) -> Self {
        Schedule {
            frequency,
            total_rounds: 3 * n,
            final_perfect_round: true,
        }
    }

    pub fn validate(&self) -> Result<(), CycleError> {
        if self.total_rounds == 0 || self.frequency == CheckFrequency::Ratio(0) {
            return Err(CycleError::EmptySchedule);
        }
        Ok(())
    }

    pub fn has_z_rounds(&self) -> bool {
        matches!(self.frequency, CheckFrequency::Ratio(_))
    }

    /// Type of noisy round `i`.
    pub fn round_type(&self, i: usize) -> CheckType {
        match self.frequency {
            CheckFrequency::XOnly => CheckType::X,
            CheckFrequency::Ratio(f) => {
                if i % (f + 1) < f {
                    CheckType::X
                } else {
                    CheckType::Z
                }
            }
        }
    }
}

/// Which half of a flagged block receives the phase correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionQubit {
    First,
    Second,
}

impl CorrectionQubit {
    /// First qubit when local gates are more than twice as good as global ones.
    pub fn for_rates(p_local: f64, p_global: f64) -> Self {
        if p_local < 0.5 * p_global {
            CorrectionQubit::First
        } else {
            CorrectionQubit::Second
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleConfig {
    /// Coupling order of X checks; the default puts the last two gates on one
    /// row so a mid-check ancilla fault spreads along the logical Z direction.
    pub x_order: [Slot; 4],
    /// Coupling order of Z checks; last two gates on one column.
    pub z_order: [Slot; 4],
    pub correction: CorrectionQubit,
}

impl CycleConfig {
    pub fn new(correction: CorrectionQubit) -> Self {
        CycleConfig {
            x_order: [Slot::N, Slot::E, Slot::W, Slot::S],
            z_order: [Slot::N, Slot::W, Slot::E, Slot::S],
            correction,
        }
    }

    pub fn for_model(model: &NoiseModel) -> Self {
        Self::new(CorrectionQubit::for_rates(model.p_local, model.p_global))
    }
}

/// Outcomes of one round, round-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub index: usize,
    pub perfect: bool,
    /// One bit per block from the in-block XX measurement (concatenated X rounds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detections: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_checks: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_checks: Option<Vec<bool>>,
}

impl RoundRecord {
    pub fn checks(&self, kind: CheckType) -> Option<&[bool]> {
        match kind {
            CheckType::X => self.x_checks.as_deref(),
            CheckType::Z => self.z_checks.as_deref(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeRecord {
    pub rounds: Vec<RoundRecord>,
}

impl SyndromeRecord {
    /// Rounds that measured checks of `kind`, in time order.
    pub fn series(&self, kind: CheckType) -> impl Iterator<Item = (usize, &[bool])> + '_ {
        self.rounds
            .iter()
            .filter_map(move |r| r.checks(kind).map(|c| (r.index, c)))
    }

    pub fn all_even(&self) -> bool {
        self.rounds.iter().all(|r| {
            [&r.detections, &r.x_checks, &r.z_checks]
                .into_iter()
                .flatten()
                .all(|bits| bits.iter().all(|b| !b))
        })
    }
}

/// `(block, round)` pairs flagged by in-block error detection.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskList {
    pub entries: BTreeSet<(usize, usize)>,
}

impl RiskList {
    pub fn contains(&self, block: usize, round: usize) -> bool {
        self.entries.contains(&(block, round))
    }

    pub fn insert(&mut self, block: usize, round: usize) {
        self.entries.insert((block, round));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Ground truth kept for adjudication.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truth {
    pub frame: PauliFrame,
    /// Blocks whose check-visible phase changed since the previous X round,
    /// keyed by the X round that first sees the change. This is the list a
    /// perfect detector would produce.
    pub phase_changes: RiskList,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleOutput {
    pub record: SyndromeRecord,
    pub risk: RiskList,
    pub truth: Truth,
}

/// Runs circuits on one frame. Owns nothing shared; one per trial.
pub struct CycleEngine<'a, N: NoiseSource> {
    layout: &'a CodeLayout,
    config: CycleConfig,
    noise: N,
    noisy: bool,
    pub frame: PauliFrame,
    visible_phase: Vec<bool>,
}

impl<'a, N: NoiseSource> CycleEngine<'a, N> {
    pub fn new(layout: &'a CodeLayout, config: CycleConfig, noise: N) -> Self {
        CycleEngine {
            layout,
            config,
            noise,
            noisy: true,
            frame: PauliFrame::identity(layout.num_qubits),
            visible_phase: vec![false; layout.num_blocks()],
        }
    }

    pub fn into_noise(self) -> N {
        self.noise
    }

    /// Switches the noise source on or off for subsequent operations.
    pub fn set_noisy(&mut self, noisy: bool) {
        self.noisy = noisy;
    }

    #[inline]
    fn prepare(&mut self, tier: Tier, q: usize, basis: Basis) {
        self.frame.reset(q);
        if self.noisy {
            let e = self.noise.one(tier, basis);
            // only the component that anticommutes with the prepared state matters
            match basis {
                Basis::X if e.z_bit() => self.frame.flip_z(q),
                Basis::Z if e.x_bit() => self.frame.flip_x(q),
                _ => {}
            }
        }
    }

    #[inline]
    fn cnot(&mut self, tier: Tier, control: usize, target: usize) {
        self.frame.cnot(control, target);
        if self.noisy {
            let (a, b) = self.noise.two(tier);
            self.frame.apply(control, a);
            self.frame.apply(target, b);
        }
    }

    #[inline]
    fn measure(&mut self, tier: Tier, q: usize, basis: Basis) -> bool {
        let mut bit = match basis {
            Basis::X => self.frame.z(q),
            Basis::Z => self.frame.x(q),
        };
        if self.noisy {
            bit ^= self.noise.one(tier, basis).anticommutes(basis.operator());
        }
        bit
    }

    /// In-block XX measurement on every block, followed by the phase
    /// correction on flagged blocks. Returns the detection bits; flagged
    /// blocks are added to `risk` under `round`.
    pub fn run_error_detection(&mut self, round: usize, risk: &mut RiskList) -> Result<Vec<bool>, CycleError> {
        if self.layout.variant != Variant::Concatenated {
            return Err(CycleError::NotConcatenated);
        }
        let layout = self.layout;
        let mut out = Vec::with_capacity(layout.num_blocks());
        for block in &layout.blocks {
            let BlockQubits::Concatenated { first, second, detect } = block.qubits else {
                unreachable!()
            };
            self.prepare(Tier::Local, detect, Basis::X);
            self.cnot(Tier::Local, detect, first);
            self.cnot(Tier::Local, detect, second);
            let fired = self.measure(Tier::Local, detect, Basis::X);
            if fired {
                match self.config.correction {
                    CorrectionQubit::First => self.frame.flip_z(first),
                    CorrectionQubit::Second => self.frame.flip_z(second),
                }
                risk.insert(block.id, round);
            }
            out.push(fired);
        }
        Ok(out)
    }

    pub fn run_x_check_round(&mut self) -> Vec<bool> {
        let layout = self.layout;
        for a in &layout.x_ancillas {
            self.prepare(Tier::Global, a.qubits[0], Basis::X);
        }
        for slot in self.config.x_order {
            for a in &layout.x_ancillas {
                if let Some(b) = a.slots[slot.index()] {
                    self.cnot(Tier::Global, a.qubits[0], layout.blocks[b].qubits.coupled());
                }
            }
        }
        layout
            .x_ancillas
            .iter()
            .map(|a| self.measure(Tier::Global, a.qubits[0], Basis::X))
            .collect()
    }

    pub fn run_z_check_round(&mut self) -> Vec<bool> {
        let layout = self.layout;
        match layout.variant {
            Variant::Standard => {
                for a in &layout.z_ancillas {
                    self.prepare(Tier::Global, a.qubits[0], Basis::Z);
                }
                for slot in self.config.z_order {
                    for a in &layout.z_ancillas {
                        if let Some(b) = a.slots[slot.index()] {
                            self.cnot(Tier::Global, layout.blocks[b].qubits.coupled(), a.qubits[0]);
                        }
                    }
                }
                layout
                    .z_ancillas
                    .iter()
                    .map(|a| self.measure(Tier::Global, a.qubits[0], Basis::Z))
                    .collect()
            }
            Variant::Concatenated => {
                // |0>_L = (|00> + |11>)/sqrt2: |+>|0> then CNOT
                for a in &layout.z_ancillas {
                    let (a1, a2) = (a.qubits[0], a.qubits[1]);
                    self.prepare(Tier::Global, a1, Basis::X);
                    self.prepare(Tier::Global, a2, Basis::Z);
                    self.cnot(Tier::Global, a1, a2);
                }
                for slot in self.config.z_order {
                    for a in &layout.z_ancillas {
                        if let Some(b) = a.slots[slot.index()] {
                            let BlockQubits::Concatenated { first, second, .. } = layout.blocks[b].qubits else {
                                unreachable!()
                            };
                            self.cnot(Tier::Global, first, a.qubits[0]);
                            self.cnot(Tier::Global, second, a.qubits[1]);
                        }
                    }
                }
                layout
                    .z_ancillas
                    .iter()
                    .map(|a| {
                        let m1 = self.measure(Tier::Global, a.qubits[0], Basis::Z);
                        let m2 = self.measure(Tier::Global, a.qubits[1], Basis::Z);
                        m1 ^ m2
                    })
                    .collect()
            }
        }
    }

    fn note_phase_changes(&mut self, round: usize, truth: &mut RiskList) {
        for (b, block) in self.layout.blocks.iter().enumerate() {
            let now = self.frame.z(block.qubits.coupled());
            if now != self.visible_phase[b] {
                truth.insert(b, round);
                self.visible_phase[b] = now;
            }
        }
    }

    fn x_round(&mut self, index: usize, perfect: bool, risk: &mut RiskList, truth: &mut RiskList) -> RoundRecord {
        let detections = match self.layout.variant {
            Variant::Concatenated => Some(self.run_error_detection(index, risk).expect("concatenated")),
            Variant::Standard => None,
        };
        self.note_phase_changes(index, truth);
        RoundRecord {
            index,
            perfect,
            detections,
            x_checks: Some(self.run_x_check_round()),
            z_checks: None,
        }
    }

    /// Executes the whole schedule and returns record, risk list and truth.
    pub fn run_schedule(mut self, schedule: &Schedule) -> Result<(CycleOutput, N), CycleError> {
        schedule.validate()?;
        let mut record = SyndromeRecord::default();
        let mut risk = RiskList::default();
        let mut phase_changes = RiskList::default();
        for i in 0..schedule.total_rounds {
            let round = match schedule.round_type(i) {
                CheckType::X => self.x_round(i, false, &mut risk, &mut phase_changes),
                CheckType::Z => RoundRecord {
                    index: i,
                    perfect: false,
                    detections: None,
                    x_checks: None,
                    z_checks: Some(self.run_z_check_round()),
                },
            };
            record.rounds.push(round);
        }
        if schedule.final_perfect_round {
            let i = schedule.total_rounds;
            self.set_noisy(false);
            let mut round = self.x_round(i, true, &mut risk, &mut phase_changes);
            if schedule.has_z_rounds() {
                round.z_checks = Some(self.run_z_check_round());
            }
            record.rounds.push(round);
        }
        let output = CycleOutput {
            record,
            risk,
            truth: Truth {
                frame: self.frame,
                phase_changes,
            },
        };
        Ok((output, self.noise))
    }
}

/// Samples one full schedule on the given stream.
pub fn run_schedule(
    layout: &CodeLayout,
    model: &NoiseModel,
    config: CycleConfig,
    schedule: &Schedule,
    rng: &mut TrialRng,
) -> Result<CycleOutput, CycleError> {
    let engine = CycleEngine::new(layout, config, Sampled { model, rng });
    engine.run_schedule(schedule).map(|(out, _)| out)
}

/// Versioned JSON container for a syndrome record and its risk list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeFixture {
    pub format: String,
    pub version: u32,
    pub variant: Variant,
    pub n: usize,
    pub schedule: Schedule,
    pub record: SyndromeRecord,
    pub risk_list: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_phase_changes: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

pub const FIXTURE_FORMAT: &str = "surfcat-syndrome";
pub const FIXTURE_VERSION: u32 = 1;

impl SyndromeFixture {
    pub fn new(layout: &CodeLayout, schedule: Schedule, output: &CycleOutput) -> Self {
        SyndromeFixture {
            format: FIXTURE_FORMAT.to_string(),
            version: FIXTURE_VERSION,
            variant: layout.variant,
            n: layout.n,
            schedule,
            record: output.record.clone(),
            risk_list: output.risk.entries.iter().copied().collect(),
            truth_phase_changes: Some(output.truth.phase_changes.entries.iter().copied().collect()),
            config_hash: None,
        }
    }

    pub fn risk(&self) -> RiskList {
        RiskList {
            entries: self.risk_list.iter().copied().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        let f: SyndromeFixture = serde_json::from_str(s).map_err(|e| e.to_string())?;
        if f.format != FIXTURE_FORMAT || f.version != FIXTURE_VERSION {
            return Err(format!(
                "unsupported fixture {} v{} (expected {FIXTURE_FORMAT} v{FIXTURE_VERSION})",
                f.format, f.version
            ));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli_noise::trial_rng;

    fn concat(n: usize) -> CodeLayout {
        CodeLayout::build(Variant::Concatenated, n).unwrap()
    }

    fn halves(l: &CodeLayout, b: usize) -> (usize, usize) {
        match l.blocks[b].qubits {
            BlockQubits::Concatenated { first, second, .. } => (first, second),
            _ => panic!(),
        }
    }

    fn quiet(l: &CodeLayout, policy: CorrectionQubit) -> CycleEngine<'_, Noiseless> {
        let mut e = CycleEngine::new(l, CycleConfig::new(policy), Noiseless);
        e.set_noisy(false);
        e
    }

    #[test]
    fn detection_corrects_first_qubit() {
        let l = concat(4);
        let (q1, _) = halves(&l, 5);
        let mut e = quiet(&l, CorrectionQubit::First);
        e.frame.apply(q1, Pauli::Z);
        let mut risk = RiskList::default();
        let det = e.run_error_detection(7, &mut risk).unwrap();
        assert_eq!(det.iter().filter(|&&d| d).count(), 1);
        assert!(det[5]);
        assert_eq!(e.frame.get(q1), Pauli::I);
        assert_eq!(e.frame.get(halves(&l, 5).1), Pauli::I);
        assert!(risk.contains(5, 7));
    }

    #[test]
    fn detection_clean_and_logical_cases() {
        let l = concat(3);
        let mut e = quiet(&l, CorrectionQubit::Second);
        let mut risk = RiskList::default();
        assert!(e.run_error_detection(0, &mut risk).unwrap().iter().all(|d| !d));
        assert!(risk.is_empty());
        let (q1, q2) = halves(&l, 4);
        e.frame.apply(q1, Pauli::Z);
        e.frame.apply(q2, Pauli::Z);
        assert!(e.run_error_detection(1, &mut risk).unwrap().iter().all(|d| !d));
        assert!(risk.is_empty());
    }

    #[test]
    fn detection_rejects_standard_layout() {
        let l = CodeLayout::build(Variant::Standard, 3).unwrap();
        let mut e = quiet(&l, CorrectionQubit::First);
        assert_eq!(
            e.run_error_detection(0, &mut RiskList::default()),
            Err(CycleError::NotConcatenated)
        );
    }

    fn flipped(bits: &[bool]) -> Vec<usize> {
        bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    #[test]
    fn x_checks_see_first_qubit_only() {
        let l = concat(5);
        let b = 2 * 5 + 2;
        let (q1, q2) = halves(&l, b);
        let mut e = quiet(&l, CorrectionQubit::First);
        assert!(e.run_x_check_round().iter().all(|x| !x));
        e.frame.apply(q1, Pauli::Z);
        let mut expected = l.block_x_checks[b].clone();
        expected.sort();
        assert_eq!(flipped(&e.run_x_check_round()), expected);
        let mut e = quiet(&l, CorrectionQubit::First);
        e.frame.apply(q2, Pauli::Z);
        assert!(e.run_x_check_round().iter().all(|x| !x));
    }

    #[test]
    fn z_checks_see_single_bit_flips() {
        for variant in [Variant::Standard, Variant::Concatenated] {
            let l = CodeLayout::build(variant, 5).unwrap();
            let b = 2 * 5 + 2;
            let mut e = quiet(&l, CorrectionQubit::First);
            assert!(e.run_z_check_round().iter().all(|x| !x));
            e.frame.apply(l.blocks[b].qubits.coupled(), Pauli::X);
            let mut expected = l.block_z_checks[b].clone();
            expected.sort();
            assert_eq!(flipped(&e.run_z_check_round()), expected);
        }
    }

    #[test]
    fn z_check_ignores_block_stabiliser() {
        let l = concat(5);
        let (q1, q2) = halves(&l, 12);
        let mut e = quiet(&l, CorrectionQubit::First);
        e.frame.apply(q1, Pauli::X);
        e.frame.apply(q2, Pauli::X);
        assert!(e.run_z_check_round().iter().all(|x| !x));
        // the second half alone is also a logical X of the block
        let mut e = quiet(&l, CorrectionQubit::First);
        e.frame.apply(q2, Pauli::X);
        assert_eq!(flipped(&e.run_z_check_round()).len(), 2);
    }

    #[test]
    fn round_pattern() {
        let s = Schedule {
            frequency: CheckFrequency::Ratio(1),
            total_rounds: 6,
            final_perfect_round: false,
        };
        let kinds: Vec<_> = (0..6).map(|i| s.round_type(i)).collect();
        use CheckType::*;
        assert_eq!(kinds, vec![X, Z, X, Z, X, Z]);
        let s3 = Schedule {
            frequency: CheckFrequency::Ratio(3),
            ..s
        };
        let kinds: Vec<_> = (0..8).map(|i| s3.round_type(i)).collect();
        assert_eq!(kinds, vec![X, X, X, Z, X, X, X, Z]);
        let only = Schedule::for_size(4, CheckFrequency::XOnly);
        assert!((0..12).all(|i| only.round_type(i) == X));
    }

    #[test]
    fn noiseless_schedules_stay_clean() {
        let model = NoiseModel::noiseless();
        for variant in [Variant::Standard, Variant::Concatenated] {
            for n in 2..=8 {
                let l = CodeLayout::build(variant, n).unwrap();
                for freq in [CheckFrequency::XOnly, CheckFrequency::Ratio(2)] {
                    let s = Schedule::for_size(n, freq);
                    let mut rng = trial_rng(1, 0);
                    let out = run_schedule(&l, &model, CycleConfig::for_model(&model), &s, &mut rng).unwrap();
                    assert!(out.record.all_even());
                    assert!(out.risk.is_empty());
                    assert!(out.truth.frame.is_identity());
                    assert_eq!(out.record.rounds.len(), 3 * n + 1);
                }
            }
        }
    }

    #[test]
    fn same_seed_same_run() {
        let l = concat(5);
        let model = NoiseModel::new(0.01, 0.03, 0.3, 9).unwrap();
        let s = Schedule::for_size(5, CheckFrequency::Ratio(2));
        let cfg = CycleConfig::for_model(&model);
        let a = run_schedule(&l, &model, cfg, &s, &mut trial_rng(9, 4)).unwrap();
        let b = run_schedule(&l, &model, cfg, &s, &mut trial_rng(9, 4)).unwrap();
        let c = run_schedule(&l, &model, cfg, &s, &mut trial_rng(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pure_dephasing_never_creates_bit_flips() {
        let l = concat(4);
        let model = NoiseModel::uniform(0.05, 0.0, 2).unwrap();
        let s = Schedule::for_size(4, CheckFrequency::XOnly);
        let out = run_schedule(&l, &model, CycleConfig::for_model(&model), &s, &mut trial_rng(2, 0)).unwrap();
        assert_eq!(out.truth.frame.x_bits().count_ones(), 0);
        assert!(out.record.rounds.iter().all(|r| r.z_checks.is_none()));
    }

    #[test]
    fn risk_entries_only_on_detection_rounds() {
        let l = concat(4);
        let model = NoiseModel::uniform(0.05, 0.5, 3).unwrap();
        let s = Schedule::for_size(4, CheckFrequency::Ratio(1));
        let out = run_schedule(&l, &model, CycleConfig::for_model(&model), &s, &mut trial_rng(3, 0)).unwrap();
        assert!(!out.risk.is_empty());
        for &(_, round) in &out.risk.entries {
            assert!(out.record.rounds[round].detections.is_some());
        }
    }

    #[test]
    fn fixture_round_trip() {
        let l = concat(3);
        let model = NoiseModel::uniform(0.05, 0.2, 3).unwrap();
        let s = Schedule::for_size(3, CheckFrequency::Ratio(2));
        let out = run_schedule(&l, &model, CycleConfig::for_model(&model), &s, &mut trial_rng(3, 1)).unwrap();
        let fx = SyndromeFixture::new(&l, s, &out);
        let back = SyndromeFixture::from_json(&fx.to_json()).unwrap();
        assert_eq!(back, fx);
        assert_eq!(back.risk(), out.risk);
        let bad = fx.to_json().replace("\"version\": 1", "\"version\": 9");
        assert!(SyndromeFixture::from_json(&bad).is_err());
    }

    #[test]
    fn injection_enumerates_locations() {
        let l = concat(3);
        let s = Schedule {
            frequency: CheckFrequency::Ratio(1),
            total_rounds: 2,
            final_perfect_round: true,
        };
        let e = CycleEngine::new(&l, CycleConfig::new(CorrectionQubit::First), Injected::enumerate());
        let (_, noise) = e.run_schedule(&s).unwrap();
        // detection: 9 blocks x (prep, 2 cnot, meas); X round: 4 checks, 12 cnots
        // Z round: 4 checks x (2 preps, 1 cnot, 2 meas) + 24 cnots
        let expected = 9 * 4 + (4 + 12 + 4) + (4 * 5 + 24);
        assert_eq!(noise.locations.len(), expected);
    }
}
