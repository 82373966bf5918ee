use super::pauli::{Basis, Pauli};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Random stream used for one trial.
pub type TrialRng = ChaCha8Rng;

/// Independent stream for trial `trial` under `master_seed`.
///
/// The ChaCha stream id carries the trial index, so every trial has its own
/// keystream regardless of which thread runs it or in what order.
pub fn trial_rng(master_seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Which rate applies to an operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Short-range gates of the in-block error-detection circuit.
    Local,
    /// Long-range gates of the surface-code parity checks.
    Global,
}

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("{name} must lie in [0, 1], got {value}")]
    OutOfUnitInterval { name: &'static str, value: f64 },
}

/// Stochastic Pauli channel applied after every operation: with probability
/// `p` an error occurs, drawn from the depolarising channel with probability
/// `depolarising` and from the dephasing channel otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_local: f64,
    pub p_global: f64,
    /// Weight of the depolarising channel; the dephasing weight is `1 - depolarising`.
    pub depolarising: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(p_local: f64, p_global: f64, depolarising: f64, seed: u64) -> Result<Self, NoiseError> {
        for (name, value) in [
            ("p_local", p_local),
            ("p_global", p_global),
            ("depolarising", depolarising),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::OutOfUnitInterval { name, value });
            }
        }
        Ok(NoiseModel {
            p_local,
            p_global,
            depolarising,
            seed,
        })
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            p_local: 0.0,
            p_global: 0.0,
            depolarising: 0.0,
            seed: 0,
        }
    }

    /// Same rate on both tiers.
    pub fn uniform(p: f64, depolarising: f64, seed: u64) -> Result<Self, NoiseError> {
        Self::new(p, p, depolarising, seed)
    }

    #[inline]
    pub fn dephasing(&self) -> f64 {
        1.0 - self.depolarising
    }

    #[inline]
    pub fn rate(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Local => self.p_local,
            Tier::Global => self.p_global,
        }
    }

    /// The studied regime has local gates no worse than global ones.
    pub fn outside_studied_regime(&self) -> bool {
        self.p_local > self.p_global
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_local == 0.0 && self.p_global == 0.0
    }

    pub fn sample_one_qubit_error<R: Rng + ?Sized>(&self, tier: Tier, rng: &mut R) -> Pauli {
        sample_one_qubit(self.rate(tier), self.depolarising, rng)
    }

    pub fn sample_two_qubit_error<R: Rng + ?Sized>(&self, tier: Tier, rng: &mut R) -> (Pauli, Pauli) {
        sample_two_qubit(self.rate(tier), self.depolarising, rng)
    }

    /// Noisy readout: a sampled error just before measurement flips the bit
    /// when it anticommutes with the measured operator.
    pub fn flip_outcome<R: Rng + ?Sized>(&self, tier: Tier, basis: Basis, outcome: bool, rng: &mut R) -> bool {
        let e = self.sample_one_qubit_error(tier, rng);
        outcome ^ e.anticommutes(basis.operator())
    }
}

/// One-qubit channel with one uniform draw per call.
#[inline]
pub fn sample_one_qubit<R: Rng + ?Sized>(p: f64, depolarising: f64, rng: &mut R) -> Pauli {
    let u: f64 = rng.random();
    if u >= p {
        return Pauli::I;
    }
    // u/p is uniform on [0, 1) given that an error happened
    let v = u / p;
    if v < depolarising {
        let k = ((v / depolarising) * 3.0) as usize;
        Pauli::NON_IDENTITY[k.min(2)]
    } else {
        Pauli::Z
    }
}

const DEPHASING_PAIRS: [(Pauli, Pauli); 3] = [(Pauli::Z, Pauli::I), (Pauli::I, Pauli::Z), (Pauli::Z, Pauli::Z)];

/// The 15 non-identity two-qubit Paulis, first qubit major.
pub const NON_IDENTITY_PAIRS: [(Pauli, Pauli); 15] = {
    let mut out = [(Pauli::I, Pauli::I); 15];
    let mut k = 0;
    let mut i = 0;
    while i < 4 {
        let mut j = 0;
        while j < 4 {
            if i != 0 || j != 0 {
                out[k] = (Pauli::ALL[i], Pauli::ALL[j]);
                k += 1;
            }
            j += 1;
        }
        i += 1;
    }
    out
};

#[inline]
pub fn sample_two_qubit<R: Rng + ?Sized>(p: f64, depolarising: f64, rng: &mut R) -> (Pauli, Pauli) {
    let u: f64 = rng.random();
    if u >= p {
        return (Pauli::I, Pauli::I);
    }
    let v = u / p;
    if v < depolarising {
        let k = ((v / depolarising) * 15.0) as usize;
        NON_IDENTITY_PAIRS[k.min(14)]
    } else {
        let w = (v - depolarising) / (1.0 - depolarising);
        let k = (w * 3.0) as usize;
        DEPHASING_PAIRS[k.min(2)]
    }
}

/// Exact law of the one-qubit channel given that an error occurred.
pub fn one_qubit_distribution(depolarising: f64) -> Vec<(Pauli, f64)> {
    Pauli::NON_IDENTITY
        .iter()
        .map(|&e| {
            let deph = if e == Pauli::Z { 1.0 - depolarising } else { 0.0 };
            (e, deph + depolarising / 3.0)
        })
        .collect()
}

/// Exact law of the two-qubit channel given that an error occurred.
pub fn two_qubit_distribution(depolarising: f64) -> Vec<((Pauli, Pauli), f64)> {
    NON_IDENTITY_PAIRS
        .iter()
        .map(|&e| {
            let deph = if DEPHASING_PAIRS.contains(&e) {
                (1.0 - depolarising) / 3.0
            } else {
                0.0
            };
            (e, deph + depolarising / 15.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn noiseless_limit() {
        let m = NoiseModel::uniform(0.0, 0.5, 1).unwrap();
        let mut rng = trial_rng(1, 0);
        for _ in 0..1000 {
            assert_eq!(m.sample_one_qubit_error(Tier::Global, &mut rng), Pauli::I);
            assert_eq!(m.sample_two_qubit_error(Tier::Local, &mut rng), (Pauli::I, Pauli::I));
            assert!(m.flip_outcome(Tier::Global, Basis::X, true, &mut rng));
        }
    }

    #[test]
    fn pure_dephasing_is_z() {
        let m = NoiseModel::uniform(1.0, 0.0, 1).unwrap();
        let mut rng = trial_rng(3, 0);
        for _ in 0..1000 {
            assert_eq!(m.sample_one_qubit_error(Tier::Global, &mut rng), Pauli::Z);
            let (a, b) = m.sample_two_qubit_error(Tier::Global, &mut rng);
            assert!(!a.x_bit() && !b.x_bit());
            assert!(!(a.is_identity() && b.is_identity()));
        }
    }

    #[test]
    fn distributions_are_normalised() {
        for f in [0.0, 0.3, 1.0] {
            let one: f64 = one_qubit_distribution(f).iter().map(|e| e.1).sum();
            let two: f64 = two_qubit_distribution(f).iter().map(|e| e.1).sum();
            assert!((one - 1.0).abs() < 1e-12 && (two - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_identity_pair_table() {
        let mut seen: Vec<_> = NON_IDENTITY_PAIRS.to_vec();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 15);
        assert!(!seen.contains(&(Pauli::I, Pauli::I)));
    }

    #[test]
    fn readout_flips_only_on_anticommuting_errors() {
        let m = NoiseModel::uniform(1.0, 0.0, 0).unwrap();
        let mut rng = trial_rng(0, 0);
        // always Z: flips X readout, leaves Z readout
        assert!(m.flip_outcome(Tier::Local, Basis::X, false, &mut rng));
        assert!(!m.flip_outcome(Tier::Local, Basis::Z, false, &mut rng));
    }

    #[test]
    fn tiers_use_their_own_rate() {
        let m = NoiseModel::new(0.0, 1.0, 0.0, 0).unwrap();
        let mut rng = trial_rng(0, 0);
        assert_eq!(m.sample_one_qubit_error(Tier::Local, &mut rng), Pauli::I);
        assert_eq!(m.sample_one_qubit_error(Tier::Global, &mut rng), Pauli::Z);
    }

    #[test]
    fn regime_flag() {
        let m = NoiseModel::new(0.02, 0.01, 0.0, 0).unwrap();
        assert!(m.outside_studied_regime());
        assert!(NoiseModel::new(1.5, 0.01, 0.0, 0).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, trial| {
            let mut r = trial_rng(seed, trial);
            (0..4).map(|_| r.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 3), draw(7, 3));
        assert_ne!(draw(7, 3), draw(7, 4));
        assert_ne!(draw(7, 3), draw(8, 3));
    }

    #[test]
    fn marginal_rate_converges() {
        let n = 200_000usize;
        for &(p, f) in &[(0.01, 0.0), (0.2, 0.5), (0.6, 1.0)] {
            let m = NoiseModel::uniform(p, f, 0).unwrap();
            let mut rng = trial_rng(11, 0);
            let hits = (0..n)
                .filter(|_| !m.sample_one_qubit_error(Tier::Global, &mut rng).is_identity())
                .count();
            let rate = hits as f64 / n as f64;
            assert!((rate - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{rate} vs {p}");
        }
    }

    #[test]
    fn mixed_channel_weights() {
        // p = 1, half depolarising: Z = 1/2 + 1/6, X = Y = 1/6
        let m = NoiseModel::uniform(1.0, 0.5, 0).unwrap();
        let mut rng = trial_rng(5, 0);
        let n = 120_000;
        let mut counts: HashMap<Pauli, usize> = HashMap::new();
        for _ in 0..n {
            *counts.entry(m.sample_one_qubit_error(Tier::Global, &mut rng)).or_default() += 1;
        }
        let z = counts[&Pauli::Z] as f64 / n as f64;
        let x = counts[&Pauli::X] as f64 / n as f64;
        assert!((z - 2.0 / 3.0).abs() < 0.01);
        assert!((x - 1.0 / 6.0).abs() < 0.01);
    }
}
