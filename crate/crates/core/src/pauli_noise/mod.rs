//! Pauli algebra, error frames, and the two-tier dephasing/depolarising channel.

mod frame;
mod noise;
mod pauli;

pub use frame::{BitVec, FrameError, PauliFrame};
pub use noise::{
    one_qubit_distribution, sample_one_qubit, sample_two_qubit, two_qubit_distribution, trial_rng, NoiseError, NoiseModel, Tier, TrialRng, NON_IDENTITY_PAIRS,
};
pub use pauli::{Basis, Pauli};
