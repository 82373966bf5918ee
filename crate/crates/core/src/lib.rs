pub mod cli;
pub mod cycle;
pub mod decoder;
pub mod experiment;
pub mod layout;
pub mod pauli_noise;
