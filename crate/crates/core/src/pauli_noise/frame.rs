use super::pauli::Pauli;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("qubit index {index} out of range for a frame of {len} qubits")]
    OutOfRange { index: usize, len: usize },
    #[error("CNOT control and target are both qubit {0}")]
    SameQubit(usize),
    #[error("frames have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Packed bit vector backing one half of a Pauli frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if v {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

/// Per-qubit X/Z error bits tracked through Clifford circuits.
///
/// A `Y` on qubit `q` is stored as both bits set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliFrame {
    x_bits: BitVec,
    z_bits: BitVec,
}

impl PauliFrame {
    pub fn identity(num_qubits: usize) -> Self {
        PauliFrame {
            x_bits: BitVec::zeros(num_qubits),
            z_bits: BitVec::zeros(num_qubits),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.x_bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.x_bits.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.x_bits.count_ones() == 0 && self.z_bits.count_ones() == 0
    }

    /// Number of qubits carrying a non-identity Pauli.
    pub fn weight(&self) -> usize {
        (0..self.len()).filter(|&q| !self.get(q).is_identity()).count()
    }

    #[inline]
    pub fn x(&self, q: usize) -> bool {
        self.x_bits.get(q)
    }

    #[inline]
    pub fn z(&self, q: usize) -> bool {
        self.z_bits.get(q)
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x_bits
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z_bits
    }

    #[inline]
    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x(q), self.z(q))
    }

    fn check(&self, q: usize) -> Result<(), FrameError> {
        if q < self.len() {
            Ok(())
        } else {
            Err(FrameError::OutOfRange {
                index: q,
                len: self.len(),
            })
        }
    }

    /// Multiplies `p` into the frame at qubit `q`.
    #[inline]
    pub fn apply(&mut self, q: usize, p: Pauli) {
        if p.x_bit() {
            self.x_bits.toggle(q);
        }
        if p.z_bit() {
            self.z_bits.toggle(q);
        }
    }

    pub fn try_apply(&mut self, q: usize, p: Pauli) -> Result<(), FrameError> {
        self.check(q)?;
        self.apply(q, p);
        Ok(())
    }

    #[inline]
    pub fn flip_x(&mut self, q: usize) {
        self.x_bits.toggle(q);
    }

    #[inline]
    pub fn flip_z(&mut self, q: usize) {
        self.z_bits.toggle(q);
    }

    /// Clears the qubit, as on a fresh preparation.
    #[inline]
    pub fn reset(&mut self, q: usize) {
        self.x_bits.set(q, false);
        self.z_bits.set(q, false);
    }

    /// Pushes the frame through a CNOT: X on the control is copied to the
    /// target and Z on the target is copied to the control.
    #[inline]
    pub fn cnot(&mut self, control: usize, target: usize) {
        debug_assert_ne!(control, target);
        if self.x_bits.get(control) {
            self.x_bits.toggle(target);
        }
        if self.z_bits.get(target) {
            self.z_bits.toggle(control);
        }
    }

    pub fn propagate_cnot(&mut self, control: usize, target: usize) -> Result<(), FrameError> {
        self.check(control)?;
        self.check(target)?;
        if control == target {
            return Err(FrameError::SameQubit(control));
        }
        self.cnot(control, target);
        Ok(())
    }

    pub fn xor_assign(&mut self, other: &PauliFrame) -> Result<(), FrameError> {
        if self.len() != other.len() {
            return Err(FrameError::LengthMismatch(self.len(), other.len()));
        }
        self.x_bits.xor_assign(&other.x_bits);
        self.z_bits.xor_assign(&other.z_bits);
        Ok(())
    }

    pub fn clear(&mut self) {
        self.x_bits.clear();
        self.z_bits.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cnot_conjugation_rules() {
        let mut f = PauliFrame::identity(2);
        f.apply(0, Pauli::X);
        f.propagate_cnot(0, 1).unwrap();
        assert_eq!((f.get(0), f.get(1)), (Pauli::X, Pauli::X));

        let mut f = PauliFrame::identity(2);
        f.apply(1, Pauli::Z);
        f.propagate_cnot(0, 1).unwrap();
        assert_eq!((f.get(0), f.get(1)), (Pauli::Z, Pauli::Z));

        let mut f = PauliFrame::identity(2);
        f.apply(0, Pauli::Z);
        f.propagate_cnot(0, 1).unwrap();
        assert_eq!((f.get(0), f.get(1)), (Pauli::Z, Pauli::I));
    }

    #[test]
    fn cnot_errors() {
        let mut f = PauliFrame::identity(3);
        assert_eq!(
            f.propagate_cnot(0, 3),
            Err(FrameError::OutOfRange { index: 3, len: 3 })
        );
        assert_eq!(f.propagate_cnot(1, 1), Err(FrameError::SameQubit(1)));
    }

    #[test]
    fn y_is_both_bits() {
        let mut f = PauliFrame::identity(70);
        f.apply(65, Pauli::Y);
        assert!(f.x(65) && f.z(65));
        f.apply(65, Pauli::X);
        assert_eq!(f.get(65), Pauli::Z);
        assert_eq!(f.weight(), 1);
    }

    fn frame_strategy(len: usize) -> impl Strategy<Value = PauliFrame> {
        prop::collection::vec(0u8..4, len).prop_map(move |v| {
            let mut f = PauliFrame::identity(len);
            for (q, p) in v.into_iter().enumerate() {
                f.apply(q, Pauli::ALL[p as usize]);
            }
            f
        })
    }

    fn circuit_strategy(len: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
        prop::collection::vec((0..len, 0..len), 0..40)
            .prop_map(|v| v.into_iter().filter(|(a, b)| a != b).collect())
    }

    proptest! {
        #[test]
        fn propagation_is_linear(
            f1 in frame_strategy(12),
            f2 in frame_strategy(12),
            circuit in circuit_strategy(12),
        ) {
            let run = |mut f: PauliFrame| {
                for &(c, t) in &circuit {
                    f.propagate_cnot(c, t).unwrap();
                }
                f
            };
            let mut sum = f1.clone();
            sum.xor_assign(&f2).unwrap();
            let mut expected = run(f1);
            expected.xor_assign(&run(f2)).unwrap();
            prop_assert_eq!(run(sum), expected);
        }

        #[test]
        fn cnot_is_involution(f in frame_strategy(8), c in 0usize..8, t in 0usize..8) {
            prop_assume!(c != t);
            let mut g = f.clone();
            g.propagate_cnot(c, t).unwrap();
            g.propagate_cnot(c, t).unwrap();
            prop_assert_eq!(g, f);
        }
    }
}
