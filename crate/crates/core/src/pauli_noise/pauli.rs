use serde::{Deserialize, Serialize};
use std::fmt;

/// Single-qubit Pauli operator with the phase discarded.
///
/// Stored as its (x, z) symplectic bits so products are a pair of XORs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    #[default]
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub const fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub const fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    #[inline]
    pub const fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    #[inline]
    pub const fn is_identity(self) -> bool {
        matches!(self, Pauli::I)
    }

    /// Group product modulo phase.
    #[inline]
    pub const fn multiply(self, other: Pauli) -> Pauli {
        Pauli::from_bits(self.x_bit() ^ other.x_bit(), self.z_bit() ^ other.z_bit())
    }

    /// True when the two operators anticommute.
    #[inline]
    pub const fn anticommutes(self, other: Pauli) -> bool {
        (self.x_bit() & other.z_bit()) ^ (self.z_bit() & other.x_bit())
    }
}

impl std::ops::Mul for Pauli {
    type Output = Pauli;

    fn mul(self, rhs: Pauli) -> Pauli {
        self.multiply(rhs)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Measurement or preparation basis of a single qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    #[inline]
    pub const fn operator(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products() {
        assert_eq!(Pauli::Z * Pauli::Z, Pauli::I);
        assert_eq!(Pauli::X * Pauli::Z, Pauli::Y);
        assert_eq!(Pauli::I * Pauli::Y, Pauli::Y);
        assert_eq!(Pauli::Y * Pauli::Z, Pauli::X);
    }

    #[test]
    fn group_table_is_abelian_modulo_phase() {
        for a in Pauli::ALL {
            assert_eq!(a * a, Pauli::I);
            for b in Pauli::ALL {
                assert_eq!(a * b, b * a);
                for c in Pauli::ALL {
                    assert_eq!((a * b) * c, a * (b * c));
                }
            }
        }
    }

    #[test]
    fn commutation() {
        assert!(Pauli::X.anticommutes(Pauli::Z));
        assert!(Pauli::Y.anticommutes(Pauli::Z));
        assert!(!Pauli::Z.anticommutes(Pauli::Z));
        assert!(!Pauli::I.anticommutes(Pauli::X));
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let distinct = a != b && !a.is_identity() && !b.is_identity();
                assert_eq!(a.anticommutes(b), distinct);
            }
        }
    }
}
