//! Lattice geometry for the standard and the concatenated surface code.
//!
//! Data blocks sit on an `n x n` grid. Coordinates are stored doubled so
//! that everything is an integer: block `(r, c)` lives at `(2r + 1, 2c + 1)`
//! and the check whose top-left block is `(r, c)` lives at `(2r + 2, 2c + 2)`.
//! In those units every block of a check is at Manhattan distance 2 (one
//! lattice unit) from the check.
//!
//! X-type weight-2 checks close the top and bottom edges and Z-type ones the
//! left and right edges, so the logical Z is a horizontal chain (row 0) and
//! the logical X a vertical one (column 0).
//!
//! Physical qubits are numbered row-major over the doubled grid; each site
//! expands to the qubits it hosts (a concatenated block is `first, second,
//! detect`, a concatenated Z check is a pair of ancillas).

use crate::pauli_noise::PauliFrame;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayoutError {
    #[error("code size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("no {kind:?} ancilla with id {id}")]
    UnknownAncilla { kind: CheckType, id: usize },
    #[error("residual frame has {got} qubits, layout has {expected}")]
    FrameSize { expected: usize, got: usize },
    #[error("residual violates the in-block XX stabiliser of block {0}")]
    BlockStabiliser(usize),
    #[error("residual violates the {kind:?} stabiliser of ancilla {id}")]
    Stabiliser { kind: CheckType, id: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Standard,
    Concatenated,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Variant::Standard),
            "concatenated" | "concat" => Ok(Variant::Concatenated),
            other => Err(format!("unknown variant '{other}' (expected standard or concatenated)")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Standard => "standard",
            Variant::Concatenated => "concatenated",
        })
    }
}

/// Stabiliser type of a surface-code check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckType {
    X,
    Z,
}

/// Corner of a check, named in the 45-degree rotated picture: `N` is the
/// top-left block, `E` top-right, `W` bottom-left and `S` bottom-right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    N,
    E,
    W,
    S,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::N, Slot::E, Slot::W, Slot::S];

    #[inline]
    pub const fn index(self) -> usize {
        match self {
            Slot::N => 0,
            Slot::E => 1,
            Slot::W => 2,
            Slot::S => 3,
        }
    }

    /// Offset from the check's top-left block.
    const fn offset(self) -> (isize, isize) {
        match self {
            Slot::N => (0, 0),
            Slot::E => (0, 1),
            Slot::W => (1, 0),
            Slot::S => (1, 1),
        }
    }
}

/// Physical qubits making up one surface-code data qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BlockQubits {
    Standard { physical: usize },
    Concatenated { first: usize, second: usize, detect: usize },
}

impl BlockQubits {
    /// The qubit the parity checks couple to.
    #[inline]
    pub fn coupled(&self) -> usize {
        match *self {
            BlockQubits::Standard { physical } => physical,
            BlockQubits::Concatenated { first, .. } => first,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataBlock {
    pub id: usize,
    pub row: usize,
    pub col: usize,
    pub coord: (usize, usize),
    pub qubits: BlockQubits,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ancilla {
    pub id: usize,
    pub kind: CheckType,
    pub coord: (usize, usize),
    /// Block in each slot, indexed by [`Slot::index`].
    pub slots: [Option<usize>; 4],
    /// One qubit, or the `|0>_L` pair of a concatenated Z check.
    pub qubits: Vec<usize>,
}

impl Ancilla {
    pub fn blocks(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().flatten().copied()
    }

    pub fn weight(&self) -> usize {
        self.slots.iter().flatten().count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeLayout {
    pub n: usize,
    pub variant: Variant,
    pub num_qubits: usize,
    pub blocks: Vec<DataBlock>,
    pub x_ancillas: Vec<Ancilla>,
    pub z_ancillas: Vec<Ancilla>,
    /// Blocks carrying the logical X (column 0).
    pub logical_x_support: Vec<usize>,
    /// Blocks carrying the logical Z (row 0).
    pub logical_z_support: Vec<usize>,
    /// Ids of the X (resp. Z) checks touching each block.
    pub block_x_checks: Vec<Vec<usize>>,
    pub block_z_checks: Vec<Vec<usize>>,
}

/// Block-level Pauli content of a residual frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LogicalOutcome {
    /// Residual anticommutes with the logical Z.
    pub x_failed: bool,
    /// Residual anticommutes with the logical X.
    pub z_failed: bool,
}

impl LogicalOutcome {
    pub fn success(&self) -> bool {
        !self.x_failed && !self.z_failed
    }
}

fn check_type_at(r: isize, c: isize) -> CheckType {
    if (r + c).rem_euclid(2) == 0 {
        CheckType::X
    } else {
        CheckType::Z
    }
}

impl CodeLayout {
    pub fn build(variant: Variant, n: usize) -> Result<Self, LayoutError> {
        if n < 2 {
            return Err(LayoutError::TooSmall(n));
        }
        let ni = n as isize;

        // which checks exist, keyed by the top-left block (r, c) in [-1, n-1]
        let mut checks = Vec::new();
        for r in -1..ni {
            for c in -1..ni {
                let kind = check_type_at(r, c);
                let on_row_edge = r == -1 || r == ni - 1;
                let on_col_edge = c == -1 || c == ni - 1;
                let keep = match (on_row_edge, on_col_edge) {
                    (false, false) => true,
                    (true, false) => kind == CheckType::X,
                    (false, true) => kind == CheckType::Z,
                    (true, true) => false,
                };
                if keep {
                    checks.push((r, c, kind));
                }
            }
        }

        // physical numbering, row-major over the doubled grid
        let side = 2 * n + 1;
        let mut site_qubits: Vec<Vec<usize>> = vec![Vec::new(); side * side];
        let mut next = 0usize;
        let mut take = |k: usize| {
            let v: Vec<usize> = (next..next + k).collect();
            next += k;
            v
        };
        let mut check_at = vec![None; side * side];
        for &(r, c, kind) in &checks {
            let (y, x) = ((2 * r + 2) as usize, (2 * c + 2) as usize);
            check_at[y * side + x] = Some(kind);
        }
        for y in 0..side {
            for x in 0..side {
                let site = y * side + x;
                if y % 2 == 1 && x % 2 == 1 {
                    site_qubits[site] = match variant {
                        Variant::Standard => take(1),
                        Variant::Concatenated => take(3),
                    };
                } else if let Some(kind) = check_at[site] {
                    site_qubits[site] = match (variant, kind) {
                        (Variant::Concatenated, CheckType::Z) => take(2),
                        _ => take(1),
                    };
                }
            }
        }
        let num_qubits = next;

        let mut blocks = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let coord = (2 * r + 1, 2 * c + 1);
                let q = &site_qubits[coord.0 * side + coord.1];
                let qubits = match variant {
                    Variant::Standard => BlockQubits::Standard { physical: q[0] },
                    Variant::Concatenated => BlockQubits::Concatenated {
                        first: q[0],
                        second: q[1],
                        detect: q[2],
                    },
                };
                blocks.push(DataBlock {
                    id: r * n + c,
                    row: r,
                    col: c,
                    coord,
                    qubits,
                });
            }
        }

        let mut x_ancillas = Vec::new();
        let mut z_ancillas = Vec::new();
        // `checks` is already row-major in (r, c)
        for &(r, c, kind) in &checks {
            let coord = ((2 * r + 2) as usize, (2 * c + 2) as usize);
            let mut slots = [None; 4];
            for slot in Slot::ALL {
                let (dr, dc) = slot.offset();
                let (br, bc) = (r + dr, c + dc);
                if (0..ni).contains(&br) && (0..ni).contains(&bc) {
                    slots[slot.index()] = Some(br as usize * n + bc as usize);
                }
            }
            let list = match kind {
                CheckType::X => &mut x_ancillas,
                CheckType::Z => &mut z_ancillas,
            };
            list.push(Ancilla {
                id: list.len(),
                kind,
                coord,
                slots,
                qubits: site_qubits[coord.0 * side + coord.1].clone(),
            });
        }

        let mut block_x_checks = vec![Vec::new(); n * n];
        let mut block_z_checks = vec![Vec::new(); n * n];
        for a in &x_ancillas {
            for b in a.blocks() {
                block_x_checks[b].push(a.id);
            }
        }
        for a in &z_ancillas {
            for b in a.blocks() {
                block_z_checks[b].push(a.id);
            }
        }

        Ok(CodeLayout {
            n,
            variant,
            num_qubits,
            logical_x_support: (0..n).map(|r| r * n).collect(),
            logical_z_support: (0..n).collect(),
            blocks,
            x_ancillas,
            z_ancillas,
            block_x_checks,
            block_z_checks,
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Physical qubits belonging to data blocks.
    pub fn num_data_qubits(&self) -> usize {
        match self.variant {
            Variant::Standard => self.blocks.len(),
            Variant::Concatenated => 2 * self.blocks.len(),
        }
    }

    /// Distance of the planar code.
    pub fn distance(&self) -> usize {
        self.n
    }

    pub fn ancillas(&self, kind: CheckType) -> &[Ancilla] {
        match kind {
            CheckType::X => &self.x_ancillas,
            CheckType::Z => &self.z_ancillas,
        }
    }

    pub fn block_checks(&self, kind: CheckType, block: usize) -> &[usize] {
        match kind {
            CheckType::X => &self.block_x_checks[block],
            CheckType::Z => &self.block_z_checks[block],
        }
    }

    /// Blocks of a check in slot order N, E, W, S (absent slots skipped).
    pub fn adjacent_blocks(&self, kind: CheckType, id: usize) -> Result<Vec<usize>, LayoutError> {
        self.ancillas(kind)
            .get(id)
            .map(|a| a.blocks().collect())
            .ok_or(LayoutError::UnknownAncilla { kind, id })
    }

    /// Block-level (X content, Z content) of `frame` on `block`.
    pub fn block_content(&self, frame: &PauliFrame, block: usize) -> Result<(bool, bool), LayoutError> {
        match self.blocks[block].qubits {
            BlockQubits::Standard { physical } => Ok((frame.x(physical), frame.z(physical))),
            BlockQubits::Concatenated { first, second, .. } => {
                if frame.z(first) != frame.z(second) {
                    return Err(LayoutError::BlockStabiliser(block));
                }
                Ok((frame.x(first) ^ frame.x(second), frame.z(first)))
            }
        }
    }

    /// Adjudicates a post-correction residual against both logical operators.
    pub fn logical_parity(&self, residual: &PauliFrame) -> Result<LogicalOutcome, LayoutError> {
        if residual.len() != self.num_qubits {
            return Err(LayoutError::FrameSize {
                expected: self.num_qubits,
                got: residual.len(),
            });
        }
        let mut xs = vec![false; self.blocks.len()];
        let mut zs = vec![false; self.blocks.len()];
        for b in 0..self.blocks.len() {
            let (x, z) = self.block_content(residual, b)?;
            xs[b] = x;
            zs[b] = z;
        }
        for a in &self.x_ancillas {
            if a.blocks().fold(false, |acc, b| acc ^ zs[b]) {
                return Err(LayoutError::Stabiliser {
                    kind: CheckType::X,
                    id: a.id,
                });
            }
        }
        for a in &self.z_ancillas {
            if a.blocks().fold(false, |acc, b| acc ^ xs[b]) {
                return Err(LayoutError::Stabiliser {
                    kind: CheckType::Z,
                    id: a.id,
                });
            }
        }
        Ok(LogicalOutcome {
            x_failed: self.logical_z_support.iter().fold(false, |acc, &b| acc ^ xs[b]),
            z_failed: self.logical_x_support.iter().fold(false, |acc, &b| acc ^ zs[b]),
        })
    }

    /// Applies the block-level logical `Z` to `block`.
    pub fn apply_block_z(&self, frame: &mut PauliFrame, block: usize) {
        match self.blocks[block].qubits {
            BlockQubits::Standard { physical } => frame.flip_z(physical),
            BlockQubits::Concatenated { first, second, .. } => {
                frame.flip_z(first);
                frame.flip_z(second);
            }
        }
    }

    /// Applies the block-level logical `X` to `block`.
    pub fn apply_block_x(&self, frame: &mut PauliFrame, block: usize) {
        frame.flip_x(self.blocks[block].qubits.coupled());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serialises")
    }
}

/// Closed-form check counts `(x, z)` for the n x n layout.
pub fn check_counts(n: usize) -> (usize, usize) {
    let total = n * n - 1;
    (total / 2, total - total / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli_noise::Pauli;

    #[test]
    fn sizes_match_qubit_budget() {
        let std20 = CodeLayout::build(Variant::Standard, 20).unwrap();
        assert_eq!(std20.num_data_qubits(), 400);
        let cat14 = CodeLayout::build(Variant::Concatenated, 14).unwrap();
        assert_eq!(cat14.num_data_qubits(), 392);
        assert!(matches!(
            CodeLayout::build(Variant::Standard, 1),
            Err(LayoutError::TooSmall(1))
        ));
    }

    #[test]
    fn two_by_two_by_hand() {
        // blocks 0 1 / 2 3: one X check on all four, Z checks on the
        // left {0, 2} and right {1, 3} edges
        let l = CodeLayout::build(Variant::Standard, 2).unwrap();
        assert_eq!(l.blocks.len(), 4);
        assert_eq!(l.x_ancillas.len(), 1);
        assert_eq!(l.z_ancillas.len(), 2);
        assert_eq!(l.adjacent_blocks(CheckType::X, 0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(l.adjacent_blocks(CheckType::Z, 0).unwrap(), vec![0, 2]);
        assert_eq!(l.adjacent_blocks(CheckType::Z, 1).unwrap(), vec![1, 3]);
        assert_eq!(l.num_qubits, 7);
        assert_eq!(l.logical_x_support, vec![0, 2]);
        assert_eq!(l.logical_z_support, vec![0, 1]);
    }

    #[test]
    fn three_by_three_by_hand() {
        let l = CodeLayout::build(Variant::Standard, 3).unwrap();
        let xs: Vec<Vec<usize>> = (0..4).map(|i| l.adjacent_blocks(CheckType::X, i).unwrap()).collect();
        let zs: Vec<Vec<usize>> = (0..4).map(|i| l.adjacent_blocks(CheckType::Z, i).unwrap()).collect();
        assert_eq!(xs, vec![vec![1, 2], vec![0, 1, 3, 4], vec![4, 5, 7, 8], vec![6, 7]]);
        assert_eq!(zs, vec![vec![0, 3], vec![1, 2, 4, 5], vec![3, 4, 6, 7], vec![5, 8]]);
    }

    #[test]
    fn counts_and_adjacency_invariants() {
        for variant in [Variant::Standard, Variant::Concatenated] {
            for n in 2..=9 {
                let l = CodeLayout::build(variant, n).unwrap();
                assert_eq!((l.x_ancillas.len(), l.z_ancillas.len()), check_counts(n));
                let per_block = match variant {
                    Variant::Standard => 1,
                    Variant::Concatenated => 3,
                };
                let z_qubits = match variant {
                    Variant::Standard => 1,
                    Variant::Concatenated => 2,
                };
                assert_eq!(
                    l.num_qubits,
                    per_block * n * n + l.x_ancillas.len() + z_qubits * l.z_ancillas.len()
                );
                for a in l.x_ancillas.iter().chain(&l.z_ancillas) {
                    let bulk = a.coord.0 > 0 && a.coord.0 < 2 * n && a.coord.1 > 0 && a.coord.1 < 2 * n;
                    assert_eq!(a.weight(), if bulk { 4 } else { 2 });
                    for b in a.blocks() {
                        let bc = l.blocks[b].coord;
                        assert_eq!(bc.0.abs_diff(a.coord.0) + bc.1.abs_diff(a.coord.1), 2);
                    }
                }
                for b in 0..n * n {
                    assert!(l.block_x_checks[b].len() <= 2 && !l.block_x_checks[b].is_empty());
                    assert!(l.block_z_checks[b].len() <= 2 && !l.block_z_checks[b].is_empty());
                }
                let common: Vec<_> = l
                    .logical_x_support
                    .iter()
                    .filter(|b| l.logical_z_support.contains(b))
                    .collect();
                assert_eq!(common.len(), 1);
            }
        }
    }

    /// Symplectic form over block-level Paulis.
    fn commute(a_x: &[usize], a_z: &[usize], b_x: &[usize], b_z: &[usize]) -> bool {
        let overlap = |p: &[usize], q: &[usize]| p.iter().filter(|i| q.contains(i)).count();
        (overlap(a_x, b_z) + overlap(a_z, b_x)) % 2 == 0
    }

    #[test]
    fn stabilisers_commute_and_logicals_anticommute() {
        for n in 2..=7 {
            let l = CodeLayout::build(Variant::Standard, n).unwrap();
            let xs: Vec<Vec<usize>> = l.x_ancillas.iter().map(|a| a.blocks().collect()).collect();
            let zs: Vec<Vec<usize>> = l.z_ancillas.iter().map(|a| a.blocks().collect()).collect();
            for x in &xs {
                for z in &zs {
                    assert!(commute(x, &[], &[], z));
                }
                assert!(commute(x, &[], &[], &l.logical_z_support));
            }
            for z in &zs {
                assert!(commute(&[], z, &l.logical_x_support, &[]));
            }
            assert!(!commute(&l.logical_x_support, &[], &[], &l.logical_z_support));
        }
    }

    #[test]
    fn build_is_deterministic() {
        let a = CodeLayout::build(Variant::Concatenated, 6).unwrap();
        let b = CodeLayout::build(Variant::Concatenated, 6).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn unknown_ancilla() {
        let l = CodeLayout::build(Variant::Standard, 3).unwrap();
        assert_eq!(
            l.adjacent_blocks(CheckType::X, 4),
            Err(LayoutError::UnknownAncilla {
                kind: CheckType::X,
                id: 4
            })
        );
    }

    #[test]
    fn logical_parity_cases() {
        for variant in [Variant::Standard, Variant::Concatenated] {
            let l = CodeLayout::build(variant, 5).unwrap();
            let clean = PauliFrame::identity(l.num_qubits);
            assert_eq!(l.logical_parity(&clean).unwrap(), LogicalOutcome::default());

            let mut chain = clean.clone();
            for &b in &l.logical_z_support {
                l.apply_block_z(&mut chain, b);
            }
            assert_eq!(
                l.logical_parity(&chain).unwrap(),
                LogicalOutcome {
                    x_failed: false,
                    z_failed: true
                }
            );

            let mut xchain = clean.clone();
            for &b in &l.logical_x_support {
                l.apply_block_x(&mut xchain, b);
            }
            assert_eq!(
                l.logical_parity(&xchain).unwrap(),
                LogicalOutcome {
                    x_failed: true,
                    z_failed: false
                }
            );

            let mut single = clean.clone();
            l.apply_block_z(&mut single, 2 * 5 + 2);
            assert!(matches!(
                l.logical_parity(&single),
                Err(LayoutError::Stabiliser { kind: CheckType::X, .. })
            ));
        }
    }

    #[test]
    fn concatenated_block_rules() {
        let l = CodeLayout::build(Variant::Concatenated, 3).unwrap();
        let BlockQubits::Concatenated { first, second, .. } = l.blocks[4].qubits else {
            panic!()
        };
        let mut f = PauliFrame::identity(l.num_qubits);
        f.apply(first, Pauli::Z);
        assert_eq!(l.logical_parity(&f), Err(LayoutError::BlockStabiliser(4)));
        // X on both halves is the in-block stabiliser XX
        let mut f = PauliFrame::identity(l.num_qubits);
        f.apply(first, Pauli::X);
        f.apply(second, Pauli::X);
        assert_eq!(l.block_content(&f, 4).unwrap(), (false, false));
        assert_eq!(l.logical_parity(&f).unwrap(), LogicalOutcome::default());
    }
}
