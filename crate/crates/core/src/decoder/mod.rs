//! Matching decoder over the space-time syndrome graph.
//!
//! Phase-flip events (from X checks) are decoded on a graph whose spatial
//! edges are cheap through blocks flagged by in-block error detection and
//! expensive otherwise. Bit-flip events (from Z checks) always use unit
//! weights: the detection circuit carries no information about bit flips.

mod blossom;
mod events;
mod graph;
mod lazy;
mod matching;

pub use blossom::max_weight_matching;
pub use events::{extract_events, extract_events_of, layer_rounds, SyndromeEvent};
use lazy::LazyDistances;
pub use graph::{DecoderGraph, Dist, DijkstraScratch, Edge, EdgeWeights, ShortestPaths, SpatialTable, Stop};
pub use matching::{
    brute_force_boundary_matching, greedy_boundary_matching, match_events_with, min_weight_boundary_matching,
    BoundaryMatching, MatchingError, PairBound, PairOracle, Partner, NEAREST,
};

use crate::cycle::{RiskList, SyndromeRecord};
use crate::layout::{CheckType, CodeLayout};
use crate::pauli_noise::PauliFrame;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DecoderError {
    #[error("invalid decoder weights: {0}")]
    InvalidWeights(String),
    #[error("{kind:?} events could not be matched even without a cutoff")]
    Unmatchable { kind: CheckType },
    #[error("matched pair ({0}, {1}) has no witness path")]
    MissingPath(usize, usize),
    #[error("unknown decoder mode `{0}`")]
    UnknownMode(String),
}

/// Integer units per unit of weight.
pub const WEIGHT_SCALE: f64 = 1000.0;

/// Spatial, temporal and cutoff parameters of the weighted decoder, in units
/// of the listed-block weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderWeights {
    /// Weight of a block flagged by error detection.
    pub listed: f64,
    /// Weight of an unflagged block; `None` forbids crossing it.
    pub unlisted: Option<f64>,
    pub time: f64,
    /// Distances at or beyond this are treated as unreachable; `None` disables it.
    pub cutoff: Option<f64>,
}

/// Defaults keyed by local/global error ratio: `(ratio, z, t, cutoff(n))`.
const WEIGHT_TABLE: [(f64, f64, f64, fn(usize) -> f64); 6] = [
    (1.0, 12.0, 3.5, |n| (3 * n + 1) as f64),
    (0.5, 12.0, 3.5, |n| (3 * n + 1) as f64),
    (1.0 / 3.0, 4.5, 0.85, |n| (2 * n + 4) as f64),
    (0.2, 4.0, 0.5, |n| (n + 10) as f64),
    (0.1, 3.0, 0.4, |n| (n + 6) as f64),
    (0.05, 3.0, 0.35, |n| (n + 5) as f64),
];

impl DecoderWeights {
    /// Tuned defaults for the table entry nearest (in log ratio) to `p_local / p_global`.
    pub fn for_ratio(local_over_global: f64, n: usize) -> Self {
        let key = local_over_global.clamp(1e-6, 1.0).ln();
        let &(_, z, t, c) = WEIGHT_TABLE
            .iter()
            .min_by(|a, b| (a.0.ln() - key).abs().total_cmp(&(b.0.ln() - key).abs()))
            .expect("non-empty table");
        DecoderWeights {
            listed: 1.0,
            unlisted: Some(z),
            time: t,
            cutoff: Some(c(n)),
        }
    }

    /// The same weights with flagged blocks as the only passable ones.
    pub fn oracle(self) -> Self {
        DecoderWeights {
            unlisted: None,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), DecoderError> {
        let bad = |m: &str| Err(DecoderError::InvalidWeights(m.to_string()));
        if !(self.listed > 0.0 && self.listed.is_finite()) {
            return bad("listed weight must be positive");
        }
        if let Some(z) = self.unlisted {
            if !(z >= self.listed && z.is_finite()) {
                return bad("unlisted weight must be at least the listed weight");
            }
        }
        if !(self.time > 0.0 && self.time.is_finite()) {
            return bad("time weight must be positive");
        }
        if let Some(c) = self.cutoff {
            if !(c > 0.0) {
                return bad("cutoff must be positive");
            }
        }
        Ok(())
    }

    fn quantised(&self) -> (EdgeWeights, Option<Dist>) {
        let q = |x: f64| ((x * WEIGHT_SCALE).round() as Dist).max(1);
        (
            EdgeWeights {
                listed: q(self.listed),
                unlisted: self.unlisted.map(q),
                time: q(self.time),
            },
            self.cutoff.filter(|c| c.is_finite()).map(|c| (c * WEIGHT_SCALE).round() as Dist),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// Unit weights everywhere; the list is ignored.
    Standard,
    /// Weighted by the error-detection list.
    RiskList,
    /// Weighted by the true list of changed blocks, unlisted blocks forbidden.
    Wizard,
}

impl std::str::FromStr for DecodeMode {
    type Err = DecoderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "standard" => Ok(DecodeMode::Standard),
            "risk_list" | "risk" => Ok(DecodeMode::RiskList),
            "wizard" => Ok(DecodeMode::Wizard),
            _ => Err(DecoderError::UnknownMode(s.to_string())),
        }
    }
}

impl std::fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecodeMode::Standard => "standard",
            DecodeMode::RiskList => "risk_list",
            DecodeMode::Wizard => "wizard",
        })
    }
}

/// Event distances and witness paths for one check type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceTable {
    pub events: Vec<SyndromeEvent>,
    /// Row-major `m x m`, `None` for unreachable pairs.
    pub pair: Vec<Option<Dist>>,
    pub boundary: Vec<Option<Dist>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub event: SyndromeEvent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partner: Option<SyndromeEvent>,
    pub distance: Dist,
    /// Blocks receiving the block-level correction.
    pub blocks: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDecode {
    pub events: usize,
    pub pairs: Vec<MatchedPair>,
    pub total_weight: Dist,
    /// Times the cutoff was relaxed before a perfect matching existed.
    pub cutoff_retries: u32,
    /// Set when forbidden edges had to be reopened to match every event.
    pub reopened: bool,
}

impl TypeDecode {
    /// Net set of blocks to correct (blocks hit an even number of times cancel).
    pub fn correction_blocks(&self, num_blocks: usize) -> Vec<usize> {
        let mut odd = vec![false; num_blocks];
        for p in &self.pairs {
            for &b in &p.blocks {
                odd[b] ^= true;
            }
        }
        (0..num_blocks).filter(|&b| odd[b]).collect()
    }
}

/// Matching and corrections for both check types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub mode: DecodeMode,
    /// Phase-flip decoding; corrected with block-level `Z`.
    pub x: TypeDecode,
    /// Bit-flip decoding; corrected with block-level `X`.
    pub z: TypeDecode,
}

impl DecodeResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decode result serialises")
    }

    /// Applies every correction to `frame`.
    pub fn apply(&self, layout: &CodeLayout, frame: &mut PauliFrame) {
        apply_correction(layout, self, frame);
    }
}

/// Applies block-level `Z` along phase-flip witness paths and block-level `X`
/// along bit-flip ones. Time edges carry no correction.
pub fn apply_correction(layout: &CodeLayout, result: &DecodeResult, frame: &mut PauliFrame) {
    for b in result.x.correction_blocks(layout.num_blocks()) {
        layout.apply_block_z(frame, b);
    }
    for b in result.z.correction_blocks(layout.num_blocks()) {
        layout.apply_block_x(frame, b);
    }
}

const MAX_CUTOFF_DOUBLINGS: u32 = 4;

/// Reusable decoder for one layout. Holds precomputed unit-weight tables
/// and Dijkstra buffers; `decode` is otherwise a pure function of its inputs.
pub struct Decoder<'a> {
    layout: &'a CodeLayout,
    x_table: SpatialTable,
    z_table: SpatialTable,
    scratch: DijkstraScratch,
}

impl<'a> Decoder<'a> {
    pub fn new(layout: &'a CodeLayout) -> Self {
        Decoder {
            layout,
            x_table: SpatialTable::build(layout, CheckType::X),
            z_table: SpatialTable::build(layout, CheckType::Z),
            scratch: DijkstraScratch::default(),
        }
    }

    pub fn layout(&self) -> &CodeLayout {
        self.layout
    }

    /// Full pipeline: events, distances, matching, correction paths.
    /// `list` is the detection list in risk-list mode and the true list in
    /// wizard mode; standard mode ignores it.
    pub fn decode(
        &mut self,
        record: &SyndromeRecord,
        list: &RiskList,
        weights: &DecoderWeights,
        mode: DecodeMode,
    ) -> Result<DecodeResult, DecoderError> {
        weights.validate()?;
        let x_events = extract_events_of(record, CheckType::X);
        let z_events = extract_events_of(record, CheckType::Z);
        let x = match mode {
            DecodeMode::Standard => self.decode_unit(CheckType::X, &x_events)?,
            DecodeMode::RiskList => self.decode_weighted(record, &x_events, list, *weights)?,
            DecodeMode::Wizard => self.decode_weighted(record, &x_events, list, weights.oracle())?,
        };
        let z = self.decode_unit(CheckType::Z, &z_events)?;
        Ok(DecodeResult { mode, x, z })
    }

    /// Closed-form distances on the unit-weight graph.
    pub fn unit_distances(&self, kind: CheckType, events: &[SyndromeEvent]) -> DistanceTable {
        let table = self.table(kind);
        let m = events.len();
        let mut pair = vec![None; m * m];
        for (i, a) in events.iter().enumerate() {
            for (j, b) in events.iter().enumerate() {
                pair[i * m + j] = table
                    .distance(a.ancilla, b.ancilla)
                    .map(|d| d as Dist + (a.layer as Dist - b.layer as Dist).abs());
            }
        }
        let boundary = events
            .iter()
            .map(|e| table.distance(e.ancilla, table.boundary()).map(Dist::from))
            .collect();
        DistanceTable {
            events: events.to_vec(),
            pair,
            boundary,
        }
    }

    fn table(&self, kind: CheckType) -> &SpatialTable {
        match kind {
            CheckType::X => &self.x_table,
            CheckType::Z => &self.z_table,
        }
    }

    fn decode_unit(&self, kind: CheckType, events: &[SyndromeEvent]) -> Result<TypeDecode, DecoderError> {
        if events.is_empty() {
            return Ok(TypeDecode::default());
        }
        let table = self.table(kind);
        let d = self.unit_distances(kind, events);
        let matching = min_weight_boundary_matching(&d.pair, &d.boundary).map_err(|_| DecoderError::Unmatchable { kind })?;
        let m = events.len();
        let mut pairs = Vec::new();
        for (i, p) in matching.partner.iter().enumerate() {
            match *p {
                Partner::Boundary => pairs.push(MatchedPair {
                    event: events[i],
                    partner: None,
                    distance: d.boundary[i].expect("finite"),
                    blocks: table.path_blocks(events[i].ancilla, table.boundary()),
                }),
                Partner::Event(j) if i < j => pairs.push(MatchedPair {
                    event: events[i],
                    partner: Some(events[j]),
                    distance: d.pair[i * m + j].expect("finite"),
                    blocks: table.path_blocks(events[i].ancilla, events[j].ancilla),
                }),
                Partner::Event(_) => {}
            }
        }
        Ok(TypeDecode {
            events: m,
            pairs,
            total_weight: matching.total,
            cutoff_retries: 0,
            reopened: false,
        })
    }

    /// Cutoff-Dijkstra distances from every event on `graph`.
    pub fn graph_distances(
        &mut self,
        graph: &DecoderGraph,
        events: &[SyndromeEvent],
        cutoff: Option<Dist>,
    ) -> DistanceTable {
        let m = events.len();
        let nodes: Vec<usize> = events.iter().map(|e| graph.node(e.layer, e.ancilla)).collect();
        let mut pair = vec![None; m * m];
        let mut boundary = vec![None; m];
        for i in 0..m {
            graph.approx_dijkstra_into(nodes[i], cutoff, &mut self.scratch);
            for j in 0..m {
                pair[i * m + j] = self.scratch.distance(nodes[j]);
            }
            boundary[i] = graph.boundary().and_then(|b| self.scratch.distance(b));
        }
        // a run from j may stop short of i even when i reached j; keep both symmetric
        for i in 0..m {
            for j in i + 1..m {
                let d = match (pair[i * m + j], pair[j * m + i]) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                pair[i * m + j] = d;
                pair[j * m + i] = d;
            }
        }
        DistanceTable {
            events: events.to_vec(),
            pair,
            boundary,
        }
    }

    fn decode_weighted(
        &mut self,
        record: &SyndromeRecord,
        events: &[SyndromeEvent],
        list: &RiskList,
        weights: DecoderWeights,
    ) -> Result<TypeDecode, DecoderError> {
        if events.is_empty() {
            return Ok(TypeDecode::default());
        }
        let kind = CheckType::X;
        let rounds = layer_rounds(record, kind);
        let (edge_weights, cutoff) = weights.quantised();
        let mut graph = DecoderGraph::space_time(self.layout, kind, &rounds, edge_weights, list);
        let mut cutoff = cutoff;
        let mut retries = 0;
        let mut reopened = false;
        let nodes: Vec<usize> = events.iter().map(|e| graph.node(e.layer, e.ancilla)).collect();
        let (matching, boundary) = loop {
            let mut lazy = LazyDistances::new(&graph, nodes.clone(), cutoff, &mut self.scratch);
            match match_events_with(&mut lazy) {
                Ok(m) => {
                    let boundary: Vec<Option<Dist>> = (0..events.len()).map(|i| lazy.boundary(i)).collect();
                    break (m, boundary);
                }
                Err(_) => match cutoff {
                    Some(c) if retries < MAX_CUTOFF_DOUBLINGS => {
                        cutoff = Some(c.saturating_mul(2));
                        retries += 1;
                    }
                    Some(_) => {
                        cutoff = None;
                        retries += 1;
                    }
                    None if !reopened && edge_weights.unlisted.is_none() => {
                        // only forbidden edges can disconnect an event
                        let reopen = EdgeWeights {
                            unlisted: Some(edge_weights.listed * 100),
                            ..edge_weights
                        };
                        graph = DecoderGraph::space_time(self.layout, kind, &rounds, reopen, list);
                        reopened = true;
                    }
                    None => return Err(DecoderError::Unmatchable { kind }),
                },
            }
        };
        let m = events.len();
        let limit = cutoff.unwrap_or(Dist::MAX);
        let sink = graph.boundary().expect("space-time graphs have a boundary");
        let mut pairs = Vec::new();
        for (i, p) in matching.partner.iter().enumerate() {
            let (target, j) = match *p {
                Partner::Boundary => (sink, None),
                Partner::Event(j) if i < j => (nodes[j], Some(j)),
                Partner::Event(_) => continue,
            };
            graph.search(nodes[i], limit, Stop::Target(target), &mut self.scratch);
            let distance = self.scratch.settled(target).ok_or(DecoderError::MissingPath(i, j.unwrap_or(i)))?;
            debug_assert!(j.is_some() || boundary[i] == Some(distance));
            pairs.push(MatchedPair {
                event: events[i],
                partner: j.map(|j| events[j]),
                distance,
                blocks: self.scratch.path_blocks(target),
            });
        }
        Ok(TypeDecode {
            events: m,
            pairs,
            total_weight: matching.total,
            cutoff_retries: retries,
            reopened,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::RoundRecord;
    use crate::layout::Variant;

    #[test]
    fn table_lookup_picks_nearest_entry() {
        let w = DecoderWeights::for_ratio(1.0, 10);
        assert_eq!((w.unlisted, w.time, w.cutoff), (Some(12.0), 3.5, Some(31.0)));
        let w = DecoderWeights::for_ratio(1.0 / 3.0, 10);
        assert_eq!((w.unlisted, w.time, w.cutoff), (Some(4.5), 0.85, Some(24.0)));
        let w = DecoderWeights::for_ratio(0.2, 8);
        assert_eq!((w.unlisted, w.time, w.cutoff), (Some(4.0), 0.5, Some(18.0)));
        let w = DecoderWeights::for_ratio(0.1, 8);
        assert_eq!((w.unlisted, w.time, w.cutoff), (Some(3.0), 0.4, Some(14.0)));
        let w = DecoderWeights::for_ratio(0.05, 8);
        assert_eq!((w.unlisted, w.time, w.cutoff), (Some(3.0), 0.35, Some(13.0)));
        assert_eq!(DecoderWeights::for_ratio(0.09, 8), DecoderWeights::for_ratio(0.1, 8));
        assert_eq!(DecoderWeights::for_ratio(2.0, 8), DecoderWeights::for_ratio(1.0, 8));
    }

    #[test]
    fn weight_validation() {
        let mut w = DecoderWeights::for_ratio(1.0, 4);
        assert!(w.validate().is_ok());
        w.unlisted = Some(0.5);
        assert!(w.validate().is_err());
        w.unlisted = None;
        assert!(w.validate().is_ok());
        w.time = 0.0;
        assert!(w.validate().is_err());
    }

    #[test]
    fn modes_parse() {
        assert_eq!("risk-list".parse::<DecodeMode>().unwrap(), DecodeMode::RiskList);
        assert_eq!("Wizard".parse::<DecodeMode>().unwrap(), DecodeMode::Wizard);
        assert!("mle".parse::<DecodeMode>().is_err());
    }

    fn one_round(layout: &CodeLayout, frame: &PauliFrame) -> SyndromeRecord {
        let xs: Vec<bool> = layout
            .x_ancillas
            .iter()
            .map(|a| a.blocks().fold(false, |acc, b| acc ^ frame.z(layout.blocks[b].qubits.coupled())))
            .collect();
        SyndromeRecord {
            rounds: vec![RoundRecord {
                index: 0,
                perfect: true,
                detections: None,
                x_checks: Some(xs),
                z_checks: None,
            }],
        }
    }

    #[test]
    fn noiseless_record_gives_identity() {
        let layout = CodeLayout::build(Variant::Concatenated, 5).unwrap();
        let mut dec = Decoder::new(&layout);
        let frame = PauliFrame::identity(layout.num_qubits);
        let rec = one_round(&layout, &frame);
        for mode in [DecodeMode::Standard, DecodeMode::RiskList, DecodeMode::Wizard] {
            let r = dec
                .decode(&rec, &RiskList::default(), &DecoderWeights::for_ratio(1.0, 5), mode)
                .unwrap();
            assert!(r.x.pairs.is_empty() && r.z.pairs.is_empty());
        }
    }

    #[test]
    fn single_block_error_is_cancelled() {
        for variant in [Variant::Standard, Variant::Concatenated] {
            let layout = CodeLayout::build(variant, 6).unwrap();
            let mut dec = Decoder::new(&layout);
            for b in 0..layout.num_blocks() {
                let mut frame = PauliFrame::identity(layout.num_qubits);
                layout.apply_block_z(&mut frame, b);
                let rec = one_round(&layout, &frame);
                let mut risk = RiskList::default();
                risk.insert(b, 0);
                for mode in [DecodeMode::Standard, DecodeMode::RiskList, DecodeMode::Wizard] {
                    let r = dec.decode(&rec, &risk, &DecoderWeights::for_ratio(1.0, 6), mode).unwrap();
                    let mut f = frame.clone();
                    r.apply(&layout, &mut f);
                    let out = layout.logical_parity(&f).unwrap();
                    assert!(out.success(), "block {b} mode {mode}");
                }
            }
        }
    }

    #[test]
    fn measurement_error_uses_time_edge_only() {
        let layout = CodeLayout::build(Variant::Concatenated, 5).unwrap();
        let a = layout.x_ancillas.len();
        let mut rounds = Vec::new();
        for r in 0..4 {
            let mut bits = vec![false; a];
            if r == 2 {
                bits[3] = true;
            }
            rounds.push(RoundRecord {
                index: r,
                perfect: false,
                detections: Some(vec![false; 25]),
                x_checks: Some(bits),
                z_checks: None,
            });
        }
        let rec = SyndromeRecord { rounds };
        let mut dec = Decoder::new(&layout);
        for mode in [DecodeMode::Standard, DecodeMode::RiskList] {
            let r = dec
                .decode(&rec, &RiskList::default(), &DecoderWeights::for_ratio(1.0, 5), mode)
                .unwrap();
            assert_eq!(r.x.pairs.len(), 1);
            assert!(r.x.pairs[0].blocks.is_empty());
        }
    }

    #[test]
    fn lazy_distances_reach_the_dense_optimum() {
        use crate::cycle::{run_schedule, CheckFrequency, CycleConfig, Schedule};
        use crate::pauli_noise::{trial_rng, NoiseModel};
        let n = 6;
        let layout = CodeLayout::build(Variant::Concatenated, n).unwrap();
        let mut dec = Decoder::new(&layout);
        for seed in 0..30u64 {
            let model = NoiseModel::new(0.02, 0.05 + 0.001 * seed as f64, 0.0, seed).unwrap();
            let schedule = Schedule::for_size(n, CheckFrequency::XOnly);
            let out = run_schedule(&layout, &model, CycleConfig::for_model(&model), &schedule, &mut trial_rng(seed, 0))
                .unwrap();
            let events = extract_events_of(&out.record, CheckType::X);
            let mut weights = DecoderWeights::for_ratio(0.4, n);
            if seed % 3 == 0 {
                weights.cutoff = None;
            }
            let (edge_weights, cutoff) = weights.quantised();
            let rounds = layer_rounds(&out.record, CheckType::X);
            let graph = DecoderGraph::space_time(&layout, CheckType::X, &rounds, edge_weights, &out.risk);
            let table = dec.graph_distances(&graph, &events, cutoff);
            let dense = min_weight_boundary_matching(&table.pair, &table.boundary).map(|m| m.total);
            let nodes = events.iter().map(|e| graph.node(e.layer, e.ancilla)).collect();
            let mut scratch = DijkstraScratch::default();
            let lazy = match_events_with(&mut LazyDistances::new(&graph, nodes, cutoff, &mut scratch)).map(|m| m.total);
            assert_eq!(dense, lazy, "seed {seed}, {} events", events.len());
        }
    }
}
