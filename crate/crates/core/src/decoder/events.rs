use crate::cycle::SyndromeRecord;
use crate::layout::CheckType;
use serde::{Deserialize, Serialize};

/// A change in one check's outcome between consecutive rounds of its type.
///
/// Field order gives the canonical ordering: by type, then round, then ancilla.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SyndromeEvent {
    pub kind: CheckType,
    pub round: usize,
    /// Position of `round` among the rounds that measured `kind`.
    pub layer: usize,
    pub ancilla: usize,
}

/// Round index of every layer of `kind`.
pub fn layer_rounds(record: &SyndromeRecord, kind: CheckType) -> Vec<usize> {
    record.series(kind).map(|(r, _)| r).collect()
}

/// Events of one check type. The first round is compared against all-even.
pub fn extract_events_of(record: &SyndromeRecord, kind: CheckType) -> Vec<SyndromeEvent> {
    let mut out = Vec::new();
    let mut prev: Vec<bool> = Vec::new();
    for (layer, (round, bits)) in record.series(kind).enumerate() {
        if prev.is_empty() {
            prev = vec![false; bits.len()];
        }
        for (ancilla, (&now, before)) in bits.iter().zip(prev.iter_mut()).enumerate() {
            if now != *before {
                out.push(SyndromeEvent {
                    kind,
                    round,
                    layer,
                    ancilla,
                });
                *before = now;
            }
        }
    }
    out
}

/// X events followed by Z events, each in (round, ancilla) order.
pub fn extract_events(record: &SyndromeRecord) -> Vec<SyndromeEvent> {
    let mut out = extract_events_of(record, CheckType::X);
    out.extend(extract_events_of(record, CheckType::Z));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::RoundRecord;

    fn record(series: &[Vec<bool>]) -> SyndromeRecord {
        SyndromeRecord {
            rounds: series
                .iter()
                .enumerate()
                .map(|(i, bits)| RoundRecord {
                    index: i,
                    perfect: false,
                    detections: None,
                    x_checks: Some(bits.clone()),
                    z_checks: None,
                })
                .collect(),
        }
    }

    #[test]
    fn all_even_is_quiet() {
        assert!(extract_events(&record(&vec![vec![false; 4]; 6])).is_empty());
    }

    #[test]
    fn persistent_flip_is_one_event() {
        let series: Vec<Vec<bool>> = (0..8).map(|r| vec![false, r >= 3, false]).collect();
        let ev = extract_events(&record(&series));
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].round, ev[0].ancilla, ev[0].kind), (3, 1, CheckType::X));
    }

    #[test]
    fn isolated_flip_is_two_events() {
        let series: Vec<Vec<bool>> = (0..8).map(|r| vec![r == 5, false]).collect();
        let rounds: Vec<usize> = extract_events(&record(&series)).iter().map(|e| e.round).collect();
        assert_eq!(rounds, vec![5, 6]);
    }

    #[test]
    fn layers_follow_type_series() {
        let mut rec = record(&[vec![false], vec![true], vec![true]]);
        rec.rounds[1].x_checks = None;
        rec.rounds[1].z_checks = Some(vec![true, false]);
        let ev = extract_events(&rec);
        assert_eq!(ev.len(), 2);
        assert_eq!((ev[0].kind, ev[0].round, ev[0].layer), (CheckType::X, 2, 1));
        assert_eq!((ev[1].kind, ev[1].round, ev[1].layer), (CheckType::Z, 1, 0));
        assert_eq!(layer_rounds(&rec, CheckType::X), vec![0, 2]);
    }
}
