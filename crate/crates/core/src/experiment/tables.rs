use crate::cycle::{CheckFrequency, CorrectionQubit, CycleConfig, CycleEngine, Injected, Location, Schedule};
use crate::layout::{CodeLayout, LayoutError, Variant};
use crate::pauli_noise::{one_qubit_distribution, two_qubit_distribution, Basis};
use serde::{Deserialize, Serialize};

/// Relative strengths (depolarising over dephasing) with tabulated frequencies.
pub const FREQUENCY_STRENGTHS: [f64; 6] = [0.2, 0.3, 0.5, 0.7, 0.9, 1.0];

const STANDARD_F: [usize; 6] = [9, 6, 4, 4, 3, 3];
const LOCAL_THIRD_F: [usize; 6] = [5, 3, 2, 2, 2, 1];
const LOCAL_EQUAL_F: [usize; 6] = [4, 3, 2, 1, 1, 1];

/// Reference Z/X error ratio of the plain code at each tabulated strength.
pub const Z_TO_X_RATIO: [f64; 6] = [9.918, 6.738, 4.352, 3.597, 2.958, 2.786];

/// Fraction of errors drawn from the depolarising channel.
pub fn depolarising_fraction(relative_strength: f64) -> f64 {
    if relative_strength.is_infinite() {
        1.0
    } else {
        relative_strength / (1.0 + relative_strength)
    }
}

pub fn relative_strength(depolarising_fraction: f64) -> f64 {
    depolarising_fraction / (1.0 - depolarising_fraction)
}

/// Tabulated check frequency for the nearest strength column. The
/// concatenated code uses the row whose `p_g / p_d` is nearest in log scale
/// (1 or 3). Pure dephasing needs no Z rounds at all.
pub fn auto_frequency(variant: Variant, ratio: f64, strength: f64) -> CheckFrequency {
    if strength <= 0.0 {
        return CheckFrequency::XOnly;
    }
    let col = (0..FREQUENCY_STRENGTHS.len())
        .min_by(|&a, &b| {
            (FREQUENCY_STRENGTHS[a] - strength)
                .abs()
                .total_cmp(&(FREQUENCY_STRENGTHS[b] - strength).abs())
        })
        .expect("non-empty");
    let row = match variant {
        Variant::Standard => &STANDARD_F,
        Variant::Concatenated if ratio.ln() > 3f64.sqrt().ln() => &LOCAL_THIRD_F,
        Variant::Concatenated => &LOCAL_EQUAL_F,
    };
    CheckFrequency::Ratio(row[col])
}

/// Expected counts of effective Z-type and X-type faults per cycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultRatio {
    pub z_faults: f64,
    pub x_faults: f64,
}

impl FaultRatio {
    pub fn ratio(&self) -> f64 {
        self.z_faults / self.x_faults
    }
}

/// Counts faults over one cycle (`F` X rounds then a Z round) of the plain
/// code, weighting each circuit location by the channel's conditional law.
///
/// A two-qubit error contributes one count per qubit per component. At a
/// preparation or measurement only the component that anticommutes with the
/// basis does anything, so an X-basis location only ever yields Z-type faults
/// and a Z-basis location only X-type ones.
pub fn fault_ratio(relative_strength: f64, frequency: usize, n: usize) -> Result<FaultRatio, LayoutError> {
    let layout = CodeLayout::build(Variant::Standard, n)?;
    let f = depolarising_fraction(relative_strength);
    let schedule = Schedule {
        frequency: CheckFrequency::Ratio(frequency.max(1)),
        total_rounds: frequency.max(1) + 1,
        final_perfect_round: false,
    };
    let engine = CycleEngine::new(&layout, CycleConfig::new(CorrectionQubit::First), Injected::enumerate());
    let (_, noise) = engine.run_schedule(&schedule).expect("valid schedule");

    let one = one_qubit_distribution(f);
    let p_z1: f64 = one.iter().filter(|(e, _)| e.z_bit()).map(|e| e.1).sum();
    let p_x1: f64 = one.iter().filter(|(e, _)| e.x_bit()).map(|e| e.1).sum();
    let two = two_qubit_distribution(f);
    let z2: f64 = two.iter().map(|((a, b), w)| w * (a.z_bit() as u8 + b.z_bit() as u8) as f64).sum();
    let x2: f64 = two.iter().map(|((a, b), w)| w * (a.x_bit() as u8 + b.x_bit() as u8) as f64).sum();

    let mut out = FaultRatio {
        z_faults: 0.0,
        x_faults: 0.0,
    };
    for loc in noise.locations {
        match loc {
            Location::One(_, Basis::X) => out.z_faults += p_z1,
            Location::One(_, Basis::Z) => out.x_faults += p_x1,
            Location::Two(_) => {
                out.z_faults += z2;
                out.x_faults += x2;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strength_fraction_round_trip() {
        assert_eq!(depolarising_fraction(0.0), 0.0);
        assert_eq!(depolarising_fraction(1.0), 0.5);
        assert!((relative_strength(depolarising_fraction(0.3)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn frequency_table() {
        use CheckFrequency::*;
        assert_eq!(auto_frequency(Variant::Standard, 1.0, 0.0), XOnly);
        assert_eq!(auto_frequency(Variant::Standard, 1.0, 0.2), Ratio(9));
        assert_eq!(auto_frequency(Variant::Standard, 1.0, 1.0), Ratio(3));
        assert_eq!(auto_frequency(Variant::Concatenated, 3.0, 0.2), Ratio(5));
        assert_eq!(auto_frequency(Variant::Concatenated, 3.0, 1.0), Ratio(1));
        assert_eq!(auto_frequency(Variant::Concatenated, 1.0, 0.5), Ratio(2));
        assert_eq!(auto_frequency(Variant::Concatenated, 1.0, 0.7), Ratio(1));
        assert_eq!(auto_frequency(Variant::Concatenated, 1.0, 0.65), Ratio(1));
    }

    /// Hand count for weight-4 checks: per X check two X-basis locations and
    /// four gates, per Z check two Z-basis locations and four gates.
    fn bulk_ratio(f: f64, freq: f64) -> f64 {
        let z1 = (1.0 - f) + f * 2.0 / 3.0;
        let x1 = f * 2.0 / 3.0;
        let z2 = 2.0 * ((1.0 - f) * 2.0 / 3.0 + f * 8.0 / 15.0);
        let x2 = 2.0 * f * 8.0 / 15.0;
        let z = freq * (2.0 * z1 + 4.0 * z2) + 4.0 * z2;
        let x = freq * 4.0 * x2 + 2.0 * x1 + 4.0 * x2;
        z / x
    }

    #[test]
    fn large_code_approaches_bulk_count() {
        for (i, &r) in FREQUENCY_STRENGTHS.iter().enumerate() {
            let got = fault_ratio(r, STANDARD_F[i], 40).unwrap().ratio();
            let want = bulk_ratio(depolarising_fraction(r), STANDARD_F[i] as f64);
            assert!((got - want).abs() / want < 0.02, "{r}: {got} vs {want}");
        }
    }
}
