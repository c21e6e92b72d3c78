//! Coding measures computed over a window.
//!
//! Every component is mapped into `[0, 1]`:
//!
//! | index | measure | normalization |
//! |-------|---------|---------------|
//! | 0..4  | position asymmetry of A, C, G, T | `max / (min + 1)` over codon positions, divided by the codon count |
//! | 4     | 3-base periodicity | summed per-base DFT power at frequency 1/3, divided by `L^2 / 3` |
//! | 5     | codon-position GC skew | spread (max - min) of per-position GC fraction |
//! | 6     | hexamer diversity | distinct overlapping hexamers / `(L - 5)` |
//! | 7     | ORF coverage | longest stop-free codon run over the three frames / codon count |

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::genome::orf::is_stop;

pub const MEASURES: usize = 8;

const BASES: [u8; 4] = *b"ACGT";

fn base_index(b: u8) -> Option<usize> {
    BASES.iter().position(|&x| x == b)
}

/// Counts of each base at codon positions 0, 1, 2 (offset from window start).
fn position_counts(w: &[u8]) -> [[usize; 3]; 4] {
    let mut counts = [[0usize; 3]; 4];
    for (i, &b) in w.iter().enumerate() {
        if let Some(k) = base_index(b) {
            counts[k][i % 3] += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionAsymmetry {
    pub raw: [f64; 4],
    pub normalized: [f64; 4],
}

pub fn fickett_position_asymmetry(w: &[u8]) -> Result<PositionAsymmetry> {
    if w.is_empty() || !w.len().is_multiple_of(3) {
        return Err(Error::InvalidParameter(format!(
            "window length {} is not a positive multiple of 3",
            w.len()
        )));
    }
    let codons = (w.len() / 3) as f64;
    let counts = position_counts(w);
    let mut raw = [0.0; 4];
    let mut normalized = [0.0; 4];
    for k in 0..4 {
        let max = *counts[k].iter().max().unwrap() as f64;
        let min = *counts[k].iter().min().unwrap() as f64;
        raw[k] = max / (min + 1.0);
        normalized[k] = (raw[k] / codons).min(1.0);
    }
    Ok(PositionAsymmetry { raw, normalized })
}

/// `|X_b(1/3)|^2` for the indicator sequence of base `b`.
pub fn spectral_power_at_third(w: &[u8], b: u8) -> f64 {
    let Some(k) = base_index(b) else { return 0.0 };
    let c = position_counts(w)[k].map(|v| v as f64);
    // |c0 + c1 w + c2 w^2|^2 with w a primitive cube root of unity
    c[0] * c[0] + c[1] * c[1] + c[2] * c[2] - c[0] * c[1] - c[1] * c[2] - c[0] * c[2]
}

/// Total 1/3-frequency power over the four bases, normalized by its maximum `L^2 / 3`.
pub fn periodicity(w: &[u8]) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    let total: f64 = BASES.iter().map(|&b| spectral_power_at_third(w, b)).sum();
    let l = w.len() as f64;
    (total / (l * l / 3.0)).clamp(0.0, 1.0)
}

pub fn gc_position_skew(w: &[u8]) -> f64 {
    let mut gc = [0usize; 3];
    let mut n = [0usize; 3];
    for (i, &b) in w.iter().enumerate() {
        n[i % 3] += 1;
        if b == b'G' || b == b'C' {
            gc[i % 3] += 1;
        }
    }
    let frac: Vec<f64> = (0..3)
        .filter(|&p| n[p] > 0)
        .map(|p| gc[p] as f64 / n[p] as f64)
        .collect();
    if frac.is_empty() {
        return 0.0;
    }
    let max = frac.iter().cloned().fold(f64::MIN, f64::max);
    let min = frac.iter().cloned().fold(f64::MAX, f64::min);
    max - min
}

pub fn hexamer_diversity(w: &[u8]) -> f64 {
    if w.len() < 6 {
        return 0.0;
    }
    let distinct: HashSet<&[u8]> = w.windows(6).collect();
    distinct.len() as f64 / (w.len() - 5) as f64
}

pub fn orf_coverage(w: &[u8]) -> f64 {
    let codons = w.len() / 3;
    if codons == 0 {
        return 0.0;
    }
    let mut best = 0usize;
    for frame in 0..3 {
        let mut run = 0usize;
        for codon in w[frame..].chunks_exact(3) {
            if is_stop(codon) {
                run = 0;
            } else {
                run += 1;
                best = best.max(run);
            }
        }
    }
    (best as f64 / codons as f64).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodingMeasureVector([f64; MEASURES]);

impl CodingMeasureVector {
    pub const NAMES: [&'static str; MEASURES] = [
        "asymmetry_a",
        "asymmetry_c",
        "asymmetry_g",
        "asymmetry_t",
        "periodicity",
        "gc_position_skew",
        "hexamer_diversity",
        "orf_coverage",
    ];

    pub fn compute(w: &[u8]) -> Result<Self> {
        if let Some(i) = w.iter().position(|&b| b == b'N') {
            return Err(Error::AmbiguousBase(i));
        }
        let asym = fickett_position_asymmetry(w)?;
        Ok(CodingMeasureVector([
            asym.normalized[0],
            asym.normalized[1],
            asym.normalized[2],
            asym.normalized[3],
            periodicity(w),
            gc_position_skew(w),
            hexamer_diversity(w),
            orf_coverage(w),
        ]))
    }

    pub fn values(&self) -> &[f64; MEASURES] {
        &self.0
    }

    pub fn periodicity(&self) -> f64 {
        self.0[4]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clonal::substream;
    use proptest::prelude::*;
    use rand::Rng;

    /// Direct DFT of the indicator sequence at k = N/3.
    fn dft_power(w: &[u8], b: u8) -> f64 {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (n, &x) in w.iter().enumerate() {
            if x == b {
                let theta = -2.0 * std::f64::consts::PI * n as f64 / 3.0;
                re += theta.cos();
                im += theta.sin();
            }
        }
        re * re + im * im
    }

    fn random_window(len: usize, seed: u64) -> Vec<u8> {
        let mut rng = substream(seed, 1);
        (0..len).map(|_| BASES[rng.gen_range(0..4)]).collect()
    }

    #[test]
    fn asymmetry_examples() {
        let a = fickett_position_asymmetry(b"ATGATGATG").unwrap();
        assert_eq!(a.raw[0], 3.0);
        assert_eq!(a.normalized[0], 1.0);
        let a = fickett_position_asymmetry(b"AAAAAAAAA").unwrap();
        assert_eq!(a.raw[0], 0.75);
        assert!(fickett_position_asymmetry(b"AAAA").is_err());
    }

    #[test]
    fn poly_a_window() {
        let w = vec![b'A'; 54];
        let m = CodingMeasureVector::compute(&w).unwrap();
        let v = m.values();
        assert!(v[0] > v[1] && v[0] > v[2] && v[0] > v[3]);
        assert_eq!(m.periodicity(), 0.0);
        assert!(dft_power(&w, b'A') < 1e-18 * 54.0 * 54.0 + 1e-9);
    }

    #[test]
    fn atg_repeat_spectrum() {
        assert!((dft_power(b"ATGATGATG", b'A') - 9.0).abs() < 1e-9);
        assert_eq!(spectral_power_at_third(b"ATGATGATG", b'A'), 9.0);
        assert_eq!(periodicity(b"ATGATGATG"), 1.0);
    }

    #[test]
    fn random_windows_have_low_asymmetry() {
        // iid uniform, 1800 codons: per-position counts ~ 450 +- 18.4, so
        // normalized asymmetry is ~ (450 + 5 sd) / (450 - 5 sd) / 1800 at most
        let w = random_window(5400, 17);
        let a = fickett_position_asymmetry(&w).unwrap();
        let sd = (1800.0f64 * 0.25 * 0.75).sqrt();
        let bound = (450.0 + 5.0 * sd) / (450.0 - 5.0 * sd + 1.0) / 1800.0;
        for v in a.normalized {
            assert!(v < bound, "{v} >= {bound}");
        }
        for r in a.raw {
            assert!((1.0..=(450.0 + 5.0 * sd) / (450.0 - 5.0 * sd + 1.0)).contains(&r));
        }
    }

    #[test]
    fn orf_coverage_and_diversity() {
        let w: Vec<u8> = b"GCC".iter().cycle().take(54).copied().collect();
        assert_eq!(orf_coverage(&w), 1.0);
        assert!(hexamer_diversity(&w) < 0.1);
        let stops: Vec<u8> = b"TAA".iter().cycle().take(54).copied().collect();
        // frame 0 is all stops; frames 1 and 2 read AAT / ATA
        assert!(orf_coverage(&stops) > 0.9);
        assert_eq!(gc_position_skew(b"GAAGAAGAA"), 1.0);
    }

    proptest! {
        #[test]
        fn spectral_shortcut_matches_dft(s in "[ACGT]{3,120}") {
            let w = s.as_bytes();
            for b in BASES {
                let fast = spectral_power_at_third(w, b);
                let slow = dft_power(w, b);
                prop_assert!((fast - slow).abs() < 1e-6 * (1.0 + slow));
            }
        }

        #[test]
        fn measures_in_unit_interval(s in "([ACGT]{3}){2,60}") {
            let m = CodingMeasureVector::compute(s.as_bytes()).unwrap();
            prop_assert!(m.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
