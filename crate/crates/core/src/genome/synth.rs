//! Seeded synthetic corpora with known ground truth.
//!
//! Coding DNA is drawn from a position-specific codon model (stop codons
//! rejected), which plants 3-base periodicity; non-coding DNA is uniform.
//! Full sequences carry one planted ORF whose start is pinned by an in-frame
//! stop immediately upstream, and one promoter motif inside an AT-rich stretch
//! a configurable distance upstream of the ORF.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clonal::substream;
use crate::error::{Error, Result};
use crate::genome::dna::DnaSequence;
use crate::genome::orf::{is_stop, scan_orfs, Orf, STOP_CODONS};

const BASES: [u8; 4] = *b"ACGT";

/// Per codon position probabilities of A, C, G, T.
const CODON_MODEL: [[f64; 4]; 3] = [
    [0.20, 0.15, 0.55, 0.10],
    [0.45, 0.20, 0.10, 0.25],
    [0.10, 0.50, 0.30, 0.10],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub window_length: usize,
    pub coding_windows: usize,
    pub noncoding_windows: usize,
    pub sequences: usize,
    pub sequence_length: (usize, usize),
    /// ORF length in codons, ATG and stop included.
    pub orf_codons: (usize, usize),
    pub motif: String,
    /// Bases between the motif's last base and the ORF's first base.
    pub motif_gap: (usize, usize),
    pub promoter_width: usize,
    /// Probability of A or T inside the promoter stretch.
    pub promoter_at: f64,
    /// Blend between the codon model (1.0) and uniform composition (0.0).
    pub codon_bias: f64,
    /// Plant the promoter motif upstream of each ORF.
    pub plant_motif: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            window_length: 54,
            coding_windows: 100,
            noncoding_windows: 100,
            sequences: 10,
            sequence_length: (2000, 5000),
            orf_codons: (100, 200),
            motif: "TAATAA".into(),
            motif_gap: (20, 100),
            promoter_width: 50,
            promoter_at: 0.8,
            codon_bias: 1.0,
            plant_motif: true,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.window_length == 0 || !self.window_length.is_multiple_of(3) {
            return bad(format!(
                "window length {} is not a positive multiple of 3",
                self.window_length
            ));
        }
        if self.sequence_length.0 > self.sequence_length.1 || self.orf_codons.0 > self.orf_codons.1 {
            return bad("ranges must be (min, max) with min <= max".into());
        }
        if self.orf_codons.0 < 2 {
            return bad("an ORF needs at least 2 codons".into());
        }
        if self.motif_gap.0 < 3 || self.motif_gap.0 > self.motif_gap.1 {
            return bad("motif gap must be >= 3 and ordered".into());
        }
        if self.motif.is_empty() || !self.motif.bytes().all(|b| BASES.contains(&b)) {
            return bad(format!("motif {:?} must be non-empty ACGT", self.motif));
        }
        let needed = self.upstream_reserve() + 3 * self.orf_codons.1 + 30;
        if self.sequences > 0 && self.sequence_length.0 < needed {
            return bad(format!("sequences must be at least {needed} nt for these settings"));
        }
        if !(0.0..=1.0).contains(&self.codon_bias) || !(0.0..=1.0).contains(&self.promoter_at) {
            return bad("probabilities must lie in [0, 1]".into());
        }
        Ok(())
    }

    fn upstream_reserve(&self) -> usize {
        self.motif_gap.1 + self.motif.len() + self.promoter_width + 10
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub id: String,
    pub bases: Vec<u8>,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub id: String,
    pub start: usize,
    pub end: usize,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub windows: Vec<LabeledWindow>,
    pub sequences: Vec<DnaSequence>,
    pub truth: Vec<TruthRecord>,
}

pub const CODING: &str = "coding";
pub const NONCODING: &str = "noncoding";
pub const PROMOTER: &str = "promoter";

fn draw_base(rng: &mut ChaCha8Rng, probs: &[f64; 4]) -> u8 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return BASES[k];
        }
    }
    BASES[3]
}

fn uniform_bases(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| BASES[rng.gen_range(0..4)]).collect()
}

fn coding_codon(rng: &mut ChaCha8Rng, bias: f64) -> [u8; 3] {
    loop {
        let mut codon = [0u8; 3];
        for (p, slot) in codon.iter_mut().enumerate() {
            let probs = CODON_MODEL[p].map(|q| bias * q + (1.0 - bias) * 0.25);
            *slot = draw_base(rng, &probs);
        }
        if !is_stop(&codon) {
            return codon;
        }
    }
}

fn coding_stretch(rng: &mut ChaCha8Rng, codons: usize, bias: f64) -> Vec<u8> {
    (0..codons).flat_map(|_| coding_codon(rng, bias)).collect()
}

/// Coding window at a random codon phase.
fn coding_window(rng: &mut ChaCha8Rng, len: usize, bias: f64) -> Vec<u8> {
    let stretch = coding_stretch(rng, len / 3 + 1, bias);
    let phase = rng.gen_range(0..3);
    stretch[phase..phase + len].to_vec()
}

pub fn synth_windows(cfg: &SynthConfig) -> Result<Vec<LabeledWindow>> {
    cfg.validate()?;
    let mut rng = substream(cfg.seed, 0x57_494E);
    let mut out = Vec::with_capacity(cfg.coding_windows + cfg.noncoding_windows);
    let (mut c, mut n) = (0, 0);
    // interleave the classes so any prefix stays roughly balanced
    while c < cfg.coding_windows || n < cfg.noncoding_windows {
        if c < cfg.coding_windows {
            out.push(LabeledWindow {
                id: format!("w{:06}", out.len() + 1),
                bases: coding_window(&mut rng, cfg.window_length, cfg.codon_bias),
                class: CODING.into(),
            });
            c += 1;
        }
        if n < cfg.noncoding_windows {
            out.push(LabeledWindow {
                id: format!("w{:06}", out.len() + 1),
                bases: uniform_bases(&mut rng, cfg.window_length),
                class: NONCODING.into(),
            });
            n += 1;
        }
    }
    Ok(out)
}

fn synth_sequence(cfg: &SynthConfig, index: usize) -> Result<(DnaSequence, Vec<TruthRecord>)> {
    let id = format!("seq{:04}", index + 1);
    let mut rng = substream(cfg.seed, 0x5345_5100 + index as u64);
    for _attempt in 0..100 {
        let len = rng.gen_range(cfg.sequence_length.0..=cfg.sequence_length.1);
        let codons = rng.gen_range(cfg.orf_codons.0..=cfg.orf_codons.1);
        let orf_len = 3 * codons;
        let lo = cfg.upstream_reserve();
        let hi = len - orf_len - 30;
        let orf_start = rng.gen_range(lo..=hi);

        let mut seq = uniform_bases(&mut rng, len);
        seq[orf_start - 3..orf_start].copy_from_slice(STOP_CODONS[rng.gen_range(0..3)]);
        seq[orf_start..orf_start + 3].copy_from_slice(b"ATG");
        let body = coding_stretch(&mut rng, codons - 2, cfg.codon_bias);
        seq[orf_start + 3..orf_start + orf_len - 3].copy_from_slice(&body);
        seq[orf_start + orf_len - 3..orf_start + orf_len].copy_from_slice(STOP_CODONS[rng.gen_range(0..3)]);

        let mut truth = vec![TruthRecord {
            id: id.clone(),
            start: orf_start + 1,
            end: orf_start + orf_len,
            kind: CODING.into(),
        }];

        if cfg.plant_motif {
            let motif = cfg.motif.as_bytes();
            let gap = rng.gen_range(cfg.motif_gap.0..=cfg.motif_gap.1);
            let motif_start = orf_start - gap - motif.len();
            let flank = cfg.promoter_width.saturating_sub(motif.len()) / 2;
            let region_lo = motif_start.saturating_sub(flank);
            let region_hi = (motif_start + motif.len() + flank).min(orf_start - 3);
            let at = cfg.promoter_at / 2.0;
            let gc = (1.0 - cfg.promoter_at) / 2.0;
            for b in &mut seq[region_lo..region_hi] {
                *b = draw_base(&mut rng, &[at, gc, gc, at]);
            }
            seq[motif_start..motif_start + motif.len()].copy_from_slice(motif);
            truth.push(TruthRecord {
                id: id.clone(),
                start: motif_start + 1,
                end: motif_start + motif.len(),
                kind: PROMOTER.into(),
            });
        }

        let planted = Orf {
            start: orf_start + 1,
            end: orf_start + orf_len,
            frame: orf_start % 3,
        };
        if scan_orfs(&seq, 3).contains(&planted) {
            truth.sort_by_key(|t| t.start);
            return Ok((DnaSequence::new(id, seq)?, truth));
        }
    }
    Err(Error::InvalidParameter(format!("could not plant an ORF in {id}")))
}

pub fn synth_sequences(cfg: &SynthConfig) -> Result<(Vec<DnaSequence>, Vec<TruthRecord>)> {
    cfg.validate()?;
    let mut seqs = Vec::with_capacity(cfg.sequences);
    let mut truth = Vec::new();
    for i in 0..cfg.sequences {
        let (s, t) = synth_sequence(cfg, i)?;
        seqs.push(s);
        truth.extend(t);
    }
    Ok((seqs, truth))
}

/// Uniform random sequences with nothing planted.
pub fn random_sequences(seed: u64, count: usize, len: usize) -> Vec<DnaSequence> {
    (0..count)
        .map(|i| {
            let mut rng = substream(seed, 0x524E_4400 + i as u64);
            DnaSequence::new(format!("rnd{:04}", i + 1), uniform_bases(&mut rng, len)).expect("ACGT only")
        })
        .collect()
}

pub fn synth_dataset(cfg: &SynthConfig) -> Result<SyntheticCorpus> {
    let windows = synth_windows(cfg)?;
    let (sequences, truth) = synth_sequences(cfg)?;
    Ok(SyntheticCorpus {
        windows,
        sequences,
        truth,
    })
}
