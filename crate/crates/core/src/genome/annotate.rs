//! Sequence annotation: windowed coding classification, ORF snapping and
//! upstream promoter search.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attractor::ClassId;
use crate::error::{Error, Result};
use crate::genome::dna::{encode_window, reverse_complement, DnaSequence, WindowConfig};
use crate::genome::orf::{scan_orfs, Orf};
use crate::tree::InmacaTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExonKind {
    Initial,
    Internal,
    Terminal,
    Single,
    Utr5,
    Utr3,
}

impl fmt::Display for ExonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExonKind::Initial => "Initial",
            ExonKind::Internal => "Internal",
            ExonKind::Terminal => "Terminal",
            ExonKind::Single => "Single",
            ExonKind::Utr5 => "Utr5",
            ExonKind::Utr3 => "Utr3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strand {
    Forward,
    Reverse,
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strand::Forward => "+",
            Strand::Reverse => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingRecord {
    pub gene: usize,
    pub element: usize,
    pub kind: ExonKind,
    pub strand: Strand,
    pub left: usize,
    pub right: usize,
    pub length: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromoterRecord {
    /// Gene this promoter sits upstream of.
    pub gene: usize,
    pub strand: Strand,
    pub start: usize,
    pub end: usize,
    pub score: f64,
    pub motif: bool,
    pub sequence: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenomeAnnotation {
    pub sequence_id: String,
    pub coding: Vec<CodingRecord>,
    pub promoters: Vec<PromoterRecord>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromoterConfig {
    pub motif: String,
    /// Added to the model score when the motif is present, capped at 1.
    pub motif_bonus: f64,
    /// Report only windows that contain the motif.
    pub motif_required: bool,
    /// Model-only candidates below this score are dropped.
    pub min_score: f64,
    pub class: ClassId,
}

impl Default for PromoterConfig {
    fn default() -> Self {
        PromoterConfig {
            motif: "TAATAA".into(),
            motif_bonus: 0.1,
            motif_required: true,
            min_score: 0.5,
            class: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotateConfig {
    pub coding_class: ClassId,
    pub score_threshold: f64,
    /// Runs with fewer coding windows are discarded.
    pub min_region_windows: usize,
    pub min_orf_len: usize,
    pub both_strands: bool,
    pub utr_records: bool,
    pub promoter: PromoterConfig,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        AnnotateConfig {
            coding_class: 1,
            score_threshold: 0.5,
            min_region_windows: 2,
            min_orf_len: 30,
            both_strands: false,
            utr_records: false,
            promoter: PromoterConfig::default(),
        }
    }
}

/// A window's coding verdict; positions are 0-based half-open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowCall {
    pub start: usize,
    pub end: usize,
    pub class: ClassId,
    pub score: f64,
}

/// 0-based half-open base ranges.
pub type Spans = Vec<(usize, usize)>;

/// Promoter candidate: (start, end, score, motif hit).
type Candidate = (usize, usize, f64, bool);

/// Classifies every full window; windows with `N` are returned as gaps.
pub fn classify_windows(bases: &[u8], model: &InmacaTree, cfg: &WindowConfig) -> Result<(Vec<WindowCall>, Spans)> {
    if bases.len() < cfg.length {
        return Ok((Vec::new(), Vec::new()));
    }
    let starts: Vec<usize> = (0..=bases.len() - cfg.length).step_by(cfg.stride).collect();
    let results: Vec<Result<Option<WindowCall>>> = starts
        .par_iter()
        .map(|&s| {
            let w = &bases[s..s + cfg.length];
            match encode_window(w, cfg) {
                Ok(state) => {
                    let c = model.classify(&state)?;
                    Ok(Some(WindowCall {
                        start: s,
                        end: s + cfg.length,
                        class: c.class,
                        score: c.score,
                    }))
                }
                Err(Error::AmbiguousBase(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut calls = Vec::new();
    let mut gaps = Vec::new();
    for (s, r) in starts.into_iter().zip(results) {
        match r? {
            Some(c) => calls.push(c),
            None => gaps.push((s, s + cfg.length)),
        }
    }
    Ok((calls, gaps))
}

/// A merged run of coding windows; 1-based inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Region {
    left: usize,
    right: usize,
    windows: usize,
    score: f64,
}

fn merge_regions(calls: &[WindowCall], cfg: &AnnotateConfig) -> Vec<Region> {
    let mut regions = Vec::new();
    let mut cur: Option<(usize, usize, usize, f64)> = None;
    for c in calls {
        let coding = c.class == cfg.coding_class && c.score >= cfg.score_threshold;
        match (&mut cur, coding) {
            (Some((_, end, n, sum)), true) if c.start <= *end => {
                *end = c.end;
                *n += 1;
                *sum += c.score;
            }
            (_, true) => {
                if let Some(r) = cur.take() {
                    regions.push(r);
                }
                cur = Some((c.start, c.end, 1, c.score));
            }
            (_, false) => {
                if let Some(r) = cur.take() {
                    regions.push(r);
                }
            }
        }
    }
    if let Some(r) = cur {
        regions.push(r);
    }
    regions
        .into_iter()
        .filter(|&(_, _, n, _)| n >= cfg.min_region_windows)
        .map(|(s, e, n, sum)| Region {
            left: s + 1,
            right: e,
            windows: n,
            score: sum / n as f64,
        })
        .collect()
}

/// ORF sharing the most bases with the region; ties go to the longer ORF,
/// then the leftmost start.
fn snap(region: &Region, orfs: &[Orf]) -> Option<Orf> {
    orfs.iter()
        .filter(|o| o.overlap(region.left, region.right) > 0)
        .max_by(|a, b| {
            a.overlap(region.left, region.right)
                .cmp(&b.overlap(region.left, region.right))
                .then(a.len().cmp(&b.len()))
                .then(b.start.cmp(&a.start))
        })
        .copied()
}

fn find_all(hay: &[u8], needle: &[u8]) -> Vec<usize> {
    if needle.is_empty() || hay.len() < needle.len() {
        return Vec::new();
    }
    hay.windows(needle.len())
        .enumerate()
        .filter(|(_, w)| *w == needle)
        .map(|(i, _)| i)
        .collect()
}

fn promoter_score(model: Option<&InmacaTree>, w: &[u8], window: &WindowConfig, class: ClassId) -> Result<f64> {
    let Some(model) = model else { return Ok(0.0) };
    if w.len() != window.length {
        return Ok(0.0);
    }
    match encode_window(w, window) {
        Ok(state) => {
            let c = model.classify(&state)?;
            Ok(if !c.fallback && c.class == class { c.score } else { 0.0 })
        }
        Err(Error::AmbiguousBase(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

struct StrandResult {
    coding: Vec<(Orf, f64)>,
    promoters: Vec<(usize, usize, usize, f64, bool)>,
    gaps: Vec<(usize, usize)>,
}

/// Annotates one strand; all coordinates are 1-based on `bases`.
fn annotate_strand(
    bases: &[u8],
    coding_model: &InmacaTree,
    promoter_model: Option<&InmacaTree>,
    window: &WindowConfig,
    cfg: &AnnotateConfig,
) -> Result<StrandResult> {
    let (calls, gaps) = classify_windows(bases, coding_model, window)?;
    let regions = merge_regions(&calls, cfg);
    let orfs = scan_orfs(bases, cfg.min_orf_len);

    let mut coding: Vec<(Orf, f64)> = Vec::new();
    for r in &regions {
        if let Some(orf) = snap(r, &orfs) {
            match coding.iter_mut().find(|(o, _)| *o == orf) {
                Some((_, s)) => *s = s.max(r.score),
                None => coding.push((orf, r.score)),
            }
        }
    }
    coding.sort_by_key(|(o, _)| (o.start, o.end));
    // overlapping ORFs from different frames: keep the first-listed, longer wins
    let mut kept: Vec<(Orf, f64)> = Vec::new();
    for (o, s) in coding {
        match kept.last_mut() {
            Some((prev, ps)) if o.start <= prev.end => {
                if o.len() > prev.len() {
                    *prev = o;
                    *ps = s;
                }
            }
            _ => kept.push((o, s)),
        }
    }

    let pcfg = &cfg.promoter;
    let motif = pcfg.motif.as_bytes();
    let mut promoters = Vec::new();
    let mut span_start = 1usize;
    for (gene_idx, (orf, _)) in kept.iter().enumerate() {
        let gene = gene_idx + 1;
        let span_end = orf.start - 1;
        if span_end >= span_start {
            let span = &bases[span_start - 1..span_end];
            let mut found: Vec<Candidate> = Vec::new();
            for hit in find_all(span, motif) {
                let motif_lo = span_start + hit;
                let motif_hi = motif_lo + motif.len() - 1;
                // overlapping repeats of the motif share one window
                if found
                    .last()
                    .is_some_and(|&(lo, hi, _, _)| lo <= motif_lo && motif_hi <= hi)
                {
                    continue;
                }
                let (lo, hi) = if span.len() >= window.length {
                    let centered = (motif_lo + motif_hi) / 2;
                    let mut lo = centered.saturating_sub(window.length / 2).max(span_start);
                    if lo + window.length - 1 > span_end {
                        lo = span_end + 1 - window.length;
                    }
                    (lo, lo + window.length - 1)
                } else {
                    (span_start, span_end)
                };
                let model = promoter_score(promoter_model, &bases[lo - 1..hi], window, pcfg.class)?;
                let score = (model + pcfg.motif_bonus).min(1.0);
                found.push((lo, hi, score, true));
            }
            if !pcfg.motif_required && span.len() >= window.length {
                let mut s = span_start;
                while s + window.length - 1 <= span_end {
                    let e = s + window.length - 1;
                    if !found.iter().any(|&(lo, hi, _, _)| lo <= e && s <= hi) {
                        let score = promoter_score(promoter_model, &bases[s - 1..e], window, pcfg.class)?;
                        if score >= pcfg.min_score {
                            found.push((s, e, score, false));
                        }
                    }
                    s += window.stride;
                }
            }
            found.sort_by_key(|&(lo, hi, _, _)| (lo, hi));
            found.dedup_by_key(|&mut (lo, hi, _, _)| (lo, hi));
            promoters.extend(found.into_iter().map(|(lo, hi, s, m)| (gene, lo, hi, s, m)));
        }
        span_start = orf.end + 1;
    }

    Ok(StrandResult {
        coding: kept,
        promoters,
        gaps,
    })
}

/// Annotates `seq` with the coding model and, when given, the promoter model.
pub fn annotate(
    seq: &DnaSequence,
    coding_model: &InmacaTree,
    promoter_model: Option<&InmacaTree>,
    window: &WindowConfig,
    cfg: &AnnotateConfig,
) -> Result<GenomeAnnotation> {
    window.validate()?;
    if coding_model.cells != window.cells() {
        return Err(Error::LengthMismatch {
            expected: window.cells(),
            actual: coding_model.cells,
        });
    }
    let mut out = GenomeAnnotation {
        sequence_id: seq.id.clone(),
        ..GenomeAnnotation::default()
    };
    let n = seq.len();
    if n < window.length {
        out.diagnostics.push(format!(
            "sequence length {n} shorter than window length {}; nothing annotated",
            window.length
        ));
        return Ok(out);
    }

    let mut strands = vec![(
        Strand::Forward,
        annotate_strand(seq.bases(), coding_model, promoter_model, window, cfg)?,
    )];
    if cfg.both_strands {
        let rc = reverse_complement(seq.bases());
        strands.push((
            Strand::Reverse,
            annotate_strand(&rc, coding_model, promoter_model, window, cfg)?,
        ));
    }

    // (left, right, strand, score, upstream promoters)
    let mut genes: Vec<(usize, usize, Strand, f64, Vec<Candidate>)> = Vec::new();
    for (strand, res) in strands {
        let map = |lo: usize, hi: usize| match strand {
            Strand::Forward => (lo, hi),
            Strand::Reverse => (n - hi + 1, n - lo + 1),
        };
        for (s, e) in res.gaps {
            let (l, r) = map(s + 1, e);
            out.diagnostics.push(format!("gap {strand} {l}-{r}: window contains N"));
        }
        for (i, (orf, score)) in res.coding.iter().enumerate() {
            let (l, r) = map(orf.start, orf.end);
            let proms = res
                .promoters
                .iter()
                .filter(|p| p.0 == i + 1)
                .map(|&(_, lo, hi, s, m)| {
                    let (pl, pr) = map(lo, hi);
                    (pl, pr, s, m)
                })
                .collect();
            genes.push((l, r, strand, *score, proms));
        }
    }
    genes.sort_by_key(|g| (g.0, g.1));

    for (gi, (left, right, strand, score, proms)) in genes.into_iter().enumerate() {
        let gene = gi + 1;
        out.coding.push(CodingRecord {
            gene,
            element: 1,
            kind: ExonKind::Single,
            strand,
            left,
            right,
            length: right - left + 1,
            score,
        });
        for (pl, pr, s, m) in proms {
            out.promoters.push(PromoterRecord {
                gene,
                strand,
                start: pl,
                end: pr,
                score: s,
                motif: m,
                sequence: seq.as_str()[pl - 1..pr].to_string(),
            });
        }
    }

    if cfg.utr_records {
        add_flank_records(&mut out, n);
    }
    out.coding.sort_by_key(|r| (r.left, r.right));
    out.promoters.sort_by_key(|p| (p.start, p.end));
    Ok(out)
}

/// Untranslated flanks between coding records, labeled relative to each gene's strand.
fn add_flank_records(out: &mut GenomeAnnotation, n: usize) {
    let genes: Vec<CodingRecord> = out.coding.clone();
    let mut flanks = Vec::new();
    for (i, g) in genes.iter().enumerate() {
        let prev_end = if i == 0 { 0 } else { genes[i - 1].right };
        let next_start = genes.get(i + 1).map(|x| x.left).unwrap_or(n + 1);
        let (before, after) = match g.strand {
            Strand::Forward => (ExonKind::Utr5, ExonKind::Utr3),
            Strand::Reverse => (ExonKind::Utr3, ExonKind::Utr5),
        };
        if g.left > prev_end + 1 {
            flanks.push((g.gene, before, g.strand, prev_end + 1, g.left - 1));
        }
        // the next gene claims the space before it, so only the last gene gets a trailing flank
        if i + 1 == genes.len() && next_start > g.right + 1 {
            flanks.push((g.gene, after, g.strand, g.right + 1, next_start - 1));
        }
    }
    for (gene, kind, strand, l, r) in flanks {
        out.coding.push(CodingRecord {
            gene,
            element: 0,
            kind,
            strand,
            left: l,
            right: r,
            length: r - l + 1,
            score: 0.0,
        });
    }
}
