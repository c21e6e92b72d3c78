//! Training sets from labeled windows or from sequences with truth records.

use std::collections::HashMap;

use rand::seq::SliceRandom;

use crate::attractor::ClassId;
use crate::ca::FuzzyState;
use crate::clonal::substream;
use crate::error::{Error, Result};
use crate::genome::dna::{encode_window, DnaSequence, WindowConfig};
use crate::genome::synth::{TruthRecord, CODING, PROMOTER};

/// Encoded patterns plus the class names their indices refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPatterns {
    pub classes: Vec<String>,
    pub patterns: Vec<(FuzzyState, ClassId)>,
    /// Windows dropped because they contain `N`.
    pub skipped: usize,
}

impl LabeledPatterns {
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for (_, k) in &self.patterns {
            c[*k] += 1;
        }
        c
    }
}

/// Encodes `(bases, class name)` pairs against a fixed class list.
pub fn encode_labeled<'a, I>(windows: I, classes: &[String], window: &WindowConfig) -> Result<LabeledPatterns>
where
    I: IntoIterator<Item = (&'a [u8], &'a str)>,
{
    let index: HashMap<&str, ClassId> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut patterns = Vec::new();
    let mut skipped = 0;
    for (bases, class) in windows {
        let k = *index
            .get(class)
            .ok_or_else(|| Error::Labels(format!("class {class:?} not in {classes:?}")))?;
        match encode_window(bases, window) {
            Ok(s) => patterns.push((s, k)),
            Err(Error::AmbiguousBase(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if patterns.is_empty() {
        return Err(Error::Empty("training set"));
    }
    Ok(LabeledPatterns {
        classes: classes.to_vec(),
        patterns,
        skipped,
    })
}

/// Windows cut from annotated sequences, grouped by role.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TruthWindows {
    pub coding: Vec<Vec<u8>>,
    pub noncoding: Vec<Vec<u8>>,
    pub promoter: Vec<Vec<u8>>,
    /// Upstream windows that avoid the promoter truth span.
    pub upstream: Vec<Vec<u8>>,
}

fn overlaps(lo: usize, hi: usize, t: &TruthRecord) -> bool {
    lo <= t.end && t.start <= hi
}

/// Promoter window of `len` around 1-based `[lo, hi]`, kept inside `[1, limit]`.
pub fn centered_window(lo: usize, hi: usize, len: usize, limit: usize) -> Option<(usize, usize)> {
    if limit < len || hi > limit {
        return None;
    }
    let mid = (lo + hi) / 2;
    let mut start = mid.saturating_sub(len / 2).max(1);
    if start + len - 1 > limit {
        start = limit + 1 - len;
    }
    Some((start, start + len - 1))
}

/// Cuts windows of `window.length` at `window.stride` from every sequence.
///
/// Coding windows lie wholly inside a coding record; non-coding windows touch
/// no record. Promoter windows are centered on each promoter record and end
/// before the next coding start; upstream windows come from the same span but
/// miss the promoter.
pub fn truth_windows(seqs: &[DnaSequence], truth: &[TruthRecord], window: &WindowConfig) -> Result<TruthWindows> {
    window.validate()?;
    let mut by_id: HashMap<&str, Vec<&TruthRecord>> = HashMap::new();
    for t in truth {
        by_id.entry(t.id.as_str()).or_default().push(t);
    }
    let len = window.length;
    let mut out = TruthWindows::default();
    for seq in seqs {
        let records = by_id.remove(seq.id.as_str()).unwrap_or_default();
        let b = seq.bases();
        if b.len() < len {
            continue;
        }
        for s in (0..=b.len() - len).step_by(window.stride) {
            let (lo, hi) = (s + 1, s + len);
            let w = b[s..s + len].to_vec();
            if records.iter().any(|t| t.kind == CODING && t.start <= lo && hi <= t.end) {
                out.coding.push(w);
            } else if !records.iter().any(|t| overlaps(lo, hi, t)) {
                out.noncoding.push(w);
            }
        }
        let starts: Vec<usize> = records.iter().filter(|t| t.kind == CODING).map(|t| t.start).collect();
        for p in records.iter().filter(|t| t.kind == PROMOTER) {
            let Some(&cds) = starts.iter().filter(|&&c| c > p.end).min() else {
                continue;
            };
            if let Some((lo, hi)) = centered_window(p.start, p.end, len, cds - 1) {
                out.promoter.push(b[lo - 1..hi].to_vec());
            }
            let prev_end = records
                .iter()
                .filter(|t| t.kind == CODING && t.end < p.start)
                .map(|t| t.end)
                .max()
                .unwrap_or(0);
            let mut s = prev_end + 1;
            while s + len - 1 < cds {
                if !overlaps(s, s + len - 1, p) {
                    out.upstream.push(b[s - 1..s + len - 1].to_vec());
                }
                s += window.stride;
            }
        }
    }
    Ok(out)
}

/// Keeps at most `cap` items, chosen by a seeded shuffle when trimming.
pub fn subsample<T: Clone>(items: &[T], cap: usize, seed: u64, tag: u64) -> Vec<T> {
    if items.len() <= cap {
        return items.to_vec();
    }
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(&mut substream(seed, tag));
    let mut keep: Vec<usize> = idx.into_iter().take(cap).collect();
    keep.sort_unstable();
    keep.into_iter().map(|i| items[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::dna::Encoding;
    use crate::genome::synth::{synth_sequences, SynthConfig};

    #[test]
    fn windows_respect_truth() {
        let cfg = SynthConfig {
            sequences: 4,
            ..SynthConfig::default()
        };
        let (seqs, truth) = synth_sequences(&cfg).unwrap();
        let w = WindowConfig::new(54, Encoding::Direct).unwrap();
        let tw = truth_windows(&seqs, &truth, &w).unwrap();
        assert!(!tw.coding.is_empty() && !tw.noncoding.is_empty());
        assert_eq!(tw.promoter.len(), 4);
        for p in &tw.promoter {
            assert_eq!(p.len(), 54);
            assert!(p.windows(6).any(|x| x == b"TAATAA"));
        }
        assert!(tw.upstream.iter().all(|u| u.len() == 54));
    }

    #[test]
    fn centered_window_clips() {
        assert_eq!(centered_window(10, 15, 54, 1000), Some((1, 54)));
        assert_eq!(centered_window(100, 105, 54, 110), Some((57, 110)));
        assert_eq!(centered_window(1, 6, 54, 40), None);
    }

    #[test]
    fn encode_labeled_rejects_unknown_class() {
        let w = WindowConfig {
            length: 3,
            stride: 1,
            encoding: Encoding::Direct,
        };
        let classes = vec!["a".to_string(), "b".to_string()];
        let ok = encode_labeled(
            [(&b"ACG"[..], "a"), (&b"ANG"[..], "b"), (&b"TTT"[..], "b")],
            &classes,
            &w,
        )
        .unwrap();
        assert_eq!(ok.counts(), vec![1, 1]);
        assert_eq!(ok.skipped, 1);
        assert!(encode_labeled([(&b"ACG"[..], "c")], &classes, &w).is_err());
    }

    #[test]
    fn subsample_is_seeded() {
        let v: Vec<u32> = (0..100).collect();
        let a = subsample(&v, 10, 3, 1);
        assert_eq!(a, subsample(&v, 10, 3, 1));
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|p| p[0] < p[1]));
    }
}
