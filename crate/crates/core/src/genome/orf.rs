use serde::{Deserialize, Serialize};

pub const STOP_CODONS: [&[u8; 3]; 3] = [b"TAA", b"TAG", b"TGA"];
pub const START_CODON: &[u8; 3] = b"ATG";

pub fn is_stop(codon: &[u8]) -> bool {
    STOP_CODONS.iter().any(|s| codon == &s[..])
}

pub fn is_start(codon: &[u8]) -> bool {
    codon == &START_CODON[..]
}

/// An ATG-to-stop open reading frame; 1-based inclusive coordinates, stop included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Orf {
    pub start: usize,
    pub end: usize,
    /// Offset of the start from the sequence origin, modulo 3.
    pub frame: usize,
}

impl Orf {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bases shared with the 1-based inclusive span `[left, right]`.
    pub fn overlap(&self, left: usize, right: usize) -> usize {
        let lo = self.start.max(left);
        let hi = self.end.min(right);
        if hi >= lo {
            hi - lo + 1
        } else {
            0
        }
    }
}

/// Forward-strand ORFs in all three frames.
///
/// For each stop codon only the longest ORF is kept: it starts at the first
/// in-frame ATG after the previous in-frame stop. Results are sorted by start.
pub fn scan_orfs(seq: &[u8], min_len: usize) -> Vec<Orf> {
    let mut out = Vec::new();
    for frame in 0..3 {
        if seq.len() < frame + 3 {
            continue;
        }
        let mut open: Option<usize> = None;
        for (k, codon) in seq[frame..].chunks_exact(3).enumerate() {
            let pos = frame + 3 * k;
            if is_stop(codon) {
                if let Some(start) = open.take() {
                    let orf = Orf {
                        start: start + 1,
                        end: pos + 3,
                        frame,
                    };
                    if orf.len() >= min_len {
                        out.push(orf);
                    }
                }
            } else if open.is_none() && is_start(codon) {
                open = Some(pos);
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clonal::substream;
    use rand::Rng;

    #[test]
    fn minimal_orf() {
        assert_eq!(
            scan_orfs(b"ATGAAATAA", 9),
            vec![Orf {
                start: 1,
                end: 9,
                frame: 0
            }]
        );
        assert!(scan_orfs(b"ATGAAATAA", 30).is_empty());
    }

    #[test]
    fn nested_start_suppressed() {
        assert_eq!(
            scan_orfs(b"ATGATGAAATAA", 9),
            vec![Orf {
                start: 1,
                end: 12,
                frame: 0
            }]
        );
    }

    #[test]
    fn no_start_no_orf() {
        assert!(scan_orfs(b"CCCTAACCCTGACCC", 3).is_empty());
    }

    #[test]
    fn unterminated_orf_not_reported() {
        assert!(scan_orfs(b"ATGAAAAAAAAA", 3).is_empty());
    }

    #[test]
    fn other_frames() {
        let orfs = scan_orfs(b"CATGCCCTAGG", 3);
        assert_eq!(
            orfs,
            vec![Orf {
                start: 2,
                end: 10,
                frame: 1
            }]
        );
    }

    /// Brute force: every ATG whose first in-frame stop is downstream, keeping
    /// the most upstream ATG per stop.
    fn brute(seq: &[u8], min_len: usize) -> Vec<Orf> {
        use std::collections::BTreeMap;
        let mut per_stop: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..seq.len().saturating_sub(2) {
            if &seq[i..i + 3] != b"ATG" {
                continue;
            }
            let mut j = i;
            while j + 3 <= seq.len() {
                if is_stop(&seq[j..j + 3]) {
                    per_stop.entry(j).and_modify(|s| *s = (*s).min(i)).or_insert(i);
                    break;
                }
                j += 3;
            }
        }
        let mut out: Vec<Orf> = per_stop
            .into_iter()
            .map(|(stop, start)| Orf {
                start: start + 1,
                end: stop + 3,
                frame: start % 3,
            })
            .filter(|o| o.len() >= min_len)
            .collect();
        out.sort();
        out
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = substream(21, 0);
        for _ in 0..200 {
            let len = rng.gen_range(0..400);
            let seq: Vec<u8> = (0..len).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect();
            for min_len in [3, 30] {
                let got = scan_orfs(&seq, min_len);
                assert_eq!(got, brute(&seq, min_len));
                for o in &got {
                    assert_eq!(&seq[o.start - 1..o.start + 2], b"ATG");
                    assert!(is_stop(&seq[o.end - 3..o.end]));
                    assert_eq!(o.len() % 3, 0);
                }
            }
        }
    }
}
