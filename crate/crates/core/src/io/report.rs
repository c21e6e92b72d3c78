//! Boundary reports as tab-separated text.

use crate::error::{Error, Result};
use crate::genome::annotate::GenomeAnnotation;

pub const EXON_HEADER: &str = "Gene number\tElement number\tExons/UTR\tStrand\tLeft end\tRight end\tLength";
pub const PROMOTER_HEADER: &str = "Start\tEnd\tScore\tPromoter Sequence";

pub fn exon_report(a: &GenomeAnnotation) -> String {
    let mut s = String::from(EXON_HEADER);
    s.push('\n');
    for r in &a.coding {
        s += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.gene, r.element, r.kind, r.strand, r.left, r.right, r.length
        );
    }
    s
}

pub fn promoter_report(a: &GenomeAnnotation) -> String {
    let mut s = String::from(PROMOTER_HEADER);
    s.push('\n');
    for p in &a.promoters {
        s += &format!("{}\t{}\t{:.2}\t{}\n", p.start, p.end, p.score, p.sequence);
    }
    s
}

/// A parsed exon row: (gene, element, kind, strand, left, right, length).
pub type ExonRow = (usize, usize, String, String, usize, usize, usize);

fn field<T: std::str::FromStr>(f: &str, line: usize, name: &str) -> Result<T> {
    f.parse()
        .map_err(|_| Error::Labels(format!("line {line}: bad {name} {f:?}")))
}

/// Parses and checks an exon report: exact header, seven columns, consistent lengths, sorted by left end.
pub fn parse_exon_report(s: &str) -> Result<Vec<ExonRow>> {
    let mut lines = s.lines();
    if lines.next() != Some(EXON_HEADER) {
        return Err(Error::Labels("exon report header mismatch".into()));
    }
    let mut rows: Vec<ExonRow> = Vec::new();
    for (i, l) in lines.enumerate() {
        let n = i + 2;
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 7 {
            return Err(Error::Labels(format!("line {n}: expected 7 columns, got {}", f.len())));
        }
        if !["Initial", "Internal", "Terminal", "Single", "Utr5", "Utr3"].contains(&f[2]) {
            return Err(Error::Labels(format!("line {n}: unknown element kind {:?}", f[2])));
        }
        if f[3] != "+" && f[3] != "-" {
            return Err(Error::Labels(format!("line {n}: strand {:?}", f[3])));
        }
        let row: ExonRow = (
            field(f[0], n, "gene number")?,
            field(f[1], n, "element number")?,
            f[2].to_string(),
            f[3].to_string(),
            field(f[4], n, "left end")?,
            field(f[5], n, "right end")?,
            field(f[6], n, "length")?,
        );
        if row.4 == 0 || row.5 < row.4 || row.5 - row.4 + 1 != row.6 {
            return Err(Error::Labels(format!("line {n}: length does not match ends")));
        }
        if rows.last().is_some_and(|p| p.4 > row.4) {
            return Err(Error::Labels(format!("line {n}: rows not sorted by left end")));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Parses and checks a promoter report: exact header, scores in [0, 1] with two decimals.
pub fn parse_promoter_report(s: &str) -> Result<Vec<(usize, usize, f64, String)>> {
    let mut lines = s.lines();
    if lines.next() != Some(PROMOTER_HEADER) {
        return Err(Error::Labels("promoter report header mismatch".into()));
    }
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let n = i + 2;
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 4 {
            return Err(Error::Labels(format!("line {n}: expected 4 columns, got {}", f.len())));
        }
        let start: usize = field(f[0], n, "start")?;
        let end: usize = field(f[1], n, "end")?;
        let score: f64 = field(f[2], n, "score")?;
        if end < start || !(0.0..=1.0).contains(&score) || f[2].split('.').nth(1).map(str::len) != Some(2) {
            return Err(Error::Labels(format!("line {n}: bad span or score")));
        }
        if f[3].len() != end - start + 1 || !f[3].bytes().all(|b| b"ACGTN".contains(&b)) {
            return Err(Error::Labels(format!("line {n}: sequence does not match span")));
        }
        rows.push((start, end, score, f[3].to_string()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::annotate::{CodingRecord, ExonKind, PromoterRecord, Strand};

    fn sample() -> GenomeAnnotation {
        GenomeAnnotation {
            sequence_id: "s".into(),
            coding: vec![CodingRecord {
                gene: 1,
                element: 1,
                kind: ExonKind::Single,
                strand: Strand::Forward,
                left: 101,
                right: 400,
                length: 300,
                score: 0.9,
            }],
            promoters: vec![PromoterRecord {
                gene: 1,
                strand: Strand::Forward,
                start: 11,
                end: 16,
                score: 0.1,
                motif: true,
                sequence: "TAATAA".into(),
            }],
            diagnostics: vec![],
        }
    }

    #[test]
    fn exact_layout() {
        let a = sample();
        assert_eq!(
            exon_report(&a),
            "Gene number\tElement number\tExons/UTR\tStrand\tLeft end\tRight end\tLength\n1\t1\tSingle\t+\t101\t400\t300\n"
        );
        assert_eq!(
            promoter_report(&a),
            "Start\tEnd\tScore\tPromoter Sequence\n11\t16\t0.10\tTAATAA\n"
        );
        assert_eq!(parse_exon_report(&exon_report(&a)).unwrap().len(), 1);
        assert_eq!(parse_promoter_report(&promoter_report(&a)).unwrap().len(), 1);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_exon_report("Gene\n").is_err());
        assert!(parse_exon_report(&format!("{EXON_HEADER}\n1\t1\tSingle\t+\t10\t20\t5\n")).is_err());
        assert!(parse_promoter_report(&format!("{PROMOTER_HEADER}\n1\t3\t0.5\tAAA\n")).is_err());
        assert!(parse_promoter_report(&format!("{PROMOTER_HEADER}\n1\t3\t0.50\tAA\n")).is_err());
    }
}
