use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::genome::dna::DnaSequence;

pub const LINE_WIDTH: usize = 60;

fn fasta_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Fasta {
        line,
        column,
        message: message.into(),
    }
}

/// Reads every record; ids are the header text up to the first whitespace.
pub fn parse_fasta<R: BufRead>(reader: R) -> Result<Vec<DnaSequence>> {
    let mut out = Vec::new();
    let mut current: Option<(String, Vec<u8>)> = None;
    let mut saw_content = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        saw_content = true;
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("");
            if id.is_empty() {
                return Err(fasta_err(lineno, 2, "header has no identifier"));
            }
            if let Some((id, bases)) = current.take() {
                out.push(DnaSequence::new(id, bases)?);
            }
            current = Some((id.to_string(), Vec::new()));
            continue;
        }
        let Some((_, bases)) = current.as_mut() else {
            return Err(fasta_err(lineno, 1, "sequence data before the first '>' header"));
        };
        for (j, c) in line.chars().enumerate() {
            match c.to_ascii_uppercase() {
                'A' | 'C' | 'G' | 'T' | 'N' => bases.push(c.to_ascii_uppercase() as u8),
                ' ' | '\t' => {}
                _ => return Err(fasta_err(lineno, j + 1, format!("illegal character {c:?}"))),
            }
        }
    }
    if let Some((id, bases)) = current.take() {
        out.push(DnaSequence::new(id, bases)?);
    }
    if !saw_content {
        return Err(Error::Empty("fasta input"));
    }
    Ok(out)
}

pub fn parse_fasta_str(s: &str) -> Result<Vec<DnaSequence>> {
    parse_fasta(s.as_bytes())
}

/// Writes records with sequence lines wrapped at [`LINE_WIDTH`].
pub fn write_fasta<W: Write>(mut w: W, seqs: &[DnaSequence]) -> Result<()> {
    for s in seqs {
        writeln!(w, ">{}", s.id)?;
        for chunk in s.bases().chunks(LINE_WIDTH) {
            w.write_all(chunk)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn concatenates_and_uppercases() {
        let s = parse_fasta_str(">s1\nacgt\nACGT\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id, "s1");
        assert_eq!(s[0].as_str(), "ACGTACGT");
    }

    #[test]
    fn order_preserved() {
        let s = parse_fasta_str(">b desc\nAC\n>a\nGT\n").unwrap();
        let ids: Vec<_> = s.iter().map(|x| x.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
    }

    #[test]
    fn illegal_character_position() {
        match parse_fasta_str(">s1\nACGX\n") {
            Err(Error::Fasta { line, column, message }) => {
                assert_eq!((line, column), (2, 4));
                assert!(message.contains('X'));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_fasta_str(""), Err(Error::Empty(_))));
        assert!(matches!(parse_fasta_str("\n\n"), Err(Error::Empty(_))));
        assert!(matches!(
            parse_fasta_str(">\nACGT\n"),
            Err(Error::Fasta { line: 1, .. })
        ));
        assert!(matches!(
            parse_fasta_str("ACGT\n"),
            Err(Error::Fasta { line: 1, column: 1, .. })
        ));
    }

    #[test]
    fn empty_record_allowed() {
        let s = parse_fasta_str(">e\n>f\nA\n").unwrap();
        assert_eq!(s[0].len(), 0);
        assert_eq!(s[1].as_str(), "A");
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(recs in proptest::collection::vec(("[a-z][a-z0-9_]{0,8}", "[ACGTN]{0,200}"), 1..5)) {
            let seqs: Vec<DnaSequence> = recs.iter().map(|(i, b)| DnaSequence::new(i.clone(), b).unwrap()).collect();
            let mut buf = Vec::new();
            write_fasta(&mut buf, &seqs).unwrap();
            let back = parse_fasta(&buf[..]).unwrap();
            prop_assert_eq!(back, seqs);
            let mut again = Vec::new();
            write_fasta(&mut again, &parse_fasta(&buf[..]).unwrap()).unwrap();
            prop_assert_eq!(again, buf);
        }
    }
}
