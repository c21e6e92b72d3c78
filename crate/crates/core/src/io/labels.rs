//! Tab-separated label and truth files, each with a header row.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::synth::TruthRecord;

pub const LABEL_HEADER: [&str; 2] = ["id", "class"];
pub const TRUTH_HEADER: [&str; 4] = ["id", "start", "end", "kind"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: String,
    pub class: String,
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .from_reader(r)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .from_writer(w)
}

fn labels_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Labels(format!("line {line}: {e}"))
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let h = rdr.headers().map_err(labels_err)?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(Error::Labels(format!(
            "header {:?} does not match {:?}",
            h.iter().collect::<Vec<_>>(),
            expected
        )));
    }
    Ok(())
}

pub fn read_labels<R: Read>(r: R) -> Result<Vec<LabelRecord>> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &LABEL_HEADER)?;
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<LabelRecord>, _>>()
        .map_err(labels_err)?;
    if rows.is_empty() {
        return Err(Error::Empty("label file"));
    }
    Ok(rows)
}

pub fn write_labels<W: Write>(w: W, rows: &[LabelRecord]) -> Result<()> {
    let mut wtr = writer(w);
    for r in rows {
        wtr.serialize(r).map_err(labels_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_truth<R: Read>(r: R) -> Result<Vec<TruthRecord>> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &TRUTH_HEADER)?;
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<TruthRecord>, _>>()
        .map_err(labels_err)?;
    for t in &rows {
        if t.start == 0 || t.end < t.start {
            return Err(Error::Labels(format!("{}: bad span {}-{}", t.id, t.start, t.end)));
        }
    }
    Ok(rows)
}

pub fn write_truth<W: Write>(w: W, rows: &[TruthRecord]) -> Result<()> {
    let mut wtr = writer(w);
    for r in rows {
        wtr.serialize(r).map_err(labels_err)?;
    }
    wtr.flush()?;
    Ok(())
}
