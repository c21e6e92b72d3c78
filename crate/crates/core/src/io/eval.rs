use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attractor::ClassId;
use crate::ca::FuzzyState;
use crate::error::{Error, Result};
use crate::tree::{InmacaTree, TreeClassification};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub windows: usize,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    /// `confusion[actual][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub total: usize,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Class treated as positive for the binary summary.
    pub positive: ClassId,
    pub sensitivity: f64,
    pub specificity: f64,
    pub timing: Vec<TimingRow>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl EvalReport {
    pub fn from_predictions(classes: &[String], pairs: &[(ClassId, ClassId)], positive: ClassId) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty("test set"));
        }
        let k = classes.len();
        if positive >= k {
            return Err(Error::InvalidParameter(format!(
                "positive class {positive} out of range"
            )));
        }
        let mut confusion = vec![vec![0usize; k]; k];
        for &(a, p) in pairs {
            if a >= k || p >= k {
                return Err(Error::Labels(format!("class index {} outside label space", a.max(p))));
            }
            confusion[a][p] += 1;
        }
        let total = pairs.len();
        let trace: usize = (0..k).map(|i| confusion[i][i]).sum();
        let per_class: Vec<ClassMetrics> = (0..k)
            .map(|c| {
                let tp = confusion[c][c];
                let row: usize = confusion[c].iter().sum();
                let col: usize = (0..k).map(|a| confusion[a][c]).sum();
                let fp = col - tp;
                let tn = total - row - fp;
                ClassMetrics {
                    class: classes[c].clone(),
                    support: row,
                    precision: ratio(tp, col),
                    recall: ratio(tp, row),
                    specificity: ratio(tn, tn + fp),
                }
            })
            .collect();
        Ok(EvalReport {
            classes: classes.to_vec(),
            total,
            accuracy: ratio(trace, total),
            sensitivity: per_class[positive].recall,
            specificity: per_class[positive].specificity,
            per_class,
            confusion,
            positive,
            timing: Vec::new(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    /// Human-readable summary with the timing table in milliseconds.
    pub fn to_text(&self) -> String {
        let mut s = format!("accuracy\t{:.4}\n", self.accuracy);
        s += &format!(
            "sensitivity\t{:.4}\nspecificity\t{:.4}\n",
            self.sensitivity, self.specificity
        );
        s += "class\tsupport\tprecision\trecall\tspecificity\n";
        for m in &self.per_class {
            s += &format!(
                "{}\t{}\t{:.4}\t{:.4}\t{:.4}\n",
                m.class, m.support, m.precision, m.recall, m.specificity
            );
        }
        s += &format!(
            "confusion (rows actual, columns predicted)\t{}\n",
            self.classes.join("\t")
        );
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s += &format!("{c}\t{}\n", cells.join("\t"));
        }
        if !self.timing.is_empty() {
            s += "windows\ttime_ms\n";
            for t in &self.timing {
                s += &format!("{}\t{:.3}\n", t.windows, t.millis);
            }
        }
        s
    }
}

/// Classifies every pattern in parallel, preserving order.
pub fn classify_all(tree: &InmacaTree, patterns: &[FuzzyState]) -> Result<Vec<TreeClassification>> {
    patterns.par_iter().map(|p| tree.classify(p)).collect()
}

pub fn evaluate(
    tree: &InmacaTree,
    classes: &[String],
    test: &[(FuzzyState, ClassId)],
    positive: ClassId,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let states: Vec<FuzzyState> = test.iter().map(|(s, _)| s.clone()).collect();
    let preds = classify_all(tree, &states)?;
    let pairs: Vec<(ClassId, ClassId)> = test.iter().zip(&preds).map(|((_, a), p)| (*a, p.class)).collect();
    EvalReport::from_predictions(classes, &pairs, positive)
}

/// Wall time of one full prediction pass per bucket size, cycling the probe set.
pub fn time_buckets(tree: &InmacaTree, probe: &[FuzzyState], sizes: &[usize]) -> Result<Vec<TimingRow>> {
    if probe.is_empty() {
        return Err(Error::Empty("probe set"));
    }
    sizes
        .iter()
        .map(|&n| {
            let batch: Vec<FuzzyState> = probe.iter().cycle().take(n).cloned().collect();
            let t0 = Instant::now();
            classify_all(tree, &batch)?;
            Ok(TimingRow {
                windows: n,
                millis: t0.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}
