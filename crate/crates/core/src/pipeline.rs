//! Training entry points shared by the command line and the test suites.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::genome::dna::{DnaSequence, WindowConfig};
use crate::genome::synth::{TruthRecord, CODING, NONCODING, PROMOTER};
use crate::genome::training::{encode_labeled, subsample, truth_windows, LabeledPatterns};
use crate::io::eval::classify_all;
use crate::io::model::{ClassifierModel, ModelFile, TrainingMeta};
use crate::tree::{build_tree, BuildDiagnostics, TreeConfig};

pub const BACKGROUND: &str = "background";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub tree: TreeConfig,
    /// Per-class cap on training windows; larger classes are subsampled.
    pub max_per_class: usize,
    pub promoter_model: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            tree: TreeConfig::default(),
            max_per_class: 400,
            promoter_model: true,
        }
    }
}

pub fn train_classifier(lp: &LabeledPatterns, cfg: &TreeConfig) -> Result<(ClassifierModel, BuildDiagnostics)> {
    let build = build_tree(&lp.patterns, cfg)?;
    let states: Vec<_> = lp.patterns.iter().map(|(s, _)| s.clone()).collect();
    let preds = classify_all(&build.tree, &states)?;
    let correct = preds
        .iter()
        .zip(&lp.patterns)
        .filter(|(p, (_, c))| p.class == *c)
        .count();
    let meta = TrainingMeta {
        counts: lp.counts(),
        root_fitness: build.diagnostics.root_fitness,
        training_accuracy: correct as f64 / lp.patterns.len() as f64,
        nodes: build.tree.node_count(),
        depth: build.tree.depth(),
    };
    Ok((
        ClassifierModel {
            classes: lp.classes.clone(),
            tree: build.tree,
            training: meta,
        },
        build.diagnostics,
    ))
}

fn names(a: &str, b: &str) -> Vec<String> {
    vec![a.to_string(), b.to_string()]
}

fn labeled<'a>(groups: &'a [(&'a [Vec<u8>], &'a str)]) -> impl Iterator<Item = (&'a [u8], &'a str)> + 'a {
    groups
        .iter()
        .flat_map(|(ws, class)| ws.iter().map(move |w| (w.as_slice(), *class)))
}

/// Patterns for the coding model: coding versus non-coding windows.
pub fn coding_patterns(
    seqs: &[DnaSequence],
    truth: &[TruthRecord],
    window: &WindowConfig,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<LabeledPatterns> {
    let tw = truth_windows(seqs, truth, window)?;
    let coding = subsample(&tw.coding, cfg.max_per_class, seed, 1);
    let noncoding = subsample(&tw.noncoding, cfg.max_per_class, seed, 2);
    encode_labeled(
        labeled(&[(&noncoding, NONCODING), (&coding, CODING)]),
        &names(NONCODING, CODING),
        window,
    )
}

/// Patterns for the promoter model: windows around promoter records versus
/// other upstream and non-coding windows.
pub fn promoter_patterns(
    seqs: &[DnaSequence],
    truth: &[TruthRecord],
    window: &WindowConfig,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<LabeledPatterns> {
    let tw = truth_windows(seqs, truth, window)?;
    let mut background = tw.upstream.clone();
    background.extend(tw.noncoding.iter().cloned());
    let background = subsample(&background, cfg.max_per_class, seed, 3);
    let promoter = subsample(&tw.promoter, cfg.max_per_class, seed, 4);
    encode_labeled(
        labeled(&[(&background, BACKGROUND), (&promoter, PROMOTER)]),
        &names(BACKGROUND, PROMOTER),
        window,
    )
}

fn with_seed(cfg: &TreeConfig, seed: u64) -> TreeConfig {
    let mut c = cfg.clone();
    c.clonal.rng_seed = seed;
    c
}

/// Trains the coding model and, when enabled and promoter records exist, the promoter model.
pub fn train_from_truth(
    seqs: &[DnaSequence],
    truth: &[TruthRecord],
    window: &WindowConfig,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<ModelFile> {
    let lp = coding_patterns(seqs, truth, window, cfg, seed)?;
    let (coding, _) = train_classifier(&lp, &with_seed(&cfg.tree, seed))?;
    let promoter = if cfg.promoter_model && truth.iter().any(|t| t.kind == PROMOTER) {
        let pp = promoter_patterns(seqs, truth, window, cfg, seed)?;
        let (m, _) = train_classifier(&pp, &with_seed(&cfg.tree, seed ^ 0x5052_4F4D))?;
        Some(m)
    } else {
        None
    };
    Ok(ModelFile::new(window.clone(), seed, coding, promoter))
}

/// Trains a single classifier from labeled windows; the class list is sorted.
pub fn train_from_windows(
    windows: &[(Vec<u8>, String)],
    window: &WindowConfig,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<ModelFile> {
    let mut classes: Vec<String> = windows.iter().map(|(_, c)| c.clone()).collect();
    classes.sort();
    classes.dedup();
    let mut picked: Vec<(Vec<u8>, String)> = Vec::new();
    for (k, c) in classes.iter().enumerate() {
        let members: Vec<(Vec<u8>, String)> = windows.iter().filter(|(_, x)| x == c).cloned().collect();
        picked.extend(subsample(&members, cfg.max_per_class, seed, 16 + k as u64));
    }
    let lp = encode_labeled(picked.iter().map(|(b, c)| (b.as_slice(), c.as_str())), &classes, window)?;
    let (coding, _) = train_classifier(&lp, &with_seed(&cfg.tree, seed))?;
    Ok(ModelFile::new(window.clone(), seed, coding, None))
}
