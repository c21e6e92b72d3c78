#![allow(dead_code)]

use std::sync::OnceLock;

use inmaca_core::genome::annotate::AnnotateConfig;
use inmaca_core::genome::synth::{synth_sequences, SynthConfig};
use inmaca_core::pipeline::{train_from_truth, TrainConfig};
use inmaca_core::{Dynamics, Encoding, ModelFile, WindowConfig};

pub fn window() -> WindowConfig {
    WindowConfig::new(54, Encoding::Features { cells: 8 }).unwrap()
}

pub fn train_config() -> TrainConfig {
    let mut cfg = TrainConfig::default();
    cfg.tree.clonal.dynamics = Dynamics {
        quant: 0.5,
        ..Dynamics::default()
    };
    cfg
}

pub fn annotate_config(m: &ModelFile) -> AnnotateConfig {
    let mut cfg = AnnotateConfig {
        min_region_windows: 3,
        ..AnnotateConfig::default()
    };
    cfg.coding_class = m.coding.class_index("coding").unwrap();
    if let Some(p) = &m.promoter {
        cfg.promoter.class = p.class_index("promoter").unwrap();
    }
    cfg
}

pub fn train(seed: u64, sequences: usize) -> ModelFile {
    let (seqs, truth) = synth_sequences(&SynthConfig {
        seed,
        sequences,
        ..SynthConfig::default()
    })
    .unwrap();
    train_from_truth(&seqs, &truth, &window(), &train_config(), seed).unwrap()
}

/// Model trained once per test binary on 60 synthetic sequences.
pub fn shared_model() -> &'static ModelFile {
    static MODEL: OnceLock<ModelFile> = OnceLock::new();
    MODEL.get_or_init(|| train(1000, 60))
}
