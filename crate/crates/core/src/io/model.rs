//! Versioned JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::dna::WindowConfig;
use crate::io::write_atomic;
use crate::tree::InmacaTree;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    /// Training patterns per class, indexed like `classes`.
    pub counts: Vec<usize>,
    pub root_fitness: f64,
    pub training_accuracy: f64,
    pub nodes: usize,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub classes: Vec<String>,
    pub tree: InmacaTree,
    pub training: TrainingMeta,
}

impl ClassifierModel {
    pub fn class_index(&self, name: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Labels(format!("model has no class {name:?} (classes {:?})", self.classes)))
    }

    fn validate(&self, window: &WindowConfig) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::ModelInvariant("model has no classes".into()));
        }
        if self.tree.cells != window.cells() {
            return Err(Error::ModelInvariant(format!(
                "tree has {} cells, window config implies {}",
                self.tree.cells,
                window.cells()
            )));
        }
        if self.training.counts.len() != self.classes.len() {
            return Err(Error::ModelInvariant("training counts do not match class list".into()));
        }
        self.tree.validate(self.classes.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub window: WindowConfig,
    pub seed: u64,
    pub coding: ClassifierModel,
    pub promoter: Option<ClassifierModel>,
}

impl ModelFile {
    pub fn new(window: WindowConfig, seed: u64, coding: ClassifierModel, promoter: Option<ClassifierModel>) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            window,
            seed,
            coding,
            promoter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found: self.format_version,
                expected: FORMAT_VERSION,
            });
        }
        self.window
            .validate()
            .map_err(|e| Error::ModelInvariant(e.to_string()))?;
        self.coding.validate(&self.window)?;
        if let Some(p) = &self.promoter {
            p.validate(&self.window)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::ModelFormat(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and validates; the version is checked before anything else.
    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s).map_err(|e| {
            if e.is_eof() {
                Error::ModelTruncated(e.to_string())
            } else {
                Error::ModelFormat(e.to_string())
            }
        })?;
        let version = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::ModelFormat("missing format_version".into()))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::ModelVersion {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                expected: FORMAT_VERSION,
            });
        }
        let m: ModelFile = serde_json::from_value(value).map_err(|e| Error::ModelFormat(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }
}

pub fn save_model(m: &ModelFile, path: &Path) -> Result<()> {
    m.validate()?;
    write_atomic(path, m.to_json()?.as_bytes())
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text =
        std::fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    ModelFile::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attractor::Dynamics;
    use crate::clonal::ClonalConfig;
    use crate::genome::dna::{encode_window, Encoding};
    use crate::genome::synth::{synth_windows, SynthConfig, CODING};
    use crate::tree::{build_tree, TreeConfig};

    fn small_model() -> ModelFile {
        let window = WindowConfig::new(54, Encoding::Features { cells: 8 }).unwrap();
        let ws = synth_windows(&SynthConfig {
            coding_windows: 30,
            noncoding_windows: 30,
            sequences: 0,
            ..SynthConfig::default()
        })
        .unwrap();
        let train: Vec<_> = ws
            .iter()
            .map(|w| {
                (
                    encode_window(&w.bases, &window).unwrap(),
                    usize::from(w.class == CODING),
                )
            })
            .collect();
        let cfg = TreeConfig {
            max_depth: 2,
            clonal: ClonalConfig {
                population_size: 20,
                stop_count: 5,
                g_max: 3,
                dynamics: Dynamics {
                    quant: 0.25,
                    ..Dynamics::default()
                },
                ..ClonalConfig::default()
            },
            ..TreeConfig::default()
        };
        let b = build_tree(&train, &cfg).unwrap();
        let coding = ClassifierModel {
            classes: vec!["noncoding".into(), "coding".into()],
            training: TrainingMeta {
                counts: vec![30, 30],
                root_fitness: b.diagnostics.root_fitness,
                ..TrainingMeta::default()
            },
            tree: b.tree,
        };
        ModelFile::new(window, 0, coding, None)
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let m = small_model();
        let a = m.to_json().unwrap();
        let back = ModelFile::from_json(&a).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json().unwrap(), a);
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = small_model();
        save_model(&m, &p).unwrap();
        assert_eq!(load_model(&p).unwrap(), m);
    }

    #[test]
    fn distinct_load_errors() {
        let s = small_model().to_json().unwrap();
        assert!(matches!(
            ModelFile::from_json(&s[..s.len() / 2]),
            Err(Error::ModelTruncated(_))
        ));
        let v2 = s.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(matches!(
            ModelFile::from_json(&v2),
            Err(Error::ModelVersion { found: 2, expected: 1 })
        ));
        assert!(matches!(ModelFile::from_json("[1, 2]"), Err(Error::ModelFormat(_))));
        let mut bad: serde_json::Value = serde_json::from_str(&s).unwrap();
        let leaf = first_leaf(&mut bad["coding"]["tree"]["root"]).expect("a leaf");
        leaf["purity"] = serde_json::json!(1.5);
        let err = ModelFile::from_json(&bad.to_string()).unwrap_err();
        assert!(matches!(err, Error::ModelInvariant(_)), "{err:?}");
    }

    fn first_leaf(v: &mut serde_json::Value) -> Option<&mut serde_json::Value> {
        if v.get("purity").is_some() && v.get("cause").is_some() {
            return Some(v);
        }
        match v {
            serde_json::Value::Object(m) => m.values_mut().find_map(first_leaf),
            serde_json::Value::Array(a) => a.iter_mut().find_map(first_leaf),
            _ => None,
        }
    }
}
