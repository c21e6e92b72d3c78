use std::path::Path;

use inmaca_core::genome::annotate::AnnotateConfig;
use inmaca_core::genome::dna::{Encoding, WindowConfig, WINDOW_LENGTHS};
use inmaca_core::genome::synth::SynthConfig;
use inmaca_core::pipeline::TrainConfig;
use inmaca_core::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub length: Option<usize>,
    pub stride: Option<usize>,
    pub encoding: Option<Encoding>,
}

/// Contents of a `--config` TOML file. Every section is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub window: WindowSection,
    pub train: TrainConfig,
    pub annotate: AnnotateConfig,
    pub synth: SynthConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))
    }
}

pub fn check_window_length(length: usize, allow_custom: bool) -> Result<()> {
    if length == 0 || !length.is_multiple_of(3) {
        return Err(Error::InvalidParameter(format!(
            "window length {length} is not a positive multiple of 3"
        )));
    }
    if !allow_custom && !WINDOW_LENGTHS.contains(&length) {
        return Err(Error::InvalidParameter(format!(
            "window length {length} not in {WINDOW_LENGTHS:?} (pass --allow-custom to override)"
        )));
    }
    Ok(())
}

/// Window config from flags over file over defaults.
pub fn resolve_window(
    file: &WindowSection,
    length_flag: Option<usize>,
    encoding_flag: Option<Encoding>,
    allow_custom: bool,
) -> Result<WindowConfig> {
    let length = length_flag.or(file.length).unwrap_or(WINDOW_LENGTHS[0]);
    check_window_length(length, allow_custom)?;
    let encoding = encoding_flag.or(file.encoding).unwrap_or(Encoding::Direct);
    let mut w = WindowConfig::new(length, encoding)?;
    if let Some(s) = file.stride {
        w.stride = s;
        w.validate()?;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_sections() {
        let c: FileConfig = toml::from_str(
            r#"
seed = 9
[window]
length = 108
encoding = { mode = "features", cells = 8 }
[train.tree.clonal.dynamics]
quant = 0.5
[annotate]
min_region_windows = 3
"#,
        )
        .unwrap();
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.window.encoding, Some(Encoding::Features { cells: 8 }));
        assert_eq!(c.train.tree.clonal.dynamics.quant, 0.5);
        assert_eq!(c.train.tree.clonal.population_size, 200);
        assert_eq!(c.annotate.min_region_windows, 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }

    #[test]
    fn window_length_validation() {
        assert!(check_window_length(55, false).is_err());
        assert!(check_window_length(57, false).is_err());
        assert!(check_window_length(57, true).is_ok());
        assert!(check_window_length(55, true).is_err());
        for l in WINDOW_LENGTHS {
            assert!(check_window_length(l, false).is_ok());
        }
    }
}
