//! `key = value` presets. Unknown keys are rejected so typos do not pass
//! silently.
//!
//! ```text
//! # filter
//! thresh = 0.7
//! iterations = 1
//! activation_ratio = 0.01
//! # audio
//! sample_rate = 44100
//! block_size = 1024
//! master_gain = 0.5
//! budget_ms = 45
//! hrir = hrir/manifest.txt
//! sounds = sounds/manifest.txt
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub thresh: Option<f64>,
    pub iterations: Option<u32>,
    pub activation_ratio: Option<f64>,
    pub sample_rate: Option<u32>,
    pub block_size: Option<usize>,
    pub master_gain: Option<f64>,
    pub budget_ms: Option<f64>,
    pub hrir: Option<PathBuf>,
    pub sounds: Option<PathBuf>,
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = i + 1;
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(path, lineno, "expected key = value"))?;
            fn num<T: FromStr>(v: &str, key: &str, path: &Path, line: usize) -> Result<Option<T>> {
                v.parse()
                    .map(Some)
                    .map_err(|_| Error::parse(path, line, format!("bad value for {key}: {v:?}")))
            }
            match key {
                "thresh" => cfg.thresh = num(value, key, path, lineno)?,
                "iterations" => cfg.iterations = num(value, key, path, lineno)?,
                "activation_ratio" => cfg.activation_ratio = num(value, key, path, lineno)?,
                "sample_rate" => cfg.sample_rate = num(value, key, path, lineno)?,
                "block_size" => cfg.block_size = num(value, key, path, lineno)?,
                "master_gain" => cfg.master_gain = num(value, key, path, lineno)?,
                "budget_ms" => cfg.budget_ms = num(value, key, path, lineno)?,
                "hrir" => cfg.hrir = Some(base.join(value)),
                "sounds" => cfg.sounds = Some(base.join(value)),
                other => return Err(Error::parse(path, lineno, format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&super::read_text(path)?, path)
    }
}
