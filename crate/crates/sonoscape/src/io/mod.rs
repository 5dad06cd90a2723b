//! File formats: WAV, grayscale images, manifests, trial logs, config and
//! delimited tables.

mod config;
mod image;
mod manifest;
mod table;
mod wav;

pub use config::Config;
pub use image::{load_gray, save_gray, save_mask};
pub use manifest::{load_hrir_set, load_sound_bank, parse_hrir_manifest, parse_sound_manifest, HrirSource};
pub use table::{read_columns, read_table};
pub use wav::{read_float_wav, wav_bytes, write_wav, WavData};

use std::path::Path;

use sonoscape_core::sim::TrialLog;

use crate::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_trial_log(path: &Path) -> Result<TrialLog> {
    let text = read_text(path)?;
    TrialLog::parse(&text).map_err(|e| match e {
        sonoscape_core::Error::InvalidInput(msg) => Error::Invalid(format!("{}: {msg}", path.display())),
        other => other.into(),
    })
}

pub fn write_trial_log(path: &Path, log: &TrialLog) -> Result<()> {
    write_bytes(path, log.to_text().as_bytes())
}
