//! Text manifests naming the impulse responses and sound loops.
//!
//! HRIR manifest, one line per grid direction:
//!
//! ```text
//! # azimuth elevation left.wav right.wav
//! -90 45 hrir/l_m90_p45.wav hrir/r_m90_p45.wav
//! # or a single stereo file
//! -30 45 hrir/m30_p45.wav
//! ```
//!
//! Sound manifest, one line per class: `birds sounds/birds.wav 44100`.
//!
//! Relative paths resolve against the manifest's directory.

use std::path::{Path, PathBuf};

use sonoscape_core::audio::{Hrir, HrirSet, SoundBank, SoundLoop};
use sonoscape_core::SoundClass;

use super::wav::read_float_wav;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HrirSource {
    Pair { left: PathBuf, right: PathBuf },
    Stereo(PathBuf),
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

pub fn parse_hrir_manifest(text: &str, path: &Path) -> Result<Vec<(i32, i32, HrirSource)>> {
    let base = path.parent().unwrap_or(Path::new(""));
    records(text)
        .map(|(line, f)| {
            let angle = |s: &str, what: &str| {
                s.parse::<i32>()
                    .map_err(|_| Error::parse(path, line, format!("bad {what} {s:?}")))
            };
            let source = match f.len() {
                3 => HrirSource::Stereo(resolve(base, f[2])),
                4 => HrirSource::Pair {
                    left: resolve(base, f[2]),
                    right: resolve(base, f[3]),
                },
                _ => {
                    return Err(Error::parse(
                        path,
                        line,
                        "expected `azimuth elevation left.wav right.wav` or `azimuth elevation stereo.wav`",
                    ))
                }
            };
            Ok((angle(f[0], "azimuth")?, angle(f[1], "elevation")?, source))
        })
        .collect()
}

fn load_hrir(source: &HrirSource) -> Result<Hrir> {
    let (left, right, rate) = match source {
        HrirSource::Stereo(p) => {
            let w = read_float_wav(p)?;
            if w.channels.len() != 2 {
                return Err(Error::Invalid(format!("{}: expected a stereo file", p.display())));
            }
            let mut ch = w.channels.into_iter();
            (ch.next().unwrap(), ch.next().unwrap(), w.sample_rate)
        }
        HrirSource::Pair { left, right } => {
            let l = read_float_wav(left)?;
            let r = read_float_wav(right)?;
            if l.sample_rate != r.sample_rate {
                return Err(Error::Invalid(format!(
                    "{} and {} have different sample rates",
                    left.display(),
                    right.display()
                )));
            }
            let first = |w: super::wav::WavData| w.channels.into_iter().next().unwrap_or_default();
            let rate = l.sample_rate;
            (first(l), first(r), rate)
        }
    };
    Ok(Hrir::new(left, right, rate)?)
}

/// Loads and validates the twelve filters listed in a manifest.
pub fn load_hrir_set(path: &Path) -> Result<HrirSet> {
    let text = super::read_text(path)?;
    let entries = parse_hrir_manifest(&text, path)?;
    let loaded = entries
        .iter()
        .map(|(az, el, src)| load_hrir(src).map(|h| (*az, *el, h)))
        .collect::<Result<Vec<_>>>()?;
    Ok(HrirSet::from_entries(loaded)?)
}

pub fn parse_sound_manifest(text: &str, path: &Path) -> Result<Vec<(SoundClass, PathBuf, usize)>> {
    let base = path.parent().unwrap_or(Path::new(""));
    records(text)
        .map(|(line, f)| {
            if f.len() != 3 {
                return Err(Error::parse(path, line, "expected `class path loop_length`"));
            }
            let class = SoundClass::parse(f[0])
                .ok_or_else(|| Error::parse(path, line, format!("unknown sound class {:?}", f[0])))?;
            let len = f[2]
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad loop length {:?}", f[2])))?;
            Ok((class, resolve(base, f[1]), len))
        })
        .collect()
}

/// Loads the three loops of a sound manifest. Multi-channel files are
/// averaged down to mono.
pub fn load_sound_bank(path: &Path) -> Result<SoundBank> {
    let text = super::read_text(path)?;
    let loops = parse_sound_manifest(&text, path)?
        .into_iter()
        .map(|(class, file, len)| {
            let w = read_float_wav(&file)?;
            let n = w.channels.len().max(1) as f64;
            let frames = w.channels.first().map_or(0, Vec::len);
            let mono = (0..frames)
                .map(|i| w.channels.iter().map(|c| c[i]).sum::<f64>() / n)
                .collect();
            Ok(SoundLoop::new(mono, len, class, w.sample_rate)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SoundBank::new(loops)?)
}
