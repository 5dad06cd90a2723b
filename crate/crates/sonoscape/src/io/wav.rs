use std::io::Cursor;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use sonoscape_core::audio::StereoBuffer;

use crate::{Error, Result};

/// 16-bit integer PCM, stereo, at `sample_rate`.
pub fn wav_bytes(audio: &StereoBuffer, sample_rate: u32) -> Vec<u8> {
    let spec = WavSpec {
        channels: 2,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::with_capacity(44 + audio.frames() * 4));
    {
        let mut w = WavWriter::new(&mut cursor, spec).expect("in-memory writer");
        for s in audio.to_i16_interleaved() {
            w.write_sample(s).expect("in-memory writer");
        }
        w.finalize().expect("in-memory writer");
    }
    cursor.into_inner()
}

pub fn write_wav(path: &Path, audio: &StereoBuffer, sample_rate: u32) -> Result<()> {
    super::write_bytes(path, &wav_bytes(audio, sample_rate))
}

/// Decoded WAV contents, one vector per channel, scaled to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavData {
    pub sample_rate: u32,
    pub channels: Vec<Vec<f64>>,
}

/// Reads float WAVs as-is and integer WAVs scaled by their full-scale value.
pub fn read_float_wav(path: &Path) -> Result<WavData> {
    let wav_err = |source| Error::Wav {
        path: path.to_owned(),
        source,
    };
    let mut reader = WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(wav_err)?,
        SampleFormat::Int => {
            let full = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / full))
                .collect::<Result<_, _>>()
                .map_err(wav_err)?
        }
    };
    let n = spec.channels as usize;
    let channels = (0..n)
        .map(|c| interleaved.iter().skip(c).step_by(n).copied().collect())
        .collect();
    Ok(WavData {
        sample_rate: spec.sample_rate,
        channels,
    })
}
