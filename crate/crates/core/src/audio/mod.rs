//! Binaural sonification: per-cell HRIRs, the environmental sound bank and
//! the looping voice engine that mixes them.

mod convolve;
mod engine;
mod hrir;
mod sounds;

pub use convolve::{convolve_stereo, sample_to_i16, StereoBuffer};
pub use engine::{
    VoiceEngine, VoiceState, DEFAULT_BLOCK_SIZE, DEFAULT_SAMPLE_RATE, HEADROOM_GAIN,
};
pub use hrir::{fallback_hrir, Hrir, HrirSet, HEAD_RADIUS_M, MAX_ILD_DB, SPEED_OF_SOUND};
pub use sounds::{synthetic_center_hz, SoundBank, SoundLoop};
