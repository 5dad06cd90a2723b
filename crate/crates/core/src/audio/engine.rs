use alloc::vec::Vec;

use super::convolve::{StereoBuffer, Taps};
use super::hrir::HrirSet;
use super::sounds::SoundBank;
use crate::grid::{self, CellActivations, CELLS};
use crate::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;
pub const DEFAULT_BLOCK_SIZE: usize = 1024;

/// Per-voice mixing gain that keeps twelve full-scale voices out of the
/// clipper.
pub const HEADROOM_GAIN: f64 = 1.0 / 12.0;

#[derive(Debug, Clone)]
struct Voice {
    playing: bool,
    /// Next loop sample to feed the filter.
    position: usize,
    /// The last `filter_len - 1` filter inputs, oldest first.
    history: Vec<f64>,
    /// Samples of convolution tail left to emit after a stop.
    tail_remaining: usize,
    left: Taps,
    right: Taps,
}

impl Voice {
    fn is_audible(&self) -> bool {
        self.playing || self.tail_remaining > 0
    }
}

/// Externally visible state of one voice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoiceState {
    pub playing: bool,
    pub position: usize,
    pub tail_remaining: usize,
}

/// Twelve looping voices, one per grid cell, each filtered through its
/// cell's HRIR and summed into a stereo bus.
///
/// Every output sample is `Σ_m h[m] · x[n - m]` over the voice's absolute
/// input stream, so output depends only on the sample index and the sequence
/// of activation updates, never on how the stream is cut into blocks.
#[derive(Debug, Clone)]
pub struct VoiceEngine {
    voices: Vec<Voice>,
    bank: SoundBank,
    activations: CellActivations,
    master_gain: f64,
    block_size: usize,
    sample_rate: u32,
    scratch: Vec<f64>,
}

impl VoiceEngine {
    pub fn new(hrirs: HrirSet, bank: SoundBank, sample_rate: u32, block_size: usize) -> Result<Self> {
        if hrirs.sample_rate() != sample_rate {
            return Err(Error::Hrir(alloc::format!(
                "filters are {} Hz but the engine runs at {sample_rate} Hz",
                hrirs.sample_rate()
            )));
        }
        if bank.sample_rate() != sample_rate {
            return Err(Error::InvalidInput(alloc::format!(
                "sound loops are {} Hz but the engine runs at {sample_rate} Hz",
                bank.sample_rate()
            )));
        }
        if block_size == 0 {
            return Err(Error::InvalidInput("block size must be at least 1".into()));
        }
        let voices = (0..CELLS)
            .map(|i| {
                let h = hrirs.get(i);
                Voice {
                    playing: false,
                    position: 0,
                    history: alloc::vec![0.0; h.len() - 1],
                    tail_remaining: 0,
                    left: Taps::new(h.left()),
                    right: Taps::new(h.right()),
                }
            })
            .collect();
        Ok(Self {
            voices,
            bank,
            activations: CellActivations::NONE,
            master_gain: 1.0,
            block_size,
            sample_rate,
            scratch: Vec::new(),
        })
    }

    /// Fallback HRIRs, synthetic loops, 44.1 kHz, 1024-frame blocks.
    pub fn with_defaults() -> Self {
        Self::new(
            HrirSet::fallback(DEFAULT_SAMPLE_RATE),
            SoundBank::synthetic(DEFAULT_SAMPLE_RATE),
            DEFAULT_SAMPLE_RATE,
            DEFAULT_BLOCK_SIZE,
        )
        .expect("default engine configuration is consistent")
    }

    pub fn master_gain(&self) -> f64 {
        self.master_gain
    }

    /// Clamped to `[0, 1]`.
    pub fn set_master_gain(&mut self, gain: f64) {
        self.master_gain = gain.clamp(0.0, 1.0);
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn activations(&self) -> CellActivations {
        self.activations
    }

    pub fn voice_state(&self, cell: usize) -> VoiceState {
        let v = &self.voices[cell];
        VoiceState {
            playing: v.playing,
            position: v.position,
            tail_remaining: v.tail_remaining,
        }
    }

    pub fn playing_count(&self) -> usize {
        self.voices.iter().filter(|v| v.playing).count()
    }

    /// Starts newly active cells at loop position 0 and stops deactivated
    /// ones. Unchanged cells keep their phase. Call between blocks.
    pub fn update_voices(&mut self, activations: CellActivations) {
        for (cell, voice) in self.voices.iter_mut().enumerate() {
            let want = activations.is_active(cell);
            match (voice.playing, want) {
                (false, true) => {
                    voice.playing = true;
                    voice.position = 0;
                    voice.tail_remaining = 0;
                }
                (true, false) => {
                    voice.playing = false;
                    voice.position = 0;
                    voice.tail_remaining = voice.history.len();
                }
                _ => {}
            }
        }
        self.activations = activations;
    }

    /// Mix of all audible voices scaled by the master gain, before clipping.
    pub fn render_block_unclipped(&mut self, frames: usize) -> StereoBuffer {
        let mut out = StereoBuffer::silence(frames);
        for cell in 0..CELLS {
            if !self.voices[cell].is_audible() {
                continue;
            }
            let class = grid::direction_of(cell).sound_class;
            render_voice(
                &mut self.voices[cell],
                self.bank.get(class),
                frames,
                &mut self.scratch,
                &mut out,
            );
        }
        if self.master_gain != 1.0 {
            for s in out.left.iter_mut().chain(out.right.iter_mut()) {
                *s *= self.master_gain;
            }
        }
        out
    }

    /// Renders `frames` frames, hard-clipped to `[-1, 1]`, and advances every
    /// playing voice by `frames` samples.
    pub fn render_block(&mut self, frames: usize) -> StereoBuffer {
        let mut out = self.render_block_unclipped(frames);
        for s in out.left.iter_mut().chain(out.right.iter_mut()) {
            *s = s.clamp(-1.0, 1.0);
        }
        out
    }

    /// Renders one block of the engine's configured size.
    pub fn next_block(&mut self) -> StereoBuffer {
        self.render_block(self.block_size)
    }
}

fn render_voice(
    voice: &mut Voice,
    sound: &super::sounds::SoundLoop,
    frames: usize,
    input: &mut Vec<f64>,
    out: &mut StereoBuffer,
) {
    let hist = voice.history.len();
    input.clear();
    input.extend_from_slice(&voice.history);
    if voice.playing {
        let len = sound.loop_length();
        for _ in 0..frames {
            input.push(sound.at(voice.position));
            voice.position += 1;
            if voice.position == len {
                voice.position = 0;
            }
        }
    } else {
        input.resize(hist + frames, 0.0);
        voice.tail_remaining = voice.tail_remaining.saturating_sub(frames);
    }

    for n in 0..frames {
        out.left[n] += voice.left.dot_backward(input, hist + n);
        out.right[n] += voice.right.dot_backward(input, hist + n);
    }
    debug_assert_eq!(voice.left.len(), hist + 1);
    voice.history.copy_from_slice(&input[frames..]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::hrir::Hrir;
    use alloc::vec;

    fn constant_engine(value: f64) -> VoiceEngine {
        VoiceEngine::new(
            HrirSet::uniform(Hrir::identity(44_100)),
            SoundBank::uniform(vec![value; 100], 44_100).unwrap(),
            44_100,
            64,
        )
        .unwrap()
    }

    #[test]
    fn silent_when_nothing_plays() {
        let mut e = VoiceEngine::with_defaults();
        e.update_voices(CellActivations::NONE);
        assert!(e.render_block(1024).is_silent());
    }

    #[test]
    fn one_constant_voice() {
        let mut e = constant_engine(0.5);
        e.update_voices(CellActivations::NONE.with(3, true));
        let b = e.render_block(64);
        assert!(b.left.iter().chain(&b.right).all(|&s| s == 0.5));
    }

    #[test]
    fn two_constant_voices_sum() {
        let mut e = constant_engine(0.5);
        e.update_voices(CellActivations::NONE.with(3, true).with(7, true));
        let b = e.render_block(64);
        assert!(b.left.iter().chain(&b.right).all(|&s| s == 1.0));
    }

    #[test]
    fn clipping_engages_above_unity() {
        let mut e = constant_engine(0.5);
        e.update_voices(CellActivations::from_bits(0b111));
        let raw = e.clone().render_block_unclipped(8);
        assert!(raw.left.iter().all(|&s| s == 1.5));
        assert!(e.render_block(8).left.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn birds_voice_for_top_left_cell() {
        let mut e = VoiceEngine::with_defaults();
        e.update_voices(CellActivations::NONE.with(0, true));
        assert_eq!(e.playing_count(), 1);
        assert!(e.voice_state(0).playing);
        let d = grid::direction_of(0);
        assert_eq!((d.azimuth_deg, d.elevation_deg), (-90, 45));
        assert_eq!(d.sound_class, crate::SoundClass::Birds);
    }

    #[test]
    fn retrigger_restarts_at_zero() {
        let mut e = VoiceEngine::with_defaults();
        let on = CellActivations::NONE.with(5, true);
        e.update_voices(on);
        e.render_block(300);
        assert_eq!(e.voice_state(5).position, 300);
        e.update_voices(on);
        assert_eq!(e.voice_state(5).position, 300, "unchanged cells keep phase");
        e.update_voices(CellActivations::NONE);
        assert!(!e.voice_state(5).playing);
        e.update_voices(on);
        assert_eq!(e.voice_state(5).position, 0);
    }

    #[test]
    fn loop_position_wraps() {
        let mut e = constant_engine(0.25);
        e.update_voices(CellActivations::NONE.with(0, true));
        e.render_block(250);
        assert_eq!(e.voice_state(0).position, 50);
    }

    #[test]
    fn rejects_rate_mismatch() {
        let r = VoiceEngine::new(HrirSet::fallback(48_000), SoundBank::synthetic(44_100), 44_100, 1024);
        assert!(r.is_err());
    }
}
