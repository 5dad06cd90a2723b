use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::grid::SoundClass;
use crate::rng::Lcg64;
use crate::{Error, Result};

/// Mono loop played by every voice of one grid row.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundLoop {
    samples: Vec<f64>,
    loop_length: usize,
    sound_class: SoundClass,
    sample_rate: u32,
}

impl SoundLoop {
    /// Loops over the first `loop_length` samples.
    pub fn new(
        samples: Vec<f64>,
        loop_length: usize,
        sound_class: SoundClass,
        sample_rate: u32,
    ) -> Result<Self> {
        if loop_length == 0 || loop_length > samples.len() {
            return Err(Error::InvalidInput(format!(
                "{sound_class} loop length {loop_length} outside 1..={}",
                samples.len()
            )));
        }
        if samples.iter().any(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::InvalidInput(format!("{sound_class} samples must lie in [-1, 1]")));
        }
        let mut samples = samples;
        samples.truncate(loop_length);
        Ok(Self {
            samples,
            loop_length,
            sound_class,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn loop_length(&self) -> usize {
        self.loop_length
    }

    pub fn sound_class(&self) -> SoundClass {
        self.sound_class
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    #[inline]
    pub fn at(&self, position: usize) -> f64 {
        self.samples[position]
    }

    /// Band-limited noise around `center_hz`, one second long.
    ///
    /// Built as a sum of sinusoids at whole-hertz frequencies spread over the
    /// octave `[fc/√2, fc·√2]` with pseudo-random phases, so the loop closes
    /// without a discontinuity. Peak amplitude is normalized to 0.5.
    pub fn synthetic(sound_class: SoundClass, sample_rate: u32) -> Self {
        const PARTIALS: usize = 32;
        let center = synthetic_center_hz(sound_class);
        let lo = libm::ceil(center / core::f64::consts::SQRT_2);
        let hi = libm::floor(center * core::f64::consts::SQRT_2);
        let mut rng = Lcg64::new(0x5eed_0000 + sound_class.index() as u64);
        let partials: Vec<(f64, f64)> = (0..PARTIALS)
            .map(|k| {
                let f = libm::round(lo + (hi - lo) * k as f64 / (PARTIALS - 1) as f64);
                (f, rng.uniform(0.0, 2.0 * PI))
            })
            .collect();

        let n = sample_rate as usize;
        let mut samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / sample_rate as f64;
                partials
                    .iter()
                    .map(|&(f, phase)| libm::sin(2.0 * PI * f * t + phase))
                    .sum()
            })
            .collect();
        let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if peak > 0.0 {
            for s in &mut samples {
                *s *= 0.5 / peak;
            }
        }
        Self {
            samples,
            loop_length: n,
            sound_class,
            sample_rate,
        }
    }
}

pub fn synthetic_center_hz(sound_class: SoundClass) -> f64 {
    match sound_class {
        SoundClass::Birds => 2000.0,
        SoundClass::Trees => 500.0,
        SoundClass::Waves => 125.0,
    }
}

/// The three environmental loops, one per grid row.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundBank {
    loops: [SoundLoop; 3],
}

impl SoundBank {
    /// Accepts the loops in any order; each class must appear exactly once
    /// and all must share a sample rate.
    pub fn new(loops: impl IntoIterator<Item = SoundLoop>) -> Result<Self> {
        let mut slots: [Option<SoundLoop>; 3] = Default::default();
        for l in loops {
            let slot = &mut slots[l.sound_class.index()];
            if slot.is_some() {
                return Err(Error::InvalidInput(format!("duplicate {} loop", l.sound_class)));
            }
            *slot = Some(l);
        }
        let [Some(birds), Some(trees), Some(waves)] = slots else {
            let missing = SoundClass::ALL
                .into_iter()
                .zip(&slots)
                .find(|(_, s)| s.is_none())
                .map(|(c, _)| c)
                .unwrap_or(SoundClass::Birds);
            return Err(Error::InvalidInput(format!("missing {missing} loop")));
        };
        if trees.sample_rate != birds.sample_rate || waves.sample_rate != birds.sample_rate {
            return Err(Error::InvalidInput("sound loops have different sample rates".into()));
        }
        Ok(Self {
            loops: [birds, trees, waves],
        })
    }

    pub fn synthetic(sample_rate: u32) -> Self {
        Self {
            loops: SoundClass::ALL.map(|c| SoundLoop::synthetic(c, sample_rate)),
        }
    }

    /// Every class plays the same loop. Handy for tests.
    pub fn uniform(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let len = samples.len();
        let make = |c| SoundLoop::new(samples.clone(), len, c, sample_rate);
        Ok(Self {
            loops: [make(SoundClass::Birds)?, make(SoundClass::Trees)?, make(SoundClass::Waves)?],
        })
    }

    pub fn get(&self, class: SoundClass) -> &SoundLoop {
        &self.loops[class.index()]
    }

    pub fn sample_rate(&self) -> u32 {
        self.loops[0].sample_rate
    }
}
