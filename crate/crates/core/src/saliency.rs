//! Neuron-lattice saliency filter.
//!
//! Every pixel is a neuron connected to its 8 neighbours. The synaptic weight
//! between two neurons is `f(|p_i - p_j|) = 1 - |p_i - p_j| / 255`, so similar
//! pixels couple strongly and contrasting pixels barely couple at all. One
//! iteration updates each state to
//!
//! ```text
//! ŝ_i = (s_i + Σ_j w_ij · s_j) / 9
//! ```
//!
//! and forces it to zero when `ŝ_i <= thresh`. Neurons that end at zero sit in
//! high-contrast or textured areas; their pixels form the salient mask.
//!
//! Weights are kept as the exact 8-bit table `entry[d] = 255 - d`. States are
//! fixed-point with [`STATE_ONE`] representing 1.0, and the threshold test is
//! carried out on the exact integer numerator, so results are bit-identical on
//! every platform. With one iteration and all states starting at 1 the update
//! collapses to an integer rule on the weight sum, see [`salient_mask`].

use alloc::vec;
use alloc::vec::Vec;

use crate::image::GrayImage;
use crate::{Error, Result};

/// Fixed-point scale of neuron states: `STATE_ONE` is a state of exactly 1.
pub const STATE_ONE: u32 = 1 << 16;

/// Largest pixel level; the weight function divides by it.
pub const MAX_LEVEL: u32 = 255;

/// `9 × 255`: the update divisor expressed in weight-table units.
const NORMALIZER: u64 = 9 * MAX_LEVEL as u64;

/// The 8 neighbour offsets, row by row.
const NEIGHBOURS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Quantized synaptic weights indexed by absolute pixel difference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTable {
    entries: [u8; 256],
}

impl WeightTable {
    /// `entry[d] = 255 - d`, the exact 8-bit quantization of `1 - d/255`.
    pub fn build() -> Self {
        let mut entries = [0u8; 256];
        for (d, e) in entries.iter_mut().enumerate() {
            *e = (MAX_LEVEL as usize - d) as u8;
        }
        Self { entries }
    }

    #[inline]
    pub fn entry(&self, diff: u8) -> u8 {
        self.entries[diff as usize]
    }

    /// Weight between two pixel values. Symmetric by construction.
    #[inline]
    pub fn weight(&self, a: u8, b: u8) -> u8 {
        self.entries[a.abs_diff(b) as usize]
    }

    pub fn entries(&self) -> &[u8; 256] {
        &self.entries
    }
}

impl Default for WeightTable {
    fn default() -> Self {
        Self::build()
    }
}

/// Equivalent to [`WeightTable::build`].
pub fn build_weight_table() -> WeightTable {
    WeightTable::build()
}

/// How neighbours that fall outside the image are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderPolicy {
    /// Coordinates clamp to the nearest edge pixel (and that pixel's neuron).
    #[default]
    Replicate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Estimates at or below this value are forced to zero. Must lie in (0, 1).
    pub thresh: f64,
    pub iterations: u32,
    pub border_policy: BorderPolicy,
}

impl FilterConfig {
    /// Threshold and iteration count of the original handheld device.
    pub const HANDHELD_THRESH: f64 = 0.112;
    /// Threshold at which straight high-contrast edges become salient.
    pub const OPERATIONAL_THRESH: f64 = 0.7;

    pub fn new(thresh: f64, iterations: u32) -> Self {
        Self {
            thresh,
            iterations,
            border_policy: BorderPolicy::Replicate,
        }
    }

    /// `thresh = 0.112`, one iteration.
    pub fn handheld() -> Self {
        Self::new(Self::HANDHELD_THRESH, 1)
    }

    /// `thresh = 0.7`, one iteration. Default for the simulator and CLI.
    pub fn operational() -> Self {
        Self::new(Self::OPERATIONAL_THRESH, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.thresh > 0.0 && self.thresh < 1.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "thresh must lie in (0, 1), got {}",
                self.thresh
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iterations must be at least 1".into()));
        }
        Ok(())
    }

    /// Largest weight sum `255 + Σ entry` that still counts as salient after
    /// a single iteration from all-ones states: `floor(thresh × 9 × 255)`.
    pub fn integer_threshold(&self) -> u64 {
        libm::floor(self.thresh * NORMALIZER as f64) as u64
    }

    /// Threshold on the fixed-point numerator `255·s_i + Σ entry·s_j`.
    fn numerator_threshold(&self) -> u64 {
        // Scaling by a power of two is exact, so this agrees with
        // `integer_threshold` whenever every state is `STATE_ONE`.
        libm::floor(self.thresh * NORMALIZER as f64 * STATE_ONE as f64) as u64
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self::operational()
    }
}

/// Per-neuron states in fixed point (`STATE_ONE` = 1.0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuronStates {
    width: usize,
    height: usize,
    states: Vec<u32>,
}

impl NeuronStates {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Raw fixed-point state.
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.states[y * self.width + x]
    }

    pub fn get_f64(&self, x: usize, y: usize) -> f64 {
        self.get(x, y) as f64 / STATE_ONE as f64
    }

    pub fn raw(&self) -> &[u32] {
        &self.states
    }

    /// Salient pixels are exactly the neurons at state 0.
    pub fn to_mask(&self) -> SalientMask {
        SalientMask {
            width: self.width,
            height: self.height,
            flags: self.states.iter().map(|&s| s == 0).collect(),
        }
    }
}

/// Per-pixel salience flags (`true` = salient).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SalientMask {
    width: usize,
    height: usize,
    flags: Vec<bool>,
}

impl SalientMask {
    pub fn new(width: usize, height: usize, flags: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || flags.len() != width * height {
            return Err(Error::InvalidInput("mask flags do not match dimensions".into()));
        }
        Ok(Self { width, height, flags })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut flags = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                flags.push(f(x, y));
            }
        }
        Self::new(width, height, flags)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.flags[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.flags[y * self.width + x] = value;
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Image with a one-pixel replicated border, so every pixel has 8 neighbours
/// without bounds checks.
struct Padded<T> {
    stride: usize,
    data: Vec<T>,
}

impl<T: Copy> Padded<T> {
    fn replicate(width: usize, height: usize, get: impl Fn(usize, usize) -> T) -> Self {
        let stride = width + 2;
        let mut data = Vec::with_capacity(stride * (height + 2));
        for py in 0..height + 2 {
            let y = py.saturating_sub(1).min(height - 1);
            for px in 0..width + 2 {
                let x = px.saturating_sub(1).min(width - 1);
                data.push(get(x, y));
            }
        }
        Self { stride, data }
    }

    #[inline]
    fn at(&self, x: usize, y: usize, dx: isize, dy: isize) -> T {
        let px = (x as isize + 1 + dx) as usize;
        let py = (y as isize + 1 + dy) as usize;
        self.data[py * self.stride + px]
    }
}

/// Runs the full iterative filter and returns the final neuron states.
///
/// The update is synchronous: iteration `n` reads only states from `n - 1`.
pub fn filter_states(img: &GrayImage, cfg: &FilterConfig) -> Result<NeuronStates> {
    cfg.validate()?;
    let (width, height) = img.dimensions();
    let table = WeightTable::build();
    let pixels = Padded::replicate(width, height, |x, y| img.get(x, y));
    let threshold = cfg.numerator_threshold();

    let mut states = vec![STATE_ONE; width * height];
    for _ in 0..cfg.iterations {
        let prev = Padded::replicate(width, height, |x, y| states[y * width + x]);
        for y in 0..height {
            for x in 0..width {
                let p = pixels.at(x, y, 0, 0);
                let mut num = MAX_LEVEL as u64 * prev.at(x, y, 0, 0) as u64;
                for &(dx, dy) in &NEIGHBOURS {
                    let w = table.weight(p, pixels.at(x, y, dx, dy)) as u64;
                    num += w * prev.at(x, y, dx, dy) as u64;
                }
                states[y * width + x] = if num <= threshold {
                    0
                } else {
                    (num / NORMALIZER) as u32
                };
            }
        }
    }
    Ok(NeuronStates {
        width,
        height,
        states,
    })
}

/// Salient pixels of `img`.
///
/// For a single iteration the states never need materializing: pixel `i` is
/// salient iff `255 + Σ_j entry[|p_i - p_j|] <= floor(thresh × 9 × 255)`.
/// For `thresh = 0.112` that means the eight neighbour weights sum to at most
/// 2. More iterations fall back to [`filter_states`].
pub fn salient_mask(img: &GrayImage, cfg: &FilterConfig) -> Result<SalientMask> {
    cfg.validate()?;
    if cfg.iterations > 1 {
        return Ok(filter_states(img, cfg)?.to_mask());
    }
    let (width, height) = img.dimensions();
    let table = WeightTable::build();
    let pixels = Padded::replicate(width, height, |x, y| img.get(x, y));
    let Some(limit) = cfg.integer_threshold().checked_sub(MAX_LEVEL as u64) else {
        return SalientMask::empty(width, height);
    };

    let mut flags = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let p = pixels.at(x, y, 0, 0);
            let sum: u64 = NEIGHBOURS
                .iter()
                .map(|&(dx, dy)| table.weight(p, pixels.at(x, y, dx, dy)) as u64)
                .sum();
            flags.push(sum <= limit);
        }
    }
    SalientMask::new(width, height, flags)
}
