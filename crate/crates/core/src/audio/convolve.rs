use alloc::vec::Vec;

use super::hrir::Hrir;

/// Two-channel sample buffer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StereoBuffer {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl StereoBuffer {
    pub fn silence(frames: usize) -> Self {
        Self {
            left: alloc::vec![0.0; frames],
            right: alloc::vec![0.0; frames],
        }
    }

    pub fn frames(&self) -> usize {
        self.left.len()
    }

    pub fn is_silent(&self) -> bool {
        self.left.iter().chain(&self.right).all(|&s| s == 0.0)
    }

    /// Interleaved 16-bit PCM, each sample clamped to [-1, 1] and scaled by
    /// 32767 with round-half-away-from-zero.
    pub fn to_i16_interleaved(&self) -> Vec<i16> {
        let mut out = Vec::with_capacity(self.frames() * 2);
        for (&l, &r) in self.left.iter().zip(&self.right) {
            out.push(sample_to_i16(l));
            out.push(sample_to_i16(r));
        }
        out
    }

    pub fn append(&mut self, other: &StereoBuffer) {
        self.left.extend_from_slice(&other.left);
        self.right.extend_from_slice(&other.right);
    }
}

#[inline]
pub fn sample_to_i16(x: f64) -> i16 {
    libm::round(x.clamp(-1.0, 1.0) * 32767.0) as i16
}

/// Non-zero taps of an impulse response, in ascending delay order.
///
/// Skipping zero taps leaves every partial sum unchanged, so the sparse and
/// dense convolutions agree exactly for finite inputs.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Taps {
    taps: Vec<(usize, f64)>,
    len: usize,
}

impl Taps {
    pub(crate) fn new(ir: &[f64]) -> Self {
        Self {
            taps: ir
                .iter()
                .enumerate()
                .filter(|(_, &h)| h != 0.0)
                .map(|(i, &h)| (i, h))
                .collect(),
            len: ir.len(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// `Σ_m h[m] · input[end - m]`, for `end ≥ len - 1`.
    #[inline]
    pub(crate) fn dot_backward(&self, input: &[f64], end: usize) -> f64 {
        let mut acc = 0.0;
        for &(m, h) in &self.taps {
            acc += h * input[end - m];
        }
        acc
    }
}

/// Full linear convolution of `mono` with each ear of `hrir`; both output
/// channels have `N + M - 1` samples (empty for empty input).
pub fn convolve_stereo(mono: &[f64], hrir: &Hrir) -> StereoBuffer {
    if mono.is_empty() {
        return StereoBuffer::default();
    }
    let taps_l = Taps::new(hrir.left());
    let taps_r = Taps::new(hrir.right());
    let m = hrir.len();
    // Zero-pad so every output index sees a full window.
    let mut padded = alloc::vec![0.0; m - 1];
    padded.extend_from_slice(mono);
    padded.resize(padded.len() + m - 1, 0.0);

    let out_len = mono.len() + m - 1;
    let mut out = StereoBuffer {
        left: Vec::with_capacity(out_len),
        right: Vec::with_capacity(out_len),
    };
    for n in 0..out_len {
        out.left.push(taps_l.dot_backward(&padded, n + m - 1));
        out.right.push(taps_r.dot_backward(&padded, n + m - 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity_filter_passes_signal() {
        let x = [0.25, -0.5, 1.0, 0.0, 0.75];
        let out = convolve_stereo(&x, &Hrir::identity(44_100));
        assert_eq!(out.left, x);
        assert_eq!(out.right, x);
    }

    #[test]
    fn zero_right_ear_is_silent() {
        let h = Hrir::new(vec![1.0], vec![0.0], 44_100).unwrap();
        let out = convolve_stereo(&[0.3, 0.1, -0.2], &h);
        assert!(out.right.iter().all(|&v| v == 0.0));
        assert_eq!(out.left, [0.3, 0.1, -0.2]);
    }

    #[test]
    fn output_length_is_n_plus_m_minus_one() {
        let h = Hrir::new(vec![1.0, 0.5, 0.25], vec![0.0, 0.0, 1.0], 44_100).unwrap();
        let out = convolve_stereo(&[1.0, 1.0], &h);
        assert_eq!(out.left, [1.0, 1.5, 0.75, 0.25]);
        assert_eq!(out.right, [0.0, 0.0, 1.0, 1.0]);
        assert!(convolve_stereo(&[], &h).left.is_empty());
    }

    #[test]
    fn pcm_conversion_clamps_and_rounds() {
        let buf = StereoBuffer {
            left: vec![0.0, 1.5, 0.5],
            right: vec![-2.0, -1.0, -0.5],
        };
        assert_eq!(buf.to_i16_interleaved(), [0, -32767, 32767, -32767, 16384, -16384]);
    }
}
