use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{self, CELLS};
use crate::{Error, Result};

/// Head radius used by the parametric fallback, metres.
pub const HEAD_RADIUS_M: f64 = 0.0875;
/// Speed of sound, metres per second.
pub const SPEED_OF_SOUND: f64 = 343.0;
/// Level difference of the fallback at ±90°, dB.
pub const MAX_ILD_DB: f64 = 6.0;

/// Stereo head-related impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct Hrir {
    left: Vec<f64>,
    right: Vec<f64>,
    sample_rate: u32,
}

impl Hrir {
    pub fn new(left: Vec<f64>, right: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if left.is_empty() || left.len() != right.len() {
            return Err(Error::Hrir(format!(
                "left/right lengths must be equal and non-zero (got {} and {})",
                left.len(),
                right.len()
            )));
        }
        if sample_rate == 0 {
            return Err(Error::Hrir("sample rate must be positive".into()));
        }
        Ok(Self { left, right, sample_rate })
    }

    /// Unit impulse in both ears.
    pub fn identity(sample_rate: u32) -> Self {
        Self {
            left: vec![1.0],
            right: vec![1.0],
            sample_rate,
        }
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
}

/// Interaural-delay-and-level approximation of an HRIR.
///
/// The ear facing the source gets a unit impulse; the far ear gets the same
/// impulse delayed by `round(rate × r/c × |sin az|)` samples and attenuated by
/// `10^(-(|az|/90)·6/20)`. Elevation carries no cue here (the sound class
/// already encodes the row). Azimuths outside ±90° are clamped.
pub fn fallback_hrir(azimuth_deg: f64, _elevation_deg: f64, sample_rate: u32) -> Hrir {
    let az = azimuth_deg.clamp(-90.0, 90.0);
    let itd_s = HEAD_RADIUS_M / SPEED_OF_SOUND * libm::fabs(libm::sin(az.to_radians()));
    let delay = libm::round(sample_rate as f64 * itd_s) as usize;
    let gain = libm::pow(10.0, -(libm::fabs(az) / 90.0) * MAX_ILD_DB / 20.0);

    let mut near = vec![0.0; delay + 1];
    near[0] = 1.0;
    let mut far = vec![0.0; delay + 1];
    far[delay] = gain;
    let (left, right) = if az < 0.0 { (near, far) } else { (far, near) };
    Hrir {
        left,
        right,
        sample_rate,
    }
}

/// One filter per grid cell, indexed row-major like the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HrirSet {
    filters: Vec<Hrir>,
    sample_rate: u32,
}

impl HrirSet {
    /// Builds a set from `(azimuth, elevation, filter)` entries, which must
    /// cover the 12 cell directions exactly once and share one sample rate.
    pub fn from_entries(entries: impl IntoIterator<Item = (i32, i32, Hrir)>) -> Result<Self> {
        let mut slots: [Option<Hrir>; CELLS] = Default::default();
        for (az, el, hrir) in entries {
            let index = (0..CELLS)
                .find(|&i| {
                    let d = grid::direction_of(i);
                    d.azimuth_deg == az && d.elevation_deg == el
                })
                .ok_or_else(|| Error::Hrir(format!("({az}, {el}) is not a grid direction")))?;
            if slots[index].is_some() {
                return Err(Error::Hrir(format!("duplicate filter for ({az}, {el})")));
            }
            slots[index] = Some(hrir);
        }

        let mut filters = Vec::with_capacity(CELLS);
        for (i, slot) in slots.into_iter().enumerate() {
            let d = grid::direction_of(i);
            let hrir = slot.ok_or_else(|| {
                Error::Hrir(format!(
                    "missing filter for azimuth {}, elevation {}",
                    d.azimuth_deg, d.elevation_deg
                ))
            })?;
            filters.push(hrir);
        }
        let sample_rate = filters[0].sample_rate;
        if let Some(odd) = filters.iter().position(|h| h.sample_rate != sample_rate) {
            let d = grid::direction_of(odd);
            return Err(Error::Hrir(format!(
                "sample rate mismatch: ({}, {}) is {} Hz, expected {} Hz",
                d.azimuth_deg, d.elevation_deg, filters[odd].sample_rate, sample_rate
            )));
        }
        Ok(Self { filters, sample_rate })
    }

    /// Parametric fallback filters for all 12 directions.
    pub fn fallback(sample_rate: u32) -> Self {
        let filters = (0..CELLS)
            .map(|i| {
                let d = grid::direction_of(i);
                fallback_hrir(d.azimuth_deg as f64, d.elevation_deg as f64, sample_rate)
            })
            .collect();
        Self { filters, sample_rate }
    }

    /// The same filter for every cell.
    pub fn uniform(hrir: Hrir) -> Self {
        let sample_rate = hrir.sample_rate;
        Self {
            filters: vec![hrir; CELLS],
            sample_rate,
        }
    }

    pub fn get(&self, cell: usize) -> &Hrir {
        &self.filters[cell]
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn max_len(&self) -> usize {
        self.filters.iter().map(Hrir::len).max().unwrap_or(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fallback_center_is_identity() {
        let h = fallback_hrir(0.0, 0.0, 44_100);
        assert_eq!(h.left(), &[1.0]);
        assert_eq!(h.right(), &[1.0]);
    }

    #[test]
    fn fallback_hard_left() {
        let h = fallback_hrir(-90.0, 45.0, 44_100);
        assert_eq!(h.len(), 12);
        assert_eq!(h.left()[0], 1.0);
        assert!(h.left()[1..].iter().all(|&v| v == 0.0));
        let pos = h.right().iter().position(|&v| v != 0.0).unwrap();
        assert_eq!(pos, 11);
        assert!((h.right()[11] - 0.501187).abs() < 1e-5);
    }

    #[test]
    fn fallback_right_side_delays_left_ear() {
        let h = fallback_hrir(30.0, 0.0, 44_100);
        assert_eq!(h.right()[0], 1.0);
        // round(44100 × 2.551e-4 × 0.5) = round(5.625) = 6
        assert_eq!(h.left().iter().position(|&v| v != 0.0), Some(6));
        assert!(h.left()[6] < 1.0);
    }

    #[test]
    fn set_reports_missing_direction() {
        let entries = (0..CELLS).filter(|&i| i != 11).map(|i| {
            let d = grid::direction_of(i);
            (d.azimuth_deg, d.elevation_deg, Hrir::identity(44_100))
        });
        let err = HrirSet::from_entries(entries).unwrap_err();
        assert!(alloc::format!("{err}").contains("azimuth 90, elevation -40"), "{err}");
    }

    #[test]
    fn set_rejects_mixed_rates() {
        let entries = (0..CELLS).map(|i| {
            let d = grid::direction_of(i);
            let rate = if i == 4 { 48_000 } else { 44_100 };
            (d.azimuth_deg, d.elevation_deg, Hrir::identity(rate))
        });
        let err = HrirSet::from_entries(entries).unwrap_err();
        assert!(alloc::format!("{err}").contains("sample rate"), "{err}");
    }

    #[test]
    fn hrir_rejects_unequal_channels() {
        assert!(Hrir::new(vec![1.0], vec![1.0, 0.0], 44_100).is_err());
        assert!(Hrir::new(vec![], vec![], 44_100).is_err());
    }
}
