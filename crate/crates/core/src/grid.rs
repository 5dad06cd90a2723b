//! Area-of-interest grid: a 3×4 partition of the frame whose cells each own
//! one spatialized sound.

use alloc::vec::Vec;
use core::fmt;

use crate::saliency::SalientMask;
use crate::{Error, Result};

pub const ROWS: usize = 3;
pub const COLS: usize = 4;
pub const CELLS: usize = ROWS * COLS;

/// Default activation threshold as a fraction of cell area.
pub const DEFAULT_ACTIVATION_RATIO: f64 = 0.01;

/// Cell geometry over an image.
///
/// Cell `(r, c)` starts at `(c·⌊W/cols⌋, r·⌊H/rows⌋)`; the last row and
/// column absorb any remainder pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub image_width: usize,
    pub image_height: usize,
    pub activation_ratio: f64,
}

/// Half-open pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl CellRect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }
}

impl GridSpec {
    pub fn new(
        image_width: usize,
        image_height: usize,
        rows: usize,
        cols: usize,
        activation_ratio: f64,
    ) -> Result<Self> {
        if image_width == 0 || image_height == 0 {
            return Err(Error::InvalidInput("grid image dimensions must be positive".into()));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("grid needs at least one row and column".into()));
        }
        if rows > image_height || cols > image_width {
            return Err(Error::InvalidInput("grid has more cells than pixels along an axis".into()));
        }
        if !(activation_ratio > 0.0 && activation_ratio <= 1.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "activation ratio must lie in (0, 1], got {activation_ratio}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            image_width,
            image_height,
            activation_ratio,
        })
    }

    /// The 3×4 layout with the default 1% activation ratio.
    pub fn standard(image_width: usize, image_height: usize) -> Result<Self> {
        Self::new(image_width, image_height, ROWS, COLS, DEFAULT_ACTIVATION_RATIO)
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn cell_rect(&self, row: usize, col: usize) -> CellRect {
        let cw = self.image_width / self.cols;
        let ch = self.image_height / self.rows;
        let x0 = col * cw;
        let y0 = row * ch;
        let x1 = if col + 1 == self.cols { self.image_width } else { x0 + cw };
        let y1 = if row + 1 == self.rows { self.image_height } else { y0 + ch };
        CellRect { x0, y0, x1, y1 }
    }

    pub fn cell_area(&self, row: usize, col: usize) -> usize {
        self.cell_rect(row, col).area()
    }

    /// Salient-pixel count at which a cell turns on: `ceil(ratio × area)`.
    pub fn activation_threshold(&self, row: usize, col: usize) -> usize {
        let area = self.cell_area(row, col) as f64;
        libm::ceil(self.activation_ratio * area) as usize
    }

    /// Cell containing pixel `(x, y)`.
    pub fn cell_of(&self, x: usize, y: usize) -> (usize, usize) {
        let cw = self.image_width / self.cols;
        let ch = self.image_height / self.rows;
        ((y / ch).min(self.rows - 1), (x / cw).min(self.cols - 1))
    }
}

/// Equivalent to [`GridSpec::new`].
pub fn grid_spec(
    image_width: usize,
    image_height: usize,
    rows: usize,
    cols: usize,
    activation_ratio: f64,
) -> Result<GridSpec> {
    GridSpec::new(image_width, image_height, rows, cols, activation_ratio)
}

/// Salient-pixel totals per cell, row-major from the top-left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellCounts {
    pub rows: usize,
    pub cols: usize,
    pub counts: Vec<usize>,
}

impl CellCounts {
    pub fn get(&self, row: usize, col: usize) -> usize {
        self.counts[row * self.cols + col]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn cell_counts(mask: &SalientMask, grid: &GridSpec) -> Result<CellCounts> {
    let expected = (grid.image_width, grid.image_height);
    if mask.dimensions() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: mask.dimensions(),
        });
    }
    let mut counts = alloc::vec![0usize; grid.cell_count()];
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            let rect = grid.cell_rect(row, col);
            let mut n = 0;
            for y in rect.y0..rect.y1 {
                let line = &mask.flags()[y * mask.width()..(y + 1) * mask.width()];
                n += line[rect.x0..rect.x1].iter().filter(|&&f| f).count();
            }
            counts[row * grid.cols + col] = n;
        }
    }
    Ok(CellCounts {
        rows: grid.rows,
        cols: grid.cols,
        counts,
    })
}

/// On/off state of the 12 grid cells, packed as a bitmask (bit `r·4 + c`).
///
/// The packed form is what gets handed between the frame and audio threads.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CellActivations(u16);

impl CellActivations {
    pub const NONE: Self = Self(0);
    const MASK: u16 = (1 << CELLS) - 1;

    pub fn from_bits(bits: u16) -> Self {
        Self(bits & Self::MASK)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn from_flags(flags: &[bool; CELLS]) -> Self {
        let mut bits = 0;
        for (i, &f) in flags.iter().enumerate() {
            if f {
                bits |= 1 << i;
            }
        }
        Self(bits)
    }

    pub fn flags(self) -> [bool; CELLS] {
        core::array::from_fn(|i| self.is_active(i))
    }

    #[inline]
    pub fn is_active(self, index: usize) -> bool {
        index < CELLS && self.0 & (1 << index) != 0
    }

    pub fn is_cell_active(self, row: usize, col: usize) -> bool {
        row < ROWS && col < COLS && self.is_active(row * COLS + col)
    }

    pub fn with(self, index: usize, active: bool) -> Self {
        assert!(index < CELLS, "cell index {index} out of range");
        if active {
            Self(self.0 | (1 << index))
        } else {
            Self(self.0 & !(1 << index))
        }
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter_active(self) -> impl Iterator<Item = usize> {
        (0..CELLS).filter(move |&i| self.is_active(i))
    }
}

impl fmt::Debug for CellActivations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CellActivations[")?;
        for row in 0..ROWS {
            if row > 0 {
                f.write_str("|")?;
            }
            for col in 0..COLS {
                f.write_str(if self.is_cell_active(row, col) { "#" } else { "." })?;
            }
        }
        f.write_str("]")
    }
}

/// Flags every cell whose count reaches its activation threshold.
///
/// Only the standard 3×4 layout can drive the 12 voices, so other grid
/// shapes are rejected here.
pub fn active_cells(counts: &CellCounts, grid: &GridSpec) -> Result<CellActivations> {
    if grid.rows != ROWS || grid.cols != COLS || counts.rows != ROWS || counts.cols != COLS {
        return Err(Error::InvalidInput("activations require the 3x4 grid".into()));
    }
    let mut bits = 0u16;
    for row in 0..ROWS {
        for col in 0..COLS {
            if counts.get(row, col) >= grid.activation_threshold(row, col) {
                bits |= 1 << (row * COLS + col);
            }
        }
    }
    Ok(CellActivations(bits))
}

/// Environmental sound assigned to a grid row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SoundClass {
    Birds,
    Trees,
    Waves,
}

impl SoundClass {
    pub const ALL: [SoundClass; 3] = [SoundClass::Birds, SoundClass::Trees, SoundClass::Waves];

    pub fn name(self) -> &'static str {
        match self {
            SoundClass::Birds => "birds",
            SoundClass::Trees => "trees",
            SoundClass::Waves => "waves",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SoundClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Azimuth per column, image left to right. Negative is the listener's left.
pub const AZIMUTHS_DEG: [i32; COLS] = [-90, -30, 30, 90];
/// Elevation per row, image top to bottom.
pub const ELEVATIONS_DEG: [i32; ROWS] = [45, 0, -40];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellDirection {
    pub azimuth_deg: i32,
    pub elevation_deg: i32,
    pub sound_class: SoundClass,
}

pub fn cell_direction(row: usize, col: usize) -> Result<CellDirection> {
    if row >= ROWS || col >= COLS {
        return Err(Error::CellOutOfRange { row, col });
    }
    Ok(CellDirection {
        azimuth_deg: AZIMUTHS_DEG[col],
        elevation_deg: ELEVATIONS_DEG[row],
        sound_class: SoundClass::ALL[row],
    })
}

/// Direction of cell `index` (row-major).
pub fn direction_of(index: usize) -> CellDirection {
    cell_direction(index / COLS, index % COLS).expect("cell index in range")
}
