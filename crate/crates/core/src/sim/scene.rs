use alloc::vec::Vec;
use core::fmt;

use crate::rng::Lcg64;

pub const CORRIDOR_LENGTH_M: f64 = 15.0;
pub const CORRIDOR_WIDTH_M: f64 = 6.0;
/// Depth of the start zone (`x < 1`) and the end zone (`x > 14`).
pub const ZONE_DEPTH_M: f64 = 1.0;
/// Minimum gap between an obstacle footprint and either zone.
pub const ZONE_CLEARANCE_M: f64 = 1.0;
pub const MIN_CENTER_SPACING_M: f64 = 1.5;
pub const OBSTACLE_COUNT: usize = 8;

pub const FLOOR_INTENSITY: u8 = 250;
pub const WALL_INTENSITY: u8 = 235;
pub const OBSTACLE_INTENSITY: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObstacleKind {
    Chair,
    GarbageBin,
    SmallBag,
    CardboardBox,
}

impl ObstacleKind {
    /// Two of each, in placement order.
    pub const LAYOUT: [ObstacleKind; OBSTACLE_COUNT] = [
        ObstacleKind::Chair,
        ObstacleKind::Chair,
        ObstacleKind::GarbageBin,
        ObstacleKind::GarbageBin,
        ObstacleKind::SmallBag,
        ObstacleKind::SmallBag,
        ObstacleKind::CardboardBox,
        ObstacleKind::CardboardBox,
    ];

    /// Footprint along x, along y, and height, metres.
    pub fn dimensions(self) -> (f64, f64, f64) {
        match self {
            ObstacleKind::Chair => (0.45, 0.45, 1.0),
            ObstacleKind::GarbageBin => (0.4, 0.4, 0.8),
            ObstacleKind::SmallBag => (0.35, 0.25, 0.3),
            ObstacleKind::CardboardBox => (0.5, 0.4, 0.5),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObstacleKind::Chair => "chair",
            ObstacleKind::GarbageBin => "garbage_bin",
            ObstacleKind::SmallBag => "small_bag",
            ObstacleKind::CardboardBox => "cardboard_box",
        }
    }
}

impl fmt::Display for ObstacleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Axis-aligned box standing on the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub kind: ObstacleKind,
    pub center_x: f64,
    pub center_y: f64,
    pub half_x: f64,
    pub half_y: f64,
    pub height: f64,
    pub intensity: u8,
    pub seen: bool,
    pub missed: bool,
}

impl Obstacle {
    pub fn new(kind: ObstacleKind, center_x: f64, center_y: f64) -> Self {
        let (sx, sy, h) = kind.dimensions();
        Self {
            kind,
            center_x,
            center_y,
            half_x: sx / 2.0,
            half_y: sy / 2.0,
            height: h,
            intensity: OBSTACLE_INTENSITY,
            seen: false,
            missed: false,
        }
    }

    pub fn min_x(&self) -> f64 {
        self.center_x - self.half_x
    }

    pub fn max_x(&self) -> f64 {
        self.center_x + self.half_x
    }

    pub fn min_y(&self) -> f64 {
        self.center_y - self.half_y
    }

    pub fn max_y(&self) -> f64 {
        self.center_y + self.half_y
    }

    /// Euclidean distance from a floor point to the footprint (0 inside).
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        let dx = (libm::fabs(x - self.center_x) - self.half_x).max(0.0);
        let dy = (libm::fabs(y - self.center_y) - self.half_y).max(0.0);
        libm::sqrt(dx * dx + dy * dy)
    }

    pub fn center_distance(&self, other: &Obstacle) -> f64 {
        libm::hypot(self.center_x - other.center_x, self.center_y - other.center_y)
    }
}

/// The corridor with its eight obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub seed: u64,
    pub obstacles: Vec<Obstacle>,
}

impl Scene {
    /// Corridor without obstacles.
    pub fn empty(seed: u64) -> Self {
        Self {
            seed,
            obstacles: Vec::new(),
        }
    }

    /// FNV-1a over the obstacle kinds and the bit patterns of their
    /// coordinates. Identifies a layout independently of trial state.
    pub fn layout_hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        for o in &self.obstacles {
            eat(o.kind.name().as_bytes());
            eat(&o.center_x.to_bits().to_le_bytes());
            eat(&o.center_y.to_bits().to_le_bytes());
        }
        h
    }

    /// Checks the layout constraints; returns a description of the first
    /// violation.
    pub fn check_layout(&self) -> Result<(), alloc::string::String> {
        if self.obstacles.len() != OBSTACLE_COUNT {
            return Err(alloc::format!("{} obstacles, expected 8", self.obstacles.len()));
        }
        for kind in ObstacleKind::LAYOUT {
            let n = self.obstacles.iter().filter(|o| o.kind == kind).count();
            if n != 2 {
                return Err(alloc::format!("{n} of {kind}, expected 2"));
            }
        }
        let x_lo = ZONE_DEPTH_M + ZONE_CLEARANCE_M;
        let x_hi = CORRIDOR_LENGTH_M - ZONE_DEPTH_M - ZONE_CLEARANCE_M;
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.min_x() < x_lo || o.max_x() > x_hi || o.min_y() < 0.0 || o.max_y() > CORRIDOR_WIDTH_M {
                return Err(alloc::format!("obstacle {i} outside the placement area"));
            }
            for (j, p) in self.obstacles.iter().enumerate().skip(i + 1) {
                if o.center_distance(p) < MIN_CENTER_SPACING_M {
                    return Err(alloc::format!("obstacles {i} and {j} closer than 1.5 m"));
                }
            }
        }
        Ok(())
    }
}

/// Deterministic obstacle layout for `seed`.
///
/// Obstacles are placed in [`ObstacleKind::LAYOUT`] order. Each center is
/// drawn uniformly (x first, then y) from the positions that keep the
/// footprint inside the corridor and 1 m clear of both end zones, and redrawn
/// until it is at least 1.5 m from every obstacle already placed. Draws come
/// from [`Lcg64`] seeded with `seed`.
pub fn generate_layout(seed: u64) -> Scene {
    let mut rng = Lcg64::new(seed);
    let x_lo = ZONE_DEPTH_M + ZONE_CLEARANCE_M;
    let x_hi = CORRIDOR_LENGTH_M - ZONE_DEPTH_M - ZONE_CLEARANCE_M;
    let mut obstacles: Vec<Obstacle> = Vec::with_capacity(OBSTACLE_COUNT);
    for kind in ObstacleKind::LAYOUT {
        let (sx, sy, _) = kind.dimensions();
        loop {
            let x = rng.uniform(x_lo + sx / 2.0, x_hi - sx / 2.0);
            let y = rng.uniform(sy / 2.0, CORRIDOR_WIDTH_M - sy / 2.0);
            let candidate = Obstacle::new(kind, x, y);
            if obstacles
                .iter()
                .all(|o| o.center_distance(&candidate) >= MIN_CENTER_SPACING_M)
            {
                obstacles.push(candidate);
                break;
            }
        }
    }
    Scene { seed, obstacles }
}
