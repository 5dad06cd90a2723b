use crate::image::GrayImage;

use super::scene::{
    Scene, CORRIDOR_LENGTH_M, CORRIDOR_WIDTH_M, FLOOR_INTENSITY, WALL_INTENSITY,
};

pub const CAMERA_HEIGHT_M: f64 = 1.2;

/// Agent position and orientation.
///
/// The corridor runs along +x; +y points to the walker's left when facing
/// down the corridor. Angles are degrees, counter-clockwise positive, so a
/// positive yaw looks left. Camera pitch is positive upwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
    pub cam_yaw_deg: f64,
    pub cam_pitch_deg: f64,
}

impl Pose {
    pub const START: Pose = Pose {
        x: 0.5,
        y: CORRIDOR_WIDTH_M / 2.0,
        heading_deg: 0.0,
        cam_yaw_deg: 0.0,
        cam_pitch_deg: 0.0,
    };

    pub fn new(x: f64, y: f64, heading_deg: f64) -> Self {
        Self {
            x,
            y,
            heading_deg,
            ..Self::START
        }
    }

    /// World yaw of the camera's optical axis.
    pub fn view_yaw_deg(&self) -> f64 {
        self.heading_deg + self.cam_yaw_deg
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraConfig {
    pub hfov_deg: f64,
    pub width: usize,
    pub height: usize,
    pub far_clip_m: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            hfov_deg: 60.0,
            width: 192,
            height: 144,
            far_clip_m: 20.0,
        }
    }
}

impl CameraConfig {
    /// Pinhole focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        (self.width as f64 / 2.0) / libm::tan((self.hfov_deg / 2.0).to_radians())
    }
}

#[derive(Clone, Copy)]
struct Vec3 {
    x: f64,
    y: f64,
    z: f64,
}

impl Vec3 {
    fn scaled_add(self, k: f64, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.x + k * o.x,
            y: self.y + k * o.y,
            z: self.z + k * o.z,
        }
    }
}

/// Forward, right and up unit vectors of the camera.
fn camera_basis(pose: &Pose) -> (Vec3, Vec3, Vec3) {
    let yaw = pose.view_yaw_deg().to_radians();
    let pitch = pose.cam_pitch_deg.to_radians();
    let (sy, cy) = (libm::sin(yaw), libm::cos(yaw));
    let (sp, cp) = (libm::sin(pitch), libm::cos(pitch));
    let forward = Vec3 { x: cp * cy, y: cp * sy, z: sp };
    let right = Vec3 { x: sy, y: -cy, z: 0.0 };
    let up = Vec3 { x: -sp * cy, y: -sp * sy, z: cp };
    (forward, right, up)
}

/// Obstacle footprint and height, as seen from a camera above it.
#[derive(Clone, Copy)]
struct Prism {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
    height: f64,
    intensity: u8,
}

impl Prism {
    /// Entry distance of a downward ray from `o`, in units of the ray
    /// direction whose reciprocal is `inv`. The camera is above every
    /// obstacle, so the ray can only enter through the top or the sides.
    #[inline]
    fn entry(&self, o: Vec3, inv: Vec3) -> Option<f64> {
        let (mut tx0, mut tx1) = ((self.min_x - o.x) * inv.x, (self.max_x - o.x) * inv.x);
        if tx0 > tx1 {
            core::mem::swap(&mut tx0, &mut tx1);
        }
        let (mut ty0, mut ty1) = ((self.min_y - o.y) * inv.y, (self.max_y - o.y) * inv.y);
        if ty0 > ty1 {
            core::mem::swap(&mut ty0, &mut ty1);
        }
        // Axis-parallel rays give ±inf or NaN above; NaN compares false and
        // the `max`/`min` below skip it, matching a ray inside the slab.
        let t0 = tx0.max(ty0).max((self.height - o.z) * inv.z);
        let t1 = tx1.min(ty1).min(-o.z * inv.z);
        (t0 <= t1 && t1 >= 0.0).then_some(t0.max(0.0))
    }
}

/// Ray-cast grayscale frame from the agent's camera.
///
/// Each pixel takes the flat intensity of the nearest surface its ray hits:
/// obstacles (5), walls (235) or floor (250). Rays with no hit inside the far
/// clip distance read as floor.
pub fn render_camera(scene: &Scene, pose: &Pose, cam: &CameraConfig) -> GrayImage {
    let (forward, right, up) = camera_basis(pose);
    let origin = Vec3 {
        x: pose.x,
        y: pose.y,
        z: CAMERA_HEIGHT_M,
    };
    let focal = cam.focal_px();
    let half_w = cam.width as f64 / 2.0;
    let half_h = cam.height as f64 / 2.0;
    // Every visible point lies in front of the image plane, so obstacles
    // whose corners are all behind it can be skipped.
    let prisms: alloc::vec::Vec<Prism> = scene
        .obstacles
        .iter()
        .filter(|o| {
            let reach = |lo: f64, hi: f64, f: f64| (lo * f).max(hi * f);
            reach(o.min_x() - origin.x, o.max_x() - origin.x, forward.x)
                + reach(o.min_y() - origin.y, o.max_y() - origin.y, forward.y)
                + reach(-origin.z, o.height - origin.z, forward.z)
                > 0.0
        })
        .map(|o| Prism {
            min_x: o.min_x(),
            max_x: o.max_x(),
            min_y: o.min_y(),
            max_y: o.max_y(),
            height: o.height,
            intensity: o.intensity,
        })
        .collect();
    debug_assert!(scene.obstacles.iter().all(|o| o.height < CAMERA_HEIGHT_M));
    let far_sq = cam.far_clip_m * cam.far_clip_m;

    GrayImage::from_fn(cam.width, cam.height, |px, py| {
        let u = px as f64 + 0.5 - half_w;
        let v = py as f64 + 0.5 - half_h;
        // Unnormalized; hit distances below are in multiples of |dir|.
        let dir = Vec3 {
            x: focal * forward.x,
            y: focal * forward.y,
            z: focal * forward.z,
        }
        .scaled_add(u, right)
        .scaled_add(-v, up);
        let inv = Vec3 {
            x: 1.0 / dir.x,
            y: 1.0 / dir.y,
            z: 1.0 / dir.z,
        };

        let mut best = f64::INFINITY;
        let mut shade = FLOOR_INTENSITY;
        if dir.z < 0.0 {
            best = -origin.z * inv.z;
        }
        let walls = [
            (dir.y < 0.0, -origin.y * inv.y),
            (dir.y > 0.0, (CORRIDOR_WIDTH_M - origin.y) * inv.y),
            (dir.x < 0.0, -origin.x * inv.x),
            (dir.x > 0.0, (CORRIDOR_LENGTH_M - origin.x) * inv.x),
        ];
        for (facing, t) in walls {
            if facing && t < best {
                best = t;
                shade = WALL_INTENSITY;
            }
        }
        if dir.z < 0.0 {
            for prism in &prisms {
                if let Some(t) = prism.entry(origin, inv) {
                    if t < best {
                        best = t;
                        shade = prism.intensity;
                    }
                }
            }
        }
        let len_sq = dir.x * dir.x + dir.y * dir.y + dir.z * dir.z;
        if best * best * len_sq > far_sq {
            FLOOR_INTENSITY
        } else {
            shade
        }
    })
    .expect("camera resolution is non-zero")
}
