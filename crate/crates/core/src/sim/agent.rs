use alloc::vec::Vec;

use super::camera::Pose;
use super::scene::{Scene, CORRIDOR_LENGTH_M, CORRIDOR_WIDTH_M};

pub const WALK_SPEED_M_S: f64 = 1.0;
pub const TURN_RATE_DEG_S: f64 = 60.0;
pub const AGENT_RADIUS_M: f64 = 0.3;
pub const DETECTION_RANGE_M: f64 = 2.0;
pub const DETECTION_HALF_ANGLE_DEG: f64 = 30.0;
pub const CAMERA_LIMIT_DEG: f64 = 90.0;

/// One control update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentInput {
    /// -1 back, 0 stand, 1 forward.
    pub forward: i8,
    /// -1 clockwise (right), 0 none, 1 counter-clockwise (left).
    pub turn: i8,
    pub cam_yaw_delta_deg: f64,
    pub cam_pitch_delta_deg: f64,
}

/// What a cancelled move ran into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Collider {
    Wall,
    Obstacle(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// An assistant had to stop the walker. Set only at the start of a
    /// contact episode with a wall or an unseen obstacle.
    CollisionIntervention(Collider),
}

/// First thing the agent disc would overlap at `(x, y)`. Obstacles are
/// checked before walls, in index order.
pub fn collision_at(scene: &Scene, x: f64, y: f64) -> Option<Collider> {
    let r = AGENT_RADIUS_M;
    if let Some(i) = scene.obstacles.iter().position(|o| o.distance_to(x, y) < r) {
        return Some(Collider::Obstacle(i));
    }
    if x < r || y < r || x > CORRIDOR_LENGTH_M - r || y > CORRIDOR_WIDTH_M - r {
        return Some(Collider::Wall);
    }
    None
}

/// Tracks collision episodes so that pushing into the same surface over
/// consecutive steps raises a single intervention.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContactState {
    current: Option<Collider>,
}

impl ContactState {
    pub fn current(&self) -> Option<Collider> {
        self.current
    }
}

/// Advances the agent by `dt` seconds.
///
/// Turning and camera motion always apply. The translation is cancelled when
/// the disc would overlap a wall or an obstacle; a wall or an obstacle that
/// has not been reported seen raises an intervention and marks the obstacle
/// missed. Seen obstacles block silently.
pub fn step_agent(
    scene: &mut Scene,
    contact: &mut ContactState,
    pose: &Pose,
    input: &AgentInput,
    dt: f64,
) -> (Pose, Vec<StepEvent>) {
    let mut next = *pose;
    let mut events = Vec::new();
    if !(dt > 0.0) {
        return (next, events);
    }
    next.heading_deg = wrap_degrees(pose.heading_deg + input.turn.signum() as f64 * TURN_RATE_DEG_S * dt);
    next.cam_yaw_deg = (pose.cam_yaw_deg + input.cam_yaw_delta_deg).clamp(-CAMERA_LIMIT_DEG, CAMERA_LIMIT_DEG);
    next.cam_pitch_deg =
        (pose.cam_pitch_deg + input.cam_pitch_delta_deg).clamp(-CAMERA_LIMIT_DEG, CAMERA_LIMIT_DEG);

    if input.forward == 0 {
        return (next, events);
    }
    let dist = input.forward.signum() as f64 * WALK_SPEED_M_S * dt;
    let h = next.heading_deg.to_radians();
    let x = pose.x + dist * libm::cos(h);
    let y = pose.y + dist * libm::sin(h);
    match collision_at(scene, x, y) {
        None => {
            next.x = x;
            next.y = y;
            contact.current = None;
        }
        Some(hit) => {
            let intervenes = match hit {
                Collider::Wall => true,
                Collider::Obstacle(i) => !scene.obstacles[i].seen,
            };
            if intervenes && contact.current != Some(hit) {
                if let Collider::Obstacle(i) = hit {
                    scene.obstacles[i].missed = true;
                }
                events.push(StepEvent::CollisionIntervention(hit));
            }
            contact.current = Some(hit);
        }
    }
    (next, events)
}

/// Result of the walker reporting an object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detection {
    Seen(usize),
    FalseMark,
}

/// Marks the nearest eligible obstacle whose center is within 2 m and
/// within ±30° of the camera axis. Obstacles already seen or already missed
/// are not eligible.
pub fn mark_detected(scene: &mut Scene, pose: &Pose) -> Detection {
    let view = pose.view_yaw_deg();
    let best = scene
        .obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| !o.seen && !o.missed)
        .filter_map(|(i, o)| {
            let dx = o.center_x - pose.x;
            let dy = o.center_y - pose.y;
            let d = libm::hypot(dx, dy);
            let bearing = libm::atan2(dy, dx).to_degrees();
            let off = libm::fabs(wrap_degrees(bearing - view));
            (d <= DETECTION_RANGE_M && off <= DETECTION_HALF_ANGLE_DEG).then_some((i, d))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((i, _)) => {
            scene.obstacles[i].seen = true;
            Detection::Seen(i)
        }
        None => Detection::FalseMark,
    }
}

/// Maps an angle to `(-180, 180]`.
pub fn wrap_degrees(a: f64) -> f64 {
    let mut r = libm::fmod(a, 360.0);
    if r <= -180.0 {
        r += 360.0;
    } else if r > 180.0 {
        r -= 360.0;
    }
    r
}
