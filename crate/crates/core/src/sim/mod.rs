//! Virtual corridor used for navigation trials: a 15 m × 6 m hallway with
//! eight obstacles, a ray-cast grayscale camera, a walker with collision
//! accounting, and the trial log.

mod agent;
mod camera;
mod log;
mod policy;
mod scene;
mod trial;

pub use agent::{
    collision_at, mark_detected, step_agent, wrap_degrees, AgentInput, Collider, ContactState, Detection,
    StepEvent, AGENT_RADIUS_M, DETECTION_HALF_ANGLE_DEG, DETECTION_RANGE_M, TURN_RATE_DEG_S, WALK_SPEED_M_S,
};
pub use camera::{render_camera, CameraConfig, Pose, CAMERA_HEIGHT_M};
pub use log::{tally_events, trial_metrics, AbortReason, LogEvent, LogKind, TrialLog, TrialMetrics};
pub use policy::{follow_the_silence, follow_the_silence_observed, PolicyConfig};
pub use scene::{
    generate_layout, Obstacle, ObstacleKind, Scene, CORRIDOR_LENGTH_M, CORRIDOR_WIDTH_M, FLOOR_INTENSITY,
    MIN_CENTER_SPACING_M, OBSTACLE_COUNT, OBSTACLE_INTENSITY, WALL_INTENSITY, ZONE_CLEARANCE_M, ZONE_DEPTH_M,
};
pub use trial::{Control, Trial, TrialEvent};
