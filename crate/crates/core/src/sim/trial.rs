use alloc::vec::Vec;

use super::agent::{self, AgentInput, Collider, ContactState, Detection, StepEvent};
use super::camera::{render_camera, CameraConfig, Pose};
use super::log::{trial_metrics, AbortReason, LogKind, TrialLog, TrialMetrics};
use super::scene::{generate_layout, Scene, CORRIDOR_LENGTH_M, ZONE_DEPTH_M};
use crate::image::GrayImage;

/// Standing control of the walker; camera angles are absolute offsets from
/// the body heading.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Control {
    pub forward: i8,
    pub turn: i8,
    pub cam_yaw_deg: f64,
    pub cam_pitch_deg: f64,
}

/// Something the walker (or an assistant) would notice during a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialEvent {
    Seen { obstacle: usize },
    Missed { target: Collider },
    FalseMark,
    Finish,
}

/// One navigation run: scene, walker, clock and log.
#[derive(Debug, Clone)]
pub struct Trial {
    scene: Scene,
    pose: Pose,
    contact: ContactState,
    control: Control,
    logged_control: Option<Control>,
    clock_ms: u32,
    log: TrialLog,
}

impl Trial {
    pub fn new(seed: u64) -> Self {
        Self::with_scene(generate_layout(seed))
    }

    pub fn with_scene(scene: Scene) -> Self {
        let log = TrialLog::started(scene.seed);
        Self {
            scene,
            pose: Pose::START,
            contact: ContactState::default(),
            control: Control::default(),
            logged_control: None,
            clock_ms: 0,
            log,
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn clock_ms(&self) -> u32 {
        self.clock_ms
    }

    pub fn log(&self) -> &TrialLog {
        &self.log
    }

    pub fn into_log(self) -> TrialLog {
        self.log
    }

    pub fn control(&self) -> Control {
        self.control
    }

    pub fn is_over(&self) -> bool {
        self.log.is_closed()
    }

    pub fn reached_end_zone(&self) -> bool {
        self.pose.x >= CORRIDOR_LENGTH_M - ZONE_DEPTH_M
    }

    /// Replaces the standing control. Changes are logged as `input` records.
    pub fn set_control(&mut self, control: Control) {
        self.control = control;
        if self.logged_control != Some(control) && !self.is_over() {
            self.log.push(
                self.clock_ms,
                LogKind::Input {
                    forward: control.forward,
                    turn: control.turn,
                    cam_yaw_deg: control.cam_yaw_deg,
                    cam_pitch_deg: control.cam_pitch_deg,
                },
            );
            self.logged_control = Some(control);
        }
    }

    /// Runs the walker for `dt_ms` under the standing control.
    pub fn advance(&mut self, dt_ms: u32) -> Vec<TrialEvent> {
        let mut out = Vec::new();
        if self.is_over() || dt_ms == 0 {
            return out;
        }
        self.clock_ms = self.clock_ms.saturating_add(dt_ms);
        let input = AgentInput {
            forward: self.control.forward,
            turn: self.control.turn,
            cam_yaw_delta_deg: self.control.cam_yaw_deg - self.pose.cam_yaw_deg,
            cam_pitch_delta_deg: self.control.cam_pitch_deg - self.pose.cam_pitch_deg,
        };
        let (pose, events) = agent::step_agent(
            &mut self.scene,
            &mut self.contact,
            &self.pose,
            &input,
            dt_ms as f64 / 1000.0,
        );
        self.pose = pose;
        for StepEvent::CollisionIntervention(target) in events {
            self.log.push(self.clock_ms, LogKind::CollisionIntervention { target });
            out.push(TrialEvent::Missed { target });
        }
        if self.reached_end_zone() {
            self.log.push(self.clock_ms, LogKind::Finish);
            out.push(TrialEvent::Finish);
        }
        out
    }

    /// The walker reports perceiving an object.
    pub fn mark(&mut self) -> Option<TrialEvent> {
        if self.is_over() {
            return None;
        }
        let detection = agent::mark_detected(&mut self.scene, &self.pose);
        let (obstacle, event) = match detection {
            Detection::Seen(i) => (Some(i), TrialEvent::Seen { obstacle: i }),
            Detection::FalseMark => (None, TrialEvent::FalseMark),
        };
        self.log.push(self.clock_ms, LogKind::DetectionMark { obstacle });
        Some(event)
    }

    pub fn abort(&mut self, reason: AbortReason) {
        if !self.is_over() {
            self.log.push(self.clock_ms, LogKind::Abort { reason });
        }
    }

    pub fn metrics(&self) -> crate::Result<TrialMetrics> {
        trial_metrics(&self.log)
    }

    pub fn render(&self, cam: &CameraConfig) -> GrayImage {
        render_camera(&self.scene, &self.pose, cam)
    }
}
