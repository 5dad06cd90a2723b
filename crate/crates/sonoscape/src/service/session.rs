//! Transport-independent session state machine.
//!
//! A session owns one trial. It is `Ready` after `start`, becomes `Running`
//! with the first `input`, and ends `Finished` on reaching the end zone, on
//! `end`, on disconnect or at the time limit. The simulation clock only moves
//! in [`Session::tick`], so a session is a pure function of its seed and the
//! sequence of ticks and client messages it sees. That sequence is kept as a
//! [`Recording`] and can be replayed.

use base64::Engine as _;
use serde::{Deserialize, Serialize};
use sonoscape_core::sim::{
    tally_events, trial_metrics, AbortReason, CameraConfig, Collider, Control, Trial, TrialEvent, TrialLog,
};
use sonoscape_core::CellActivations;

use super::protocol::{ClientMessage, EventKind, PoseInfo, ServerMessage};
use crate::stream::{process_frame, PipelineConfig};
use crate::Result;

/// Simulation step per tick: 20 Hz.
pub const TICK_MS: u32 = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub camera: CameraConfig,
    pub pipeline: PipelineConfig,
    pub tick_ms: u32,
    pub time_limit_ms: u32,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let camera = CameraConfig::default();
        Self {
            pipeline: PipelineConfig::standard(camera.width, camera.height).expect("default camera fits the grid"),
            camera,
            tick_ms: TICK_MS,
            time_limit_ms: 30 * 60 * 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Ready,
    Running,
    Finished,
}

/// What happened to a session, in order, with the simulation clock at the
/// time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "what", rename_all = "snake_case")]
pub enum Recorded {
    Message { t_ms: u32, message: ClientMessage },
    Disconnect { t_ms: u32 },
    Violation { t_ms: u32, detail: String },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Recording {
    pub seed: u64,
    pub entries: Vec<Recorded>,
}

impl Recording {
    pub fn to_json_lines(&self) -> String {
        let mut out = serde_json::to_string(&serde_json::json!({ "seed": self.seed })).expect("json");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("json"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let bad = |e: serde_json::Error| crate::Error::Invalid(format!("bad recording: {e}"));
        let head: serde_json::Value = serde_json::from_str(lines.next().unwrap_or("")).map_err(bad)?;
        let seed = head
            .get("seed")
            .and_then(|s| s.as_u64())
            .ok_or_else(|| crate::Error::Invalid("recording lacks a seed".into()))?;
        let entries = lines.map(|l| serde_json::from_str(l).map_err(bad)).collect::<Result<_>>()?;
        Ok(Self { seed, entries })
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    id: u64,
    cfg: SessionConfig,
    trial: Trial,
    phase: Phase,
    spectator: bool,
    activations: CellActivations,
    last_client_seq: Option<u32>,
    next_seq: u32,
    recording: Recording,
    violated: bool,
}

impl Session {
    /// Creates the session and its `session_ready` reply.
    pub fn start(id: u64, seed: u64, spectator: bool, cfg: SessionConfig) -> (Self, ServerMessage) {
        let trial = Trial::new(seed);
        let mut s = Self {
            id,
            cfg,
            trial,
            phase: Phase::Ready,
            spectator,
            activations: CellActivations::NONE,
            last_client_seq: None,
            next_seq: 0,
            recording: Recording {
                seed,
                entries: vec![Recorded::Message {
                    t_ms: 0,
                    message: ClientMessage::Start { seed, spectator },
                }],
            },
            violated: false,
        };
        let ready = ServerMessage::SessionReady {
            seq: s.seq(),
            session: id,
            seed,
            layout_hash: format!("{:016x}", s.trial.scene().layout_hash()),
        };
        (s, ready)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_spectator(&self) -> bool {
        self.spectator
    }

    pub fn activations(&self) -> CellActivations {
        self.activations
    }

    pub fn trial(&self) -> &Trial {
        &self.trial
    }

    pub fn log(&self) -> &TrialLog {
        self.trial.log()
    }

    pub fn recording(&self) -> &Recording {
        &self.recording
    }

    fn seq(&mut self) -> u32 {
        let s = self.next_seq;
        self.next_seq += 1;
        s
    }

    fn error(&mut self, detail: impl Into<String>) -> Vec<ServerMessage> {
        vec![ServerMessage::Error {
            seq: self.seq(),
            detail: detail.into(),
        }]
    }

    /// Whether a protocol violation closed the session.
    pub fn violated(&self) -> bool {
        self.violated
    }

    /// The client broke the protocol (unparseable message, sequence number
    /// going backwards): reply with an error and close the trial.
    pub fn violation(&mut self, detail: impl Into<String>) -> Vec<ServerMessage> {
        let detail = detail.into();
        self.recording.entries.push(Recorded::Violation {
            t_ms: self.trial.clock_ms(),
            detail: detail.clone(),
        });
        self.close_for(detail)
    }

    fn close_for(&mut self, detail: String) -> Vec<ServerMessage> {
        let mut out = self.error(detail);
        self.violated = true;
        if self.phase != Phase::Finished {
            self.trial.abort(AbortReason::Disconnect);
            self.phase = Phase::Finished;
            self.activations = CellActivations::NONE;
            out.push(self.summary());
        }
        out
    }

    /// Applies one client message. Messages that do not fit the current
    /// phase get an `error` reply and change nothing; a sequence number
    /// that does not increase is a violation and closes the session.
    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        let t_ms = self.trial.clock_ms();
        if self.violated {
            return self.error("session is closed");
        }
        if let Some(seq) = msg.seq() {
            if self.last_client_seq.is_some_and(|last| seq <= last) {
                self.recording.entries.push(Recorded::Message { t_ms, message: msg });
                return self.close_for(format!("sequence number {seq} does not increase"));
            }
        }
        let out = match (&msg, self.phase) {
            (ClientMessage::Start { .. }, _) => return self.error("session already started"),
            (ClientMessage::Input { .. } | ClientMessage::Mark { .. }, Phase::Finished) => {
                return self.error("trial is over")
            }
            (ClientMessage::Mark { .. }, Phase::Ready) => return self.error("mark before the trial is running"),
            (
                ClientMessage::Input {
                    forward,
                    turn,
                    cam_yaw_deg,
                    cam_pitch_deg,
                    ..
                },
                _,
            ) => {
                if ![-1, 0, 1].contains(forward) || ![-1, 0, 1].contains(turn) {
                    return self.error("forward and turn must be -1, 0 or 1");
                }
                if !cam_yaw_deg.is_finite() || !cam_pitch_deg.is_finite() {
                    return self.error("camera angles must be finite");
                }
                self.phase = Phase::Running;
                self.trial.set_control(Control {
                    forward: *forward,
                    turn: *turn,
                    cam_yaw_deg: (*cam_yaw_deg as f64).clamp(-90.0, 90.0),
                    cam_pitch_deg: (*cam_pitch_deg as f64).clamp(-90.0, 90.0),
                });
                Vec::new()
            }
            (ClientMessage::Mark { .. }, Phase::Running) => {
                let event = self.trial.mark();
                event.map(|e| self.event_message(e)).into_iter().collect()
            }
            (ClientMessage::End, _) => {
                let mut out = Vec::new();
                if self.phase != Phase::Finished {
                    self.trial.abort(AbortReason::ClientEnd);
                    self.phase = Phase::Finished;
                    out.push(self.summary());
                }
                out
            }
        };
        if let Some(seq) = msg.seq() {
            self.last_client_seq = Some(seq);
        }
        self.recording.entries.push(Recorded::Message { t_ms, message: msg });
        out
    }

    /// The client went away.
    pub fn disconnect(&mut self) {
        self.recording.entries.push(Recorded::Disconnect {
            t_ms: self.trial.clock_ms(),
        });
        if self.phase != Phase::Finished {
            self.trial.abort(AbortReason::Disconnect);
            self.phase = Phase::Finished;
        }
    }

    /// Advances the simulation by one tick while running: moves the walker,
    /// renders and analyses its camera frame, and reports what changed.
    pub fn tick(&mut self) -> Result<Vec<ServerMessage>> {
        let mut out = Vec::new();
        if self.phase != Phase::Running {
            return Ok(out);
        }
        for e in self.trial.advance(self.cfg.tick_ms) {
            let m = self.event_message(e);
            out.push(m);
        }
        let t_ms = self.trial.clock_ms();
        if !self.trial.is_over() && t_ms >= self.cfg.time_limit_ms {
            self.trial.abort(AbortReason::TimeLimit);
        }

        let frame = self.trial.render(&self.cfg.camera);
        let (activations, _) = process_frame(&frame, &self.cfg.pipeline)?;
        if activations != self.activations {
            self.activations = activations;
            out.push(ServerMessage::Activations {
                seq: self.seq(),
                t_ms,
                cells: activations.flags(),
            });
        }
        if self.spectator {
            let p = *self.trial.pose();
            out.push(ServerMessage::Frame {
                seq: self.seq(),
                t_ms,
                width: frame.width(),
                height: frame.height(),
                pixels: base64::engine::general_purpose::STANDARD.encode(frame.as_raw()),
                pose: PoseInfo {
                    x: p.x,
                    y: p.y,
                    heading_deg: p.heading_deg,
                    cam_yaw_deg: p.cam_yaw_deg,
                    cam_pitch_deg: p.cam_pitch_deg,
                },
            });
        }
        if self.trial.is_over() {
            self.phase = Phase::Finished;
            self.activations = CellActivations::NONE;
            out.push(self.summary());
        }
        Ok(out)
    }

    fn event_message(&mut self, e: TrialEvent) -> ServerMessage {
        let t_ms = self.trial.clock_ms();
        let (kind, obstacle, target) = match e {
            TrialEvent::Seen { obstacle } => (EventKind::Seen, Some(obstacle), None),
            TrialEvent::Missed {
                target: Collider::Obstacle(i),
            } => (EventKind::Missed, Some(i), Some("obstacle".to_string())),
            TrialEvent::Missed { target: Collider::Wall } => (EventKind::Missed, None, Some("wall".to_string())),
            TrialEvent::FalseMark => (EventKind::FalseMark, None, None),
            TrialEvent::Finish => (EventKind::Finish, None, None),
        };
        ServerMessage::Event {
            seq: self.seq(),
            kind,
            t_ms,
            obstacle,
            target,
        }
    }

    fn summary(&mut self) -> ServerMessage {
        let log = self.trial.log();
        let (outcome, reason, m) = match trial_metrics(log) {
            Ok(m) => ("finished", None, m),
            Err(_) => {
                let reason = log.events.iter().rev().find_map(|e| match e.kind {
                    sonoscape_core::sim::LogKind::Abort { reason } => Some(reason.name().to_string()),
                    _ => None,
                });
                ("aborted", reason, tally_events(log))
            }
        };
        let seed = log.seed;
        ServerMessage::TrialSummary {
            seq: self.seq(),
            seed,
            outcome: outcome.to_string(),
            reason,
            completion_s: m.completion_s,
            objects_seen: m.objects_seen,
            objects_missed: m.objects_missed,
            false_marks: m.false_marks,
        }
    }
}

/// Re-runs a recorded session and returns its trial log.
///
/// Messages are applied once the clock reaches their timestamp; after the
/// last entry the simulation keeps ticking until the trial ends.
pub fn replay(recording: &Recording, cfg: &SessionConfig) -> Result<TrialLog> {
    let (mut s, _) = Session::start(0, recording.seed, false, cfg.clone());
    for entry in recording.entries.iter().skip(1) {
        let t = match entry {
            Recorded::Message { t_ms, .. } | Recorded::Disconnect { t_ms } | Recorded::Violation { t_ms, .. } => *t_ms,
        };
        while s.phase == Phase::Running && s.trial.clock_ms() < t {
            s.tick()?;
        }
        match entry {
            Recorded::Message { message, .. } => {
                s.handle(message.clone());
            }
            Recorded::Disconnect { .. } => s.disconnect(),
            Recorded::Violation { detail, .. } => {
                s.violation(detail.clone());
            }
        }
    }
    while s.phase == Phase::Running {
        s.tick()?;
    }
    Ok(s.trial.into_log())
}
