//! Trial event log and its line-oriented text form.
//!
//! One record per line, `t_ms event_type payload`, with `t_ms` the trial
//! clock in milliseconds:
//!
//! ```text
//! 0 start seed=7
//! 50 input forward=1 turn=0 cam_yaw=0 cam_pitch=-25
//! 1200 mark obstacle=3
//! 1300 mark none
//! 2000 collision obstacle=2
//! 2150 collision wall
//! 157000 finish
//! ```
//!
//! A log opens with `start`, its timestamps never decrease, and it closes
//! with exactly one `finish` or `abort reason=<word>`. Lines starting with
//! `#` and blank lines are ignored.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use super::agent::Collider;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogKind {
    Start { seed: u64 },
    Input {
        forward: i8,
        turn: i8,
        cam_yaw_deg: f64,
        cam_pitch_deg: f64,
    },
    /// `None` is a false mark.
    DetectionMark { obstacle: Option<usize> },
    CollisionIntervention { target: Collider },
    Finish,
    Abort { reason: AbortReason },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortReason {
    Disconnect,
    ClientEnd,
    TimeLimit,
}

impl AbortReason {
    pub fn name(self) -> &'static str {
        match self {
            AbortReason::Disconnect => "disconnect",
            AbortReason::ClientEnd => "client_end",
            AbortReason::TimeLimit => "time_limit",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [AbortReason::Disconnect, AbortReason::ClientEnd, AbortReason::TimeLimit]
            .into_iter()
            .find(|r| r.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEvent {
    pub t_ms: u32,
    pub kind: LogKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialLog {
    pub seed: u64,
    pub events: Vec<LogEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub completion_s: f64,
    pub objects_seen: usize,
    pub objects_missed: usize,
    pub false_marks: usize,
}

impl TrialLog {
    /// A log holding only its `start` record.
    pub fn started(seed: u64) -> Self {
        Self {
            seed,
            events: alloc::vec![LogEvent {
                t_ms: 0,
                kind: LogKind::Start { seed },
            }],
        }
    }

    pub fn push(&mut self, t_ms: u32, kind: LogKind) {
        self.events.push(LogEvent { t_ms, kind });
    }

    pub fn start_ms(&self) -> Option<u32> {
        self.events.iter().find_map(|e| match e.kind {
            LogKind::Start { .. } => Some(e.t_ms),
            _ => None,
        })
    }

    pub fn finish_ms(&self) -> Option<u32> {
        self.events.iter().find_map(|e| match e.kind {
            LogKind::Finish => Some(e.t_ms),
            _ => None,
        })
    }

    pub fn is_closed(&self) -> bool {
        matches!(
            self.events.last().map(|e| e.kind),
            Some(LogKind::Finish | LogKind::Abort { .. })
        )
    }

    /// Structural checks: opens with `start`, time-ordered, exactly one
    /// terminal record and it comes last.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        match self.events.first().map(|e| e.kind) {
            Some(LogKind::Start { seed }) if seed == self.seed => {}
            _ => return bad("log must open with a start record for its seed".into()),
        }
        if self.events.windows(2).any(|w| w[1].t_ms < w[0].t_ms) {
            return bad("timestamps decrease".into());
        }
        let terminals = self
            .events
            .iter()
            .filter(|e| matches!(e.kind, LogKind::Finish | LogKind::Abort { .. }))
            .count();
        if terminals != 1 || !self.is_closed() {
            return bad(format!("expected one closing finish/abort record, found {terminals}"));
        }
        if self.events[1..].iter().any(|e| matches!(e.kind, LogKind::Start { .. })) {
            return bad("more than one start record".into());
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = write!(out, "{} ", e.t_ms);
            let _ = match e.kind {
                LogKind::Start { seed } => write!(out, "start seed={seed}"),
                LogKind::Input {
                    forward,
                    turn,
                    cam_yaw_deg,
                    cam_pitch_deg,
                } => write!(
                    out,
                    "input forward={forward} turn={turn} cam_yaw={cam_yaw_deg} cam_pitch={cam_pitch_deg}"
                ),
                LogKind::DetectionMark { obstacle: Some(i) } => write!(out, "mark obstacle={i}"),
                LogKind::DetectionMark { obstacle: None } => write!(out, "mark none"),
                LogKind::CollisionIntervention {
                    target: Collider::Obstacle(i),
                } => write!(out, "collision obstacle={i}"),
                LogKind::CollisionIntervention { target: Collider::Wall } => write!(out, "collision wall"),
                LogKind::Finish => write!(out, "finish"),
                LogKind::Abort { reason } => write!(out, "abort reason={}", reason.name()),
            };
            out.push('\n');
        }
        out
    }

    /// Parses and validates the text form.
    pub fn parse(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |what: &str| Error::InvalidInput(format!("line {}: {what}: {line:?}", lineno + 1));
            let mut parts = line.split_whitespace();
            let t_ms: u32 = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err("bad timestamp"))?;
            let kind_name = parts.next().ok_or_else(|| err("missing event type"))?;
            let fields: Vec<&str> = parts.collect();
            let field = |key: &str| -> Result<&str> {
                fields
                    .iter()
                    .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                    .ok_or_else(|| err(&format!("missing {key}")))
            };
            let num = |key: &str| -> Result<f64> {
                field(key)?.parse::<f64>().map_err(|_| err(&format!("bad {key}")))
            };
            let int = |key: &str| -> Result<i64> {
                field(key)?.parse::<i64>().map_err(|_| err(&format!("bad {key}")))
            };
            let kind = match kind_name {
                "start" => LogKind::Start {
                    seed: field("seed")?.parse().map_err(|_| err("bad seed"))?,
                },
                "input" => LogKind::Input {
                    forward: int("forward")?.clamp(-1, 1) as i8,
                    turn: int("turn")?.clamp(-1, 1) as i8,
                    cam_yaw_deg: num("cam_yaw")?,
                    cam_pitch_deg: num("cam_pitch")?,
                },
                "mark" if fields == ["none"] => LogKind::DetectionMark { obstacle: None },
                "mark" => LogKind::DetectionMark {
                    obstacle: Some(int("obstacle")? as usize),
                },
                "collision" if fields == ["wall"] => LogKind::CollisionIntervention {
                    target: Collider::Wall,
                },
                "collision" => LogKind::CollisionIntervention {
                    target: Collider::Obstacle(int("obstacle")? as usize),
                },
                "finish" => LogKind::Finish,
                "abort" => LogKind::Abort {
                    reason: AbortReason::parse(field("reason")?).ok_or_else(|| err("unknown abort reason"))?,
                },
                other => return Err(err(&format!("unknown event {other}"))),
            };
            events.push(LogEvent { t_ms, kind });
        }
        let seed = match events.first().map(|e| e.kind) {
            Some(LogKind::Start { seed }) => seed,
            _ => return Err(Error::InvalidInput("log does not open with a start record".to_string())),
        };
        let log = TrialLog { seed, events };
        log.validate()?;
        Ok(log)
    }
}

/// Completion time and object tallies of a finished trial. Interventions on
/// the same obstacle count once; wall interventions are not objects.
pub fn trial_metrics(log: &TrialLog) -> Result<TrialMetrics> {
    let finish = log.finish_ms().ok_or(Error::IncompleteTrial)?;
    let start = log.start_ms().unwrap_or(0);
    Ok(TrialMetrics {
        completion_s: finish.saturating_sub(start) as f64 / 1000.0,
        ..tally_events(log)
    })
}

/// Object tallies of any log, finished or not, with the time of its last
/// record as the completion time.
pub fn tally_events(log: &TrialLog) -> TrialMetrics {
    let mut seen = BTreeSet::new();
    let mut missed = BTreeSet::new();
    let mut false_marks = 0;
    for e in &log.events {
        match e.kind {
            LogKind::DetectionMark { obstacle: Some(i) } => {
                seen.insert(i);
            }
            LogKind::DetectionMark { obstacle: None } => false_marks += 1,
            LogKind::CollisionIntervention {
                target: Collider::Obstacle(i),
            } => {
                missed.insert(i);
            }
            _ => {}
        }
    }
    let start = log.start_ms().unwrap_or(0);
    let last = log.events.last().map_or(start, |e| e.t_ms);
    TrialMetrics {
        completion_s: last.saturating_sub(start) as f64 / 1000.0,
        objects_seen: seen.len(),
        objects_missed: missed.len(),
        false_marks,
    }
}
