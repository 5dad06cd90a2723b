//! JSON text messages and the binary audio chunk layout.

use serde::{Deserialize, Serialize};
use sonoscape_core::audio::StereoBuffer;

pub const PCM_MAGIC: &[u8; 4] = b"PCM0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Start {
        seed: u64,
        #[serde(default)]
        spectator: bool,
    },
    Input {
        seq: u32,
        forward: i8,
        turn: i8,
        cam_yaw_deg: f32,
        cam_pitch_deg: f32,
    },
    Mark {
        seq: u32,
    },
    End,
}

impl ClientMessage {
    pub fn seq(&self) -> Option<u32> {
        match self {
            ClientMessage::Input { seq, .. } | ClientMessage::Mark { seq } => Some(*seq),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Seen,
    Missed,
    FalseMark,
    Finish,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseInfo {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
    pub cam_yaw_deg: f64,
    pub cam_pitch_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    SessionReady {
        seq: u32,
        session: u64,
        seed: u64,
        layout_hash: String,
    },
    Activations {
        seq: u32,
        t_ms: u32,
        cells: [bool; 12],
    },
    Event {
        seq: u32,
        kind: EventKind,
        t_ms: u32,
        /// Obstacle index for `seen`, and for `missed` when an obstacle was hit.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        obstacle: Option<usize>,
        /// `"wall"` or `"obstacle"` for `missed`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
    },
    TrialSummary {
        seq: u32,
        seed: u64,
        /// `"finished"` or `"aborted"`.
        outcome: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
        completion_s: f64,
        objects_seen: usize,
        objects_missed: usize,
        false_marks: usize,
    },
    /// Spectator preview: the walker's camera frame, base64 8-bit gray.
    Frame {
        seq: u32,
        t_ms: u32,
        width: usize,
        height: usize,
        pixels: String,
        pose: PoseInfo,
    },
    Error {
        seq: u32,
        detail: String,
    },
}

impl ServerMessage {
    pub fn seq(&self) -> u32 {
        match self {
            ServerMessage::SessionReady { seq, .. }
            | ServerMessage::Activations { seq, .. }
            | ServerMessage::Event { seq, .. }
            | ServerMessage::TrialSummary { seq, .. }
            | ServerMessage::Frame { seq, .. }
            | ServerMessage::Error { seq, .. } => *seq,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

/// `PCM0`, little-endian u32 frame offset, interleaved little-endian i16
/// stereo samples.
pub fn encode_pcm_chunk(frame_offset: u32, block: &StereoBuffer) -> Vec<u8> {
    let samples = block.to_i16_interleaved();
    let mut out = Vec::with_capacity(8 + samples.len() * 2);
    out.extend_from_slice(PCM_MAGIC);
    out.extend_from_slice(&frame_offset.to_le_bytes());
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

/// Inverse of [`encode_pcm_chunk`]: frame offset and interleaved samples.
pub fn decode_pcm_chunk(bytes: &[u8]) -> Option<(u32, Vec<i16>)> {
    if bytes.len() < 8 || &bytes[..4] != PCM_MAGIC || (bytes.len() - 8) % 4 != 0 {
        return None;
    }
    let offset = u32::from_le_bytes(bytes[4..8].try_into().ok()?);
    let samples = bytes[8..].chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect();
    Some((offset, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_messages_parse() {
        let m: ClientMessage = serde_json::from_str(r#"{"type":"start","seed":7}"#).unwrap();
        assert_eq!(m, ClientMessage::Start { seed: 7, spectator: false });
        let m: ClientMessage = serde_json::from_str(
            r#"{"type":"input","seq":3,"forward":1,"turn":-1,"cam_yaw_deg":10.5,"cam_pitch_deg":-20}"#,
        )
        .unwrap();
        assert_eq!(m.seq(), Some(3));
        assert!(serde_json::from_str::<ClientMessage>(r#"{"type":"jump"}"#).is_err());
        assert!(serde_json::from_str::<ClientMessage>(r#"{"type":"mark"}"#).is_err());
    }

    #[test]
    fn server_message_shape() {
        let m = ServerMessage::Event {
            seq: 4,
            kind: EventKind::FalseMark,
            t_ms: 150,
            obstacle: None,
            target: None,
        };
        assert_eq!(m.to_json(), r#"{"type":"event","seq":4,"kind":"false_mark","t_ms":150}"#);
    }

    #[test]
    fn pcm_round_trip() {
        let block = StereoBuffer {
            left: vec![0.0, 1.0, -1.0],
            right: vec![0.5, -0.5, 2.0],
        };
        let bytes = encode_pcm_chunk(2048, &block);
        assert_eq!(&bytes[..4], b"PCM0");
        assert_eq!(bytes.len(), 8 + 3 * 4);
        let (offset, samples) = decode_pcm_chunk(&bytes).unwrap();
        assert_eq!(offset, 2048);
        assert_eq!(samples, [0, 16384, 32767, -16384, -32767, 32767]);
    }
}
