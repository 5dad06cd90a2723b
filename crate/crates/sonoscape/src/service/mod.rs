//! Interactive navigation sessions over WebSocket.

mod protocol;
mod server;
mod session;

pub use protocol::{decode_pcm_chunk, encode_pcm_chunk, ClientMessage, EventKind, PoseInfo, ServerMessage, PCM_MAGIC};
pub use server::{bind, router, ServeConfig, Server};
pub use session::{replay, Phase, Recorded, Recording, Session, SessionConfig, TICK_MS};
