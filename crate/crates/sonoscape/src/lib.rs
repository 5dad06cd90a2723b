//! Everything around the `sonoscape-core` algorithms that needs an operating
//! system: file formats, the real-time frame/audio loop, the WebSocket
//! session service and the command-line tool.

pub mod cli;
mod error;
pub mod io;
pub mod service;
pub mod stream;

pub use error::{Error, Result};
