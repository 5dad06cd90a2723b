//! WebSocket transport for [`Session`].
//!
//! One connection carries one session. Text frames are JSON messages; the
//! server additionally streams the session's binaural audio as binary
//! `PCM0` chunks, one per audio block.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU16, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use sonoscape_core::audio::VoiceEngine;
use sonoscape_core::CellActivations;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot};
use tokio::task::JoinHandle;
use tokio::time::MissedTickBehavior;

use super::protocol::{encode_pcm_chunk, ClientMessage, ServerMessage};
use super::session::{Phase, Session, SessionConfig};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub session: SessionConfig,
    /// Wall time between simulation ticks. The simulated step is always
    /// `session.tick_ms`; a shorter period runs the world faster than real
    /// time.
    pub tick_period: Duration,
    /// Wall time between audio blocks; defaults to the block duration.
    pub block_period: Option<Duration>,
    /// Template cloned for every connection.
    pub engine: VoiceEngine,
    /// Where finished trials are written, if anywhere.
    pub log_dir: Option<PathBuf>,
}

impl ServeConfig {
    pub fn new(addr: SocketAddr) -> Self {
        let session = SessionConfig::default();
        Self {
            addr,
            tick_period: Duration::from_millis(session.tick_ms as u64),
            session,
            block_period: None,
            engine: VoiceEngine::with_defaults(),
            log_dir: None,
        }
    }
}

struct Shared {
    cfg: ServeConfig,
    next_id: AtomicU64,
}

/// A bound, running server.
pub struct Server {
    local_addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl Server {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Stops accepting connections and waits for the listener to close.
    pub async fn shutdown(mut self) -> Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.wait().await
    }

    /// Runs until the server stops by itself.
    pub async fn wait(self) -> Result<()> {
        match self.task.await {
            Ok(r) => r.map_err(|e| Error::Stream(e.to_string())),
            Err(e) => Err(Error::Stream(e.to_string())),
        }
    }
}

pub fn router(cfg: ServeConfig) -> Router {
    let shared = Arc::new(Shared {
        cfg,
        next_id: AtomicU64::new(1),
    });
    Router::new().route("/ws", get(upgrade)).with_state(shared)
}

/// Binds the listener and starts serving in the background. Must be called
/// inside a Tokio runtime.
pub async fn bind(cfg: ServeConfig) -> Result<Server> {
    cfg.session.pipeline.validate()?;
    let listener = TcpListener::bind(cfg.addr)
        .await
        .map_err(|e| Error::Stream(format!("cannot listen on {}: {e}", cfg.addr)))?;
    let local_addr = listener.local_addr().map_err(|e| Error::Stream(e.to_string()))?;
    let (tx, rx) = oneshot::channel::<()>();
    let app = router(cfg);
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    tracing::info!(%local_addr, "listening");
    Ok(Server {
        local_addr,
        shutdown: Some(tx),
        task,
    })
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> Response {
    ws.on_upgrade(move |socket| async move {
        if let Err(e) = connection(socket, shared).await {
            tracing::warn!("connection ended with error: {e}");
        }
    })
}

enum Outgoing {
    Text(String),
    Binary(Vec<u8>),
}

async fn connection(socket: WebSocket, shared: Arc<Shared>) -> Result<()> {
    let (mut ws_tx, mut ws_rx) = socket.split();
    let (out_tx, mut out_rx) = mpsc::channel::<Outgoing>(256);
    let writer = tokio::spawn(async move {
        while let Some(m) = out_rx.recv().await {
            let msg = match m {
                Outgoing::Text(t) => Message::Text(t.into()),
                Outgoing::Binary(b) => Message::Binary(b.into()),
            };
            if ws_tx.send(msg).await.is_err() {
                break;
            }
        }
        let _ = ws_tx.close().await;
    });
    let send = |m: &ServerMessage| {
        let tx = out_tx.clone();
        let text = m.to_json();
        async move { tx.send(Outgoing::Text(text)).await.is_ok() }
    };

    // Wait for `start`.
    let mut session = loop {
        let Some(Ok(msg)) = ws_rx.next().await else {
            drop(out_tx);
            let _ = writer.await;
            return Ok(());
        };
        let text = match msg {
            Message::Text(t) => t,
            Message::Close(_) => {
                drop(out_tx);
                let _ = writer.await;
                return Ok(());
            }
            _ => continue,
        };
        match serde_json::from_str::<ClientMessage>(&text) {
            Ok(ClientMessage::Start { seed, spectator }) => {
                let id = shared.next_id.fetch_add(1, Ordering::Relaxed);
                let (s, ready) = Session::start(id, seed, spectator, shared.cfg.session.clone());
                tracing::info!(session = id, seed, "session started");
                send(&ready).await;
                break s;
            }
            other => {
                // Nothing to keep before a session exists: reply and close.
                let detail = match other {
                    Ok(_) => "expected a start message".to_string(),
                    Err(e) => format!("bad message: {e}"),
                };
                send(&ServerMessage::Error { seq: 0, detail }).await;
                drop(out_tx);
                let _ = writer.await;
                return Ok(());
            }
        }
    };

    let snapshot = Arc::new(AtomicU16::new(CellActivations::NONE.bits()));
    let audio_stop = Arc::new(AtomicBool::new(false));
    let audio = tokio::spawn(audio_task(
        shared.cfg.engine.clone(),
        shared.cfg.block_period,
        snapshot.clone(),
        audio_stop.clone(),
        out_tx.clone(),
    ));

    let mut ticker = tokio::time::interval(shared.cfg.tick_period);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    let mut persisted = false;
    loop {
        tokio::select! {
            _ = ticker.tick(), if session.phase() == Phase::Running => {
                let out = session.tick()?;
                snapshot.store(session.activations().bits(), Ordering::Release);
                for m in &out {
                    send(m).await;
                }
            }
            incoming = ws_rx.next() => {
                let msg = match incoming {
                    Some(Ok(m)) => m,
                    _ => break,
                };
                let text = match msg {
                    Message::Text(t) => t,
                    Message::Close(_) => break,
                    _ => continue,
                };
                let out = match serde_json::from_str::<ClientMessage>(&text) {
                    Ok(m) => session.handle(m),
                    Err(e) => session.violation(format!("bad message: {e}")),
                };
                snapshot.store(session.activations().bits(), Ordering::Release);
                for m in &out {
                    send(m).await;
                }
            }
        }
        if session.phase() == Phase::Finished && !persisted {
            audio_stop.store(true, Ordering::Release);
            persist(&shared.cfg, &session);
            persisted = true;
        }
        if session.violated() {
            break;
        }
    }

    if !persisted {
        session.disconnect();
        persist(&shared.cfg, &session);
    }
    audio_stop.store(true, Ordering::Release);
    let _ = audio.await;
    drop(out_tx);
    let _ = writer.await;
    Ok(())
}

async fn audio_task(
    mut engine: VoiceEngine,
    period: Option<Duration>,
    snapshot: Arc<AtomicU16>,
    stop: Arc<AtomicBool>,
    out: mpsc::Sender<Outgoing>,
) {
    let block = engine.block_size();
    let period = period.unwrap_or_else(|| Duration::from_secs_f64(block as f64 / engine.sample_rate() as f64));
    let mut ticker = tokio::time::interval(period);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Burst);
    let mut offset = 0u32;
    while !stop.load(Ordering::Acquire) {
        ticker.tick().await;
        engine.update_voices(CellActivations::from_bits(snapshot.load(Ordering::Acquire)));
        let chunk = engine.render_block(block);
        match out.try_send(Outgoing::Binary(encode_pcm_chunk(offset, &chunk))) {
            Ok(()) | Err(mpsc::error::TrySendError::Full(_)) => {}
            Err(mpsc::error::TrySendError::Closed(_)) => break,
        }
        offset = offset.wrapping_add(block as u32);
    }
}

fn persist(cfg: &ServeConfig, session: &Session) {
    let Some(dir) = &cfg.log_dir else { return };
    let stem = format!("session-{}-seed{}", session.id(), session.log().seed);
    let log = dir.join(format!("{stem}.log"));
    let rec = dir.join(format!("{stem}.jsonl"));
    let result = crate::io::write_trial_log(&log, session.log())
        .and_then(|_| crate::io::write_bytes(&rec, session.recording().to_json_lines().as_bytes()));
    match result {
        Ok(()) => tracing::info!(path = %log.display(), "trial log written"),
        Err(e) => tracing::error!("cannot write trial log: {e}"),
    }
}
