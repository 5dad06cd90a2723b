use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use sonoscape::service::{self, decode_pcm_chunk, replay, Recording, ServeConfig, Server};
use sonoscape_core::audio::VoiceEngine;
use sonoscape_core::sim::{generate_layout, trial_metrics, TrialLog};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

fn engine() -> VoiceEngine {
    static ENGINE: OnceLock<VoiceEngine> = OnceLock::new();
    ENGINE.get_or_init(VoiceEngine::with_defaults).clone()
}

/// Server on an ephemeral port running the world ~25× faster than real
/// time, writing logs to `log_dir`.
async fn start_server(log_dir: &Path) -> Server {
    let mut cfg = ServeConfig::new("127.0.0.1:0".parse().unwrap());
    cfg.engine = engine();
    cfg.tick_period = Duration::from_millis(2);
    cfg.block_period = Some(Duration::from_millis(4));
    cfg.log_dir = Some(log_dir.to_owned());
    service::bind(cfg).await.unwrap()
}

struct Client {
    ws: Ws,
    pcm: Vec<(u32, usize)>,
    texts: Vec<Value>,
}

impl Client {
    async fn connect(addr: SocketAddr) -> Self {
        let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap();
        Self {
            ws,
            pcm: Vec::new(),
            texts: Vec::new(),
        }
    }

    async fn send(&mut self, v: Value) {
        self.ws.send(Message::Text(v.to_string().into())).await.unwrap();
    }

    async fn send_raw(&mut self, s: &str) {
        self.ws.send(Message::Text(s.to_string().into())).await.unwrap();
    }

    async fn input(&mut self, seq: u32, forward: i8, turn: i8) {
        self.send(json!({"type": "input", "seq": seq, "forward": forward, "turn": turn,
                         "cam_yaw_deg": 0.0, "cam_pitch_deg": -25.0}))
            .await;
    }

    /// Next text message; audio chunks on the way are checked and counted.
    /// `None` once the server closes.
    async fn next_text(&mut self) -> Option<Value> {
        loop {
            let msg = tokio::time::timeout(Duration::from_secs(30), self.ws.next())
                .await
                .expect("server went quiet");
            match msg {
                Some(Ok(Message::Text(t))) => {
                    let v: Value = serde_json::from_str(&t).unwrap();
                    self.texts.push(v.clone());
                    return Some(v);
                }
                Some(Ok(Message::Binary(b))) => {
                    let (offset, samples) = decode_pcm_chunk(&b).expect("PCM0 chunk");
                    self.pcm.push((offset, samples.len()));
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return None,
                Some(Ok(_)) => {}
            }
        }
    }

    async fn next_of(&mut self, kind: &str) -> Value {
        loop {
            let v = self.next_text().await.unwrap_or_else(|| panic!("closed while waiting for {kind}"));
            if v["type"] == kind {
                return v;
            }
        }
    }

    async fn start(&mut self, seed: u64, spectator: bool) -> Value {
        self.send(json!({"type": "start", "seed": seed, "spectator": spectator})).await;
        self.next_of("session_ready").await
    }
}

fn logs_in(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v
}

async fn wait_for_log(dir: &Path) -> TrialLog {
    for _ in 0..200 {
        if let Some(p) = logs_in(dir, "log").first() {
            if let Ok(text) = std::fs::read_to_string(p) {
                if let Ok(log) = TrialLog::parse(&text) {
                    return log;
                }
            }
        }
        tokio::time::sleep(Duration::from_millis(25)).await;
    }
    panic!("no trial log written to {}", dir.display());
}

#[tokio::test]
async fn start_replies_with_seed_and_layout_hash() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut c = Client::connect(server.local_addr()).await;
    let ready = c.start(7, false).await;
    assert_eq!(ready["seed"], 7);
    let hash = u64::from_str_radix(ready["layout_hash"].as_str().unwrap(), 16).unwrap();
    assert_eq!(hash, generate_layout(7).layout_hash());
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn mark_while_ready_is_an_error_and_the_session_continues() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut c = Client::connect(server.local_addr()).await;
    c.start(0, false).await;
    c.send(json!({"type": "mark", "seq": 0})).await;
    let err = c.next_of("error").await;
    assert!(err["detail"].as_str().unwrap().contains("mark"), "{err}");
    // Still usable: a mark once running with nothing in view is false.
    c.input(1, 0, 0).await;
    c.send(json!({"type": "mark", "seq": 2})).await;
    let ev = c.next_of("event").await;
    assert_eq!(ev["kind"], "false_mark");
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn walking_one_second_moves_one_metre() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut c = Client::connect(server.local_addr()).await;
    c.start(0, true).await;
    c.input(0, 1, 0).await;
    let frame = loop {
        let f = c.next_of("frame").await;
        if f["t_ms"] == 1000 {
            break f;
        }
    };
    let x = frame["pose"]["x"].as_f64().unwrap();
    assert!((x - 1.5).abs() < 1e-9, "x = {x}");
    assert_eq!(frame["width"], 192);
    let pixels = base64_len(frame["pixels"].as_str().unwrap());
    assert_eq!(pixels, 192 * 144);
    server.shutdown().await.unwrap();
}

fn base64_len(s: &str) -> usize {
    s.len() / 4 * 3 - s.bytes().rev().take_while(|&b| b == b'=').count()
}

#[tokio::test]
async fn finishing_reports_metrics_of_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut c = Client::connect(server.local_addr()).await;
    c.start(0, false).await;
    c.input(0, 1, 0).await;
    let finish = c.next_of("event").await;
    assert_eq!(finish["kind"], "finish");
    let summary = c.next_of("trial_summary").await;
    assert_eq!(summary["outcome"], "finished");

    let log = wait_for_log(dir.path()).await;
    let m = trial_metrics(&log).unwrap();
    assert_eq!(summary["completion_s"].as_f64().unwrap(), m.completion_s);
    assert_eq!(summary["objects_seen"], m.objects_seen);
    assert_eq!(summary["objects_missed"], m.objects_missed);
    assert_eq!(summary["false_marks"], m.false_marks);
    // Straight down an empty lane at 1 m/s from x = 0.5 to x = 14.
    assert!((m.completion_s - 13.5).abs() < 0.051, "{}", m.completion_s);
    assert_eq!(finish["t_ms"].as_u64().unwrap() as f64, m.completion_s * 1000.0);

    // More input after the finish is out of phase.
    c.input(1, 0, 0).await;
    c.next_of("error").await;
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn disconnect_persists_an_aborted_log() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut c = Client::connect(server.local_addr()).await;
    c.start(3, false).await;
    c.input(0, 1, 0).await;
    c.next_of("activations").await;
    c.ws.close(None).await.unwrap();
    drop(c);
    let log = wait_for_log(dir.path()).await;
    log.validate().unwrap();
    assert!(log.to_text().ends_with("abort reason=disconnect\n"), "{}", log.to_text());
    let name = logs_in(dir.path(), "log")[0].file_name().unwrap().to_string_lossy().into_owned();
    assert!(name.ends_with("-seed3.log"), "{name}");
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn recorded_sessions_replay_to_the_same_log() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut c = Client::connect(server.local_addr()).await;
    c.start(4, true).await;
    let mut seq = 0;
    // A scripted walk: zig-zag with marks, fed at irregular wall times.
    for (i, (fwd, turn)) in [(1, 0), (1, 1), (0, -1), (1, 0), (1, -1), (1, 0)].into_iter().enumerate() {
        c.input(seq, fwd, turn).await;
        seq += 1;
        for _ in 0..(5 + 7 * i) {
            c.next_of("frame").await;
        }
        c.send(json!({"type": "mark", "seq": seq})).await;
        seq += 1;
    }
    c.send(json!({"type": "end"})).await;
    let summary = c.next_of("trial_summary").await;
    assert_eq!(summary["outcome"], "aborted");
    assert_eq!(summary["reason"], "client_end");

    let log = wait_for_log(dir.path()).await;
    let rec_path = logs_in(dir.path(), "jsonl");
    let recording = Recording::from_json_lines(&std::fs::read_to_string(&rec_path[0]).unwrap()).unwrap();
    let replayed = replay(&recording, &service::SessionConfig::default()).unwrap();
    assert_eq!(replayed, log);
    assert_eq!(replayed.to_text(), log.to_text());
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn audio_chunks_are_contiguous_pcm0() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut c = Client::connect(server.local_addr()).await;
    c.start(0, false).await;
    // A burst of 100 inputs with increasing seq.
    for seq in 0..100 {
        c.input(seq, (seq % 2) as i8, 0).await;
    }
    while c.pcm.len() < 60 {
        c.next_text().await.expect("open");
    }
    for (i, &(offset, samples)) in c.pcm.iter().enumerate() {
        assert_eq!(offset as usize, i * 1024, "chunk {i}");
        assert_eq!(samples, 2 * 1024);
    }
    let errors = c.texts.iter().filter(|v| v["type"] == "error").count();
    assert_eq!(errors, 0);
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn server_sequence_numbers_increase() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut c = Client::connect(server.local_addr()).await;
    c.start(9, true).await;
    c.input(0, 1, 1).await;
    for _ in 0..40 {
        c.next_text().await.unwrap();
    }
    c.send(json!({"type": "mark", "seq": 1})).await;
    c.next_of("event").await;
    let seqs: Vec<u64> = c.texts.iter().map(|v| v["seq"].as_u64().unwrap()).collect();
    assert_eq!(seqs[0], 0);
    assert!(seqs.windows(2).all(|w| w[0] < w[1]), "{seqs:?}");
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn protocol_violations_close_the_session() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;

    // Malformed message mid-trial.
    let mut c = Client::connect(server.local_addr()).await;
    c.start(1, false).await;
    c.input(0, 1, 0).await;
    c.send_raw(r#"{"type":"input","seq":1,"forward":"fast"}"#).await;
    let err = c.next_of("error").await;
    assert!(err["detail"].as_str().unwrap().contains("bad message"));
    let summary = c.next_of("trial_summary").await;
    assert_eq!(summary["outcome"], "aborted");
    while c.next_text().await.is_some() {}
    let log = wait_for_log(dir.path()).await;
    assert!(log.to_text().ends_with("abort reason=disconnect\n"));

    // Sequence numbers going backwards.
    let mut c = Client::connect(server.local_addr()).await;
    c.start(1, false).await;
    c.input(5, 0, 0).await;
    c.input(4, 1, 0).await;
    let err = c.next_of("error").await;
    assert!(err["detail"].as_str().unwrap().contains("sequence"));
    while c.next_text().await.is_some() {}

    // Anything but `start` first.
    let mut c = Client::connect(server.local_addr()).await;
    c.input(0, 1, 0).await;
    let err = c.next_of("error").await;
    assert!(err["detail"].as_str().unwrap().contains("start"));
    assert!(c.next_text().await.is_none());
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn port_in_use_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut cfg = ServeConfig::new(server.local_addr());
    cfg.engine = engine();
    let err = service::bind(cfg).await.err().expect("second bind fails");
    assert!(err.to_string().contains("cannot listen"), "{err}");
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn sessions_are_independent() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path()).await;
    let mut a = Client::connect(server.local_addr()).await;
    let mut b = Client::connect(server.local_addr()).await;
    let ra = a.start(11, false).await;
    let rb = b.start(12, false).await;
    assert_ne!(ra["session"], rb["session"]);
    assert_eq!(rb["seed"], 12);
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn audio_keeps_real_time_pace_under_input_bursts() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ServeConfig::new("127.0.0.1:0".parse().unwrap());
    cfg.engine = engine();
    cfg.log_dir = Some(dir.path().to_owned());
    let server = service::bind(cfg).await.unwrap();
    let block = Duration::from_secs_f64(1024.0 / 44_100.0);

    let mut c = Client::connect(server.local_addr()).await;
    c.start(2, false).await;
    let t0 = tokio::time::Instant::now();
    let mut seq = 0;
    while t0.elapsed() < Duration::from_millis(800) {
        for _ in 0..20 {
            c.input(seq, 1, (seq % 3) as i8 - 1).await;
            seq += 1;
        }
        let _ = tokio::time::timeout(Duration::from_millis(20), c.next_text()).await;
    }
    let elapsed = t0.elapsed();
    // Allow two blocks of start-up and scheduling slack.
    let expected = (elapsed.as_secs_f64() / block.as_secs_f64()) as usize;
    assert!(c.pcm.len() + 2 >= expected, "{} chunks in {elapsed:?}", c.pcm.len());
    assert!(c.pcm.iter().enumerate().all(|(i, &(o, _))| o as usize == i * 1024));
    server.shutdown().await.unwrap();
}
