//! Frame → activations → audio, offline and live.

use std::sync::atomic::{AtomicBool, AtomicU16, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use sonoscape_core::audio::{StereoBuffer, VoiceEngine, DEFAULT_BLOCK_SIZE, DEFAULT_SAMPLE_RATE};
use sonoscape_core::{grid, pipeline, saliency, CellActivations, FilterConfig, GrayImage, GridSpec};

use crate::{Error, Result};

pub const DEFAULT_BUDGET_MS: f64 = 45.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub filter: FilterConfig,
    pub grid: GridSpec,
    pub sample_rate: u32,
    pub block_size: usize,
    pub budget_ms: f64,
}

impl PipelineConfig {
    /// Operational filter, 3×4 grid at 1 %, 44.1 kHz, 1024-frame blocks,
    /// 45 ms budget.
    pub fn standard(width: usize, height: usize) -> Result<Self> {
        Ok(Self {
            filter: FilterConfig::operational(),
            grid: GridSpec::standard(width, height)?,
            sample_rate: DEFAULT_SAMPLE_RATE,
            block_size: DEFAULT_BLOCK_SIZE,
            budget_ms: DEFAULT_BUDGET_MS,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if !(self.budget_ms > 0.0) {
            return Err(Error::Invalid("frame budget must be positive".into()));
        }
        if self.block_size == 0 || self.sample_rate == 0 {
            return Err(Error::Invalid("audio block size and rate must be positive".into()));
        }
        Ok(())
    }

    pub fn block_duration(&self) -> Duration {
        Duration::from_secs_f64(self.block_size as f64 / self.sample_rate as f64)
    }
}

/// Wall-clock cost of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameTiming {
    pub filter: Duration,
    pub grid: Duration,
    pub total: Duration,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

impl FrameTiming {
    pub fn total_ms(&self) -> f64 {
        ms(self.total)
    }
}

/// Running aggregate of frame timings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimingStats {
    pub frames: u64,
    pub mean_filter_ms: f64,
    pub mean_grid_ms: f64,
    pub mean_total_ms: f64,
    pub max_total_ms: f64,
    pub budget_violations: u64,
}

impl TimingStats {
    pub fn record(&mut self, t: &FrameTiming, budget_ms: f64) {
        self.frames += 1;
        let n = self.frames as f64;
        let update = |mean: &mut f64, x: f64| *mean += (x - *mean) / n;
        update(&mut self.mean_filter_ms, ms(t.filter));
        update(&mut self.mean_grid_ms, ms(t.grid));
        update(&mut self.mean_total_ms, ms(t.total));
        self.max_total_ms = self.max_total_ms.max(ms(t.total));
        if ms(t.total) > budget_ms {
            self.budget_violations += 1;
        }
    }
}

/// Filter, count and threshold one frame, timing each stage.
pub fn process_frame(img: &GrayImage, cfg: &PipelineConfig) -> Result<(CellActivations, FrameTiming)> {
    pipeline::check_dimensions(img, &cfg.grid)?;
    let start = Instant::now();
    let mask = saliency::salient_mask(img, &cfg.filter)?;
    let filtered = Instant::now();
    let counts = grid::cell_counts(&mask, &cfg.grid)?;
    let activations = grid::active_cells(&counts, &cfg.grid)?;
    let done = Instant::now();
    let timing = FrameTiming {
        filter: filtered - start,
        grid: done - filtered,
        total: done - start,
    };
    Ok((activations, timing))
}

/// Renders `total_frames` audio frames, advancing one image per block and
/// holding the last image once the sequence runs out.
pub fn render_offline(
    images: &[GrayImage],
    engine: &mut VoiceEngine,
    cfg: &PipelineConfig,
    total_frames: usize,
) -> Result<(StereoBuffer, TimingStats)> {
    cfg.validate()?;
    let last = images.len().checked_sub(1).ok_or_else(|| Error::Invalid("no input frames".into()))?;
    let mut out = StereoBuffer::default();
    let mut stats = TimingStats::default();
    let mut held: Option<CellActivations> = None;
    let mut block = 0;
    while out.frames() < total_frames {
        let activations = if block <= last || held.is_none() {
            let (a, t) = process_frame(&images[block.min(last)], cfg)?;
            stats.record(&t, cfg.budget_ms);
            held = Some(a);
            a
        } else {
            held.expect("set above")
        };
        engine.update_voices(activations);
        let n = cfg.block_size.min(total_frames - out.frames());
        out.append(&engine.render_block(n));
        block += 1;
    }
    Ok((out, stats))
}

pub trait FrameSource: Send {
    /// Next frame, or `None` when the stream is over.
    fn next_frame(&mut self) -> Result<Option<GrayImage>>;
}

pub trait AudioSink: Send {
    fn write_block(&mut self, block: &StereoBuffer) -> Result<()>;
}

/// Frames from any iterator.
pub struct IterSource<I>(pub I);

impl<I: Iterator<Item = GrayImage> + Send> FrameSource for IterSource<I> {
    fn next_frame(&mut self) -> Result<Option<GrayImage>> {
        Ok(self.0.next())
    }
}

/// Collects everything written to it.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub blocks: Vec<StereoBuffer>,
}

impl AudioSink for MemorySink {
    fn write_block(&mut self, block: &StereoBuffer) -> Result<()> {
        self.blocks.push(block.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamOptions {
    /// Time between audio blocks; `None` renders as fast as the sink
    /// accepts.
    pub block_period: Option<Duration>,
    /// Minimum time between frames, to emulate a camera.
    pub frame_period: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StreamSummary {
    pub frames: u64,
    pub blocks: u64,
    /// Snapshots handed to the audio side (one per processed frame).
    pub publishes: u64,
    /// Blocks at which the audio side saw a different snapshot.
    pub activation_changes: u64,
    pub timing: TimingStats,
    pub elapsed: Duration,
    /// Why the stream stopped early, if it did.
    pub error: Option<String>,
}

/// Runs frame processing and audio rendering concurrently.
///
/// The frame side publishes each frame's activations into a lock-free
/// snapshot; the audio side reads the latest snapshot at every block
/// boundary and never waits for a new frame. When the source is exhausted
/// the audio side finishes the block in progress and one more, then stops.
pub fn run_stream(
    source: &mut dyn FrameSource,
    sink: &mut dyn AudioSink,
    engine: &mut VoiceEngine,
    cfg: &PipelineConfig,
    opts: StreamOptions,
) -> StreamSummary {
    if let Err(e) = cfg.validate() {
        return StreamSummary {
            error: Some(e.to_string()),
            ..Default::default()
        };
    }
    let snapshot = AtomicU16::new(CellActivations::NONE.bits());
    let publishes = AtomicU64::new(0);
    let done = AtomicBool::new(false);
    let sink_failed = AtomicBool::new(false);
    let started = Instant::now();

    let (frame_side, audio_side) = std::thread::scope(|s| {
        let frames = s.spawn(|| {
            let mut stats = TimingStats::default();
            let mut error = None;
            while !sink_failed.load(Ordering::Acquire) {
                let tick = Instant::now();
                match source.next_frame() {
                    Ok(Some(img)) => match process_frame(&img, cfg) {
                        Ok((a, t)) => {
                            snapshot.store(a.bits(), Ordering::Release);
                            publishes.fetch_add(1, Ordering::AcqRel);
                            stats.record(&t, cfg.budget_ms);
                        }
                        Err(e) => {
                            error = Some(e.to_string());
                            break;
                        }
                    },
                    Ok(None) => break,
                    Err(e) => {
                        error = Some(e.to_string());
                        break;
                    }
                }
                if let Some(p) = opts.frame_period {
                    std::thread::sleep(p.saturating_sub(tick.elapsed()));
                }
            }
            done.store(true, Ordering::Release);
            (stats, error)
        });

        let audio = s.spawn(|| {
            let mut blocks = 0u64;
            let mut changes = 0u64;
            let mut current = CellActivations::NONE;
            let mut error = None;
            let mut next_deadline = Instant::now();
            loop {
                let finishing = done.load(Ordering::Acquire);
                let latest = CellActivations::from_bits(snapshot.load(Ordering::Acquire));
                if latest != current {
                    changes += 1;
                    current = latest;
                }
                engine.update_voices(current);
                let block = engine.render_block(cfg.block_size);
                if let Err(e) = sink.write_block(&block) {
                    error = Some(e.to_string());
                    sink_failed.store(true, Ordering::Release);
                    break;
                }
                blocks += 1;
                if finishing {
                    break;
                }
                if let Some(p) = opts.block_period {
                    next_deadline += p;
                    std::thread::sleep(next_deadline.saturating_duration_since(Instant::now()));
                }
            }
            (blocks, changes, error)
        });
        (frames.join(), audio.join())
    });

    let (timing, frame_error) = frame_side.unwrap_or_else(|_| (TimingStats::default(), Some("frame task panicked".into())));
    let (blocks, activation_changes, audio_error) =
        audio_side.unwrap_or_else(|_| (0, 0, Some("audio task panicked".into())));
    StreamSummary {
        frames: timing.frames,
        blocks,
        publishes: publishes.into_inner(),
        activation_changes,
        timing,
        elapsed: started.elapsed(),
        error: frame_error.or(audio_error),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_frame_is_silent() {
        let cfg = PipelineConfig::standard(192, 144).unwrap();
        let (a, t) = process_frame(&GrayImage::filled(192, 144, 128).unwrap(), &cfg).unwrap();
        assert!(a.is_empty());
        assert!(t.total >= t.filter + t.grid);
    }

    #[test]
    fn wrong_size_is_rejected() {
        let cfg = PipelineConfig::standard(192, 144).unwrap();
        assert!(process_frame(&GrayImage::filled(10, 10, 0).unwrap(), &cfg).is_err());
    }

    #[test]
    fn stats_track_budget() {
        let mut s = TimingStats::default();
        let t = |m| FrameTiming {
            total: Duration::from_millis(m),
            ..Default::default()
        };
        s.record(&t(10), 45.0);
        s.record(&t(50), 45.0);
        assert_eq!(s.frames, 2);
        assert_eq!(s.budget_violations, 1);
        assert!((s.mean_total_ms - 30.0).abs() < 1e-9);
        assert!((s.max_total_ms - 50.0).abs() < 1e-9);
    }

    #[test]
    fn offline_needs_a_frame() {
        let cfg = PipelineConfig::standard(192, 144).unwrap();
        let mut e = VoiceEngine::with_defaults();
        assert!(render_offline(&[], &mut e, &cfg, 10).is_err());
    }
}
