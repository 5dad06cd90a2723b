//! `sonoscape` command line.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use sonoscape_core::analytics::{dbscan, fit_exp_decay, percent_improvement, standardize, summarize, DbscanParams, Label, Point2};
use sonoscape_core::audio::{HrirSet, SoundBank, VoiceEngine};
use sonoscape_core::sim::{follow_the_silence, tally_events, trial_metrics, PolicyConfig, Trial, TrialMetrics};
use sonoscape_core::{saliency, FilterConfig, GrayImage, GridSpec};

use crate::io::{self, Config};
use crate::service::{self, ServeConfig};
use crate::stream::{render_offline, PipelineConfig};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "sonoscape", version, about = "Hear what a camera sees")]
pub struct Cli {
    /// key = value preset file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the binary saliency mask of an image.
    Mask {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Render an image or a directory of frames to a stereo WAV file.
    Sonify {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        seconds: f64,
        #[command(flatten)]
        filter: FilterArgs,
        #[command(flatten)]
        audio: AudioArgs,
    },
    /// Run scripted trials in the virtual corridor.
    Sim {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "follow-silence")]
        policy: String,
        #[arg(long, default_value_t = 1)]
        trials: u32,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Analyse trial logs or a numeric table.
    Analyze(AnalyzeArgs),
    /// Host interactive sessions over WebSocket at `/ws`.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long)]
        log_dir: Option<PathBuf>,
        #[command(flatten)]
        audio: AudioArgs,
    },
}

#[derive(Debug, Args, Default)]
pub struct FilterArgs {
    #[arg(long)]
    pub thresh: Option<f64>,
    #[arg(long)]
    pub iters: Option<u32>,
}

#[derive(Debug, Args, Default)]
pub struct AudioArgs {
    /// HRIR manifest; built-in level/delay filters otherwise.
    #[arg(long)]
    pub hrir: Option<PathBuf>,
    /// Sound loop manifest; built-in synthetic loops otherwise.
    #[arg(long)]
    pub sounds: Option<PathBuf>,
    #[arg(long)]
    pub gain: Option<f64>,
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group = clap::ArgGroup::new("report").required(true).multiple(false))]
pub struct AnalyzeArgs {
    /// `.log` files, directories of them, or one table file.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Fit `a·e^(−n/b) + c` to the series.
    #[arg(long, group = "report")]
    pub fit: bool,
    /// Cluster (series, second column) pairs after standardizing.
    #[arg(long, group = "report")]
    pub dbscan: bool,
    /// Percent improvement of the better of trials 4–5 over trial 1.
    #[arg(long, group = "report")]
    pub improve: bool,
    #[arg(long, default_value_t = 0.8)]
    pub eps: f64,
    #[arg(long, default_value_t = 5)]
    pub minpts: usize,
    /// Table columns (0-based) used as series and second coordinate.
    #[arg(long, value_delimiter = ',', default_values_t = [0usize, 1])]
    pub columns: Vec<usize>,
    #[arg(long)]
    pub json: bool,
}

/// Parses `args` (program name first) and runs the command. Reports go to
/// `out`, diagnostics to `err`. Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

pub fn run_cli() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Mask { input, output, filter } => mask(&input, &output, &filter_config(&cfg, &filter)?),
        Command::Sonify {
            input,
            output,
            seconds,
            filter,
            audio,
        } => sonify(&cfg, &input, &output, seconds, &filter, &audio, out),
        Command::Sim {
            seed,
            policy,
            trials,
            out: dir,
            filter,
        } => sim(&cfg, seed, &policy, trials, &dir, &filter, out),
        Command::Analyze(args) => analyze(&args, out),
        Command::Serve {
            port,
            host,
            log_dir,
            audio,
        } => serve(&cfg, SocketAddr::new(host, port), log_dir, &audio, out),
    }
}

fn filter_config(cfg: &Config, args: &FilterArgs) -> Result<FilterConfig> {
    let base = FilterConfig::operational();
    let f = FilterConfig::new(
        args.thresh.or(cfg.thresh).unwrap_or(base.thresh),
        args.iters.or(cfg.iterations).unwrap_or(base.iterations),
    );
    f.validate()?;
    Ok(f)
}

fn pipeline_config(cfg: &Config, filter: &FilterArgs, width: usize, height: usize) -> Result<PipelineConfig> {
    let mut p = PipelineConfig::standard(width, height)?;
    p.filter = filter_config(cfg, filter)?;
    if let Some(r) = cfg.activation_ratio {
        p.grid = GridSpec::new(width, height, sonoscape_core::grid::ROWS, sonoscape_core::grid::COLS, r)?;
    }
    p.sample_rate = cfg.sample_rate.unwrap_or(p.sample_rate);
    p.block_size = cfg.block_size.unwrap_or(p.block_size);
    p.budget_ms = cfg.budget_ms.unwrap_or(p.budget_ms);
    p.validate()?;
    Ok(p)
}

fn engine(cfg: &Config, audio: &AudioArgs, sample_rate: u32, block_size: usize) -> Result<VoiceEngine> {
    let hrirs = match audio.hrir.as_ref().or(cfg.hrir.as_ref()) {
        Some(p) => io::load_hrir_set(p)?,
        None => HrirSet::fallback(sample_rate),
    };
    let bank = match audio.sounds.as_ref().or(cfg.sounds.as_ref()) {
        Some(p) => io::load_sound_bank(p)?,
        None => SoundBank::synthetic(sample_rate),
    };
    let mut engine = VoiceEngine::new(hrirs, bank, sample_rate, block_size)?;
    if let Some(g) = audio.gain.or(cfg.master_gain) {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::Invalid(format!("gain must be a non-negative number, got {g}")));
        }
        engine.set_master_gain(g);
    }
    Ok(engine)
}

fn mask(input: &Path, output: &Path, filter: &FilterConfig) -> Result<()> {
    let img = io::load_gray(input)?;
    let mask = saliency::salient_mask(&img, filter)?;
    io::save_mask(output, &mask)
}

fn is_image(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "pgm" | "pnm")
    )
}

/// One image, or every PNG/PGM in a directory in file-name order.
fn load_frames(input: &Path) -> Result<Vec<GrayImage>> {
    if !input.is_dir() {
        return Ok(vec![io::load_gray(input)?]);
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(input)
        .map_err(|e| Error::io(input, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image(p))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Invalid(format!("{}: no PNG or PGM frames", input.display())));
    }
    let frames: Vec<GrayImage> = paths.iter().map(|p| io::load_gray(p)).collect::<Result<_>>()?;
    let dims = frames[0].dimensions();
    if let Some((p, f)) = paths.iter().zip(&frames).find(|(_, f)| f.dimensions() != dims) {
        return Err(Error::Invalid(format!(
            "{}: frame is {}×{}, the first frame is {}×{}",
            p.display(),
            f.width(),
            f.height(),
            dims.0,
            dims.1
        )));
    }
    Ok(frames)
}

fn sonify(
    cfg: &Config,
    input: &Path,
    output: &Path,
    seconds: f64,
    filter: &FilterArgs,
    audio: &AudioArgs,
    out: &mut dyn Write,
) -> Result<()> {
    if !(seconds > 0.0) || !seconds.is_finite() {
        return Err(Error::Invalid(format!("--seconds must be positive, got {seconds}")));
    }
    let frames = load_frames(input)?;
    let (w, h) = frames[0].dimensions();
    let p = pipeline_config(cfg, filter, w, h)?;
    let mut engine = engine(cfg, audio, p.sample_rate, p.block_size)?;
    let total = (seconds * p.sample_rate as f64).round() as usize;
    let (buffer, stats) = render_offline(&frames, &mut engine, &p, total)?;
    io::write_wav(output, &buffer, p.sample_rate)?;
    let _ = writeln!(
        out,
        "{} frames, {} samples; mean frame time {:.2} ms",
        frames.len(),
        buffer.frames(),
        stats.mean_total_ms
    );
    Ok(())
}

fn metrics_of(log: &sonoscape_core::sim::TrialLog) -> (TrialMetrics, bool) {
    match trial_metrics(log) {
        Ok(m) => (m, true),
        Err(_) => (tally_events(log), false),
    }
}

fn sim(
    cfg: &Config,
    seed: u64,
    policy: &str,
    trials: u32,
    dir: &Path,
    filter: &FilterArgs,
    out: &mut dyn Write,
) -> Result<()> {
    if policy != "follow-silence" {
        return Err(Error::Invalid(format!("unknown policy {policy:?}; available: follow-silence")));
    }
    if trials == 0 {
        return Err(Error::Invalid("--trials must be at least 1".into()));
    }
    let mut policy_cfg = PolicyConfig {
        filter: filter_config(cfg, filter)?,
        ..Default::default()
    };
    if let Some(r) = cfg.activation_ratio {
        policy_cfg.activation_ratio = r;
    }
    let mut table = String::from("completion_s,objects_missed,objects_seen,false_marks,seed\n");
    for i in 0..trials {
        let s = seed + i as u64;
        let mut trial = Trial::new(s);
        follow_the_silence(&mut trial, &policy_cfg)?;
        let log = trial.into_log();
        io::write_trial_log(&dir.join(format!("trial-{:03}-seed{s}.log", i + 1)), &log)?;
        let (m, finished) = metrics_of(&log);
        table.push_str(&format!(
            "{:.3},{},{},{},{s}\n",
            m.completion_s, m.objects_missed, m.objects_seen, m.false_marks
        ));
        let _ = writeln!(
            out,
            "trial {} seed {s}: {} in {:.2} s, {} seen, {} missed, {} false marks",
            i + 1,
            if finished { "finished" } else { "aborted" },
            m.completion_s,
            m.objects_seen,
            m.objects_missed,
            m.false_marks
        );
    }
    io::write_bytes(&dir.join("metrics.csv"), table.as_bytes())
}

fn is_log(p: &Path) -> bool {
    p.extension().is_some_and(|e| e == "log")
}

/// (series, second coordinate) from the inputs: completion time and missed
/// objects for logs, the chosen columns for a table.
fn load_series(args: &AnalyzeArgs) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut logs = Vec::new();
    let mut tables = Vec::new();
    for p in &args.inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_log(p))
                .collect();
            found.sort();
            if found.is_empty() {
                return Err(Error::Invalid(format!("{}: no .log files", p.display())));
            }
            logs.extend(found);
        } else if is_log(p) {
            logs.push(p.clone());
        } else {
            tables.push(p.clone());
        }
    }
    match (logs.is_empty(), tables.as_slice()) {
        (false, []) => {
            let mut times = Vec::new();
            let mut missed = Vec::new();
            for p in &logs {
                let (m, _) = metrics_of(&io::read_trial_log(p)?);
                times.push(m.completion_s);
                missed.push(m.objects_missed as f64);
            }
            Ok((times, missed))
        }
        (true, [table]) => {
            let rows = io::read_table(table)?;
            let &[a, b] = args.columns.as_slice() else {
                return Err(Error::Invalid("--columns takes exactly two indices".into()));
            };
            let col = |c: usize| -> Result<Vec<f64>> {
                rows.iter()
                    .enumerate()
                    .map(|(i, r)| {
                        r.get(c).copied().ok_or_else(|| {
                            Error::Invalid(format!("{}: row {} has no column {c}", table.display(), i + 1))
                        })
                    })
                    .collect()
            };
            let xs = col(a)?;
            let ys = if args.dbscan { col(b)? } else { Vec::new() };
            Ok((xs, ys))
        }
        _ => Err(Error::Invalid("give either trial logs or a single table".into())),
    }
}

fn analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let (xs, ys) = load_series(args)?;
    let report = if args.fit {
        let f = fit_exp_decay(&xs)?;
        if args.json {
            serde_json::json!({
                "a": f.amplitude, "b": f.decay, "c": f.offset,
                "rss": f.rss, "iterations": f.iterations, "degenerate": f.degenerate,
            })
            .to_string()
        } else {
            format!(
                "a={:.6} b={:.6} c={:.6} rss={:.6e} iterations={}{}",
                f.amplitude,
                f.decay,
                f.offset,
                f.rss,
                f.iterations,
                if f.degenerate { " (constant input)" } else { "" }
            )
        }
    } else if args.improve {
        let p = percent_improvement(&xs)?;
        if args.json {
            serde_json::json!({ "improvement_percent": p }).to_string()
        } else {
            format!("improvement={p:.6}%")
        }
    } else {
        let params = DbscanParams::new(args.eps, args.minpts)?;
        let points: Vec<Point2> = xs.iter().zip(&ys).map(|(&x, &y)| Point2::new(x, y)).collect();
        let labels = dbscan(&standardize(&points)?, &params);
        let (clusters, noise) = summarize(&labels);
        let sizes: Vec<usize> = (0..clusters)
            .map(|c| labels.iter().filter(|l| **l == Label::Cluster(c)).count())
            .collect();
        let ids: Vec<i64> = labels.iter().map(|l| l.cluster().map_or(-1, |c| c as i64)).collect();
        if args.json {
            serde_json::json!({ "clusters": clusters, "noise": noise, "sizes": sizes, "labels": ids }).to_string()
        } else {
            let ids: Vec<String> = ids.iter().map(i64::to_string).collect();
            let sizes: Vec<String> = sizes.iter().map(usize::to_string).collect();
            format!(
                "clusters={clusters} noise={noise} sizes={}\nlabels={}",
                sizes.join(","),
                ids.join(",")
            )
        }
    };
    writeln!(out, "{report}").map_err(|e| Error::io("<stdout>", e))
}

fn serve(cfg: &Config, addr: SocketAddr, log_dir: Option<PathBuf>, audio: &AudioArgs, out: &mut dyn Write) -> Result<()> {
    let mut serve_cfg = ServeConfig::new(addr);
    let (w, h) = (serve_cfg.session.camera.width, serve_cfg.session.camera.height);
    let pipeline = pipeline_config(cfg, &FilterArgs::default(), w, h)?;
    serve_cfg.engine = engine(cfg, audio, pipeline.sample_rate, pipeline.block_size)?;
    serve_cfg.session.pipeline = pipeline;
    serve_cfg.log_dir = log_dir;
    serve_cfg.tick_period = Duration::from_millis(serve_cfg.session.tick_ms as u64);

    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Stream(e.to_string()))?;
    rt.block_on(async {
        let server = service::bind(serve_cfg).await?;
        let _ = writeln!(out, "listening on ws://{}/ws", server.local_addr());
        let _ = out.flush();
        server.wait().await
    })
}
