//! Scripted "follow the silence" walker.
//!
//! Stop, sweep the camera from −60° to +60°, pick the direction whose view
//! keeps the central cells quiet over the widest span, turn to it, walk one
//! metre, repeat. The walker knows which way the corridor runs and roughly
//! how far it is from the side walls (the walls are not salient, so sound
//! alone cannot reveal them); everything about obstacles comes from the
//! cell activations.

use alloc::vec::Vec;

use super::agent::{wrap_degrees, TURN_RATE_DEG_S};
use super::camera::CameraConfig;
use super::log::AbortReason;
use super::scene::CORRIDOR_WIDTH_M;
use super::trial::{Control, Trial};
use crate::grid::{CellActivations, GridSpec, COLS, ROWS};
use crate::pipeline;
use crate::saliency::FilterConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub scan_yaws_deg: Vec<f64>,
    pub scan_pitch_deg: f64,
    /// Time spent holding each scan view.
    pub scan_dwell_ms: u32,
    pub tick_ms: u32,
    /// Distance walked between scans.
    pub stride_m: f64,
    /// Farthest a chosen direction may point away from the corridor axis.
    pub max_course_deg: f64,
    /// Keep this far from the side walls when choosing a direction.
    pub wall_margin_m: f64,
    /// Trial aborts when the clock passes this.
    pub time_limit_ms: u32,
    pub filter: FilterConfig,
    pub activation_ratio: f64,
    pub camera: CameraConfig,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            scan_yaws_deg: (-4..=4).map(|k| k as f64 * 15.0).collect(),
            scan_pitch_deg: -25.0,
            scan_dwell_ms: 250,
            tick_ms: 100,
            stride_m: 1.0,
            max_course_deg: 75.0,
            wall_margin_m: 0.8,
            time_limit_ms: 900_000,
            filter: FilterConfig::operational(),
            activation_ratio: crate::grid::DEFAULT_ACTIVATION_RATIO,
            camera: CameraConfig::default(),
        }
    }
}

/// Half-width of the sector avoided after bumping into something.
const BLOCKED_CONE_DEG: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq)]
struct View {
    yaw_deg: f64,
    /// World direction of the view axis.
    course_deg: f64,
    activations: CellActivations,
}

impl View {
    /// Active cells in the two central columns.
    fn central_load(&self) -> u32 {
        (0..ROWS)
            .flat_map(|r| (1..COLS - 1).map(move |c| (r, c)))
            .filter(|&(r, c)| self.activations.is_cell_active(r, c))
            .count() as u32
    }
}

/// Runs the walker until it finishes or hits the time limit.
pub fn follow_the_silence(trial: &mut Trial, cfg: &PolicyConfig) -> crate::Result<()> {
    follow_the_silence_observed(trial, cfg, |_| {})
}

/// As [`follow_the_silence`], calling `observe` after every clock advance.
pub fn follow_the_silence_observed(
    trial: &mut Trial,
    cfg: &PolicyConfig,
    mut observe: impl FnMut(&Trial),
) -> crate::Result<()> {
    let observe: Observer = &mut observe;
    let grid = GridSpec::new(
        cfg.camera.width,
        cfg.camera.height,
        ROWS,
        COLS,
        cfg.activation_ratio,
    )?;
    let stride_ticks = libm::ceil(cfg.stride_m * 1000.0 / cfg.tick_ms as f64) as u32;
    // Course of the last stride that ended in a bump. Obstacles that close
    // sit below the camera's field of view, so they have to be remembered.
    let mut blocked: Option<f64> = None;

    while !trial.is_over() {
        if trial.clock_ms() >= cfg.time_limit_ms {
            trial.abort(AbortReason::TimeLimit);
            break;
        }
        let views = scan(trial, cfg, &grid, observe)?;
        if trial.is_over() {
            break;
        }

        // Report an obstacle heard straight ahead.
        if let Some(ahead) = views.iter().find(|v| v.yaw_deg == 0.0) {
            if ahead.central_load() > 0 {
                hold_camera(trial, 0.0, cfg.scan_pitch_deg);
                trial.mark();
            }
        }

        let course = choose_course(trial, cfg, &views, blocked);
        turn_to(trial, course, cfg, observe);
        blocked = (!walk(trial, cfg, stride_ticks, observe)).then_some(course);
    }
    Ok(())
}

type Observer<'a> = &'a mut dyn FnMut(&Trial);

fn tick(trial: &mut Trial, dt_ms: u32, observe: Observer) {
    trial.advance(dt_ms);
    observe(trial);
}

fn hold_camera(trial: &mut Trial, yaw: f64, pitch: f64) {
    let c = Control {
        forward: 0,
        turn: 0,
        cam_yaw_deg: yaw,
        cam_pitch_deg: pitch,
    };
    trial.set_control(c);
}

fn scan(trial: &mut Trial, cfg: &PolicyConfig, grid: &GridSpec, observe: Observer) -> crate::Result<Vec<View>> {
    let mut views = Vec::with_capacity(cfg.scan_yaws_deg.len());
    for &yaw in &cfg.scan_yaws_deg {
        hold_camera(trial, yaw, cfg.scan_pitch_deg);
        tick(trial, cfg.scan_dwell_ms, observe);
        let frame = trial.render(&cfg.camera);
        let activations = pipeline::frame_activations(&frame, &cfg.filter, grid)?;
        views.push(View {
            yaw_deg: yaw,
            course_deg: wrap_degrees(trial.pose().heading_deg + yaw),
            activations,
        });
    }
    hold_camera(trial, 0.0, cfg.scan_pitch_deg);
    Ok(views)
}

/// Whether walking a stride along `course` keeps clear of the side walls.
fn wall_safe(trial: &Trial, cfg: &PolicyConfig, course: f64) -> bool {
    let y = trial.pose().y + cfg.stride_m * libm::sin(course.to_radians());
    y >= cfg.wall_margin_m && y <= CORRIDOR_WIDTH_M - cfg.wall_margin_m
}

fn choose_course(trial: &Trial, cfg: &PolicyConfig, views: &[View], blocked: Option<f64>) -> f64 {
    let allowed: Vec<bool> = views
        .iter()
        .map(|v| {
            libm::fabs(v.course_deg) <= cfg.max_course_deg
                && wall_safe(trial, cfg, v.course_deg)
                && blocked.is_none_or(|b| libm::fabs(wrap_degrees(v.course_deg - b)) > BLOCKED_CONE_DEG)
        })
        .collect();

    // Runs of consecutive quiet, allowed views: (start, len).
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < views.len() {
        if allowed[i] && views[i].central_load() == 0 {
            let start = i;
            while i < views.len() && allowed[i] && views[i].central_load() == 0 {
                i += 1;
            }
            runs.push((start, i - start));
        } else {
            i += 1;
        }
    }

    let pick_in_run = |(start, len): (usize, usize)| -> f64 {
        // Stay off the edges of a wide run; they border a sounding sector.
        let (lo, hi) = if len >= 3 { (start + 1, start + len - 1) } else { (start, start + len) };
        views[lo..hi]
            .iter()
            .map(|v| v.course_deg)
            .min_by(|a, b| libm::fabs(*a).total_cmp(&libm::fabs(*b)))
            .expect("non-empty run")
    };

    let best_run = runs.iter().copied().max_by(|a, b| {
        let score = |r: (usize, usize)| r.1 as f64 - libm::fabs(pick_in_run(r)) / 30.0;
        score(*a).total_cmp(&score(*b)).then(b.0.cmp(&a.0))
    });
    if let Some(run) = best_run {
        return pick_in_run(run);
    }

    // Nothing quiet: take the least loud allowed view, or head down the
    // corridor when even that is unavailable.
    views
        .iter()
        .zip(&allowed)
        .filter(|(_, &ok)| ok)
        .min_by(|(a, _), (b, _)| {
            a.central_load()
                .cmp(&b.central_load())
                .then(libm::fabs(a.course_deg).total_cmp(&libm::fabs(b.course_deg)))
        })
        .map(|(v, _)| v.course_deg)
        .unwrap_or_else(|| {
            let y = trial.pose().y;
            if y < cfg.wall_margin_m {
                45.0
            } else if y > CORRIDOR_WIDTH_M - cfg.wall_margin_m {
                -45.0
            } else {
                0.0
            }
        })
}

fn turn_to(trial: &mut Trial, course: f64, cfg: &PolicyConfig, observe: Observer) {
    let delta = wrap_degrees(course - trial.pose().heading_deg);
    if delta == 0.0 {
        return;
    }
    let total_ms = libm::round(libm::fabs(delta) / TURN_RATE_DEG_S * 1000.0) as u32;
    let turn = if delta > 0.0 { 1 } else { -1 };
    let mut control = trial.control();
    control.turn = turn;
    control.forward = 0;
    trial.set_control(control);
    let mut left = total_ms;
    while left > 0 && !trial.is_over() {
        let dt = left.min(cfg.tick_ms);
        tick(trial, dt, observe);
        left -= dt;
    }
    control.turn = 0;
    trial.set_control(control);
}

/// Walks one stride; `false` when a bump cut it short.
fn walk(trial: &mut Trial, cfg: &PolicyConfig, ticks: u32, observe: Observer) -> bool {
    let mut control = trial.control();
    control.forward = 1;
    trial.set_control(control);
    let mut clear = true;
    for _ in 0..ticks {
        if trial.is_over() {
            return true;
        }
        let before = (trial.pose().x, trial.pose().y);
        tick(trial, cfg.tick_ms, observe);
        if (trial.pose().x, trial.pose().y) == before {
            // Blocked: step back a little before the next scan.
            control.forward = -1;
            trial.set_control(control);
            for _ in 0..3 {
                tick(trial, cfg.tick_ms, observe);
            }
            clear = false;
            break;
        }
    }
    control.forward = 0;
    trial.set_control(control);
    clear
}
