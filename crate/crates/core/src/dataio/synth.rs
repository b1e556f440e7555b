//! Synthetic forward-camera road scenes with known ground truth.
//!
//! A flat straight road seen through a pinhole camera: a ground line at
//! lateral position `X` (pixels at the bottom row) projects to
//! `x(y) = vx + heading·(1 − s) + s·X` with `s = (y − vy) / (H − 1 − vy)`,
//! so every marker converges on the vanishing point. Four markers bound
//! three lanes; the outer two are solid, the inner two dashed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::features::{label_of_transition, BehaviorLabel, Rect, RoiSpec};
use crate::imaging::RgbImage;

const SKY: [f64; 3] = [150.0, 180.0, 215.0];
const ASPHALT: [f64; 3] = [70.0, 70.0, 72.0];
const GRASS: [f64; 3] = [62.0, 98.0, 50.0];
const PAINT: [f64; 3] = [235.0, 235.0, 225.0];

/// Marker width as a fraction of the lane width.
const MARKER_WIDTH: f64 = 0.06;
/// Road shoulder beyond the outer markers, in lane widths.
const SHOULDER: f64 = 0.25;
/// Dash travel per frame, as a fraction of the dash period.
const DASH_SPEED: f64 = 1.0 / 6.0;
/// Vanishing-point shift in lane widths per lane-per-frame of lateral speed.
const HEADING_GAIN: f64 = 4.0;
const KEEP_JITTER: f64 = 0.04;
const KEEP_JITTER_PERIOD: f64 = 25.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub width: usize,
    pub height: usize,
    /// Lane width in pixels at the bottom row.
    pub lane_width: f64,
    pub vanishing_point: (f64, f64),
    /// Dash cycle length in bottom-row pixels.
    pub marker_period: f64,
    /// Lateral displacement of the markings relative to the camera, in lane
    /// widths; the negated ego position.
    pub lateral_offset: f64,
    /// Horizontal shift of the vanishing point in pixels (ego yaw).
    pub heading: f64,
    /// `false` renders an unmarked road, as at an intersection.
    pub markers: bool,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            width: 512,
            height: 288,
            lane_width: 260.0,
            vanishing_point: (256.0, 120.0),
            marker_period: 120.0,
            lateral_offset: 0.0,
            heading: 0.0,
            markers: true,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height < 2 {
            return Err(Error::param("scene frame is too small"));
        }
        if !(self.lane_width > 0.0) || !(self.marker_period > 0.0) {
            return Err(Error::param("lane width and marker period must be positive"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::param("noise sigma must be non-negative"));
        }
        let (_, vy) = self.vanishing_point;
        if !(vy < (self.height - 1) as f64) {
            return Err(Error::param("vanishing point must lie above the bottom row"));
        }
        Ok(())
    }

    /// Full-HD scene whose road fills the default region of interest.
    pub fn full_hd() -> Self {
        Self {
            width: 1920,
            height: 1080,
            lane_width: 900.0,
            vanishing_point: (960.0, 540.0),
            marker_period: 420.0,
            ..Self::default()
        }
    }

    /// Bottom-row x of marker `k` (−2..=1, left to right) relative to the
    /// vanishing-point column.
    pub fn marker_bottom_x(&self, k: i32) -> f64 {
        (f64::from(k) + 0.5 + self.lateral_offset) * self.lane_width
    }
}

fn shade(base: [f64; 3]) -> [u8; 3] {
    base.map(|c| c.round() as u8)
}

/// Renders frame `t`; `t` drives the dash motion and the noise stream.
pub fn render_scene(params: &SceneParams, t: usize) -> Result<RgbImage> {
    params.validate()?;
    let (w, h) = (params.width, params.height);
    let (vx, vy) = params.vanishing_point;
    let bottom = (h - 1) as f64 - vy;
    let lane = params.lane_width;
    let period = params.marker_period;
    let travel = t as f64 * DASH_SPEED * period;
    let markers: Vec<(f64, bool)> = (-2..=1)
        .map(|k| (params.marker_bottom_x(k), k == -2 || k == 1))
        .collect();
    let road_left = params.marker_bottom_x(-2) - SHOULDER * lane;
    let road_right = params.marker_bottom_x(1) + SHOULDER * lane;

    let mut img = RgbImage::filled(w, h, shade(SKY))?;
    for y in 0..h {
        let dy = y as f64 - vy;
        if dy <= 0.0 {
            continue;
        }
        let s = dy / bottom;
        let shift = params.heading * (1.0 - s);
        let depth = bottom * bottom / dy;
        let dash_on = (depth + travel).rem_euclid(period) < 0.5 * period;
        let half = 0.5 * s * lane * MARKER_WIDTH;
        for x in 0..w {
            let d = x as f64 - vx;
            let color = if !params.markers {
                ASPHALT
            } else if d - shift < s * road_left || d - shift > s * road_right {
                GRASS
            } else if markers
                .iter()
                .any(|&(mx, solid)| (solid || dash_on) && (d - shift - s * mx).abs() <= half)
            {
                PAINT
            } else {
                ASPHALT
            };
            img.set_pixel(x, y, shade(color));
        }
    }

    if params.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(t as u64);
        let normal = Normal::new(0.0, params.noise_sigma)
            .map_err(|e| Error::param(format!("noise: {e}")))?;
        let mut data = img.into_raw();
        for px in data.chunks_exact_mut(3) {
            let n: f64 = normal.sample(&mut rng);
            for c in px.iter_mut() {
                *c = (f64::from(*c) + n).round().clamp(0.0, 255.0) as u8;
            }
        }
        img = RgbImage::new(w, h, data)?;
    }
    Ok(img)
}

/// Default-sized sampling region (400×110) centered on the vanishing-point
/// column, starting 30 % of the way from the horizon to the bottom row.
pub fn roi_for(params: &SceneParams) -> Result<RoiSpec> {
    let base = RoiSpec::default();
    let (vx, vy) = params.vanishing_point;
    let x = (vx - base.rect.width as f64 / 2.0).round();
    let y = (vy + 0.3 * ((params.height - 1) as f64 - vy)).round();
    if x < 0.0 || y < 0.0 {
        return Err(Error::RoiOutOfBounds(format!("vanishing point {vx},{vy} too close to the frame edge")));
    }
    let roi = RoiSpec {
        rect: Rect {
            x: x as usize,
            y: y as usize,
            ..base.rect
        },
        ..base
    };
    roi.validate_for(params.width, params.height)?;
    Ok(roi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trajectory {
    Keep,
    LeftChange,
    RightChange,
    Intersection,
}

impl Trajectory {
    pub const ALL: [Trajectory; 4] = [
        Trajectory::Keep,
        Trajectory::LeftChange,
        Trajectory::RightChange,
        Trajectory::Intersection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Trajectory::Keep => "keep",
            Trajectory::LeftChange => "left",
            Trajectory::RightChange => "right",
            Trajectory::Intersection => "intersection",
        }
    }
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Trajectory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::param(format!("unknown trajectory {s:?}")))
    }
}

/// One frame of a generated sequence, rendered on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFrame {
    /// Index of the plan segment this frame came from.
    pub segment: usize,
    pub t: usize,
    pub scene: SceneParams,
    /// Ego lateral position in lane widths, negative to the left.
    pub ego_offset: f64,
    pub label: BehaviorLabel,
}

impl SyntheticFrame {
    pub fn render(&self) -> Result<RgbImage> {
        render_scene(&self.scene, self.t)
    }
}

/// Ego position and lateral speed (lanes per frame) at frame `t`.
fn ego_motion(trajectory: Trajectory, t: f64, n: usize, phase: f64) -> (f64, f64) {
    let sweep = (n as f64 / 2.0).max(1.0);
    let start = n as f64 / 4.0;
    let eased = |dir: f64| {
        let s = ((t - start) / sweep).clamp(0.0, 1.0);
        let pos = dir * (1.0 - (PI * s).cos()) / 2.0;
        let speed = if s > 0.0 && s < 1.0 {
            dir * PI / (2.0 * sweep) * (PI * s).sin()
        } else {
            0.0
        };
        (pos, speed)
    };
    match trajectory {
        Trajectory::Keep => {
            let w = 2.0 * PI / KEEP_JITTER_PERIOD;
            (
                KEEP_JITTER * (w * t + phase).sin(),
                KEEP_JITTER * w * (w * t + phase).cos(),
            )
        }
        Trajectory::LeftChange => eased(-1.0),
        Trajectory::RightChange => eased(1.0),
        Trajectory::Intersection => (0.0, 0.0),
    }
}

/// Frames of one maneuver. Lane changes ease the ego position from 0 to ∓1
/// over the middle half of the sequence; labels compare positions half a
/// window apart on either side of each frame.
pub fn generate_sequence(
    params: &SceneParams,
    trajectory: Trajectory,
    n_frames: usize,
) -> Result<Vec<SyntheticFrame>> {
    params.validate()?;
    if n_frames == 0 {
        return Err(Error::param("a sequence needs at least one frame"));
    }
    let phase = ChaCha8Rng::seed_from_u64(params.seed).random_range(0.0..2.0 * PI);
    let half_window = ((n_frames / 2) / 4).max(1);
    let position = |t: usize| ego_motion(trajectory, t as f64, n_frames, phase).0;
    (0..n_frames)
        .map(|t| {
            let (pos, speed) = ego_motion(trajectory, t as f64, n_frames, phase);
            let label = if trajectory == Trajectory::Intersection {
                BehaviorLabel::Unknown
            } else {
                let before = position(t.saturating_sub(half_window));
                let after = position((t + half_window).min(n_frames - 1));
                label_of_transition(before, after)
            };
            let scene = SceneParams {
                lateral_offset: -pos,
                heading: -HEADING_GAIN * params.lane_width * speed,
                markers: trajectory != Trajectory::Intersection,
                ..params.clone()
            };
            Ok(SyntheticFrame {
                segment: 0,
                t,
                scene,
                ego_offset: pos,
                label,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub trajectory: Trajectory,
    pub frames: usize,
}

/// Parses `keep:40,left:40,intersection:20`.
pub fn parse_plan(text: &str) -> Result<Vec<Segment>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (name, count) = s
                .split_once(':')
                .ok_or_else(|| Error::param(format!("plan segment {s:?} needs `name:frames`")))?;
            let frames = count
                .trim()
                .parse()
                .map_err(|_| Error::param(format!("bad frame count in {s:?}")))?;
            Ok(Segment {
                trajectory: name.trim().parse()?,
                frames,
            })
        })
        .collect()
}

/// Renders a whole plan. Each segment gets its own lane width (±15 %),
/// vanishing-point column (±24 px), dash phase and noise seed, all derived
/// from `base.seed` and the segment index.
pub fn plan_frames(base: &SceneParams, plan: &[Segment]) -> Result<Vec<SyntheticFrame>> {
    let mut out = Vec::new();
    for (i, seg) in plan.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(base.seed);
        rng.set_stream(i as u64 + 1);
        let params = SceneParams {
            lane_width: base.lane_width * rng.random_range(0.85..1.15),
            vanishing_point: (
                base.vanishing_point.0 + rng.random_range(-24i32..=24) as f64,
                base.vanishing_point.1,
            ),
            seed: rng.next_u64(),
            ..base.clone()
        };
        let t0 = rng.random_range(0..1000usize);
        for mut frame in generate_sequence(&params, seg.trajectory, seg.frames)? {
            frame.t += t0;
            frame.segment = i;
            out.push(frame);
        }
    }
    Ok(out)
}

/// Enough segments of each trajectory for `per_class` frames of every
/// label, interleaved keep, left, right, intersection.
pub fn balanced_plan(per_class: usize, frames_per_segment: usize) -> Result<Vec<Segment>> {
    let probe = generate_sequence(&SceneParams::default(), Trajectory::LeftChange, frames_per_segment)?;
    let changes = probe.iter().filter(|f| f.label == BehaviorLabel::ChangeLeft).count();
    if changes == 0 {
        return Err(Error::param(format!(
            "{frames_per_segment}-frame segments are too short to contain a lane change"
        )));
    }
    let change_segments = per_class.div_ceil(changes);
    let steady_segments = per_class.div_ceil(frames_per_segment);
    let mut plan = Vec::new();
    for i in 0..change_segments.max(steady_segments) {
        for trajectory in Trajectory::ALL {
            let needed = match trajectory {
                Trajectory::Keep | Trajectory::Intersection => steady_segments,
                _ => change_segments,
            };
            if i < needed {
                plan.push(Segment {
                    trajectory,
                    frames: frames_per_segment,
                });
            }
        }
    }
    Ok(plan)
}

/// Indices of `per_class` frames per label, evenly spaced over each label's
/// occurrences, returned in frame order.
pub fn select_balanced(frames: &[SyntheticFrame], per_class: usize) -> Result<Vec<usize>> {
    let mut picked = Vec::new();
    for label in BehaviorLabel::ALL {
        let idx: Vec<usize> = (0..frames.len()).filter(|&i| frames[i].label == label).collect();
        if idx.len() < per_class {
            return Err(Error::param(format!(
                "only {} {label} frames, {per_class} requested",
                idx.len()
            )));
        }
        picked.extend((0..per_class).map(|k| idx[k * idx.len() / per_class]));
    }
    picked.sort_unstable();
    Ok(picked)
}
