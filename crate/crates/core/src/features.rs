//! ROI sampling: the stacked Canny layer vector and the plain cell HoG.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imaging::{canny, sobel_plane, to_gray, CannyParams, RgbImage};

/// Driving behavior over a short frame window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BehaviorLabel {
    Keep,
    ChangeLeft,
    ChangeRight,
    Unknown,
}

impl BehaviorLabel {
    pub const ALL: [BehaviorLabel; 4] = [
        BehaviorLabel::Keep,
        BehaviorLabel::ChangeLeft,
        BehaviorLabel::ChangeRight,
        BehaviorLabel::Unknown,
    ];

    /// Numeric class code used in dataset files.
    pub fn code(self) -> i32 {
        match self {
            BehaviorLabel::Keep => 0,
            BehaviorLabel::ChangeLeft => 1,
            BehaviorLabel::ChangeRight => 2,
            BehaviorLabel::Unknown => 3,
        }
    }

    pub fn from_code(code: i32) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            BehaviorLabel::Keep => "Keep",
            BehaviorLabel::ChangeLeft => "ChangeLeft",
            BehaviorLabel::ChangeRight => "ChangeRight",
            BehaviorLabel::Unknown => "Unknown",
        }
    }

    /// Column heading used in confusion tables.
    pub fn short_name(self) -> &'static str {
        match self {
            BehaviorLabel::Keep => "Keep",
            BehaviorLabel::ChangeLeft => "Left",
            BehaviorLabel::ChangeRight => "Right",
            BehaviorLabel::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for BehaviorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BehaviorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::param(format!("unknown label {s:?}")))
    }
}

/// Keep when the lateral shift stays under half a lane, otherwise the
/// direction of the shift. Offsets are in lane-width units.
pub fn label_of_transition(prev_lane_offset: f64, next_lane_offset: f64) -> BehaviorLabel {
    let delta = next_lane_offset - prev_lane_offset;
    if delta <= -0.5 {
        BehaviorLabel::ChangeLeft
    } else if delta >= 0.5 {
        BehaviorLabel::ChangeRight
    } else {
        BehaviorLabel::Keep
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// Sampling geometry: a rectangle in the frame holding four horizontal
/// layers, top (farthest, 30 m) to bottom (nearest, 1 m).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiSpec {
    pub rect: Rect,
    /// Row offsets of the layers relative to `rect.y`, strictly increasing.
    pub layer_rows: [usize; 4],
    pub layer_height: usize,
}

impl Default for RoiSpec {
    /// 400×110 rectangle centered horizontally in the lower third of a
    /// 1920×1080 frame.
    fn default() -> Self {
        Self {
            rect: Rect {
                x: 760,
                y: 720,
                width: 400,
                height: 110,
            },
            layer_rows: [0, 28, 56, 86],
            layer_height: 10,
        }
    }
}

impl RoiSpec {
    /// Checks the layer layout on its own.
    pub fn validate_layers(&self) -> Result<()> {
        if self.rect.width == 0 || self.rect.height == 0 || self.layer_height == 0 {
            return Err(Error::param("roi rectangle and layers must be non-empty"));
        }
        if self.layer_rows.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param(format!(
                "layer rows must be strictly increasing, got {:?}",
                self.layer_rows
            )));
        }
        let last = self.layer_rows[3] + self.layer_height;
        if last > self.rect.height {
            return Err(Error::param(format!(
                "layer at row {} with height {} exceeds roi height {}",
                self.layer_rows[3], self.layer_height, self.rect.height
            )));
        }
        Ok(())
    }

    pub fn validate_for(&self, frame_width: usize, frame_height: usize) -> Result<()> {
        self.validate_layers()?;
        let r = self.rect;
        if r.x + r.width > frame_width || r.y + r.height > frame_height {
            return Err(Error::RoiOutOfBounds(format!(
                "roi ({}, {}, {}, {}) exceeds {frame_width}x{frame_height} frame",
                r.x, r.y, r.width, r.height
            )));
        }
        Ok(())
    }

    pub fn canny_dim(&self) -> usize {
        4 * self.layer_height * self.rect.width
    }

    /// Top-left aligned HoG window: the rect shrunk to whole cells.
    pub fn hog_window(&self, cell: usize) -> Result<(usize, usize)> {
        if cell == 0 || cell > self.rect.width || cell > self.rect.height {
            return Err(Error::param(format!(
                "hog cell {cell} does not fit the {}x{} roi",
                self.rect.width, self.rect.height
            )));
        }
        Ok((
            self.rect.width / cell * cell,
            self.rect.height / cell * cell,
        ))
    }

    pub fn hog_dim(&self, hog: &HogParams) -> Result<usize> {
        let (w, h) = self.hog_window(hog.cell)?;
        Ok(w / hog.cell * (h / hog.cell) * hog.bins)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HogParams {
    pub cell: usize,
    pub bins: usize,
}

impl Default for HogParams {
    fn default() -> Self {
        Self { cell: 16, bins: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FeatureKind {
    CannyStack,
    #[default]
    Hog,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::CannyStack => "canny",
            FeatureKind::Hog => "hog",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canny" => Ok(FeatureKind::CannyStack),
            "hog" => Ok(FeatureKind::Hog),
            other => Err(Error::param(format!("unknown feature kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub kind: FeatureKind,
    pub label: Option<BehaviorLabel>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_label(mut self, label: BehaviorLabel) -> Self {
        self.label = Some(label);
        self
    }
}

/// Canny on the whole ROI, then the four layer bands concatenated row by
/// row, top layer first. Values are 0 or 1.
pub fn extract_canny_stack(
    frame: &RgbImage,
    roi: &RoiSpec,
    params: &CannyParams,
) -> Result<FeatureVector> {
    roi.validate_for(frame.width(), frame.height())?;
    let r = roi.rect;
    let gray = to_gray(&frame.crop(r.x, r.y, r.width, r.height)?);
    let edges = canny(&gray, params)?;
    let mut values = Vec::with_capacity(roi.canny_dim());
    for &top in &roi.layer_rows {
        let start = top * r.width;
        let end = (top + roi.layer_height) * r.width;
        values.extend(edges.data[start..end].iter().map(|&v| f64::from(v)));
    }
    Ok(FeatureVector {
        values,
        kind: FeatureKind::CannyStack,
        label: None,
    })
}

/// Unnormalized cell histograms over a real-valued plane. Each pixel adds
/// its full gradient magnitude to the nearest of `bins` orientation bins
/// centered at `k·π/bins`. Cells are emitted row-major.
pub fn hog_from_plane(
    width: usize,
    height: usize,
    plane: &[f64],
    params: &HogParams,
) -> Result<Vec<f64>> {
    if params.bins == 0 {
        return Err(Error::param("hog needs at least one bin"));
    }
    if params.cell == 0 || params.cell > width || params.cell > height {
        return Err(Error::param(format!(
            "hog cell {} larger than {width}x{height} window",
            params.cell
        )));
    }
    if width % params.cell != 0 || height % params.cell != 0 {
        return Err(Error::param(format!(
            "hog cell {} does not divide {width}x{height} window",
            params.cell
        )));
    }
    let grad = sobel_plane(width, height, plane)?;
    let cells_x = width / params.cell;
    let cells_y = height / params.cell;
    let bin_width = PI / params.bins as f64;
    let mut hist = vec![0.0; cells_x * cells_y * params.bins];
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let bin = (grad.orientation[i] / bin_width).round() as usize % params.bins;
            let cell = (y / params.cell) * cells_x + x / params.cell;
            hist[cell * params.bins + bin] += grad.magnitude[i];
        }
    }
    Ok(hist)
}

pub fn extract_hog(frame: &RgbImage, roi: &RoiSpec, params: &HogParams) -> Result<FeatureVector> {
    roi.validate_for(frame.width(), frame.height())?;
    let (w, h) = roi.hog_window(params.cell)?;
    let r = roi.rect;
    let gray = to_gray(&frame.crop(r.x, r.y, w, h)?);
    let values = hog_from_plane(w, h, &gray.to_plane(), params)?;
    Ok(FeatureVector {
        values,
        kind: FeatureKind::Hog,
        label: None,
    })
}
