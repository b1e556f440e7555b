//! Raster frames and the classical edge chain: grayscale, Gaussian blur,
//! Sobel gradients and Canny.
//!
//! Every filter replicates edge pixels at the border, so output dimensions
//! always equal input dimensions.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// An 8-bit RGB frame, row-major, three bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty frame {width}x{height}")));
        }
        if data.len() != width * height * 3 {
            return Err(Error::InvalidImage(format!(
                "expected {} bytes for {width}x{height} RGB, got {}",
                width * height * 3,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    /// A frame filled with one color.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Copies out the `w`×`h` block whose top-left corner is (`x`, `y`).
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::RoiOutOfBounds(format!(
                "crop ({x}, {y}, {w}, {h}) outside {}x{} frame",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h * 3);
        for row in y..y + h {
            let start = (row * self.width + x) * 3;
            data.extend_from_slice(&self.data[start..start + w * 3]);
        }
        Self::new(w, h, data)
    }
}

/// An 8-bit single-channel frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty frame {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} bytes for {width}x{height} gray, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    fn clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Replicates the gray value into all three channels.
    pub fn to_rgb(&self) -> RgbImage {
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        RgbImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::RoiOutOfBounds(format!(
                "crop ({x}, {y}, {w}, {h}) outside {}x{} frame",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h);
        for row in y..y + h {
            let start = row * self.width + x;
            data.extend_from_slice(&self.data[start..start + w]);
        }
        Self::new(w, h, data)
    }

    /// Intensities as reals, for the float gradient path.
    pub fn to_plane(&self) -> Vec<f64> {
        self.data.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Per-pixel gradient magnitude and unsigned orientation in `[0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub magnitude: Vec<f64>,
    pub orientation: Vec<f64>,
}

/// Binary edge raster; every value is 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl EdgeMap {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }
}

/// BT.601 luma, `0.299 R + 0.587 G + 0.114 B` rounded half up. Computed in
/// integers so exact halves are stable.
pub fn to_gray(img: &RgbImage) -> GrayImage {
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| {
            let y = 299 * u32::from(p[0]) + 587 * u32::from(p[1]) + 114 * u32::from(p[2]);
            ((y + 500) / 1000) as u8
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Normalized 1-D Gaussian taps of odd length `size`.
pub fn gaussian_taps(size: usize, sigma: f64) -> Result<Vec<f64>> {
    if size < 3 || size % 2 == 0 {
        return Err(Error::param(format!(
            "gaussian kernel size must be odd and >= 3, got {size}"
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("gaussian sigma must be > 0, got {sigma}")));
    }
    let r = (size / 2) as isize;
    let taps: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    Ok(taps.into_iter().map(|t| t / sum).collect())
}

/// Row-major `size`×`size` kernel, the outer product of [`gaussian_taps`].
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>> {
    let taps = gaussian_taps(size, sigma)?;
    Ok(taps
        .iter()
        .flat_map(|a| taps.iter().map(move |b| a * b))
        .collect())
}

pub fn gaussian_blur(img: &GrayImage, kernel_size: usize, sigma: f64) -> Result<GrayImage> {
    let kernel = gaussian_kernel(kernel_size, sigma)?;
    let r = (kernel_size / 2) as isize;
    let mut out = Vec::with_capacity(img.data.len());
    for y in 0..img.height as isize {
        for x in 0..img.width as isize {
            let mut acc = 0.0;
            let mut k = 0;
            for dy in -r..=r {
                for dx in -r..=r {
                    acc += kernel[k] * f64::from(img.clamped(x + dx, y + dy));
                    k += 1;
                }
            }
            out.push(acc.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(GrayImage {
        width: img.width,
        height: img.height,
        data: out,
    })
}

/// Folds `atan2(gy, gx)` into `[0, π)`.
pub fn unsigned_orientation(gx: f64, gy: f64) -> f64 {
    let mut theta = gy.atan2(gx);
    if theta < 0.0 {
        theta += PI;
    }
    if theta >= PI {
        theta -= PI;
    }
    // -0.0 and round-off right below zero
    if theta < 0.0 {
        0.0
    } else {
        theta
    }
}

/// 3×3 Sobel on a real-valued plane with edge replication.
pub fn sobel_plane(width: usize, height: usize, plane: &[f64]) -> Result<GradientField> {
    if width < 3 || height < 3 {
        return Err(Error::InvalidImage(format!(
            "sobel needs at least 3x3 pixels, got {width}x{height}"
        )));
    }
    if plane.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            actual: plane.len(),
        });
    }
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, width as isize - 1) as usize;
        let y = y.clamp(0, height as isize - 1) as usize;
        plane[y * width + x]
    };
    let mut magnitude = Vec::with_capacity(plane.len());
    let mut orientation = Vec::with_capacity(plane.len());
    for y in 0..height as isize {
        for x in 0..width as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            magnitude.push((gx * gx + gy * gy).sqrt());
            orientation.push(unsigned_orientation(gx, gy));
        }
    }
    Ok(GradientField {
        width,
        height,
        magnitude,
        orientation,
    })
}

pub fn sobel_gradients(img: &GrayImage) -> Result<GradientField> {
    sobel_plane(img.width, img.height, &img.to_plane())
}

/// Thresholds are applied to the Sobel magnitude divided by 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub low: f64,
    pub high: f64,
    pub blur_kernel: usize,
    pub blur_sigma: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            low: 50.0,
            high: 150.0,
            blur_kernel: 5,
            blur_sigma: 1.4,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.low >= 0.0) {
            return Err(Error::param(format!("canny low threshold {} < 0", self.low)));
        }
        if self.low > self.high {
            return Err(Error::param(format!(
                "canny low threshold {} exceeds high threshold {}",
                self.low, self.high
            )));
        }
        gaussian_taps(self.blur_kernel, self.blur_sigma).map(|_| ())
    }
}

pub const SOBEL_NORMALIZATION: f64 = 4.0;

/// Neighbor offsets along the gradient for each quantized direction
/// (0°, 45°, 90°, 135°) with the y axis pointing down.
const NMS_OFFSETS: [(isize, isize); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];

fn direction_sector(theta: f64) -> usize {
    ((theta / (PI / 4.0) + 0.5).floor() as usize) % 4
}

pub fn canny(img: &GrayImage, params: &CannyParams) -> Result<EdgeMap> {
    params.validate()?;
    let blurred = gaussian_blur(img, params.blur_kernel, params.blur_sigma)?;
    let grad = sobel_gradients(&blurred)?;
    let (w, h) = (grad.width, grad.height);
    let mag: Vec<f64> = grad
        .magnitude
        .iter()
        .map(|m| m / SOBEL_NORMALIZATION)
        .collect();
    let mag_at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        mag[y * w + x]
    };

    // 0 = suppressed, 1 = weak, 2 = strong
    let mut class = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 || m < params.low {
                continue;
            }
            let (dx, dy) = NMS_OFFSETS[direction_sector(grad.orientation[i])];
            let (xi, yi) = (x as isize, y as isize);
            if m >= mag_at(xi + dx, yi + dy) && m >= mag_at(xi - dx, yi - dy) {
                class[i] = if m >= params.high { 2 } else { 1 };
            }
        }
    }

    let mut edges = vec![0u8; w * h];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, &c) in class.iter().enumerate() {
        if c == 2 {
            edges[i] = 1;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if edges[j] == 0 && class[j] == 1 {
                    edges[j] = 1;
                    queue.push_back(j);
                }
            }
        }
    }

    Ok(EdgeMap {
        width: w,
        height: h,
        data: edges,
    })
}
