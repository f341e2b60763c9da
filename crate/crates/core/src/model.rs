//! Value types shared by every stage: frames, clips, per-pixel maps and
//! stereo rig parameters.
//!
//! All types validate on construction and are immutable afterwards apart
//! from explicit `*_mut` accessors used by the algorithms in this crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An interleaved, row-major image with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl FrameBuffer {
    /// Builds a frame, clamping every value into `[0, 1]`.
    ///
    /// Non-finite values are rejected rather than clamped.
    pub fn new(width: usize, height: usize, channels: usize, mut data: Vec<f32>) -> Result<Self> {
        check_dims(width, height)?;
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "frame data has {} values, expected {expected}",
                data.len()
            )));
        }
        for (index, v) in data.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(FrameBuffer {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Maps each byte `k` to `k / 255`.
    pub fn from_u8(width: usize, height: usize, channels: usize, data: &[u8]) -> Result<Self> {
        let data = data.iter().map(|&k| f32::from(k) / 255.0).collect();
        Self::new(width, height, channels, data)
    }

    pub fn from_u16(width: usize, height: usize, channels: usize, data: &[u16]) -> Result<Self> {
        let data = data.iter().map(|&k| f32::from(k) / 65535.0).collect();
        Self::new(width, height, channels, data)
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| (v * 255.0).round() as u8).collect()
    }

    pub fn to_u16(&self) -> Vec<u16> {
        self.data.iter().map(|&v| (v * 65535.0).round() as u16).collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Channel values of pixel `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn row(&self, y: usize) -> &[f32] {
        let stride = self.width * self.channels;
        &self.data[y * stride..(y + 1) * stride]
    }

    pub fn same_shape(&self, other: &FrameBuffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Copies the rectangle `[x0, x1) x [y0, y1)`.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<FrameBuffer> {
        if x0 >= x1 || y0 >= y1 || x1 > self.width || y1 > self.height {
            return Err(Error::InvalidArgument(format!(
                "crop [{x0},{x1})x[{y0},{y1}) outside {}x{}",
                self.width, self.height
            )));
        }
        let c = self.channels;
        let mut data = Vec::with_capacity((x1 - x0) * (y1 - y0) * c);
        for y in y0..y1 {
            data.extend_from_slice(&self.row(y)[x0 * c..x1 * c]);
        }
        Ok(FrameBuffer {
            width: x1 - x0,
            height: y1 - y0,
            channels: c,
            data,
        })
    }

    /// Constructs without re-validating. Callers guarantee finite values in
    /// `[0, 1]` and a matching length.
    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        FrameBuffer {
            width,
            height,
            channels,
            data,
        }
    }
}

/// An ordered, non-empty run of frames that share one shape.
#[derive(Clone, Debug, PartialEq)]
pub struct VideoClip {
    frames: Vec<FrameBuffer>,
    pub fps: Option<f64>,
}

impl VideoClip {
    pub fn new(frames: Vec<FrameBuffer>) -> Result<Self> {
        let first = frames.first().ok_or(Error::Empty("video clip"))?;
        if let Some((i, f)) = frames.iter().enumerate().find(|(_, f)| !f.same_shape(first)) {
            return Err(Error::DimensionMismatch(format!(
                "frame {i} is {}x{}x{}, frame 0 is {}x{}x{}",
                f.width(),
                f.height(),
                f.channels(),
                first.width(),
                first.height(),
                first.channels()
            )));
        }
        Ok(VideoClip { frames, fps: None })
    }

    pub fn with_fps(mut self, fps: f64) -> Self {
        self.fps = Some(fps);
        self
    }

    pub fn frames(&self) -> &[FrameBuffer] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<FrameBuffer> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn channels(&self) -> usize {
        self.frames[0].channels()
    }
}

/// Signed horizontal offsets in pixels: a source pixel at `x` lands at
/// `x + d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

/// Per-pixel splat priority. Larger values win blending ties.
pub type PriorityMap = DisparityMap;

impl DisparityMap {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "map has {} values, expected {}",
                values.len(),
                width * height
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(DisparityMap { width, height, values })
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.values[y * self.width..(y + 1) * self.width]
    }

    /// Pointwise `f(d)`; `f` must keep values finite.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Result<DisparityMap> {
        DisparityMap::new(self.width, self.height, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn crop_columns(&self, x0: usize, x1: usize) -> Result<DisparityMap> {
        if x0 >= x1 || x1 > self.width {
            return Err(Error::InvalidArgument(format!(
                "column range [{x0},{x1}) outside width {}",
                self.width
            )));
        }
        let values = (0..self.height)
            .flat_map(|y| self.row(y)[x0..x1].iter().copied())
            .collect();
        Ok(DisparityMap {
            width: x1 - x0,
            height: self.height,
            values,
        })
    }

    pub fn matches(&self, frame: &FrameBuffer) -> bool {
        self.width == frame.width() && self.height == frame.height()
    }
}

/// Per-pixel hole flags; `true` marks a disoccluded pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OcclusionMask {
    width: usize,
    height: usize,
    values: Vec<bool>,
}

impl OcclusionMask {
    pub fn new(width: usize, height: usize, values: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} values, expected {}",
                values.len(),
                width * height
            )));
        }
        Ok(OcclusionMask { width, height, values })
    }

    /// A mask with no holes.
    pub fn empty(width: usize, height: usize) -> Self {
        OcclusionMask {
            width,
            height,
            values: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.values[y * self.width + x]
    }

    pub fn hole_count(&self) -> usize {
        self.values.iter().filter(|&&h| h).count()
    }

    pub fn is_clear(&self) -> bool {
        !self.values.iter().any(|&h| h)
    }

    pub fn matches(&self, frame: &FrameBuffer) -> bool {
        self.width == frame.width() && self.height == frame.height()
    }

    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<OcclusionMask> {
        if x0 >= x1 || y0 >= y1 || x1 > self.width || y1 > self.height {
            return Err(Error::InvalidArgument(format!(
                "crop [{x0},{x1})x[{y0},{y1}) outside {}x{}",
                self.width, self.height
            )));
        }
        let values = (y0..y1)
            .flat_map(|y| self.values[y * self.width + x0..y * self.width + x1].iter().copied())
            .collect();
        Ok(OcclusionMask {
            width: x1 - x0,
            height: y1 - y0,
            values,
        })
    }

    /// Square (Chebyshev) dilation by `radius` pixels.
    pub fn dilate(&self, radius: usize) -> OcclusionMask {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width, self.height);
        // Separable: a square structuring element is a row max then a column max.
        let mut horizontal = vec![false; w * h];
        for y in 0..h {
            let row = &self.values[y * w..(y + 1) * w];
            for x in 0..w {
                let lo = x.saturating_sub(radius);
                let hi = (x + radius).min(w - 1);
                horizontal[y * w + x] = row[lo..=hi].iter().any(|&v| v);
            }
        }
        let mut values = vec![false; w * h];
        for y in 0..h {
            let lo = y.saturating_sub(radius);
            let hi = (y + radius).min(h - 1);
            for x in 0..w {
                values[y * w + x] = (lo..=hi).any(|yy| horizontal[yy * w + x]);
            }
        }
        OcclusionMask {
            width: w,
            height: h,
            values,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StereoDirection {
    /// Synthesize the right view from a left input.
    LeftToRight,
    /// Synthesize the left view from a right input.
    RightToLeft,
}

/// Maps normalized inverse depth to pixel disparity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StereoParams {
    max_disparity_px: f32,
    convergence: f32,
    direction: StereoDirection,
}

impl StereoParams {
    pub fn new(max_disparity_px: f32, convergence: f32, direction: StereoDirection) -> Result<Self> {
        if !(max_disparity_px.is_finite() && max_disparity_px > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "max disparity must be > 0, got {max_disparity_px}"
            )));
        }
        if !(0.0..=1.0).contains(&convergence) {
            return Err(Error::InvalidArgument(format!(
                "convergence must lie in [0, 1], got {convergence}"
            )));
        }
        Ok(StereoParams {
            max_disparity_px,
            convergence,
            direction,
        })
    }

    pub fn max_disparity_px(&self) -> f32 {
        self.max_disparity_px
    }

    pub fn convergence(&self) -> f32 {
        self.convergence
    }

    pub fn direction(&self) -> StereoDirection {
        self.direction
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}
