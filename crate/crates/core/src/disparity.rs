//! Depth-to-disparity conversion, disparity statistics and the parallax
//! alignment used when preparing stereo training pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DisparityMap, FrameBuffer, StereoDirection, StereoParams, VideoClip};

/// Normalized inverse depth in `[0, 1]`; 1 is the nearest surface.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "depth map {width}x{height} with {} values",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "depth value {} at index {index} outside [0, 1]",
                values[index]
            )));
        }
        Ok(DepthMap { width, height, values })
    }

    /// Reads the first channel of a grayscale frame as depth.
    pub fn from_frame(frame: &FrameBuffer) -> Result<Self> {
        let c = frame.channels();
        let values = frame.data().iter().step_by(c).copied().collect();
        DepthMap::new(frame.width(), frame.height(), values)
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
}

/// Converts depth to disparity around the convergence plane `c`:
/// `d = g (c - r)` when synthesizing the right view, `d = g (r - c)` for the
/// left view. Nearer content always moves towards the synthesized eye's
/// nasal side, so under left-to-right synthesis `-d` grows with nearness.
pub fn depth_to_disparity(depth: &DepthMap, params: &StereoParams) -> Result<DisparityMap> {
    let g = params.max_disparity_px();
    let c = params.convergence();
    let sign = match params.direction() {
        StereoDirection::LeftToRight => 1.0,
        StereoDirection::RightToLeft => -1.0,
    };
    let values = depth.values().iter().map(|&r| sign * g * (c - r)).collect();
    DisparityMap::new(depth.width(), depth.height(), values)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisparityStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

pub fn disparity_stats(maps: &[DisparityMap]) -> Result<DisparityStats> {
    if maps.is_empty() {
        return Err(Error::Empty("disparity clip"));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in maps.iter().flat_map(|m| m.values()) {
        let v = f64::from(*v);
        min = min.min(v);
        max = max.max(v);
        sum += v;
        count += 1;
    }
    Ok(DisparityStats {
        min,
        max,
        mean: sum / count as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub shift_px: usize,
    pub cropped_width: usize,
    pub original_max_disparity: f64,
    pub aligned_max_disparity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignedPair {
    pub left: VideoClip,
    pub right: VideoClip,
    pub disparity: Vec<DisparityMap>,
    pub report: AlignmentReport,
}

/// Shifts the right view left and crops the left view so that every
/// disparity (convention `x_right = x_left + d`) becomes non-positive with a
/// maximum within one pixel (plus `margin`) of zero.
///
/// The shift is `s = max(0, ceil(max d + margin))`. The left view keeps
/// columns `[0, W - s)`, the right view keeps `[s, W)` and the disparity is
/// reduced by `s` over the kept columns.
pub fn parallax_align(
    left: &VideoClip,
    right: &VideoClip,
    disparity: &[DisparityMap],
    margin: f32,
) -> Result<AlignedPair> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidArgument(format!("margin must be >= 0, got {margin}")));
    }
    if left.len() != right.len() || left.len() != disparity.len() {
        return Err(Error::DimensionMismatch(format!(
            "left {} frames, right {} frames, {} disparity maps",
            left.len(),
            right.len(),
            disparity.len()
        )));
    }
    if left.frames()[0].width() != right.width() || left.height() != right.height() {
        return Err(Error::DimensionMismatch(format!(
            "left {}x{}, right {}x{}",
            left.width(),
            left.height(),
            right.width(),
            right.height()
        )));
    }
    if let Some(i) = disparity.iter().position(|d| !d.matches(&left.frames()[0])) {
        return Err(Error::DimensionMismatch(format!(
            "disparity map {i} does not match frames"
        )));
    }

    let width = left.width();
    let stats = disparity_stats(disparity)?;
    let shift = (stats.max + f64::from(margin)).ceil().max(0.0);
    if shift >= width as f64 {
        return Err(Error::DisparityExceedsWidth {
            shift: shift as usize,
            width,
        });
    }
    let shift = shift as usize;
    if shift == 0 {
        return Ok(AlignedPair {
            left: left.clone(),
            right: right.clone(),
            disparity: disparity.to_vec(),
            report: AlignmentReport {
                shift_px: 0,
                cropped_width: width,
                original_max_disparity: stats.max,
                aligned_max_disparity: stats.max,
            },
        });
    }

    let kept = width - shift;
    let h = left.height();
    let crop_clip = |clip: &VideoClip, x0: usize| -> Result<VideoClip> {
        let frames = clip
            .frames()
            .iter()
            .map(|f| f.crop(x0, 0, x0 + kept, h))
            .collect::<Result<Vec<_>>>()?;
        let mut out = VideoClip::new(frames)?;
        out.fps = clip.fps;
        Ok(out)
    };
    let s = shift as f32;
    let disparity = disparity
        .iter()
        .map(|d| d.crop_columns(0, kept)?.map(|v| v - s))
        .collect::<Result<Vec<_>>>()?;
    let aligned = disparity_stats(&disparity)?;
    Ok(AlignedPair {
        left: crop_clip(left, 0)?,
        right: crop_clip(right, shift)?,
        disparity,
        report: AlignmentReport {
            shift_px: shift,
            cropped_width: kept,
            original_max_disparity: stats.max,
            aligned_max_disparity: aligned.max,
        },
    })
}
