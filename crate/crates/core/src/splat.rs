//! Depth-aware forward splatting.
//!
//! Every source pixel is pushed to its continuous target position
//! `(x + d, y)` and distributed over the neighbouring integer pixels with
//! bilinear weights. When several sources land on one target their colours
//! are blended with an extra priority weight `sqrt(2)^(p - p_max)`, so nearer
//! content (higher priority) dominates. Targets that receive (almost) no
//! coverage are flagged in the occlusion mask.
//!
//! With horizontal-only offsets a target row only depends on the matching
//! source row, so rows are processed in parallel and contributions are
//! always accumulated in ascending source-x order. Results are therefore
//! independent of the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DisparityMap, FrameBuffer, OcclusionMask, PriorityMap, VideoClip};

#[derive(Clone, Debug, PartialEq)]
pub struct SplatOptions {
    /// Targets whose summed bilinear coverage falls below this are holes.
    pub coverage_threshold: f32,
    /// Lower clamp applied to `p - p_max` before exponentiation.
    pub exponent_floor: f64,
    /// Only affects [`forward_splat_frame_2d`]; the horizontal path is always
    /// deterministic.
    pub deterministic: bool,
    pub hole_fill_value: f32,
    pub mask_dilation_px: usize,
}

impl Default for SplatOptions {
    fn default() -> Self {
        SplatOptions {
            coverage_threshold: 1e-3,
            exponent_floor: -60.0,
            deterministic: true,
            hole_fill_value: 0.0,
            mask_dilation_px: 0,
        }
    }
}

impl SplatOptions {
    pub fn validate(&self) -> Result<()> {
        if self.coverage_threshold.is_nan() || self.coverage_threshold < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "coverage threshold must be >= 0, got {}",
                self.coverage_threshold
            )));
        }
        if self.exponent_floor.is_nan() || self.exponent_floor > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "exponent floor must be <= 0, got {}",
                self.exponent_floor
            )));
        }
        if !(0.0..=1.0).contains(&self.hole_fill_value) {
            return Err(Error::InvalidArgument(format!(
                "hole fill value must lie in [0, 1], got {}",
                self.hole_fill_value
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplatResult {
    pub warped: FrameBuffer,
    pub mask: OcclusionMask,
    /// Summed bilinear weight received by each target pixel.
    pub coverage: Vec<f32>,
}

/// `sqrt(2)^max(priority - priority_max, exponent_floor)`.
#[inline]
pub fn splat_weight(priority: f64, priority_max: f64, exponent_floor: f64) -> f64 {
    let exponent = (priority - priority_max).max(exponent_floor);
    (0.5 * exponent).exp2()
}

/// Accumulation buffers for one target region.
struct Accumulator {
    color: Vec<f64>,
    weight: Vec<f64>,
    coverage: Vec<f64>,
    channels: usize,
}

impl Accumulator {
    fn new(pixels: usize, channels: usize) -> Self {
        Accumulator {
            color: vec![0.0; pixels * channels],
            weight: vec![0.0; pixels],
            coverage: vec![0.0; pixels],
            channels,
        }
    }

    fn reset(&mut self) {
        self.color.fill(0.0);
        self.weight.fill(0.0);
        self.coverage.fill(0.0);
    }

    #[inline]
    fn add(&mut self, target: usize, bilinear: f64, weight: f64, color: &[f32]) {
        let bw = bilinear * weight;
        self.weight[target] += bw;
        self.coverage[target] += bilinear;
        let acc = &mut self.color[target * self.channels..(target + 1) * self.channels];
        for (a, &c) in acc.iter_mut().zip(color) {
            *a += bw * f64::from(c);
        }
    }

    /// Writes normalised colours, coverage and pre-dilation hole flags.
    fn resolve(&self, opts: &SplatOptions, color: &mut [f32], coverage: &mut [f32], holes: &mut [bool]) {
        let c = self.channels;
        for i in 0..self.weight.len() {
            let cov = self.coverage[i] as f32;
            coverage[i] = cov;
            let hole = cov < opts.coverage_threshold || self.weight[i] == 0.0;
            holes[i] = hole;
            let out = &mut color[i * c..(i + 1) * c];
            if hole {
                out.fill(opts.hole_fill_value);
            } else {
                let w = self.weight[i];
                for (o, &a) in out.iter_mut().zip(&self.color[i * c..(i + 1) * c]) {
                    *o = ((a / w) as f32).clamp(0.0, 1.0);
                }
            }
        }
    }
}

enum Priority<'a> {
    NegatedDisparity(&'a DisparityMap),
    Map(&'a PriorityMap),
}

impl Priority<'_> {
    #[inline]
    fn at(&self, i: usize) -> f64 {
        match self {
            Priority::NegatedDisparity(d) => -f64::from(d.values()[i]),
            Priority::Map(p) => f64::from(p.values()[i]),
        }
    }

    fn max(&self) -> f64 {
        let values = match self {
            Priority::NegatedDisparity(d) => d.values(),
            Priority::Map(p) => p.values(),
        };
        let (lo, hi) = values.iter().fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        match self {
            Priority::NegatedDisparity(_) => -f64::from(lo),
            Priority::Map(_) => f64::from(hi),
        }
    }
}

fn check_map(name: &str, map: &DisparityMap, frame: &FrameBuffer) -> Result<()> {
    if !map.matches(frame) {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {}x{}, frame is {}x{}",
            map.width(),
            map.height(),
            frame.width(),
            frame.height()
        )));
    }
    Ok(())
}

fn finish(
    frame: &FrameBuffer,
    color: Vec<f32>,
    coverage: Vec<f32>,
    holes: Vec<bool>,
    opts: &SplatOptions,
) -> Result<SplatResult> {
    let (w, h, c) = (frame.width(), frame.height(), frame.channels());
    let mask = OcclusionMask::new(w, h, holes)?.dilate(opts.mask_dilation_px);
    Ok(SplatResult {
        warped: FrameBuffer::from_raw(w, h, c, color),
        mask,
        coverage,
    })
}

/// Forward-splats `frame` along horizontal `disparity`.
///
/// `priority` defaults to `-disparity`.
pub fn forward_splat_frame(
    frame: &FrameBuffer,
    disparity: &DisparityMap,
    priority: Option<&PriorityMap>,
    opts: &SplatOptions,
) -> Result<SplatResult> {
    opts.validate()?;
    check_map("disparity", disparity, frame)?;
    let priority = match priority {
        Some(p) => {
            check_map("priority", p, frame)?;
            Priority::Map(p)
        }
        None => Priority::NegatedDisparity(disparity),
    };
    let (w, h, c) = (frame.width(), frame.height(), frame.channels());
    let p_max = priority.max();

    let mut color = vec![0.0f32; w * h * c];
    let mut coverage = vec![0.0f32; w * h];
    let mut holes = vec![false; w * h];

    color
        .par_chunks_mut(w * c)
        .zip(coverage.par_chunks_mut(w))
        .zip(holes.par_chunks_mut(w))
        .enumerate()
        .for_each_init(
            || Accumulator::new(w, c),
            |acc, (y, ((color_row, cov_row), hole_row))| {
                acc.reset();
                let src = frame.row(y);
                let disp = disparity.row(y);
                for x in 0..w {
                    let i = y * w + x;
                    let weight = splat_weight(priority.at(i), p_max, opts.exponent_floor);
                    let t = x as f64 + f64::from(disp[x]);
                    let left = t.floor();
                    let frac = t - left;
                    let left = left as i64;
                    let px = &src[x * c..(x + 1) * c];
                    for (tx, b) in [(left, 1.0 - frac), (left + 1, frac)] {
                        if b > 0.0 && tx >= 0 && (tx as usize) < w {
                            acc.add(tx as usize, b, weight, px);
                        }
                    }
                }
                acc.resolve(opts, color_row, cov_row, hole_row);
            },
        );

    finish(frame, color, coverage, holes, opts)
}

/// Forward-splats along a 2D offset field, distributing each source over the
/// four nearest target pixels.
///
/// In deterministic mode each target row gathers contributions from the
/// source rows that can reach it, in row-major source order. Otherwise
/// source rows are scattered into per-worker buffers and summed, which is
/// faster for large vertical offsets but not bit-reproducible across thread
/// counts.
pub fn forward_splat_frame_2d(
    frame: &FrameBuffer,
    dx: &DisparityMap,
    dy: &DisparityMap,
    priority: Option<&PriorityMap>,
    opts: &SplatOptions,
) -> Result<SplatResult> {
    opts.validate()?;
    check_map("horizontal offsets", dx, frame)?;
    check_map("vertical offsets", dy, frame)?;
    let priority = match priority {
        Some(p) => {
            check_map("priority", p, frame)?;
            Priority::Map(p)
        }
        None => Priority::NegatedDisparity(dx),
    };
    let (w, h, c) = (frame.width(), frame.height(), frame.channels());
    let p_max = priority.max();

    // Scatter one source pixel; `accept` maps a target row to a buffer row.
    let scatter = |acc: &mut Accumulator, sx: usize, sy: usize, accept: &dyn Fn(i64) -> Option<usize>| {
        let i = sy * w + sx;
        let weight = splat_weight(priority.at(i), p_max, opts.exponent_floor);
        let tx = sx as f64 + f64::from(dx.values()[i]);
        let ty = sy as f64 + f64::from(dy.values()[i]);
        let (x0, y0) = (tx.floor(), ty.floor());
        let (fx, fy) = (tx - x0, ty - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let px = frame.pixel(sx, sy);
        for (yy, by) in [(y0, 1.0 - fy), (y0 + 1, fy)] {
            let Some(row) = accept(yy) else { continue };
            for (xx, bx) in [(x0, 1.0 - fx), (x0 + 1, fx)] {
                let b = bx * by;
                if b > 0.0 && xx >= 0 && (xx as usize) < w {
                    acc.add(row * w + xx as usize, b, weight, px);
                }
            }
        }
    };

    let mut color = vec![0.0f32; w * h * c];
    let mut coverage = vec![0.0f32; w * h];
    let mut holes = vec![false; w * h];

    if opts.deterministic {
        let (lo, hi) = dy
            .values()
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let reach_up = f64::from(hi).ceil() as i64 + 1;
        let reach_down = f64::from(lo).floor() as i64 - 1;
        color
            .par_chunks_mut(w * c)
            .zip(coverage.par_chunks_mut(w))
            .zip(holes.par_chunks_mut(w))
            .enumerate()
            .for_each_init(
                || Accumulator::new(w, c),
                |acc, (y, ((color_row, cov_row), hole_row))| {
                    acc.reset();
                    let first = (y as i64 - reach_up).max(0) as usize;
                    let last = (y as i64 - reach_down).min(h as i64 - 1);
                    let target = y as i64;
                    let accept = |yy: i64| (yy == target).then_some(0);
                    if last >= first as i64 {
                        for sy in first..=last as usize {
                            for sx in 0..w {
                                scatter(acc, sx, sy, &accept);
                            }
                        }
                    }
                    acc.resolve(opts, color_row, cov_row, hole_row);
                },
            );
    } else {
        let accept = |yy: i64| (yy >= 0 && (yy as usize) < h).then_some(yy as usize);
        let acc = (0..h)
            .into_par_iter()
            .fold(
                || Accumulator::new(w * h, c),
                |mut acc, sy| {
                    for sx in 0..w {
                        scatter(&mut acc, sx, sy, &accept);
                    }
                    acc
                },
            )
            .reduce_with(|mut a, b| {
                for (x, y) in a.color.iter_mut().zip(&b.color) {
                    *x += y;
                }
                for (x, y) in a.weight.iter_mut().zip(&b.weight) {
                    *x += y;
                }
                for (x, y) in a.coverage.iter_mut().zip(&b.coverage) {
                    *x += y;
                }
                a
            })
            .expect("frame has at least one row");
        acc.resolve(opts, &mut color, &mut coverage, &mut holes);
    }

    finish(frame, color, coverage, holes, opts)
}

/// Splats every frame of `clip` with its own disparity map and the default
/// priority. Frames are independent and processed in parallel.
pub fn forward_splat_clip(
    clip: &VideoClip,
    disparities: &[DisparityMap],
    opts: &SplatOptions,
) -> Result<Vec<SplatResult>> {
    if disparities.len() != clip.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} disparity maps for {} frames",
            disparities.len(),
            clip.len()
        )));
    }
    clip.frames()
        .par_iter()
        .zip(disparities)
        .enumerate()
        .map(|(i, (frame, disp))| {
            forward_splat_frame(frame, disp, None, opts).map_err(|e| match e {
                Error::DimensionMismatch(m) => Error::DimensionMismatch(format!("frame {i}: {m}")),
                other => other,
            })
        })
        .collect()
}
