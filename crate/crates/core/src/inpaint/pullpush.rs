//! Pull-push hole filling on an undecimated pyramid.
//!
//! Level `k + 1` is a coverage-weighted 3x3 average of level `k` with taps
//! spaced `2^k` apart (binomial 1-2-1 weights per axis, out-of-frame taps
//! skipped). Every level keeps full resolution, so the fill is equivariant
//! to integer translations away from the frame border. After
//! `ceil(log2(max(H, W)))` levels the tap footprint spans the whole frame,
//! so any frame with at least one valid pixel can be filled. The push pass
//! walks back down and copies the coarser estimate into every pixel that
//! has no coverage at its own level.

use crate::error::{Error, Result};
use crate::model::{FrameBuffer, OcclusionMask, PriorityMap};

const TAPS: [(isize, f64); 3] = [(-1, 1.0), (0, 2.0), (1, 1.0)];

/// Smallest weight a valid pixel keeps under background bias.
const MIN_BIASED_WEIGHT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default)]
pub struct PullPushOptions<'a> {
    /// Down-weights near content (high priority) during the pull so holes
    /// are filled preferentially from the background.
    pub background_bias: Option<&'a PriorityMap>,
}

struct Level {
    color: Vec<f64>,
    coverage: Vec<f64>,
}

pub fn inpaint_pullpush(frame: &FrameBuffer, mask: &OcclusionMask) -> Result<FrameBuffer> {
    inpaint_pullpush_with(frame, mask, &PullPushOptions::default())
}

pub fn inpaint_pullpush_with(
    frame: &FrameBuffer,
    mask: &OcclusionMask,
    opts: &PullPushOptions<'_>,
) -> Result<FrameBuffer> {
    if !mask.matches(frame) {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} vs frame {}x{}",
            mask.width(),
            mask.height(),
            frame.width(),
            frame.height()
        )));
    }
    if mask.is_clear() {
        return Ok(frame.clone());
    }
    if mask.values().iter().all(|&h| h) {
        return Err(Error::NothingToPropagate);
    }
    let (w, h, c) = (frame.width(), frame.height(), frame.channels());

    let base_weight: Vec<f64> = match opts.background_bias {
        None => mask.values().iter().map(|&hole| if hole { 0.0 } else { 1.0 }).collect(),
        Some(priority) => {
            if !priority.matches(frame) {
                return Err(Error::DimensionMismatch("priority map does not match frame".into()));
            }
            let valid = || {
                priority
                    .values()
                    .iter()
                    .zip(mask.values())
                    .filter(|(_, &hole)| !hole)
                    .map(|(&p, _)| f64::from(p))
            };
            let lo = valid().fold(f64::INFINITY, f64::min);
            let hi = valid().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            priority
                .values()
                .iter()
                .zip(mask.values())
                .map(|(&p, &hole)| {
                    if hole {
                        0.0
                    } else if span > 0.0 {
                        (1.0 - (f64::from(p) - lo) / span).max(MIN_BIASED_WEIGHT)
                    } else {
                        1.0
                    }
                })
                .collect()
        }
    };

    let levels = (w.max(h) as f64).log2().ceil() as usize;
    let mut pyramid = Vec::with_capacity(levels + 1);
    pyramid.push(Level {
        color: frame.data().iter().map(|&v| f64::from(v)).collect(),
        coverage: base_weight,
    });

    // pull
    for k in 0..levels {
        let step = 1isize << k;
        let prev = &pyramid[k];
        let mut color = vec![0.0; w * h * c];
        let mut coverage = vec![0.0; w * h];
        let mut sum = vec![0.0; c];
        for y in 0..h {
            for x in 0..w {
                sum.fill(0.0);
                let mut weight = 0.0;
                let mut kernel = 0.0;
                for &(dy, ky) in &TAPS {
                    let yy = y as isize + dy * step;
                    if yy < 0 || yy >= h as isize {
                        continue;
                    }
                    for &(dx, kx) in &TAPS {
                        let xx = x as isize + dx * step;
                        if xx < 0 || xx >= w as isize {
                            continue;
                        }
                        let j = yy as usize * w + xx as usize;
                        let kw = kx * ky;
                        kernel += kw;
                        let cw = kw * prev.coverage[j];
                        if cw > 0.0 {
                            weight += cw;
                            for (s, &v) in sum.iter_mut().zip(&prev.color[j * c..(j + 1) * c]) {
                                *s += cw * v;
                            }
                        }
                    }
                }
                let i = y * w + x;
                if weight > 0.0 {
                    coverage[i] = weight / kernel;
                    for (o, s) in color[i * c..(i + 1) * c].iter_mut().zip(&sum) {
                        *o = s / weight;
                    }
                }
            }
        }
        pyramid.push(Level { color, coverage });
    }

    // push
    for k in (0..levels).rev() {
        let (fine, coarse) = pyramid.split_at_mut(k + 1);
        let fine = &mut fine[k];
        let coarse = &coarse[0];
        for i in 0..w * h {
            if fine.coverage[i] == 0.0 {
                fine.color[i * c..(i + 1) * c].copy_from_slice(&coarse.color[i * c..(i + 1) * c]);
            }
        }
    }

    let base = &pyramid[0];
    let mut out = frame.data().to_vec();
    for (i, _) in mask.values().iter().enumerate().filter(|(_, &hole)| hole) {
        for (o, &v) in out[i * c..(i + 1) * c].iter_mut().zip(&base.color[i * c..(i + 1) * c]) {
            *o = (v as f32).clamp(0.0, 1.0);
        }
    }
    Ok(FrameBuffer::from_raw(w, h, c, out))
}
