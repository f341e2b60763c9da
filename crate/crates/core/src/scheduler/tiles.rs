use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FrameBuffer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub x0: usize,
    pub y0: usize,
    /// Exclusive.
    pub x1: usize,
    /// Exclusive.
    pub y1: usize,
}

impl Tile {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }
}

/// A row-major grid of equally sized, overlapping tiles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilePlan {
    pub height: usize,
    pub width: usize,
    pub tile_h: usize,
    pub tile_w: usize,
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
}

impl TilePlan {
    /// One tile covering the whole frame.
    pub fn single(height: usize, width: usize) -> Self {
        TilePlan {
            height,
            width,
            tile_h: height,
            tile_w: width,
            xs: vec![0],
            ys: vec![0],
        }
    }

    pub fn tiles(&self) -> Vec<Tile> {
        self.ys
            .iter()
            .flat_map(|&y0| {
                self.xs.iter().map(move |&x0| Tile {
                    x0,
                    y0,
                    x1: x0 + self.tile_w,
                    y1: y0 + self.tile_h,
                })
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Overlap widths between horizontal neighbours.
    pub fn x_overlaps(&self) -> Vec<usize> {
        self.xs.windows(2).map(|p| p[0] + self.tile_w - p[1]).collect()
    }

    /// Overlap heights between vertical neighbours.
    pub fn y_overlaps(&self) -> Vec<usize> {
        self.ys.windows(2).map(|p| p[0] + self.tile_h - p[1]).collect()
    }
}

fn axis_starts(dim: usize, tile: usize, min_overlap: usize) -> Vec<usize> {
    if dim <= tile {
        return vec![0];
    }
    let span = dim - tile;
    let stride = tile - min_overlap;
    let n = span.div_ceil(stride) + 1;
    (0..n).map(|i| i * span / (n - 1)).collect()
}

/// Lays out tiles of `tile_h x tile_w` so that neighbours overlap by at least
/// `min_overlap` pixels. Starts are evenly spaced from 0 to `dim - tile`;
/// an axis no longer than the tile gets a single, clamped tile.
pub fn plan_tiles(height: usize, width: usize, tile_h: usize, tile_w: usize, min_overlap: usize) -> Result<TilePlan> {
    if height == 0 || width == 0 || tile_h == 0 || tile_w == 0 {
        return Err(Error::InvalidArgument(
            "frame and tile dimensions must be positive".into(),
        ));
    }
    if min_overlap >= tile_h || min_overlap >= tile_w {
        return Err(Error::InvalidArgument(format!(
            "tile overlap {min_overlap} must be smaller than the tile ({tile_h}x{tile_w})"
        )));
    }
    let tile_h = tile_h.min(height);
    let tile_w = tile_w.min(width);
    Ok(TilePlan {
        height,
        width,
        tile_h,
        tile_w,
        xs: axis_starts(width, tile_w, min_overlap),
        ys: axis_starts(height, tile_h, min_overlap),
    })
}

/// Weight of the later (right or lower) tile at offset `k` into an overlap of
/// `overlap` pixels: `k / (overlap - 1)`, hitting 0 and 1 at the ends.
#[inline]
pub fn ramp_weight(k: usize, overlap: usize) -> f64 {
    if overlap <= 1 {
        0.5
    } else {
        k as f64 / (overlap - 1) as f64
    }
}

/// Feather-blends one tile output per tile of `plan` into a full frame.
///
/// Tiles in a row are merged left to right over their horizontal overlaps,
/// then the merged rows top to bottom. In each overlap the earlier tile's
/// weight falls from 1 to 0 while the later tile's rises from 0 to 1.
pub fn blend_tiles(outputs: &[FrameBuffer], plan: &TilePlan) -> Result<FrameBuffer> {
    let tiles = plan.tiles();
    if outputs.len() != tiles.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} tile outputs for {} tiles",
            outputs.len(),
            tiles.len()
        )));
    }
    let channels = outputs[0].channels();
    for (i, (o, t)) in outputs.iter().zip(&tiles).enumerate() {
        if o.width() != t.width() || o.height() != t.height() || o.channels() != channels {
            return Err(Error::DimensionMismatch(format!(
                "tile {i} output is {}x{}x{}, plan expects {}x{}x{channels}",
                o.width(),
                o.height(),
                o.channels(),
                t.width(),
                t.height()
            )));
        }
    }
    let (w, c) = (plan.width, channels);
    let cols = plan.xs.len();

    // horizontal pass: one strip of tile_h x width per tile row
    let strips: Vec<Vec<f64>> = plan
        .ys
        .par_iter()
        .enumerate()
        .map(|(r, _)| {
            let mut strip = vec![0.0f64; plan.tile_h * w * c];
            let mut filled_to: usize = 0;
            for (j, &x0) in plan.xs.iter().enumerate() {
                let tile = &outputs[r * cols + j];
                let overlap = filled_to.saturating_sub(x0);
                for y in 0..plan.tile_h {
                    let src = tile.row(y);
                    let dst = &mut strip[y * w * c..(y + 1) * w * c];
                    for tx in 0..plan.tile_w {
                        let x = x0 + tx;
                        for ch in 0..c {
                            let v = f64::from(src[tx * c + ch]);
                            let d = &mut dst[x * c + ch];
                            *d = if tx < overlap {
                                let wr = ramp_weight(tx, overlap);
                                (1.0 - wr) * *d + wr * v
                            } else {
                                v
                            };
                        }
                    }
                }
                filled_to = x0 + plan.tile_w;
            }
            strip
        })
        .collect();

    // vertical pass
    let mut out = vec![0.0f64; plan.height * w * c];
    let mut filled_to: usize = 0;
    for (strip, &y0) in strips.iter().zip(&plan.ys) {
        let overlap = filled_to.saturating_sub(y0);
        for ty in 0..plan.tile_h {
            let dst = &mut out[(y0 + ty) * w * c..(y0 + ty + 1) * w * c];
            let src = &strip[ty * w * c..(ty + 1) * w * c];
            if ty < overlap {
                let wr = ramp_weight(ty, overlap);
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = (1.0 - wr) * *d + wr * s;
                }
            } else {
                dst.copy_from_slice(src);
            }
        }
        filled_to = y0 + plan.tile_h;
    }

    let data = out.into_iter().map(|v| (v as f32).clamp(0.0, 1.0)).collect();
    Ok(FrameBuffer::from_raw(w, plan.height, c, data))
}
