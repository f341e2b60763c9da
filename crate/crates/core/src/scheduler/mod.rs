//! Drives an inpainting backend over clips of any length and resolution.
//!
//! Long clips are cut into autoregressive chunks: each chunk after the first
//! starts with frames that earlier chunks already produced, so the backend
//! sees its own recent output as context. Large frames are cut into
//! overlapping tiles, each tile's sub-video is run through the chunk loop on
//! its own backend session, and the results are feather-blended.

mod chunks;
mod tiles;

use rayon::prelude::*;

pub use chunks::{plan_chunks, ChunkEntry, ChunkPlan, DEFAULT_OVERLAP};
pub use tiles::{blend_tiles, plan_tiles, ramp_weight, Tile, TilePlan};

use crate::error::{Error, Result};
use crate::inpaint::{inpaint_chunk, InpaintBackend, InpaintChunk};
use crate::model::{FrameBuffer, OcclusionMask, VideoClip};

fn check_inputs(warped: &VideoClip, masks: &[OcclusionMask]) -> Result<()> {
    if masks.len() != warped.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} masks for {} frames",
            masks.len(),
            warped.len()
        )));
    }
    if let Some(i) = masks.iter().position(|m| !m.matches(&warped.frames()[0])) {
        return Err(Error::DimensionMismatch(format!("mask {i} does not match the frames")));
    }
    Ok(())
}

/// Runs `plan` in order. Context positions of each chunk are fed from the
/// output produced so far (with clear masks) and are never overwritten.
pub fn run_autoregressive(
    backend: &mut dyn InpaintBackend,
    warped: &VideoClip,
    masks: &[OcclusionMask],
    plan: &ChunkPlan,
) -> Result<VideoClip> {
    check_inputs(warped, masks)?;
    plan.validate(warped.len(), backend.capacity())?;
    let (w, h) = (warped.width(), warped.height());
    let mut output: Vec<FrameBuffer> = Vec::with_capacity(warped.len());
    for (index, entry) in plan.entries().iter().enumerate() {
        let ctx = entry.context_count;
        let fresh = entry.start + ctx..entry.end;
        let frames: Vec<FrameBuffer> = output[entry.start..entry.start + ctx]
            .iter()
            .chain(&warped.frames()[fresh.clone()])
            .cloned()
            .collect();
        let chunk_masks: Vec<OcclusionMask> = std::iter::repeat_with(|| OcclusionMask::empty(w, h))
            .take(ctx)
            .chain(masks[fresh].iter().cloned())
            .collect();
        let produced = InpaintChunk::new(frames, chunk_masks, ctx)
            .and_then(|chunk| inpaint_chunk(backend, &chunk))
            .map_err(|source| Error::Chunk {
                index,
                source: Box::new(source),
            })?;
        output.extend(produced.into_iter().skip(ctx));
    }
    let mut clip = VideoClip::new(output)?;
    clip.fps = warped.fps;
    Ok(clip)
}

/// Runs every tile of `tile_plan` through [`run_autoregressive`] with its own
/// backend from `connect` (called with the tile index), then blends the
/// tiles frame by frame. Tiles run concurrently.
pub fn run_tiled<F>(
    connect: F,
    warped: &VideoClip,
    masks: &[OcclusionMask],
    chunk_plan: &ChunkPlan,
    tile_plan: &TilePlan,
) -> Result<VideoClip>
where
    F: Fn(usize) -> Result<Box<dyn InpaintBackend>> + Sync,
{
    check_inputs(warped, masks)?;
    if tile_plan.width != warped.width() || tile_plan.height != warped.height() {
        return Err(Error::DimensionMismatch(format!(
            "tile plan for {}x{}, clip is {}x{}",
            tile_plan.width,
            tile_plan.height,
            warped.width(),
            warped.height()
        )));
    }
    let tiles = tile_plan.tiles();
    let per_tile: Vec<VideoClip> = tiles
        .par_iter()
        .enumerate()
        .map(|(index, t)| {
            let run = || -> Result<VideoClip> {
                let mut backend = connect(index)?;
                let (sub, sub_masks) = if tiles.len() == 1 {
                    (warped.clone(), masks.to_vec())
                } else {
                    let frames = warped
                        .frames()
                        .iter()
                        .map(|f| f.crop(t.x0, t.y0, t.x1, t.y1))
                        .collect::<Result<Vec<_>>>()?;
                    let sub_masks = masks
                        .iter()
                        .map(|m| m.crop(t.x0, t.y0, t.x1, t.y1))
                        .collect::<Result<Vec<_>>>()?;
                    (VideoClip::new(frames)?, sub_masks)
                };
                run_autoregressive(backend.as_mut(), &sub, &sub_masks, chunk_plan)
            };
            run().map_err(|source| Error::Tile {
                index,
                source: Box::new(source),
            })
        })
        .collect::<Result<_>>()?;

    if per_tile.len() == 1 {
        let mut clip = per_tile.into_iter().next().expect("one tile");
        clip.fps = warped.fps;
        return Ok(clip);
    }
    let frames = (0..warped.len())
        .into_par_iter()
        .map(|i| {
            let outputs: Vec<FrameBuffer> = per_tile.iter().map(|clip| clip.frames()[i].clone()).collect();
            blend_tiles(&outputs, tile_plan)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut clip = VideoClip::new(frames)?;
    clip.fps = warped.fps;
    Ok(clip)
}
