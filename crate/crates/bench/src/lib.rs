//! Deterministic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svsynth::{DisparityMap, FrameBuffer, OcclusionMask, VideoClip};

pub fn frame(seed: u64, width: usize, height: usize, channels: usize) -> FrameBuffer {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    FrameBuffer::new(
        width,
        height,
        channels,
        (0..width * height * channels).map(|_| r.gen()).collect(),
    )
    .expect("valid frame")
}

pub fn clip(seed: u64, frames: usize, width: usize, height: usize) -> VideoClip {
    VideoClip::new((0..frames as u64).map(|i| frame(seed + i, width, height, 3)).collect()).expect("valid clip")
}

/// Smooth horizontal ramp from 0 to `-max` with per-pixel jitter, so
/// neighbouring sources overlap and disocclusions appear.
pub fn disparity(seed: u64, width: usize, height: usize, max: f32) -> DisparityMap {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..width * height)
        .map(|i| {
            let x = (i % width) as f32 / width as f32;
            -(max * x + r.gen_range(0.0..2.0)).min(max)
        })
        .collect();
    DisparityMap::new(width, height, values).expect("finite disparity")
}

/// Masks with a vertical hole band of `band` pixels per frame.
pub fn band_masks(frames: usize, width: usize, height: usize, band: usize) -> Vec<OcclusionMask> {
    (0..frames)
        .map(|f| {
            let start = (f * 7) % width.saturating_sub(band).max(1);
            let values = (0..width * height)
                .map(|i| (start..start + band).contains(&(i % width)))
                .collect();
            OcclusionMask::new(width, height, values).expect("mask")
        })
        .collect()
}
