//! Training triplets for stereo inpainting: warp the left view of a real
//! stereo clip to the right view, keep the occlusion mask, and use the real
//! right view as ground truth. Samples whose warp disagrees with the right
//! view (a sign of bad disparity) are scored by PSNR and filtered out.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::disparity::{disparity_stats, parallax_align, DisparityStats};
use crate::error::{Error, Result};
use crate::io::{read_frame, write_frame, BitDepth};
use crate::metrics::SquaredErrorPool;
use crate::model::{DisparityMap, FrameBuffer, OcclusionMask, VideoClip};
use crate::splat::{forward_splat_clip, SplatOptions};

pub const DEFAULT_PSNR_THRESHOLD_DB: f64 = 25.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsnrScope {
    /// Score only pixels the warp actually covered.
    #[default]
    NonOccluded,
    AllPixels,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripletOptions {
    /// Run parallax alignment before warping.
    pub align: bool,
    pub align_margin: f32,
    pub scope: PsnrScope,
    pub splat: SplatOptions,
}

impl Default for TripletOptions {
    fn default() -> Self {
        TripletOptions {
            align: false,
            align_margin: 0.0,
            scope: PsnrScope::NonOccluded,
            splat: SplatOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletMeta {
    pub psnr_db: f64,
    pub shift_px: usize,
    pub disparity: DisparityStats,
    pub frames: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingTriplet {
    pub warped: VideoClip,
    pub masks: Vec<OcclusionMask>,
    pub right: VideoClip,
    pub meta: TripletMeta,
}

/// Warps `left` towards the right view and scores it against `right` with a
/// single MSE pooled over all frames.
pub fn build_triplet(
    left: &VideoClip,
    right: &VideoClip,
    disparity: &[DisparityMap],
    opts: &TripletOptions,
) -> Result<TrainingTriplet> {
    let aligned;
    let (left, right, disparity, shift_px) = if opts.align {
        aligned = parallax_align(left, right, disparity, opts.align_margin)?;
        (
            &aligned.left,
            &aligned.right,
            aligned.disparity.as_slice(),
            aligned.report.shift_px,
        )
    } else {
        (left, right, disparity, 0)
    };
    if left.len() != right.len() {
        return Err(Error::DimensionMismatch(format!(
            "left has {} frames, right has {}",
            left.len(),
            right.len()
        )));
    }
    let results = forward_splat_clip(left, disparity, &opts.splat)?;
    let mut pool = SquaredErrorPool::new();
    for (r, gt) in results.iter().zip(right.frames()) {
        let holes = match opts.scope {
            PsnrScope::NonOccluded => Some(&r.mask),
            PsnrScope::AllPixels => None,
        };
        pool.add(&r.warped, gt, holes)?;
    }
    let psnr_db = pool.psnr()?;
    let stats = disparity_stats(disparity)?;
    let (warped, masks): (Vec<_>, Vec<_>) = results.into_iter().map(|r| (r.warped, r.mask)).unzip();
    Ok(TrainingTriplet {
        warped: VideoClip::new(warped)?,
        masks,
        right: right.clone(),
        meta: TripletMeta {
            psnr_db,
            shift_px,
            disparity: stats,
            frames: left.len(),
        },
    })
}

/// Keeps samples scoring strictly above `threshold_db`.
pub fn filter_sample(triplet: &TrainingTriplet, threshold_db: f64) -> bool {
    triplet.meta.psnr_db > threshold_db
}

/// `meta.json` of a written sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub id: String,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub psnr_db: f64,
    pub shift_px: usize,
    pub disparity: DisparityStats,
    pub kept: bool,
    pub threshold_db: f64,
}

pub const MANIFEST_NAME: &str = "meta.json";

fn frame_path(dir: &Path, kind: &str, i: usize) -> PathBuf {
    dir.join(kind).join(format!("{i:06}.png"))
}

fn mask_frame(mask: &OcclusionMask) -> FrameBuffer {
    let data = mask.values().iter().map(|&h| if h { 1.0 } else { 0.0 }).collect();
    FrameBuffer::from_raw(mask.width(), mask.height(), 1, data)
}

/// Writes `root/<id>/{warped,mask,right}/%06d.png` plus `meta.json`.
/// Frames are 16-bit, masks 8-bit (0 or 255). Returns the manifest path.
pub fn write_sample(triplet: &TrainingTriplet, root: &Path, id: &str, threshold_db: f64) -> Result<PathBuf> {
    if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
        return Err(Error::InvalidArgument(format!("invalid sample id '{id}'")));
    }
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let dir = root.join(id);
    match fs::create_dir(&dir) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => return Err(Error::AlreadyExists(dir)),
        Err(e) => return Err(Error::io(&dir, e)),
    }
    for kind in ["warped", "mask", "right"] {
        let sub = dir.join(kind);
        fs::create_dir(&sub).map_err(|e| Error::io(&sub, e))?;
    }
    for (i, ((w, m), r)) in triplet
        .warped
        .frames()
        .iter()
        .zip(&triplet.masks)
        .zip(triplet.right.frames())
        .enumerate()
    {
        write_frame(w, &frame_path(&dir, "warped", i), BitDepth::Sixteen)?;
        write_frame(&mask_frame(m), &frame_path(&dir, "mask", i), BitDepth::Eight)?;
        write_frame(r, &frame_path(&dir, "right", i), BitDepth::Sixteen)?;
    }
    let manifest = SampleManifest {
        id: id.to_string(),
        frames: triplet.meta.frames,
        width: triplet.warped.width(),
        height: triplet.warped.height(),
        psnr_db: triplet.meta.psnr_db,
        shift_px: triplet.meta.shift_px,
        disparity: triplet.meta.disparity,
        kept: filter_sample(triplet, threshold_db),
        threshold_db,
    };
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, serde_json::to_vec_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Loads a sample written by [`write_sample`].
pub fn read_sample(dir: &Path) -> Result<(TrainingTriplet, SampleManifest)> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.clone()),
        _ => Error::io(&path, e),
    })?;
    let manifest: SampleManifest = serde_json::from_str(&text)?;
    let mut warped = Vec::with_capacity(manifest.frames);
    let mut masks = Vec::with_capacity(manifest.frames);
    let mut right = Vec::with_capacity(manifest.frames);
    for i in 0..manifest.frames {
        warped.push(read_frame(&frame_path(dir, "warped", i))?);
        right.push(read_frame(&frame_path(dir, "right", i))?);
        let m = read_frame(&frame_path(dir, "mask", i))?;
        let values = m.data().iter().step_by(m.channels()).map(|&v| v > 0.5).collect();
        masks.push(OcclusionMask::new(m.width(), m.height(), values)?);
    }
    let triplet = TrainingTriplet {
        warped: VideoClip::new(warped)?,
        masks,
        right: VideoClip::new(right)?,
        meta: TripletMeta {
            psnr_db: manifest.psnr_db,
            shift_px: manifest.shift_px,
            disparity: manifest.disparity,
            frames: manifest.frames,
        },
    };
    Ok((triplet, manifest))
}
