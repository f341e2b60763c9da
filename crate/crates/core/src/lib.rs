//! Monocular-to-stereo video conversion.
//!
//! The pipeline has two stages. [`splat`] forward-warps each input frame
//! along a disparity map, producing the other eye's view together with a
//! mask of disoccluded holes. [`scheduler`] then drives an inpainting
//! backend from [`inpaint`] over the warped clip in overlapping temporal
//! chunks and spatial tiles. [`dataset`] builds the matching training
//! triplets from real stereo footage.

pub mod dataset;
pub mod disparity;
pub mod error;
pub mod inpaint;
pub mod io;
pub mod metrics;
pub mod model;
pub mod scheduler;
pub mod splat;

pub use error::{Error, Result};
pub use model::{DisparityMap, FrameBuffer, OcclusionMask, PriorityMap, StereoDirection, StereoParams, VideoClip};
