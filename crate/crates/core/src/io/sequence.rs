//! Numbered PNG frame sequences.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DisparityMap, FrameBuffer, VideoClip};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

/// A directory of frames named `<prefix><index><suffix>`, with the index
/// zero-padded to `digits` and counting from 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceSpec {
    pub dir: PathBuf,
    pub prefix: String,
    pub digits: usize,
    pub suffix: String,
    pub bit_depth: BitDepth,
}

impl SequenceSpec {
    /// `%06d.png` in `dir`.
    pub fn new(dir: impl Into<PathBuf>, bit_depth: BitDepth) -> Self {
        SequenceSpec {
            dir: dir.into(),
            prefix: String::new(),
            digits: 6,
            suffix: ".png".into(),
            bit_depth,
        }
    }

    /// Parses a printf-style pattern with one `%0Nd` field, e.g.
    /// `frame_%05d.png`.
    pub fn with_pattern(dir: impl Into<PathBuf>, pattern: &str, bit_depth: BitDepth) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("pattern '{pattern}' needs exactly one %0Nd field"));
        let (prefix, rest) = pattern.split_once('%').ok_or_else(bad)?;
        let d = rest.find('d').ok_or_else(bad)?;
        let width = &rest[..d];
        let digits = if width.is_empty() {
            1
        } else {
            width.trim_start_matches('0').parse().map_err(|_| bad())?
        };
        let suffix = &rest[d + 1..];
        if suffix.contains('%') {
            return Err(bad());
        }
        Ok(SequenceSpec {
            dir: dir.into(),
            prefix: prefix.to_string(),
            digits,
            suffix: suffix.to_string(),
            bit_depth,
        })
    }

    pub fn path(&self, index: usize) -> PathBuf {
        self.dir.join(format!(
            "{}{:0width$}{}",
            self.prefix,
            index,
            self.suffix,
            width = self.digits
        ))
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        let digits = name.strip_prefix(&self.prefix)?.strip_suffix(&self.suffix)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok()
    }

    /// Frame indices present in the directory, sorted. Errors on gaps.
    pub fn indices(&self) -> Result<usize> {
        let entries = fs::read_dir(&self.dir).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(self.dir.clone()),
            _ => Error::io(&self.dir, e),
        })?;
        let mut indices = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.dir, e))?;
            if let Some(i) = entry.file_name().to_str().and_then(|n| self.index_of(n)) {
                indices.push(i);
            }
        }
        indices.sort_unstable();
        if indices.is_empty() {
            return Err(Error::MissingFile(self.path(0)));
        }
        for (expected, &found) in indices.iter().enumerate() {
            if found != expected {
                return Err(Error::MissingFile(self.path(expected)));
            }
        }
        Ok(indices.len())
    }
}

fn image_err(path: &Path, source: image::ImageError) -> Error {
    match source {
        image::ImageError::IoError(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Error::MissingFile(path.to_path_buf())
        }
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    }
}

/// Loads one PNG as a gray or RGB frame; alpha is dropped.
pub fn read_frame(path: &Path) -> Result<FrameBuffer> {
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = !img.color().has_color();
    let sixteen = img.color().bytes_per_pixel() / img.color().channel_count() > 1;
    match (gray, sixteen) {
        (true, false) => FrameBuffer::from_u8(w, h, 1, img.to_luma8().as_raw()),
        (true, true) => FrameBuffer::from_u16(w, h, 1, img.to_luma16().as_raw()),
        (false, false) => FrameBuffer::from_u8(w, h, 3, img.to_rgb8().as_raw()),
        (false, true) => FrameBuffer::from_u16(w, h, 3, img.to_rgb16().as_raw()),
    }
}

pub fn write_frame(frame: &FrameBuffer, path: &Path, bit_depth: BitDepth) -> Result<()> {
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    let img = match (frame.channels(), bit_depth) {
        (1, BitDepth::Eight) => {
            DynamicImage::ImageLuma8(ImageBuffer::<Luma<u8>, _>::from_raw(w, h, frame.to_u8()).unwrap())
        }
        (1, BitDepth::Sixteen) => {
            DynamicImage::ImageLuma16(ImageBuffer::<Luma<u16>, _>::from_raw(w, h, frame.to_u16()).unwrap())
        }
        (_, BitDepth::Eight) => {
            DynamicImage::ImageRgb8(ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, frame.to_u8()).unwrap())
        }
        (_, BitDepth::Sixteen) => {
            DynamicImage::ImageRgb16(ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, frame.to_u16()).unwrap())
        }
    };
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}

pub fn read_sequence(spec: &SequenceSpec) -> Result<VideoClip> {
    let count = spec.indices()?;
    let mut frames: Vec<FrameBuffer> = Vec::with_capacity(count);
    for i in 0..count {
        let path = spec.path(i);
        let frame = read_frame(&path)?;
        if let Some(first) = frames.first() {
            if !frame.same_shape(first) {
                return Err(Error::format(
                    &path,
                    format!(
                        "dimension drift: {}x{}x{} differs from frame 0 ({}x{}x{})",
                        frame.width(),
                        frame.height(),
                        frame.channels(),
                        first.width(),
                        first.height(),
                        first.channels()
                    ),
                ));
            }
        }
        frames.push(frame);
    }
    VideoClip::new(frames)
}

pub fn write_sequence(clip: &VideoClip, spec: &SequenceSpec) -> Result<()> {
    fs::create_dir_all(&spec.dir).map_err(|e| Error::io(&spec.dir, e))?;
    for (i, frame) in clip.frames().iter().enumerate() {
        write_frame(frame, &spec.path(i), spec.bit_depth)?;
    }
    Ok(())
}

/// Affine decoding for disparity stored as 16-bit PNG:
/// `d = raw * disparity_scale + disparity_offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisparityEncoding {
    pub disparity_scale: f64,
    pub disparity_offset: f64,
}

/// Name of the sidecar holding [`DisparityEncoding`].
pub const DISPARITY_SIDECAR: &str = "meta.json";

/// Reads a disparity sequence from `dir`: `%06d.pfm` files, or `%06d.png`
/// 16-bit images decoded through the `meta.json` sidecar.
pub fn read_disparity_sequence(dir: &Path) -> Result<Vec<DisparityMap>> {
    let pfm = SequenceSpec {
        suffix: ".pfm".into(),
        ..SequenceSpec::new(dir, BitDepth::Sixteen)
    };
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    if pfm.path(0).exists() {
        let count = pfm.indices()?;
        return (0..count).map(|i| super::pfm::read_pfm(pfm.path(i))).collect();
    }
    let png = SequenceSpec::new(dir, BitDepth::Sixteen);
    if !png.path(0).exists() {
        return Err(Error::MissingFile(pfm.path(0)));
    }
    let sidecar = dir.join(DISPARITY_SIDECAR);
    let text = fs::read_to_string(&sidecar).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(sidecar.clone()),
        _ => Error::io(&sidecar, e),
    })?;
    let enc: DisparityEncoding = serde_json::from_str(&text)?;
    let count = png.indices()?;
    (0..count)
        .map(|i| {
            let path = png.path(i);
            let img = image::open(&path).map_err(|e| image_err(&path, e))?.to_luma16();
            let values = img
                .as_raw()
                .iter()
                .map(|&raw| (f64::from(raw) * enc.disparity_scale + enc.disparity_offset) as f32)
                .collect();
            DisparityMap::new(img.width() as usize, img.height() as usize, values)
        })
        .collect()
}

/// Writes disparity maps as `%06d.pfm` files in `dir`.
pub fn write_disparity_sequence(maps: &[DisparityMap], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, m) in maps.iter().enumerate() {
        super::pfm::write_pfm(m, dir.join(format!("{i:06}.pfm")))?;
    }
    Ok(())
}
