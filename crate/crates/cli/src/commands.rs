use std::fmt;
use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::Serialize;
use svsynth::dataset::{build_triplet, filter_sample, write_sample, PsnrScope, TripletOptions};
use svsynth::disparity::{depth_to_disparity, disparity_stats, DepthMap, DisparityStats};
use svsynth::inpaint::server::{serve_stdio, serve_tcp};
use svsynth::inpaint::{BackendDescriptor, BackendKind, Transport};
use svsynth::io::{
    compose_anaglyph, compose_sbs, read_disparity_sequence, read_sequence, write_sequence, BitDepth, SequenceSpec,
};
use svsynth::scheduler::{plan_chunks, plan_tiles, run_tiled, TilePlan};
use svsynth::splat::{forward_splat_clip, SplatOptions};
use svsynth::{DisparityMap, Error, FrameBuffer, OcclusionMask, StereoParams, VideoClip};

use crate::args::{Backend, ConvertArgs, DatasetArgs, Format, GeometryArgs, MockBackendArgs, SplatArgs, WarpArgs};

/// A library error tagged with the pipeline stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for StageError {}

pub trait Staged<T> {
    fn stage(self, stage: &'static str) -> anyhow::Result<T>;
}

impl<T> Staged<T> for svsynth::Result<T> {
    fn stage(self, stage: &'static str) -> anyhow::Result<T> {
        self.map_err(|error| StageError { stage, error }.into())
    }
}

fn stage_of(error: &Error) -> &'static str {
    match error.root_cause() {
        Error::Backend(_) | Error::Transport(_) | Error::Protocol(_) | Error::CapacityExceeded { .. } => "backend",
        Error::MissingFile(_)
        | Error::Format { .. }
        | Error::AlreadyExists(_)
        | Error::Io { .. }
        | Error::Image { .. }
        | Error::Json(_) => "io",
        _ => "splat",
    }
}

fn config_error(message: impl Into<String>) -> anyhow::Error {
    StageError {
        stage: "config",
        error: Error::InvalidArgument(message.into()),
    }
    .into()
}

fn splat_options(args: &SplatArgs) -> SplatOptions {
    SplatOptions {
        coverage_threshold: args.coverage_threshold,
        mask_dilation_px: args.mask_dilation,
        deterministic: args.deterministic,
        ..SplatOptions::default()
    }
}

fn read_clip(dir: &Path) -> anyhow::Result<VideoClip> {
    read_sequence(&SequenceSpec::new(dir, BitDepth::Sixteen)).stage("io")
}

fn load_geometry(g: &GeometryArgs) -> anyhow::Result<(VideoClip, Vec<DisparityMap>)> {
    let clip = read_clip(&g.input)?;
    let disparity = match (&g.disparity, &g.depth) {
        (Some(dir), _) => read_disparity_sequence(dir).stage("io")?,
        (None, Some(dir)) => {
            let g_px = g
                .max_disparity
                .ok_or_else(|| config_error("--max-disparity is required with --depth"))?;
            let params = StereoParams::new(g_px, g.convergence, g.direction.into()).stage("config")?;
            read_clip(dir)?
                .frames()
                .iter()
                .map(|f| DepthMap::from_frame(f).and_then(|d| depth_to_disparity(&d, &params)))
                .collect::<svsynth::Result<Vec<_>>>()
                .stage("splat")?
        }
        (None, None) => return Err(config_error("one of --depth or --disparity is required")),
    };
    if disparity.len() != clip.len() {
        return Err(StageError {
            stage: "io",
            error: Error::DimensionMismatch(format!(
                "{} input frames, {} disparity maps",
                clip.len(),
                disparity.len()
            )),
        }
        .into());
    }
    Ok((clip, disparity))
}

fn mask_frame(mask: &OcclusionMask) -> FrameBuffer {
    let data = mask.values().iter().map(|&h| if h { 1.0 } else { 0.0 }).collect();
    FrameBuffer::new(mask.width(), mask.height(), 1, data).expect("mask values are in range")
}

fn write_clip(frames: Vec<FrameBuffer>, dir: &Path, depth: BitDepth) -> anyhow::Result<()> {
    let clip = VideoClip::new(frames).stage("io")?;
    write_sequence(&clip, &SequenceSpec::new(dir, depth)).stage("io")
}

#[derive(Serialize)]
struct WarpStats {
    frames: usize,
    width: usize,
    height: usize,
    disparity: DisparityStats,
    hole_pixels: Vec<usize>,
    hole_fraction: f64,
}

fn splat(
    clip: &VideoClip,
    disparity: &[DisparityMap],
    opts: &SplatOptions,
) -> anyhow::Result<(VideoClip, Vec<OcclusionMask>)> {
    let results = forward_splat_clip(clip, disparity, opts).stage("splat")?;
    let (warped, masks): (Vec<_>, Vec<_>) = results.into_iter().map(|r| (r.warped, r.mask)).unzip();
    let holes: usize = masks.iter().map(OcclusionMask::hole_count).sum();
    eprintln!("[splat] {} frames, {holes} hole pixels", warped.len());
    Ok((VideoClip::new(warped).stage("splat")?, masks))
}

pub fn warp(args: &WarpArgs) -> anyhow::Result<()> {
    let (clip, disparity) = load_geometry(&args.geometry)?;
    let (warped, masks) = splat(&clip, &disparity, &splat_options(&args.geometry.splat))?;

    let hole_pixels: Vec<usize> = masks.iter().map(OcclusionMask::hole_count).collect();
    let stats = WarpStats {
        frames: warped.len(),
        width: warped.width(),
        height: warped.height(),
        disparity: disparity_stats(&disparity).stage("splat")?,
        hole_fraction: hole_pixels.iter().sum::<usize>() as f64
            / (warped.len() * warped.width() * warped.height()) as f64,
        hole_pixels,
    };
    write_clip(warped.into_frames(), &args.out.join("warped"), BitDepth::Sixteen)?;
    write_clip(
        masks.iter().map(mask_frame).collect(),
        &args.out.join("mask"),
        BitDepth::Eight,
    )?;
    write_json(&args.out.join("stats.json"), &stats)?;
    eprintln!("[io] wrote {}", args.out.display());
    Ok(())
}

fn read_warped(dir: &Path) -> anyhow::Result<(VideoClip, Vec<OcclusionMask>)> {
    let warped = read_clip(&dir.join("warped"))?;
    let masks = read_clip(&dir.join("mask"))?
        .frames()
        .iter()
        .map(|m| {
            let values = m.data().iter().step_by(m.channels()).map(|&v| v > 0.5).collect();
            OcclusionMask::new(m.width(), m.height(), values)
        })
        .collect::<svsynth::Result<Vec<_>>>()
        .stage("io")?;
    Ok((warped, masks))
}

pub fn convert(args: &ConvertArgs) -> anyhow::Result<()> {
    let (left, warped, masks) = match (&args.warped, args.geometry()) {
        (Some(dir), _) => {
            let (warped, masks) = read_warped(dir)?;
            let left = args.input.as_deref().map(read_clip).transpose()?;
            (left, warped, masks)
        }
        (None, Some(g)) => {
            let (clip, disparity) = load_geometry(&g)?;
            let (warped, masks) = splat(&clip, &disparity, &splat_options(&g.splat))?;
            (Some(clip), warped, masks)
        }
        (None, None) => return Err(config_error("--input is required")),
    };
    if left.is_none() && args.format != Format::Separate {
        return Err(config_error("--input is required to compose a stereo pair"));
    }
    if let Some(l) = &left {
        if l.len() != warped.len() || !l.frames()[0].same_shape(&warped.frames()[0]) {
            return Err(StageError {
                stage: "io",
                error: Error::DimensionMismatch("input view and warped view differ in shape or length".into()),
            }
            .into());
        }
    }

    let (h, w) = (warped.height(), warped.width());
    let tile_plan = match args.tile {
        Some(t) => plan_tiles(h, w, t.height, t.width, args.tile_overlap).stage("schedule")?,
        None => TilePlan::single(h, w),
    };
    let chunk_plan = plan_chunks(warped.len(), args.chunk, args.overlap).stage("schedule")?;
    let kind = match args.backend {
        Backend::Null => BackendKind::Null,
        Backend::Pullpush => BackendKind::PullPush,
        Backend::External => BackendKind::External,
    };
    let transport = args
        .external
        .as_deref()
        .map(str::parse::<Transport>)
        .transpose()
        .stage("config")?;
    let descriptor = BackendDescriptor::new(kind, args.chunk, transport).stage("config")?;
    eprintln!(
        "[schedule] {} frames in {} chunks, {} tiles",
        warped.len(),
        chunk_plan.entries().len(),
        tile_plan.len()
    );
    let right = run_tiled(|_| descriptor.connect(), &warped, &masks, &chunk_plan, &tile_plan).map_err(|error| {
        anyhow::Error::from(StageError {
            stage: match stage_of(&error) {
                "backend" => "backend",
                _ => "schedule",
            },
            error,
        })
    })?;

    match (args.format, &left) {
        (Format::Separate, _) => {
            if let Some(l) = &left {
                write_clip(l.frames().to_vec(), &args.out.join("left"), BitDepth::Sixteen)?;
            }
            write_clip(right.into_frames(), &args.out.join("right"), BitDepth::Sixteen)?;
        }
        (format, Some(l)) => {
            let frames = l
                .frames()
                .iter()
                .zip(right.frames())
                .map(|(a, b)| match format {
                    Format::Sbs => compose_sbs(a, b, false),
                    Format::HalfSbs => compose_sbs(a, b, true),
                    _ => compose_anaglyph(a, b),
                })
                .collect::<svsynth::Result<Vec<_>>>()
                .stage("io")?;
            write_clip(frames, &args.out.join("stereo"), BitDepth::Sixteen)?;
        }
        (_, None) => unreachable!("checked above"),
    }
    eprintln!("[io] wrote {}", args.out.display());
    Ok(())
}

fn find_samples(corpus: &Path) -> anyhow::Result<Vec<(String, PathBuf)>> {
    let name = |p: &Path| {
        p.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    if corpus.join("left").is_dir() {
        return Ok(vec![(name(corpus), corpus.to_path_buf())]);
    }
    let entries = fs::read_dir(corpus).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(corpus.to_path_buf()),
        _ => Error::Io {
            path: corpus.to_path_buf(),
            source: e,
        },
    });
    let mut samples = Vec::new();
    for entry in entries.stage("io")? {
        let path = entry.with_context(|| format!("listing {}", corpus.display()))?.path();
        if path.join("left").is_dir() {
            samples.push((name(&path), path));
        }
    }
    samples.sort();
    Ok(samples)
}

#[derive(Serialize)]
#[serde(untagged)]
enum SampleOutcome {
    Scored {
        id: String,
        psnr_db: f64,
        shift_px: usize,
        kept: bool,
    },
    Failed {
        id: String,
        stage: &'static str,
        error: String,
    },
}

#[derive(Serialize)]
struct Histogram {
    bin_width_db: f64,
    counts: Vec<usize>,
}

#[derive(Serialize)]
struct CorpusSummary {
    threshold_db: f64,
    aligned: bool,
    total: usize,
    kept: usize,
    dropped: usize,
    failed: usize,
    psnr_histogram: Histogram,
    samples: Vec<SampleOutcome>,
}

const HISTOGRAM_BIN_DB: f64 = 5.0;
const HISTOGRAM_BINS: usize = 20;

fn process_sample(dir: &Path, id: &str, args: &DatasetArgs, opts: &TripletOptions) -> svsynth::Result<SampleOutcome> {
    let spec = |sub: &str| SequenceSpec::new(dir.join(sub), BitDepth::Sixteen);
    let left = read_sequence(&spec("left"))?;
    let right = read_sequence(&spec("right"))?;
    let disparity = read_disparity_sequence(&dir.join("disparity"))?;
    let triplet = build_triplet(&left, &right, &disparity, opts)?;
    let kept = filter_sample(&triplet, args.psnr_threshold);
    if kept {
        write_sample(&triplet, &args.out, id, args.psnr_threshold)?;
    }
    Ok(SampleOutcome::Scored {
        id: id.to_string(),
        psnr_db: triplet.meta.psnr_db,
        shift_px: triplet.meta.shift_px,
        kept,
    })
}

pub fn dataset(args: &DatasetArgs) -> anyhow::Result<()> {
    let samples = find_samples(&args.corpus)?;
    if samples.is_empty() {
        return Err(StageError {
            stage: "io",
            error: Error::Empty("no sample directories with left/, right/ and disparity/ found"),
        }
        .into());
    }
    let opts = TripletOptions {
        align: args.align,
        align_margin: args.align_margin,
        scope: if args.psnr_all_pixels {
            PsnrScope::AllPixels
        } else {
            PsnrScope::NonOccluded
        },
        splat: splat_options(&args.splat),
    };
    fs::create_dir_all(&args.out)
        .map_err(|e| Error::Io {
            path: args.out.clone(),
            source: e,
        })
        .stage("io")?;

    let outcomes: Vec<SampleOutcome> = samples
        .par_iter()
        .map(|(id, dir)| match process_sample(dir, id, args, &opts) {
            Ok(outcome) => outcome,
            Err(error) => {
                let stage = stage_of(&error);
                eprintln!("[{stage}] sample {id}: {error}");
                SampleOutcome::Failed {
                    id: id.clone(),
                    stage,
                    error: error.to_string(),
                }
            }
        })
        .collect();

    let mut counts = vec![0usize; HISTOGRAM_BINS];
    let (mut kept, mut dropped, mut failed) = (0, 0, 0);
    for o in &outcomes {
        match o {
            SampleOutcome::Scored { psnr_db, kept: k, .. } => {
                let bin = ((psnr_db / HISTOGRAM_BIN_DB).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1);
                counts[bin] += 1;
                if *k {
                    kept += 1;
                } else {
                    dropped += 1;
                }
            }
            SampleOutcome::Failed { .. } => failed += 1,
        }
    }
    let summary = CorpusSummary {
        threshold_db: args.psnr_threshold,
        aligned: args.align,
        total: outcomes.len(),
        kept,
        dropped,
        failed,
        psnr_histogram: Histogram {
            bin_width_db: HISTOGRAM_BIN_DB,
            counts,
        },
        samples: outcomes,
    };
    write_json(&args.out.join("summary.json"), &summary)?;
    eprintln!("[io] {kept} kept, {dropped} dropped, {failed} failed");
    if failed == summary.total {
        return Err(anyhow!("every sample failed"));
    }
    Ok(())
}

pub fn mock_backend(args: &MockBackendArgs) -> anyhow::Result<()> {
    let mode = args.mode.into();
    match &args.listen.listen {
        Some(addr) => {
            let listener = TcpListener::bind(addr).map_err(Error::Transport).stage("backend")?;
            let local = listener.local_addr().map_err(Error::Transport).stage("backend")?;
            eprintln!("[backend] listening on {local}");
            serve_tcp(listener, mode).stage("backend")
        }
        None => serve_stdio(mode).stage("backend"),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| Error::Io {
                path: parent.to_path_buf(),
                source: e,
            })
            .stage("io")?;
    }
    let bytes = serde_json::to_vec_pretty(value).map_err(Error::from).stage("io")?;
    fs::write(path, bytes)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
        .stage("io")
}
