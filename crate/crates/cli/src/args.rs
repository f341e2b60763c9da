use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use svsynth::inpaint::{server::ServeMode, DEFAULT_CAPACITY};
use svsynth::scheduler::DEFAULT_OVERLAP;
use svsynth::StereoDirection;

#[derive(Parser, Debug)]
#[command(name = "svsynth", version, about = "Convert monocular video to stereo")]
pub struct Cli {
    /// Worker threads (default: all cores). Never changes outputs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Splat the input view and write warped frames, masks and stats.
    Warp(WarpArgs),
    /// Full conversion: splat, inpaint, compose.
    Convert(ConvertArgs),
    /// Build filtered training triplets from a stereo corpus.
    Dataset(DatasetArgs),
    /// Serve the inpainting protocol for testing.
    MockBackend(MockBackendArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GeometryArgs {
    /// Input view as a `%06d.png` sequence.
    #[arg(long)]
    pub input: PathBuf,
    /// Depth sequence (`%06d.png`, 1 = nearest).
    #[arg(long, conflicts_with = "disparity")]
    pub depth: Option<PathBuf>,
    /// Disparity sequence (`%06d.pfm`, or 16-bit png with meta.json).
    #[arg(long)]
    pub disparity: Option<PathBuf>,
    /// Disparity at depth 0, in pixels. Required with --depth.
    #[arg(long)]
    pub max_disparity: Option<f32>,
    /// Depth of the zero-disparity plane.
    #[arg(long, default_value_t = 1.0)]
    pub convergence: f32,
    #[arg(long, value_enum, default_value_t = Direction::LeftToRight)]
    pub direction: Direction,
    #[command(flatten)]
    pub splat: SplatArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SplatArgs {
    /// Coverage below which a target pixel is a hole.
    #[arg(long, default_value_t = 1e-3)]
    pub coverage_threshold: f32,
    #[arg(long, default_value_t = 0)]
    pub mask_dilation: usize,
    /// Bit-reproducible accumulation order.
    #[arg(long, num_args = 0..=1, default_value_t = true, default_missing_value = "true", action = clap::ArgAction::Set)]
    pub deterministic: bool,
}

#[derive(Args, Debug)]
pub struct WarpArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    /// Input view. Required unless --warped is given.
    #[arg(long, required_unless_present = "warped")]
    pub input: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["disparity", "warped"])]
    pub depth: Option<PathBuf>,
    #[arg(long, conflicts_with = "warped")]
    pub disparity: Option<PathBuf>,
    /// Output directory of an earlier `warp` run; skips splatting.
    #[arg(long)]
    pub warped: Option<PathBuf>,
    #[arg(long)]
    pub max_disparity: Option<f32>,
    #[arg(long, default_value_t = 1.0)]
    pub convergence: f32,
    #[arg(long, value_enum, default_value_t = Direction::LeftToRight)]
    pub direction: Direction,
    #[command(flatten)]
    pub splat: SplatArgs,

    #[arg(long)]
    pub out: PathBuf,
    /// Frames per backend call.
    #[arg(long, default_value_t = DEFAULT_CAPACITY)]
    pub chunk: usize,
    /// Frames carried over between chunks.
    #[arg(long, default_value_t = DEFAULT_OVERLAP)]
    pub overlap: usize,
    /// Spatial tile size as HxW; whole frame when absent.
    #[arg(long)]
    pub tile: Option<TileSize>,
    #[arg(long, default_value_t = 128)]
    pub tile_overlap: usize,
    #[arg(long, value_enum, default_value_t = Backend::Pullpush)]
    pub backend: Backend,
    /// Command line or host:port of an external backend.
    #[arg(long, required_if_eq("backend", "external"))]
    pub external: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Sbs)]
    pub format: Format,
}

impl ConvertArgs {
    pub fn geometry(&self) -> Option<GeometryArgs> {
        Some(GeometryArgs {
            input: self.input.clone()?,
            depth: self.depth.clone(),
            disparity: self.disparity.clone(),
            max_disparity: self.max_disparity,
            convergence: self.convergence,
            direction: self.direction,
            splat: self.splat.clone(),
        })
    }
}

#[derive(Args, Debug)]
pub struct DatasetArgs {
    /// Directory of samples, each holding left/, right/ and disparity/.
    /// A single sample directory is accepted too.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Align parallax before warping.
    #[arg(long)]
    pub align: bool,
    #[arg(long, default_value_t = 0.0)]
    pub align_margin: f32,
    /// Keep samples scoring strictly above this.
    #[arg(long, default_value_t = svsynth::dataset::DEFAULT_PSNR_THRESHOLD_DB)]
    pub psnr_threshold: f64,
    /// Score holes too instead of covered pixels only.
    #[arg(long)]
    pub psnr_all_pixels: bool,
    #[command(flatten)]
    pub splat: SplatArgs,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct Listen {
    /// Serve on stdin/stdout.
    #[arg(long)]
    pub stdio: bool,
    /// Serve TCP on host:port; the bound address is printed to stderr.
    #[arg(long)]
    pub listen: Option<String>,
}

#[derive(Args, Debug)]
pub struct MockBackendArgs {
    #[command(flatten)]
    pub listen: Listen,
    #[arg(long, value_enum, default_value_t = Mode::Echo)]
    pub mode: Mode,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

impl From<Direction> for StereoDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::LeftToRight => StereoDirection::LeftToRight,
            Direction::RightToLeft => StereoDirection::RightToLeft,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Null,
    Pullpush,
    External,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Sbs,
    HalfSbs,
    Anaglyph,
    Separate,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Mode {
    Echo,
    Pullpush,
}

impl From<Mode> for ServeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Echo => ServeMode::Echo,
            Mode::Pullpush => ServeMode::PullPush,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileSize {
    pub height: usize,
    pub width: usize,
}

impl FromStr for TileSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (h, w) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected HxW, got '{s}'"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad tile size '{s}': {e}"))
        };
        let (height, width) = (parse(h)?, parse(w)?);
        if height == 0 || width == 0 {
            return Err(format!("tile size must be positive, got '{s}'"));
        }
        Ok(TileSize { height, width })
    }
}
