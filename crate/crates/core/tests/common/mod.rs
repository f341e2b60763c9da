//! Test-only reference implementations and synthetic scenes.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svsynth::splat::{splat_weight, SplatOptions};
use svsynth::{DisparityMap, FrameBuffer, OcclusionMask, PriorityMap};

pub struct OracleOutput {
    pub color: Vec<f32>,
    pub coverage: Vec<f32>,
    pub holes: Vec<bool>,
}

/// Scatters every source pixel into whole-frame accumulators in row-major
/// source order, then normalises.
pub fn oracle_splat(
    frame: &FrameBuffer,
    disparity: &DisparityMap,
    priority: Option<&PriorityMap>,
    opts: &SplatOptions,
) -> OracleOutput {
    let (w, h, c) = (frame.width(), frame.height(), frame.channels());
    let prio: Vec<f64> = match priority {
        Some(p) => p.values().iter().map(|&v| f64::from(v)).collect(),
        None => disparity.values().iter().map(|&v| -f64::from(v)).collect(),
    };
    let p_max = prio.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut color_acc = vec![0.0f64; w * h * c];
    let mut weight_acc = vec![0.0f64; w * h];
    let mut cov_acc = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let src = y * w + x;
            let weight = splat_weight(prio[src], p_max, opts.exponent_floor);
            let target = x as f64 + f64::from(disparity.values()[src]);
            let base = target.floor();
            let frac = target - base;
            let neighbours = [(base as i64, 1.0 - frac), (base as i64 + 1, frac)];
            for (tx, b) in neighbours {
                if b <= 0.0 || tx < 0 || tx >= w as i64 {
                    continue;
                }
                let dst = y * w + tx as usize;
                weight_acc[dst] += b * weight;
                cov_acc[dst] += b;
                for ch in 0..c {
                    color_acc[dst * c + ch] += b * weight * f64::from(frame.data()[src * c + ch]);
                }
            }
        }
    }

    let mut color = vec![0.0f32; w * h * c];
    let mut coverage = vec![0.0f32; w * h];
    let mut holes = vec![false; w * h];
    for i in 0..w * h {
        coverage[i] = cov_acc[i] as f32;
        holes[i] = coverage[i] < opts.coverage_threshold || weight_acc[i] == 0.0;
        for ch in 0..c {
            color[i * c + ch] = if holes[i] {
                opts.hole_fill_value
            } else {
                ((color_acc[i * c + ch] / weight_acc[i]) as f32).clamp(0.0, 1.0)
            };
        }
    }
    OracleOutput { color, coverage, holes }
}

pub struct Instance {
    pub frame: FrameBuffer,
    pub disparity: DisparityMap,
    pub priority: Option<PriorityMap>,
}

/// Random frame up to 32x32 with disparities in [-8, 8]; half of the
/// instances carry an explicit random priority map.
pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let w = rng.gen_range(1..=32);
    let h = rng.gen_range(1..=32);
    let c = if rng.gen_bool(0.5) { 1 } else { 3 };
    let frame = FrameBuffer::new(w, h, c, (0..w * h * c).map(|_| rng.gen::<f32>()).collect()).unwrap();
    let disparity = DisparityMap::new(
        w,
        h,
        (0..w * h)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    rng.gen_range(-8i32..=8) as f32
                } else {
                    rng.gen_range(-8.0f32..=8.0)
                }
            })
            .collect(),
    )
    .unwrap();
    let priority = rng
        .gen_bool(0.5)
        .then(|| PriorityMap::new(w, h, (0..w * h).map(|_| rng.gen_range(-20.0f32..20.0)).collect()).unwrap());
    Instance {
        frame,
        disparity,
        priority,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 64x64 textured scene: background at `d = -10`, a 16x16 square at
/// `[24, 40)^2` with `d = 0`.
pub struct SquareScene {
    pub left: FrameBuffer,
    pub disparity: DisparityMap,
}

pub const SCENE: usize = 64;
pub const SQUARE: std::ops::Range<usize> = 24..40;
pub const BACKGROUND_D: f32 = -10.0;

pub fn square_scene(seed: u64) -> SquareScene {
    let mut rng = rng(seed);
    let n = SCENE * SCENE;
    let left = FrameBuffer::new(SCENE, SCENE, 3, (0..n * 3).map(|_| rng.gen::<f32>()).collect()).unwrap();
    let disparity = DisparityMap::new(
        SCENE,
        SCENE,
        (0..n)
            .map(|i| {
                let (x, y) = (i % SCENE, i / SCENE);
                if SQUARE.contains(&x) && SQUARE.contains(&y) {
                    0.0
                } else {
                    BACKGROUND_D
                }
            })
            .collect(),
    )
    .unwrap();
    SquareScene { left, disparity }
}

/// The right view derived by hand for [`square_scene`] under the default
/// priority `p = -d`: background content moves 10 px left with weight 1, the
/// square stays put with weight `sqrt(2)^-10 = 1/32`, and the two blend where
/// they land together. Returns the frame and the expected holes.
pub fn square_scene_right(scene: &SquareScene) -> (FrameBuffer, OcclusionMask) {
    let shift = (-BACKGROUND_D) as usize;
    let src = &scene.left;
    let mut data = vec![0.0f32; SCENE * SCENE * 3];
    let mut holes = vec![false; SCENE * SCENE];
    let square_weight = 1.0f64 / 32.0;
    for y in 0..SCENE {
        let in_square_rows = SQUARE.contains(&y);
        for x in 0..SCENE {
            let i = y * SCENE + x;
            // background source feeding this target, if any
            let bg = (x + shift < SCENE && !(in_square_rows && SQUARE.contains(&(x + shift)))).then_some(x + shift);
            let fg = (in_square_rows && SQUARE.contains(&x)).then_some(x);
            let px = &mut data[i * 3..i * 3 + 3];
            match (fg, bg) {
                (None, None) => holes[i] = true,
                (None, Some(b)) => px.copy_from_slice(src.pixel(b, y)),
                (Some(f), None) => px.copy_from_slice(src.pixel(f, y)),
                (Some(f), Some(b)) => {
                    for (ch, out) in px.iter_mut().enumerate() {
                        let mix = (square_weight * f64::from(src.pixel(f, y)[ch]) + f64::from(src.pixel(b, y)[ch]))
                            / (square_weight + 1.0);
                        *out = mix as f32;
                    }
                }
            }
        }
    }
    (
        FrameBuffer::new(SCENE, SCENE, 3, data).unwrap(),
        OcclusionMask::new(SCENE, SCENE, holes).unwrap(),
    )
}

/// Column ranges of holes in row `y`.
pub fn hole_runs(mask: &OcclusionMask, y: usize) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for x in 0..mask.width() {
        match (mask.get(x, y), start) {
            (true, None) => start = Some(x),
            (false, Some(s)) => {
                runs.push(s..x);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(s..mask.width());
    }
    runs
}
