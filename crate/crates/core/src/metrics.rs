//! Peak signal-to-noise ratio over `[0, 1]` frames, optionally restricted to
//! pixels outside an occlusion mask.

use crate::error::{Error, Result};
use crate::model::{FrameBuffer, OcclusionMask};

/// Reported in place of infinity when two inputs match exactly.
pub const PSNR_CAP_DB: f64 = 99.0;

/// Running sum of squared errors. Frames pooled into one accumulator yield a
/// single MSE, not an average of per-frame scores.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SquaredErrorPool {
    sum: f64,
    samples: u64,
}

impl SquaredErrorPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds every channel of every pixel where `holes` is unset (or all
    /// pixels when no mask is given).
    pub fn add(&mut self, a: &FrameBuffer, b: &FrameBuffer, holes: Option<&OcclusionMask>) -> Result<()> {
        if !a.same_shape(b) {
            return Err(Error::DimensionMismatch(format!(
                "psnr inputs {}x{}x{} and {}x{}x{}",
                a.width(),
                a.height(),
                a.channels(),
                b.width(),
                b.height(),
                b.channels()
            )));
        }
        let c = a.channels();
        match holes {
            None => {
                self.sum += sum_sq(a.data(), b.data());
                self.samples += a.data().len() as u64;
            }
            Some(mask) => {
                if !mask.matches(a) {
                    return Err(Error::DimensionMismatch(format!(
                        "mask {}x{} vs frame {}x{}",
                        mask.width(),
                        mask.height(),
                        a.width(),
                        a.height()
                    )));
                }
                for (i, _) in mask.values().iter().enumerate().filter(|(_, &h)| !h) {
                    self.sum += sum_sq(&a.data()[i * c..(i + 1) * c], &b.data()[i * c..(i + 1) * c]);
                    self.samples += c as u64;
                }
            }
        }
        Ok(())
    }

    pub fn mse(&self) -> Result<f64> {
        if self.samples == 0 {
            return Err(Error::NoValidPixels);
        }
        Ok(self.sum / self.samples as f64)
    }

    pub fn psnr(&self) -> Result<f64> {
        Ok(psnr_from_mse(self.mse()?))
    }
}

fn sum_sq(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

/// `10 log10(1 / mse)`, capped at [`PSNR_CAP_DB`].
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        return PSNR_CAP_DB;
    }
    (10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB)
}

/// PSNR with peak 1.0 over all channels of the pixels not flagged in
/// `holes`.
pub fn psnr(a: &FrameBuffer, b: &FrameBuffer, holes: Option<&OcclusionMask>) -> Result<f64> {
    let mut pool = SquaredErrorPool::new();
    pool.add(a, b, holes)?;
    pool.psnr()
}
