//! Stereo frame packing for delivery.

use crate::error::{Error, Result};
use crate::model::FrameBuffer;

fn check(left: &FrameBuffer, right: &FrameBuffer) -> Result<()> {
    if !left.same_shape(right) {
        return Err(Error::DimensionMismatch(format!(
            "left {}x{}x{}, right {}x{}x{}",
            left.width(),
            left.height(),
            left.channels(),
            right.width(),
            right.height(),
            right.channels()
        )));
    }
    Ok(())
}

/// Averages horizontal pixel pairs; an odd last column is dropped.
fn halve_width(frame: &FrameBuffer) -> Vec<f32> {
    let c = frame.channels();
    let half = frame.width() / 2;
    let mut out = Vec::with_capacity(half * frame.height() * c);
    for y in 0..frame.height() {
        let row = frame.row(y);
        for x in 0..half {
            for ch in 0..c {
                out.push(0.5 * (row[2 * x * c + ch] + row[(2 * x + 1) * c + ch]));
            }
        }
    }
    out
}

/// Side-by-side packing, left view first. With `half` each view is
/// box-downsampled to half width so the packed frame keeps the input width.
pub fn compose_sbs(left: &FrameBuffer, right: &FrameBuffer, half: bool) -> Result<FrameBuffer> {
    check(left, right)?;
    let (h, c) = (left.height(), left.channels());
    if half {
        let eye_w = left.width() / 2;
        if eye_w == 0 {
            return Err(Error::InvalidArgument("half side-by-side needs width >= 2".into()));
        }
        let (l, r) = (halve_width(left), halve_width(right));
        let stride = eye_w * c;
        let mut data = Vec::with_capacity(2 * l.len());
        for y in 0..h {
            data.extend_from_slice(&l[y * stride..(y + 1) * stride]);
            data.extend_from_slice(&r[y * stride..(y + 1) * stride]);
        }
        return Ok(FrameBuffer::from_raw(2 * eye_w, h, c, data));
    }
    let mut data = Vec::with_capacity(2 * left.data().len());
    for y in 0..h {
        data.extend_from_slice(left.row(y));
        data.extend_from_slice(right.row(y));
    }
    Ok(FrameBuffer::from_raw(2 * left.width(), h, c, data))
}

/// Red from the left view, green and blue from the right. Gray inputs are
/// treated as equal RGB.
pub fn compose_anaglyph(left: &FrameBuffer, right: &FrameBuffer) -> Result<FrameBuffer> {
    check(left, right)?;
    let c = left.channels();
    let (w, h) = (left.width(), left.height());
    let mut data = Vec::with_capacity(w * h * 3);
    for (l, r) in left.data().chunks_exact(c).zip(right.data().chunks_exact(c)) {
        data.push(l[0]);
        data.push(r[1.min(c - 1)]);
        data.push(r[2.min(c - 1)]);
    }
    Ok(FrameBuffer::from_raw(w, h, 3, data))
}
