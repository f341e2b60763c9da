//! Frame sequences, disparity files and stereo packing.

mod compose;
mod pfm;
mod sequence;

pub use compose::{compose_anaglyph, compose_sbs};
pub use pfm::{decode_pfm, encode_pfm, read_pfm, write_pfm};
pub use sequence::{
    read_disparity_sequence, read_frame, read_sequence, write_disparity_sequence, write_frame, write_sequence,
    BitDepth, DisparityEncoding, SequenceSpec, DISPARITY_SIDECAR,
};
