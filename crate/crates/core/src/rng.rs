//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, stream, index, lane)`, so sample
//! `i` of a run is the same no matter how many samples are taken or in which
//! order they are evaluated. Streams separate logically independent
//! sequences (the main sample, an independent copy, kernel generation).

/// Stream used for the primary Poisson configurations.
pub const PRIMARY_STREAM: u64 = 0;
/// Stream used for independent copies (e.g. `F'` in Poincaré checks).
pub const COPY_STREAM: u64 = 1;
/// Stream used when generating random kernels.
pub const KERNEL_STREAM: u64 = 2;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64 random bits keyed on the full counter tuple.
pub fn bits(seed: u64, stream: u64, index: u64, lane: u64) -> u64 {
    let mut h = mix64(seed ^ 0x9E37_79B9_7F4A_7C15);
    h = mix64(h ^ stream.wrapping_mul(0xD134_2543_DE82_EF95));
    h = mix64(h.wrapping_add(index.wrapping_mul(0xA076_1D64_78BD_642F)));
    mix64(h ^ lane.wrapping_mul(0xE703_7ED1_A0B4_28DB).wrapping_add(0x8E9D_5A8F_6A09_E667))
}

/// Uniform in the open interval `(0, 1)`.
pub fn unit_open(seed: u64, stream: u64, index: u64, lane: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    ((bits(seed, stream, index, lane) >> 11) as f64 + 0.5) * SCALE
}
