//! Procedural test video.
//!
//! Frames are a smooth field (a few drifting 2-D sinusoids, horizontally
//! periodic so the 360-degree seam is continuous) sampled on the base-layer
//! grid, plus sparse full-resolution detail that lives for a handful of
//! frames at a time. The smooth part survives downscaling exactly; the
//! detail does not, and changes slowly enough that frame-to-frame deltas
//! stay small.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CodecError, RasterFrame};
use crate::config::SequenceConfig;

#[derive(Debug, Clone)]
pub struct VideoSource {
    pub config: SequenceConfig,
    pub frames: Vec<RasterFrame>,
    pub seed: u64,
}

/// Knobs of the generator. The defaults are what every test and the CLI use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentParams {
    pub waves: usize,
    /// Amplitude range of each wave, in sample values.
    pub amplitude: (f64, f64),
    /// Phase drift per frame, radians.
    pub drift: (f64, f64),
    /// Fraction of pixels carrying detail at any instant.
    pub detail_density: f64,
    /// Detail offset range, in sample values (sign is random).
    pub detail_amplitude: (u32, u32),
    /// Frames a detail sample persists before it is re-drawn.
    pub detail_lifetime: u32,
}

impl Default for ContentParams {
    fn default() -> Self {
        Self {
            waves: 3,
            amplitude: (18.0, 30.0),
            drift: (0.0005, 0.0015),
            detail_density: 0.004,
            detail_amplitude: (40, 90),
            detail_lifetime: 12,
        }
    }
}

struct Wave {
    amplitude: f64,
    fx: f64,
    fy: f64,
    phase: f64,
    drift: f64,
}

/// SplitMix64 finalizer; a cheap stateless per-pixel hash.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn generate_content(
    seed: u64,
    config: &SequenceConfig,
    frame_count: usize,
) -> Result<VideoSource, CodecError> {
    generate_content_with(seed, config, frame_count, &ContentParams::default())
}

pub fn generate_content_with(
    seed: u64,
    config: &SequenceConfig,
    frame_count: usize,
    params: &ContentParams,
) -> Result<VideoSource, CodecError> {
    config.validate()?;
    if frame_count == 0 {
        return Err(CodecError::BadConfig("frame_count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<Wave> = (0..params.waves)
        .map(|_| {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            Wave {
                amplitude: rng.gen_range(params.amplitude.0..=params.amplitude.1),
                fx: f64::from(rng.gen_range(1..=3u32)),
                fy: f64::from(rng.gen_range(0..=2u32)),
                phase: rng.gen_range(0.0..TAU),
                drift: sign * rng.gen_range(params.drift.0..=params.drift.1),
            }
        })
        .collect();
    let detail_key = rng.gen::<u64>();

    let scale = if config.single_layer {
        1
    } else {
        u32::from(config.scale_factor)
    };
    let (w, h) = (u32::from(config.width), u32::from(config.height));
    let (bw, bh) = (w / scale, h / scale);
    let threshold = (params.detail_density * u64::MAX as f64) as u64;
    let lifetime = u64::from(params.detail_lifetime.max(1));
    let (amp_lo, amp_hi) = params.detail_amplitude;
    let amp_span = u64::from(amp_hi.saturating_sub(amp_lo)) + 1;

    let frames = (0..frame_count)
        .map(|t| {
            let tf = t as f64;
            let mut field = Vec::with_capacity(bw as usize * bh as usize);
            for by in 0..bh {
                let v = (f64::from(by) + 0.5) / f64::from(bh);
                for bx in 0..bw {
                    let u = (f64::from(bx) + 0.5) / f64::from(bw);
                    let s: f64 = waves
                        .iter()
                        .map(|wv| {
                            wv.amplitude * (TAU * (wv.fx * u + wv.fy * v) + wv.phase + wv.drift * tf).sin()
                        })
                        .sum();
                    field.push((128.0 + s).round().clamp(1.0, 255.0) as u8);
                }
            }
            let mut samples = Vec::with_capacity(w as usize * h as usize);
            for y in 0..h {
                let row = &field[(y / scale * bw) as usize..][..bw as usize];
                for x in 0..w {
                    let base = row[(x / scale) as usize];
                    let pixel = u64::from(y) * u64::from(w) + u64::from(x);
                    let key = mix(detail_key ^ pixel);
                    // Each pixel re-draws its detail every `lifetime` frames,
                    // staggered so only a slice of pixels changes per frame.
                    let epoch = (t as u64 + key % lifetime) / lifetime;
                    let draw = mix(key ^ epoch.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                    let value = if draw < threshold {
                        let amp = (amp_lo as u64 + (draw >> 8) % amp_span) as i32;
                        let signed = if draw & 1 == 0 { amp } else { -amp };
                        (i32::from(base) + signed).clamp(1, 255) as u8
                    } else {
                        base
                    };
                    samples.push(value);
                }
            }
            RasterFrame {
                width: w,
                height: h,
                samples,
            }
        })
        .collect();

    Ok(VideoSource {
        config: *config,
        frames,
        seed,
    })
}

impl VideoSource {
    /// A source whose every frame equals frame 0 of `self`.
    pub fn frozen(&self, frame_count: usize) -> VideoSource {
        VideoSource {
            config: self.config,
            frames: vec![self.frames[0].clone(); frame_count],
            seed: self.seed,
        }
    }

    /// Headerless 8-bit dump of all frames, back to back.
    pub fn raw_bytes(&self) -> Vec<u8> {
        self.frames.iter().flat_map(|f| f.samples.iter().copied()).collect()
    }

    /// Rebuilds a source from a headerless dump.
    pub fn from_raw(config: SequenceConfig, seed: u64, raw: &[u8]) -> Result<VideoSource, CodecError> {
        config.validate()?;
        let (w, h) = (u32::from(config.width), u32::from(config.height));
        let frame_len = w as usize * h as usize;
        if raw.is_empty() || raw.len() % frame_len != 0 {
            return Err(CodecError::BadDimensions(format!(
                "{} bytes is not a whole number of {w}x{h} frames",
                raw.len()
            )));
        }
        let frames = raw
            .chunks_exact(frame_len)
            .map(|c| RasterFrame {
                width: w,
                height: h,
                samples: c.to_vec(),
            })
            .collect();
        Ok(VideoSource { config, frames, seed })
    }
}
