use crate::config::TileRect;

use super::CodecError;

/// One 8-bit luma plane, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterFrame {
    pub width: u32,
    pub height: u32,
    pub samples: Vec<u8>,
}

impl RasterFrame {
    pub fn new(width: u32, height: u32, samples: Vec<u8>) -> Result<Self, CodecError> {
        if samples.len() != width as usize * height as usize {
            return Err(CodecError::BadDimensions(format!(
                "{} samples for {width}x{height}",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self {
            width,
            height,
            samples: vec![value; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.samples[y as usize * self.width as usize + x as usize]
    }

    /// Copies out the pixels of `rect`, row-major.
    pub fn crop(&self, rect: TileRect) -> Vec<u8> {
        let mut out = Vec::with_capacity(rect.area() as usize);
        let stride = self.width as usize;
        for y in rect.y..rect.y + rect.height {
            let start = y as usize * stride + rect.x as usize;
            out.extend_from_slice(&self.samples[start..start + rect.width as usize]);
        }
        out
    }

    /// Writes `data` (row-major, `rect` sized) into `rect`.
    pub fn paste(&mut self, rect: TileRect, data: &[u8]) {
        debug_assert_eq!(data.len(), rect.area() as usize);
        let stride = self.width as usize;
        for (row, chunk) in data.chunks_exact(rect.width as usize).enumerate() {
            let start = (rect.y as usize + row) * stride + rect.x as usize;
            self.samples[start..start + rect.width as usize].copy_from_slice(chunk);
        }
    }
}

/// Box filter: each output pixel is the mean of a `factor` x `factor` block,
/// rounded half up.
pub fn downsample(frame: &RasterFrame, factor: u32) -> Result<RasterFrame, CodecError> {
    if factor == 0 || frame.width % factor != 0 || frame.height % factor != 0 {
        return Err(CodecError::BadDimensions(format!(
            "{}x{} not divisible by {factor}",
            frame.width, frame.height
        )));
    }
    let (w, h) = (frame.width / factor, frame.height / factor);
    let n = factor * factor;
    let stride = frame.width as usize;
    let f = factor as usize;
    let mut sums = vec![0u32; w as usize];
    let mut out = Vec::with_capacity(w as usize * h as usize);
    for by in 0..h as usize {
        sums.iter_mut().for_each(|s| *s = 0);
        for row in 0..f {
            let line = &frame.samples[(by * f + row) * stride..][..stride];
            for (bx, block) in line.chunks_exact(f).enumerate() {
                sums[bx] += block.iter().map(|&v| u32::from(v)).sum::<u32>();
            }
        }
        out.extend(sums.iter().map(|&s| ((s + n / 2) / n) as u8));
    }
    Ok(RasterFrame {
        width: w,
        height: h,
        samples: out,
    })
}

/// Nearest-neighbour upscale: every source pixel becomes a `factor` x
/// `factor` block.
pub fn upsample_nearest(frame: &RasterFrame, factor: u32) -> RasterFrame {
    assert!(factor >= 1, "upsample factor must be positive");
    if factor == 1 {
        return frame.clone();
    }
    let f = factor as usize;
    let (w, h) = (frame.width * factor, frame.height * factor);
    let mut out = Vec::with_capacity(w as usize * h as usize);
    let mut line = Vec::with_capacity(w as usize);
    for src_row in frame.samples.chunks_exact(frame.width as usize) {
        line.clear();
        for &v in src_row {
            line.extend(std::iter::repeat(v).take(f));
        }
        for _ in 0..f {
            out.extend_from_slice(&line);
        }
    }
    RasterFrame {
        width: w,
        height: h,
        samples: out,
    }
}

/// Peak signal-to-noise ratio in dB; identical frames give `f64::INFINITY`.
pub fn psnr(a: &RasterFrame, b: &RasterFrame) -> Result<f64, CodecError> {
    if a.width != b.width || a.height != b.height {
        return Err(CodecError::BadDimensions(format!(
            "{}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    let sse: u64 = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / a.samples.len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

/// `cur - reference` per sample, modulo 256.
pub fn residual(cur: &[u8], reference: &[u8]) -> Vec<u8> {
    cur.iter()
        .zip(reference)
        .map(|(&c, &r)| c.wrapping_sub(r))
        .collect()
}

/// Inverse of [`residual`].
pub fn apply_residual(reference: &[u8], residual: &[u8]) -> Vec<u8> {
    reference
        .iter()
        .zip(residual)
        .map(|(&r, &d)| r.wrapping_add(d))
        .collect()
}
