//! Global stream parameters shared by every layer and track.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Superblock edge in pixels; skipped tiles are counted in these units.
pub const SUPERBLOCK_SIZE: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("scale factor {0} must be at least 2")]
    ScaleFactor(u8),
    #[error("{axis} {size} is not divisible by {divisor}")]
    Misaligned {
        axis: &'static str,
        size: u16,
        divisor: u32,
    },
    #[error("ref_window {ref_window} exceeds gop_size {gop_size}")]
    RefWindow { ref_window: u8, gop_size: u16 },
    #[error("tile of {0} superblocks does not fit a u16 counter")]
    TileTooLarge(u32),
}

/// Frames per second as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameRate {
    pub num: u16,
    pub den: u16,
}

impl FrameRate {
    pub const fn new(num: u16, den: u16) -> Self {
        Self { num, den }
    }

    pub const fn fps(num: u16) -> Self {
        Self { num, den: 1 }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// Duration of one frame in milliseconds.
    pub fn period_ms(self) -> f64 {
        1000.0 * f64::from(self.den) / f64::from(self.num)
    }

    /// Start time of frame `n` in milliseconds.
    pub fn tick_ms(self, n: u64) -> f64 {
        n as f64 * 1000.0 * f64::from(self.den) / f64::from(self.num)
    }

    /// Fractional frame position of a timestamp, `t_ms / period`.
    pub fn ticks(self, t_ms: f64) -> f64 {
        t_ms * f64::from(self.num) / (1000.0 * f64::from(self.den))
    }
}

/// Sequence-level parameters carried in the stream header.
///
/// The enhanced layer runs at `width` x `height`; the base layer at
/// `width / scale_factor` x `height / scale_factor`. Both layers share the
/// same `tile_cols` x `tile_rows` grid, so every enhanced tile has an exactly
/// co-located base region.
///
/// `single_layer` marks a conventional tiled track (one layer at the stated
/// resolution, no enhanced layer) as produced by the track encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub width: u16,
    pub height: u16,
    pub scale_factor: u8,
    pub tile_cols: u8,
    pub tile_rows: u8,
    pub fps: FrameRate,
    pub gop_size: u16,
    pub base_single_tile: bool,
    pub ref_window: u8,
    pub single_layer: bool,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self {
            width: 768,
            height: 384,
            scale_factor: 2,
            tile_cols: 6,
            tile_rows: 4,
            fps: FrameRate::fps(30),
            gop_size: 30,
            base_single_tile: true,
            ref_window: 1,
            single_layer: false,
        }
    }
}

/// Pixel rectangle inside a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileRect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl TileRect {
    pub fn area(&self) -> u32 {
        self.width * self.height
    }
}

impl SequenceConfig {
    pub fn tile_count(&self) -> usize {
        usize::from(self.tile_cols) * usize::from(self.tile_rows)
    }

    pub fn base_width(&self) -> u32 {
        if self.single_layer {
            u32::from(self.width)
        } else {
            u32::from(self.width) / u32::from(self.scale_factor)
        }
    }

    pub fn base_height(&self) -> u32 {
        if self.single_layer {
            u32::from(self.height)
        } else {
            u32::from(self.height) / u32::from(self.scale_factor)
        }
    }

    /// Number of tiles the base layer is split into.
    pub fn base_tile_count(&self) -> usize {
        if self.base_single_tile && !self.single_layer {
            1
        } else {
            self.tile_count()
        }
    }

    pub fn tile_width(&self) -> u32 {
        u32::from(self.width) / u32::from(self.tile_cols)
    }

    pub fn tile_height(&self) -> u32 {
        u32::from(self.height) / u32::from(self.tile_rows)
    }

    /// Region of enhanced (full-resolution) tile `index`.
    pub fn tile_rect(&self, index: usize) -> TileRect {
        let cols = usize::from(self.tile_cols);
        let (col, row) = (index % cols, index / cols);
        let (w, h) = (self.tile_width(), self.tile_height());
        TileRect {
            x: col as u32 * w,
            y: row as u32 * h,
            width: w,
            height: h,
        }
    }

    /// Region of base-layer tile `index` in base-layer pixels.
    pub fn base_tile_rect(&self, index: usize) -> TileRect {
        if self.base_tile_count() == 1 {
            return TileRect {
                x: 0,
                y: 0,
                width: self.base_width(),
                height: self.base_height(),
            };
        }
        let cols = usize::from(self.tile_cols);
        let (col, row) = (index % cols, index / cols);
        let w = self.base_width() / u32::from(self.tile_cols);
        let h = self.base_height() / u32::from(self.tile_rows);
        TileRect {
            x: col as u32 * w,
            y: row as u32 * h,
            width: w,
            height: h,
        }
    }

    /// Superblocks per enhanced tile, rounded up on pixel area.
    pub fn superblocks_per_tile(&self) -> u32 {
        let area = self.tile_width() * self.tile_height();
        area.div_ceil(SUPERBLOCK_SIZE * SUPERBLOCK_SIZE)
    }

    pub fn is_key_index(&self, frame_index: u32) -> bool {
        frame_index % u32::from(self.gop_size) == 0
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width == 0 {
            return Err(ConfigError::NotPositive("width"));
        }
        if self.height == 0 {
            return Err(ConfigError::NotPositive("height"));
        }
        if self.tile_cols == 0 {
            return Err(ConfigError::NotPositive("tile_cols"));
        }
        if self.tile_rows == 0 {
            return Err(ConfigError::NotPositive("tile_rows"));
        }
        if self.fps.num == 0 || self.fps.den == 0 {
            return Err(ConfigError::NotPositive("fps"));
        }
        if self.gop_size == 0 {
            return Err(ConfigError::NotPositive("gop_size"));
        }
        if self.ref_window == 0 {
            return Err(ConfigError::NotPositive("ref_window"));
        }
        if self.scale_factor < 2 {
            return Err(ConfigError::ScaleFactor(self.scale_factor));
        }
        let scale = if self.single_layer {
            1
        } else {
            u32::from(self.scale_factor)
        };
        let col_div = u32::from(self.tile_cols) * scale;
        if u32::from(self.width) % col_div != 0 {
            return Err(ConfigError::Misaligned {
                axis: "width",
                size: self.width,
                divisor: col_div,
            });
        }
        let row_div = u32::from(self.tile_rows) * scale;
        if u32::from(self.height) % row_div != 0 {
            return Err(ConfigError::Misaligned {
                axis: "height",
                size: self.height,
                divisor: row_div,
            });
        }
        if u16::from(self.ref_window) > self.gop_size {
            return Err(ConfigError::RefWindow {
                ref_window: self.ref_window,
                gop_size: self.gop_size,
            });
        }
        let sb = self.superblocks_per_tile();
        if sb > u32::from(u16::MAX) {
            return Err(ConfigError::TileTooLarge(sb));
        }
        Ok(())
    }
}
