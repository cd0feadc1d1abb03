//! Mock layered codec over procedurally generated luma video.
//!
//! Nothing here is a real video codec: tiles are coded as zero-run
//! compressed residuals so that payload sizes depend on content while
//! reconstruction stays bit-exact. What matters is the dependency structure:
//! base frames predict from earlier base frames inside a closed GOP, and
//! enhanced tiles predict only from (upscaled) base frames.

mod content;
mod decode;
mod encode;
mod raster;

pub use content::{generate_content, generate_content_with, ContentParams, VideoSource};
pub use decode::{decode_frame, Decoder};
pub use encode::{encode_svc, encode_track, rate_records, RateRecord, Resolution};
pub use raster::{apply_residual, downsample, psnr, residual, upsample_nearest, RasterFrame};

use thiserror::Error;

use crate::config::ConfigError;
use crate::container::ValidationReport;
use crate::rle::RleError;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("base frame {0} missing")]
    MissingBase(u32),
    #[error("stream failed validation: {0}")]
    NotValidated(ValidationReport),
    #[error(transparent)]
    Rle(#[from] RleError),
}

impl From<ConfigError> for CodecError {
    fn from(e: ConfigError) -> Self {
        CodecError::BadConfig(e.to_string())
    }
}
