use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{apply_residual, upsample_nearest, CodecError, RasterFrame};
use crate::container::{validate_structure, Bitstream, FrameType, FrameView, TilePayload};
use crate::geometry::TileSet;
use crate::rle;

/// Decoder over a validated stream. Reconstructed base frames are cached, so
/// decoding frames in order costs one base frame each.
pub struct Decoder<'a> {
    bitstream: &'a Bitstream,
    frames: Vec<FrameView<'a>>,
    positions: HashMap<u32, usize>,
    base_cache: Mutex<HashMap<u32, Arc<RasterFrame>>>,
}

impl<'a> Decoder<'a> {
    pub fn new(bitstream: &'a Bitstream) -> Result<Self, CodecError> {
        let report = validate_structure(bitstream);
        if !report.is_clean() {
            return Err(CodecError::NotValidated(report));
        }
        let frames = bitstream.frames();
        let positions = frames
            .iter()
            .enumerate()
            .filter_map(|(pos, f)| f.frame_index().map(|i| (i, pos)))
            .collect();
        Ok(Self {
            bitstream,
            frames,
            positions,
            base_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn frame_indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.frames.iter().filter_map(FrameView::frame_index)
    }

    /// Reconstructs the base layer (or the single layer of a track).
    pub fn base_frame(&self, frame_index: u32) -> Result<Arc<RasterFrame>, CodecError> {
        if let Some(f) = self.base_cache.lock().unwrap().get(&frame_index) {
            return Ok(f.clone());
        }
        let pos = *self
            .positions
            .get(&frame_index)
            .ok_or(CodecError::MissingBase(frame_index))?;
        let view = self.frames[pos].base.as_ref().ok_or(CodecError::MissingBase(frame_index))?;
        let config = &self.bitstream.config;
        let prev = match view.header.frame_type {
            FrameType::Key => None,
            FrameType::Inter => Some(self.base_frame(frame_index - 1)?),
        };
        let mut out = RasterFrame::filled(config.base_width(), config.base_height(), 0);
        for tile in view.tiles() {
            let rect = config.base_tile_rect(usize::from(tile.tile_index));
            let TilePayload::Coded(bytes) = &tile.payload else {
                unreachable!("validated base layers carry only coded tiles");
            };
            let data = rle::decompress_exact(bytes, rect.area() as usize)?;
            let pixels = match &prev {
                None => data,
                Some(p) => apply_residual(&p.crop(rect), &data),
            };
            out.paste(rect, &pixels);
        }
        let out = Arc::new(out);
        self.base_cache.lock().unwrap().insert(frame_index, out.clone());
        Ok(out)
    }

    /// Reconstructs frame `frame_index` at enhanced resolution. Received
    /// coded tiles are rebuilt from their residual; every other tile is the
    /// upscaled co-located base region of the same frame.
    ///
    /// For a single-layer track the track frame itself is returned and
    /// `received` is ignored.
    pub fn decode_frame(&self, frame_index: u32, received: &TileSet) -> Result<RasterFrame, CodecError> {
        let config = &self.bitstream.config;
        let base = self.base_frame(frame_index)?;
        if config.single_layer {
            return Ok((*base).clone());
        }
        let scale = u32::from(config.scale_factor);
        let mut out = upsample_nearest(&base, scale);
        let pos = self.positions[&frame_index];
        let Some(enh) = self.frames[pos].enhanced.as_ref() else {
            return Ok(out);
        };
        let offset = u32::from(enh.header.base_ref_offset);
        let mut reference: Option<RasterFrame> = None;
        for tile in enh.tiles() {
            let TilePayload::Coded(bytes) = &tile.payload else { continue };
            if !received.contains(tile.tile_index) {
                continue;
            }
            if reference.is_none() {
                reference = Some(if offset == 0 {
                    out.clone()
                } else {
                    upsample_nearest(&*self.base_frame(frame_index - offset)?, scale)
                });
            }
            let rect = config.tile_rect(usize::from(tile.tile_index));
            let data = rle::decompress_exact(bytes, rect.area() as usize)?;
            let pixels = apply_residual(&reference.as_ref().unwrap().crop(rect), &data);
            out.paste(rect, &pixels);
        }
        Ok(out)
    }
}

/// One-shot decode: validates the stream, then decodes `frame_index`.
pub fn decode_frame(bitstream: &Bitstream, frame_index: u32, received: &TileSet) -> Result<RasterFrame, CodecError> {
    Decoder::new(bitstream)?.decode_frame(frame_index, received)
}
