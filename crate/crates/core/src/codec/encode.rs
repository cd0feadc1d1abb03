use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{downsample, residual, upsample_nearest, CodecError, RasterFrame, VideoSource};
use crate::config::{SequenceConfig, TileRect};
use crate::container::{Bitstream, FrameHeader, FrameType, Tile, TileGroup, Unit};
use crate::rle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Full,
    Base,
}

/// Bytes of one tile of one layer or track in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RateRecord {
    pub frame_index: u32,
    pub layer: &'static str,
    pub tile_index: u16,
    pub bytes: usize,
}

/// Compresses each tile of `cur`, as raw samples or as a delta against the
/// co-located region of `prev`.
fn code_tiles(cur: &RasterFrame, prev: Option<&RasterFrame>, rects: &[TileRect]) -> Vec<Vec<u8>> {
    rects
        .par_iter()
        .map(|&rect| {
            let pixels = cur.crop(rect);
            match prev {
                None => rle::compress(&pixels),
                Some(p) => rle::compress(&residual(&pixels, &p.crop(rect))),
            }
        })
        .collect()
}

fn push_tiles(units: &mut Vec<Unit>, payloads: Vec<Vec<u8>>) {
    for (i, bytes) in payloads.into_iter().enumerate() {
        units.push(Unit::TileGroup(TileGroup::single(Tile::coded(i as u16, bytes))));
    }
}

/// Two-layer encode: a downscaled base layer with its own closed-GOP
/// temporal prediction, and a tiled enhanced layer predicted only from the
/// base layer.
pub fn encode_svc(source: &VideoSource) -> Result<Bitstream, CodecError> {
    let config = source.config;
    config.validate()?;
    if config.single_layer {
        return Err(CodecError::BadConfig("single-layer config passed to the SVC encoder".into()));
    }
    check_frames(source)?;
    let scale = u32::from(config.scale_factor);
    let gop = u32::from(config.gop_size);

    let base_frames: Vec<RasterFrame> = source
        .frames
        .par_iter()
        .map(|f| downsample(f, scale))
        .collect::<Result<_, _>>()?;
    let base_rects: Vec<TileRect> = (0..config.base_tile_count()).map(|i| config.base_tile_rect(i)).collect();
    let enh_rects: Vec<TileRect> = (0..config.tile_count()).map(|i| config.tile_rect(i)).collect();

    let mut bs = Bitstream::new(config);
    for (idx, frame) in source.frames.iter().enumerate() {
        let index = idx as u32;
        let key = config.is_key_index(index);
        let frame_type = if key { FrameType::Key } else { FrameType::Inter };
        bs.units.push(Unit::TemporalDelimiter);
        bs.units.push(Unit::FrameHeader(FrameHeader::base(index, frame_type)));
        let prev = (!key).then(|| &base_frames[idx - 1]);
        push_tiles(&mut bs.units, code_tiles(&base_frames[idx], prev, &base_rects));

        // Try every base frame inside the window and the current GOP; keep
        // the one giving the smallest enhanced layer (ties: nearest).
        let max_offset = u32::from(config.ref_window).min(index % gop + 1);
        let mut best: Option<(u8, usize, Vec<Vec<u8>>)> = None;
        for offset in 0..max_offset {
            let reference = upsample_nearest(&base_frames[idx - offset as usize], scale);
            let tiles = code_tiles(frame, Some(&reference), &enh_rects);
            let total: usize = tiles.iter().map(Vec::len).sum();
            if best.as_ref().map_or(true, |(_, b, _)| total < *b) {
                best = Some((offset as u8, total, tiles));
            }
        }
        let (offset, _, tiles) = best.expect("window holds at least the current frame");
        bs.units.push(Unit::FrameHeader(FrameHeader::enhanced(index, offset)));
        push_tiles(&mut bs.units, tiles);
    }
    Ok(bs)
}

/// Conventional single-layer tiled track with closed GOPs of length `gop`:
/// KEY tiles carry raw samples, INTER tiles the delta against the same tile
/// of the previous frame.
pub fn encode_track(source: &VideoSource, gop: u16, resolution: Resolution) -> Result<Bitstream, CodecError> {
    let src = source.config;
    src.validate()?;
    check_frames(source)?;
    if gop == 0 {
        return Err(CodecError::BadConfig("gop must be at least 1".into()));
    }
    let scale = u32::from(src.scale_factor);
    let frames: Vec<RasterFrame> = match resolution {
        Resolution::Full => source.frames.clone(),
        Resolution::Base => source
            .frames
            .par_iter()
            .map(|f| downsample(f, scale))
            .collect::<Result<_, _>>()?,
    };
    let config = SequenceConfig {
        width: frames[0].width as u16,
        height: frames[0].height as u16,
        gop_size: gop,
        base_single_tile: false,
        ref_window: 1,
        single_layer: true,
        ..src
    };
    config.validate()?;
    let rects: Vec<TileRect> = (0..config.tile_count()).map(|i| config.tile_rect(i)).collect();

    let mut bs = Bitstream::new(config);
    for (idx, frame) in frames.iter().enumerate() {
        let index = idx as u32;
        let key = config.is_key_index(index);
        let frame_type = if key { FrameType::Key } else { FrameType::Inter };
        bs.units.push(Unit::TemporalDelimiter);
        bs.units.push(Unit::FrameHeader(FrameHeader::base(index, frame_type)));
        let prev = (!key).then(|| &frames[idx - 1]);
        push_tiles(&mut bs.units, code_tiles(frame, prev, &rects));
    }
    Ok(bs)
}

fn check_frames(source: &VideoSource) -> Result<(), CodecError> {
    let (w, h) = (u32::from(source.config.width), u32::from(source.config.height));
    if source.frames.is_empty() {
        return Err(CodecError::BadConfig("source has no frames".into()));
    }
    if let Some(f) = source.frames.iter().find(|f| f.width != w || f.height != h) {
        return Err(CodecError::BadDimensions(format!(
            "frame {}x{} in a {w}x{h} source",
            f.width, f.height
        )));
    }
    Ok(())
}

/// Per-tile byte counts of every coded tile in a stream.
pub fn rate_records(bitstream: &Bitstream) -> Vec<RateRecord> {
    let mut out = Vec::new();
    for frame in bitstream.frames() {
        for (name, view) in [("base", &frame.base), ("enhanced", &frame.enhanced)] {
            let Some(view) = view else { continue };
            for tg in &view.tile_groups {
                for tile in &tg.tiles {
                    out.push(RateRecord {
                        frame_index: view.header.frame_index,
                        layer: name,
                        tile_index: tile.tile_index,
                        bytes: tile.encoded_len(),
                    });
                }
            }
        }
    }
    out
}
