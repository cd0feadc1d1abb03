//! Server-side viewport rewriting: keep the enhanced tiles a client needs,
//! replace the rest with skipped tiles, and forward the base layer as is.

mod mode;

pub use mode::{InterMode, PartitionMode, RefFrames, SuperblockMode, MODE_RECORD_LEN};

use thiserror::Error;

use crate::config::SequenceConfig;
use crate::container::{Bitstream, FrameHeader, Layer, Tile, TileGroup, TilePayload, Unit};
use crate::geometry::{select_tiles, GeometryError, Projection, TileSet, Viewport};

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("selected tile {0} is not coded in the input frame")]
    TileMissing(u16),
    #[error("tile index {index} outside a grid of {count}")]
    BadIndex { index: usize, count: usize },
    #[error("frame {0} not in stream")]
    NoFrame(u32),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A skipped enhanced tile: one canonical mode record standing for every
/// superblock in the tile.
pub fn synthesize_skipped_tile(tile_index: usize, config: &SequenceConfig) -> Result<Tile, RewriteError> {
    let count = config.tile_count();
    if tile_index >= count {
        return Err(RewriteError::BadIndex { index: tile_index, count });
    }
    let superblocks = config.superblocks_per_tile();
    Ok(Tile {
        tile_index: tile_index as u16,
        payload: TilePayload::Skipped {
            superblock_count: u16::try_from(superblocks).map_err(|_| {
                RewriteError::InvalidInput(format!("{superblocks} superblocks per tile"))
            })?,
            mode: SuperblockMode::SKIPPED,
        },
    })
}

/// Serialized size of the unit carrying one skipped tile.
pub fn skipped_tile_unit_len() -> usize {
    let tile = Tile {
        tile_index: 0,
        payload: TilePayload::Skipped {
            superblock_count: 0,
            mode: SuperblockMode::SKIPPED,
        },
    };
    Unit::TileGroup(TileGroup::single(tile)).encoded_len()
}

/// Rebuilds one two-layer frame for a client that needs `selected`.
///
/// Output order: temporal delimiter, the base header and base tile groups
/// untouched, the enhanced header with CDF update disabled and global
/// motion zeroed, then one tile group per grid tile in raster order, either
/// the original coded group or a synthesized skipped one.
pub fn rewrite_viewport_frame(
    config: &SequenceConfig,
    frame_units: &[Unit],
    selected: &TileSet,
) -> Result<Vec<Unit>, RewriteError> {
    let count = config.tile_count();
    if let Some(bad) = selected.iter().find(|&i| usize::from(i) >= count) {
        return Err(RewriteError::BadIndex { index: usize::from(bad), count });
    }
    if config.single_layer {
        return Err(RewriteError::InvalidInput("single-layer stream has no enhanced layer".into()));
    }
    let invalid = |m: &str| RewriteError::InvalidInput(m.to_string());

    let mut it = frame_units.iter().peekable();
    if !matches!(it.next(), Some(Unit::TemporalDelimiter)) {
        return Err(invalid("frame does not start with a temporal delimiter"));
    }
    let base_header = match it.next() {
        Some(Unit::FrameHeader(h)) if h.layer == Layer::Base => h,
        _ => return Err(invalid("missing base frame header")),
    };
    let mut out = vec![Unit::TemporalDelimiter, Unit::FrameHeader(*base_header)];
    while let Some(Unit::TileGroup(tg)) = it.peek() {
        out.push(Unit::TileGroup(tg.clone()));
        it.next();
    }
    let enh = match it.next() {
        Some(Unit::FrameHeader(h)) if h.layer == Layer::Enhanced => h,
        _ => return Err(invalid("missing enhanced frame header")),
    };
    if enh.frame_index != base_header.frame_index {
        return Err(invalid("layer headers disagree on frame index"));
    }
    if enh.enhanced_temporal_ref {
        return Err(invalid("enhanced frame references another enhanced frame"));
    }
    let mut groups: Vec<Option<&TileGroup>> = vec![None; count];
    for unit in it {
        let Unit::TileGroup(tg) = unit else {
            return Err(invalid("unexpected unit after enhanced tile groups"));
        };
        if tg.tiles.len() != 1 || tg.tg_start != tg.tg_end || tg.tiles[0].tile_index != tg.tg_start {
            return Err(invalid("enhanced tile group must carry exactly one tile"));
        }
        let slot = groups
            .get_mut(usize::from(tg.tg_start))
            .ok_or_else(|| invalid("enhanced tile index outside the grid"))?;
        if slot.replace(tg).is_some() {
            return Err(invalid("enhanced tile repeated"));
        }
    }

    out.push(Unit::FrameHeader(FrameHeader {
        cdf_update_disabled: true,
        global_mv_zero: true,
        ..*enh
    }));
    for (index, group) in groups.iter().enumerate() {
        if selected.contains(index as u16) {
            match group {
                Some(tg) if !tg.tiles[0].is_skipped() => out.push(Unit::TileGroup((*tg).clone())),
                _ => return Err(RewriteError::TileMissing(index as u16)),
            }
        } else {
            let tile = synthesize_skipped_tile(index, config)?;
            out.push(Unit::TileGroup(TileGroup::single(tile)));
        }
    }
    Ok(out)
}

/// Selects the tiles for `viewport` and rewrites frame `frame_index`.
pub fn rewrite_session_frame(
    bitstream: &Bitstream,
    frame_index: u32,
    viewport: &Viewport,
    projection: &Projection,
    step: f64,
) -> Result<Vec<Unit>, RewriteError> {
    let units = bitstream
        .frame_units(frame_index)
        .ok_or(RewriteError::NoFrame(frame_index))?;
    let selected = select_tiles(viewport, projection, &bitstream.config, step)?;
    rewrite_viewport_frame(&bitstream.config, units, &selected)
}

/// Rewrites every frame of a stream for one fixed tile set.
pub fn rewrite_stream(bitstream: &Bitstream, selected: &TileSet) -> Result<Bitstream, RewriteError> {
    let mut out = Bitstream::new(bitstream.config);
    for frame in bitstream.frames() {
        out.units
            .extend(rewrite_viewport_frame(&bitstream.config, &bitstream.units[frame.start..frame.end], selected)?);
    }
    Ok(out)
}
