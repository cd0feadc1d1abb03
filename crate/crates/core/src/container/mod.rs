//! The scalable viewport bitstream (SVB) container.
//!
//! An SVB file is a sequence header followed by length-prefixed units laid
//! out like AV1 OBUs. Each frame is a temporal unit:
//!
//! ```text
//! TEMPORAL_DELIMITER
//! FRAME_HEADER (base)      TILE_GROUP ...
//! FRAME_HEADER (enhanced)  TILE_GROUP ...   (optional)
//! ```
//!
//! The object model keeps the flat unit list so that malformed layouts
//! survive a parse and can be reported by [`validate_structure`].

mod io;
mod validate;

pub use io::{parse, serialize, serialize_unchecked, serialize_units, ParseError, MAGIC, SEQUENCE_HEADER_LEN, UNIT_HEADER_LEN, VERSION};
pub use validate::{validate_structure, Rule, ValidationReport, Violation};

use serde::Serialize;
use thiserror::Error;

use crate::config::SequenceConfig;
use crate::rewriter::{SuperblockMode, MODE_RECORD_LEN};

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("invalid structure: {0}")]
    InvalidStructure(ValidationReport),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum UnitType {
    TemporalDelimiter = 2,
    FrameHeader = 3,
    TileGroup = 4,
    Metadata = 5,
}

impl UnitType {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            2 => Some(Self::TemporalDelimiter),
            3 => Some(Self::FrameHeader),
            4 => Some(Self::TileGroup),
            5 => Some(Self::Metadata),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[repr(u8)]
pub enum Layer {
    Base = 0,
    Enhanced = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[repr(u8)]
pub enum FrameType {
    Key = 0,
    Inter = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameHeader {
    pub frame_index: u32,
    pub layer: Layer,
    pub frame_type: FrameType,
    pub cdf_update_disabled: bool,
    pub global_mv_zero: bool,
    /// Frame predicts from the previous frame of its own layer. Only legal
    /// in the base layer, where INTER frames imply it.
    pub enhanced_temporal_ref: bool,
    /// Enhanced layer only: predict from base frame `frame_index - offset`.
    pub base_ref_offset: u8,
}

impl FrameHeader {
    pub fn base(frame_index: u32, frame_type: FrameType) -> Self {
        Self {
            frame_index,
            layer: Layer::Base,
            frame_type,
            cdf_update_disabled: false,
            global_mv_zero: false,
            enhanced_temporal_ref: false,
            base_ref_offset: 0,
        }
    }

    pub fn enhanced(frame_index: u32, base_ref_offset: u8) -> Self {
        Self {
            frame_index,
            layer: Layer::Enhanced,
            frame_type: FrameType::Inter,
            cdf_update_disabled: false,
            global_mv_zero: false,
            enhanced_temporal_ref: false,
            base_ref_offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TilePayload {
    Coded(Vec<u8>),
    Skipped {
        superblock_count: u16,
        mode: SuperblockMode,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tile {
    pub tile_index: u16,
    pub payload: TilePayload,
}

impl Tile {
    pub fn coded(tile_index: u16, bytes: Vec<u8>) -> Self {
        Self {
            tile_index,
            payload: TilePayload::Coded(bytes),
        }
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self.payload, TilePayload::Skipped { .. })
    }

    pub fn col(&self, tile_cols: u8) -> u16 {
        self.tile_index % u16::from(tile_cols)
    }

    pub fn row(&self, tile_cols: u8) -> u16 {
        self.tile_index / u16::from(tile_cols)
    }

    /// Serialized size inside a tile group payload.
    pub fn encoded_len(&self) -> usize {
        3 + match &self.payload {
            TilePayload::Coded(b) => 4 + b.len(),
            TilePayload::Skipped { .. } => 2 + MODE_RECORD_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileGroup {
    pub tg_start: u16,
    pub tg_end: u16,
    pub tiles: Vec<Tile>,
}

impl TileGroup {
    pub fn single(tile: Tile) -> Self {
        Self {
            tg_start: tile.tile_index,
            tg_end: tile.tile_index,
            tiles: vec![tile],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Unit {
    TemporalDelimiter,
    FrameHeader(FrameHeader),
    TileGroup(TileGroup),
    Metadata(Vec<u8>),
}

impl Unit {
    pub fn unit_type(&self) -> UnitType {
        match self {
            Unit::TemporalDelimiter => UnitType::TemporalDelimiter,
            Unit::FrameHeader(_) => UnitType::FrameHeader,
            Unit::TileGroup(_) => UnitType::TileGroup,
            Unit::Metadata(_) => UnitType::Metadata,
        }
    }

    pub fn payload_len(&self) -> usize {
        match self {
            Unit::TemporalDelimiter => 0,
            Unit::FrameHeader(_) => io::FRAME_HEADER_LEN,
            Unit::TileGroup(tg) => 4 + tg.tiles.iter().map(Tile::encoded_len).sum::<usize>(),
            Unit::Metadata(m) => m.len(),
        }
    }

    /// Serialized size including the unit header.
    pub fn encoded_len(&self) -> usize {
        UNIT_HEADER_LEN + self.payload_len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    pub config: SequenceConfig,
    pub units: Vec<Unit>,
}

/// One layer of a temporal unit.
#[derive(Debug, Clone)]
pub struct LayerView<'a> {
    pub header: &'a FrameHeader,
    pub tile_groups: Vec<&'a TileGroup>,
}

impl<'a> LayerView<'a> {
    pub fn tiles(&self) -> impl Iterator<Item = &'a Tile> + '_ {
        self.tile_groups.iter().flat_map(|tg| tg.tiles.iter())
    }

    pub fn tile(&self, index: u16) -> Option<&'a Tile> {
        self.tiles().find(|t| t.tile_index == index)
    }
}

/// A temporal unit: the units from one temporal delimiter up to the next.
#[derive(Debug, Clone)]
pub struct FrameView<'a> {
    /// Unit index range `[start, end)` inside [`Bitstream::units`].
    pub start: usize,
    pub end: usize,
    pub base: Option<LayerView<'a>>,
    pub enhanced: Option<LayerView<'a>>,
}

impl FrameView<'_> {
    pub fn frame_index(&self) -> Option<u32> {
        self.base
            .as_ref()
            .or(self.enhanced.as_ref())
            .map(|l| l.header.frame_index)
    }

    pub fn layer(&self, layer: Layer) -> Option<&LayerView<'_>> {
        match layer {
            Layer::Base => self.base.as_ref(),
            Layer::Enhanced => self.enhanced.as_ref(),
        }
    }
}

impl Bitstream {
    pub fn new(config: SequenceConfig) -> Self {
        Self {
            config,
            units: Vec::new(),
        }
    }

    /// Groups units into temporal units, best effort. Layout problems are
    /// reported by [`validate_structure`]; this only trusts the delimiters
    /// and frame headers it finds.
    pub fn frames(&self) -> Vec<FrameView<'_>> {
        let mut frames = Vec::new();
        let mut current: Option<FrameView<'_>> = None;
        let mut layer: Option<Layer> = None;
        for (i, unit) in self.units.iter().enumerate() {
            match unit {
                Unit::TemporalDelimiter => {
                    if let Some(mut f) = current.take() {
                        f.end = i;
                        frames.push(f);
                    }
                    current = Some(FrameView {
                        start: i,
                        end: i + 1,
                        base: None,
                        enhanced: None,
                    });
                    layer = None;
                }
                Unit::FrameHeader(h) => {
                    if let Some(f) = current.as_mut() {
                        let view = LayerView {
                            header: h,
                            tile_groups: Vec::new(),
                        };
                        let slot = match h.layer {
                            Layer::Base => &mut f.base,
                            Layer::Enhanced => &mut f.enhanced,
                        };
                        if slot.is_none() {
                            *slot = Some(view);
                            layer = Some(h.layer);
                        } else {
                            layer = None;
                        }
                    }
                }
                Unit::TileGroup(tg) => {
                    if let (Some(f), Some(l)) = (current.as_mut(), layer) {
                        let slot = match l {
                            Layer::Base => &mut f.base,
                            Layer::Enhanced => &mut f.enhanced,
                        };
                        if let Some(view) = slot.as_mut() {
                            view.tile_groups.push(tg);
                        }
                    }
                }
                Unit::Metadata(_) => {}
            }
        }
        if let Some(mut f) = current.take() {
            f.end = self.units.len();
            frames.push(f);
        }
        frames
    }

    /// Position (in stream order) of the temporal unit carrying `frame_index`.
    pub fn frame_position(&self, frame_index: u32) -> Option<usize> {
        self.frames()
            .iter()
            .position(|f| f.frame_index() == Some(frame_index))
    }

    /// Units of the temporal unit carrying `frame_index`.
    pub fn frame_units(&self, frame_index: u32) -> Option<&[Unit]> {
        self.frames()
            .into_iter()
            .find(|f| f.frame_index() == Some(frame_index))
            .map(|f| &self.units[f.start..f.end])
    }

    pub fn frame_count(&self) -> usize {
        self.units
            .iter()
            .filter(|u| matches!(u, Unit::TemporalDelimiter))
            .count()
    }

    /// Drops every enhanced-layer frame header and tile group.
    pub fn without_enhanced_layer(&self) -> Bitstream {
        let mut out = Bitstream::new(self.config);
        let mut in_enhanced = false;
        for unit in &self.units {
            match unit {
                Unit::TemporalDelimiter => in_enhanced = false,
                Unit::FrameHeader(h) => in_enhanced = h.layer == Layer::Enhanced,
                _ => {}
            }
            let drop = in_enhanced && matches!(unit, Unit::FrameHeader(_) | Unit::TileGroup(_));
            if !drop {
                out.units.push(unit.clone());
            }
        }
        out
    }

    /// Total serialized size in bytes.
    pub fn encoded_len(&self) -> usize {
        SEQUENCE_HEADER_LEN + self.units.iter().map(Unit::encoded_len).sum::<usize>()
    }
}

/// Serialized bytes of one temporal unit, split by layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrameBytes {
    pub frame_index: u32,
    /// Temporal delimiter plus any metadata units.
    pub delimiter: usize,
    pub base: usize,
    pub enhanced: usize,
}

impl FrameBytes {
    pub fn total(&self) -> usize {
        self.delimiter + self.base + self.enhanced
    }
}

/// Per-frame, per-layer byte counts of a valid stream. The totals add up to
/// the file size minus the sequence header.
pub fn frame_byte_sizes(bitstream: &Bitstream) -> Result<Vec<FrameBytes>, ContainerError> {
    let report = validate_structure(bitstream);
    if !report.is_clean() {
        return Err(ContainerError::InvalidStructure(report));
    }
    Ok(frame_byte_sizes_unchecked(bitstream))
}

pub(crate) fn frame_byte_sizes_unchecked(bitstream: &Bitstream) -> Vec<FrameBytes> {
    let mut out: Vec<FrameBytes> = Vec::new();
    let mut layer: Option<Layer> = None;
    for unit in &bitstream.units {
        let len = unit.encoded_len();
        match unit {
            Unit::TemporalDelimiter => {
                out.push(FrameBytes {
                    frame_index: 0,
                    delimiter: len,
                    base: 0,
                    enhanced: 0,
                });
                layer = None;
            }
            Unit::FrameHeader(h) => {
                layer = Some(h.layer);
                if let Some(f) = out.last_mut() {
                    if h.layer == Layer::Base {
                        f.frame_index = h.frame_index;
                    }
                }
            }
            _ => {}
        }
        let Some(f) = out.last_mut() else { continue };
        match (unit, layer) {
            (Unit::TemporalDelimiter, _) => {}
            (Unit::Metadata(_), _) | (_, None) => f.delimiter += len,
            (_, Some(Layer::Base)) => f.base += len,
            (_, Some(Layer::Enhanced)) => f.enhanced += len,
        }
    }
    out
}
