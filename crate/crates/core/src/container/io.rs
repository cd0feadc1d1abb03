use byteorder::{ByteOrder, LittleEndian};
use thiserror::Error;

use super::{
    validate_structure, Bitstream, ContainerError, FrameHeader, FrameType, Layer, Tile,
    TileGroup, TilePayload, Unit, UnitType,
};
use crate::config::{FrameRate, SequenceConfig};
use crate::rewriter::{SuperblockMode, MODE_RECORD_LEN};

pub const MAGIC: &[u8; 4] = b"SVBS";
pub const VERSION: u8 = 1;
/// Magic, version and the fixed sequence header fields.
pub const SEQUENCE_HEADER_LEN: usize = 20;
pub const UNIT_HEADER_LEN: usize = 5;
pub(super) const FRAME_HEADER_LEN: usize = 8;

const FLAG_BASE_SINGLE_TILE: u8 = 1 << 0;
const FLAG_SINGLE_LAYER: u8 = 1 << 1;

const FH_CDF_UPDATE_DISABLED: u8 = 1 << 0;
const FH_GLOBAL_MV_ZERO: u8 = 1 << 1;
const FH_ENHANCED_TEMPORAL_REF: u8 = 1 << 2;

const TILE_CODED: u8 = 0;
const TILE_SKIPPED: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated at offset {0}")]
    Truncated(usize),
    #[error("unknown unit type {value:#04x} at offset {offset}")]
    UnknownUnitType { value: u8, offset: usize },
    #[error("invalid {field} value {value} at offset {offset}")]
    InvalidField {
        field: &'static str,
        value: u32,
        offset: usize,
    },
    #[error("unit at offset {offset} declares {declared} payload bytes but {used} were parsed")]
    PayloadLength {
        offset: usize,
        declared: usize,
        used: usize,
    },
}

fn put_u16(out: &mut Vec<u8>, v: u16) {
    let mut b = [0; 2];
    LittleEndian::write_u16(&mut b, v);
    out.extend_from_slice(&b);
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    let mut b = [0; 4];
    LittleEndian::write_u32(&mut b, v);
    out.extend_from_slice(&b);
}

fn write_sequence_header(out: &mut Vec<u8>, c: &SequenceConfig) {
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    put_u16(out, c.width);
    put_u16(out, c.height);
    out.push(c.scale_factor);
    out.push(c.tile_cols);
    out.push(c.tile_rows);
    put_u16(out, c.fps.num);
    put_u16(out, c.fps.den);
    put_u16(out, c.gop_size);
    let mut flags = 0;
    if c.base_single_tile {
        flags |= FLAG_BASE_SINGLE_TILE;
    }
    if c.single_layer {
        flags |= FLAG_SINGLE_LAYER;
    }
    out.push(flags);
    out.push(c.ref_window);
}

fn write_frame_header(out: &mut Vec<u8>, h: &FrameHeader) {
    put_u32(out, h.frame_index);
    out.push(h.layer as u8);
    out.push(h.frame_type as u8);
    let mut flags = 0;
    if h.cdf_update_disabled {
        flags |= FH_CDF_UPDATE_DISABLED;
    }
    if h.global_mv_zero {
        flags |= FH_GLOBAL_MV_ZERO;
    }
    if h.enhanced_temporal_ref {
        flags |= FH_ENHANCED_TEMPORAL_REF;
    }
    out.push(flags);
    out.push(h.base_ref_offset);
}

fn write_tile_group(out: &mut Vec<u8>, tg: &TileGroup) {
    put_u16(out, tg.tg_start);
    put_u16(out, tg.tg_end);
    for tile in &tg.tiles {
        put_u16(out, tile.tile_index);
        match &tile.payload {
            TilePayload::Coded(bytes) => {
                out.push(TILE_CODED);
                put_u32(out, bytes.len() as u32);
                out.extend_from_slice(bytes);
            }
            TilePayload::Skipped {
                superblock_count,
                mode,
            } => {
                out.push(TILE_SKIPPED);
                put_u16(out, *superblock_count);
                out.extend_from_slice(&mode.to_bytes());
            }
        }
    }
}

/// Appends one unit (header and payload) to `out`.
pub(crate) fn write_unit(out: &mut Vec<u8>, unit: &Unit) {
    out.push(unit.unit_type() as u8);
    put_u32(out, unit.payload_len() as u32);
    let start = out.len();
    match unit {
        Unit::TemporalDelimiter => {}
        Unit::FrameHeader(h) => write_frame_header(out, h),
        Unit::TileGroup(tg) => write_tile_group(out, tg),
        Unit::Metadata(m) => out.extend_from_slice(m),
    }
    debug_assert_eq!(out.len() - start, unit.payload_len());
}

/// Serializes units without the sequence header or any validation.
pub fn serialize_units(units: &[Unit]) -> Vec<u8> {
    let mut out = Vec::with_capacity(units.iter().map(Unit::encoded_len).sum());
    for unit in units {
        write_unit(&mut out, unit);
    }
    out
}

/// Serializes a stream that passes [`validate_structure`].
pub fn serialize(bitstream: &Bitstream) -> Result<Vec<u8>, ContainerError> {
    let report = validate_structure(bitstream);
    if !report.is_clean() {
        return Err(ContainerError::InvalidStructure(report));
    }
    Ok(serialize_unchecked(bitstream))
}

/// Serializes whatever the object model holds. Used by tests and tools that
/// need to write deliberately broken streams.
pub fn serialize_unchecked(bitstream: &Bitstream) -> Vec<u8> {
    let mut out = Vec::with_capacity(bitstream.encoded_len());
    write_sequence_header(&mut out, &bitstream.config);
    for unit in &bitstream.units {
        write_unit(&mut out, unit);
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    /// Absolute file offset of `buf[0]`.
    base: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], base: usize) -> Self {
        Self { buf, pos: 0, base }
    }

    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ParseError> {
        if self.remaining() < n {
            return Err(ParseError::Truncated(self.offset()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, ParseError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, ParseError> {
        Ok(LittleEndian::read_u16(self.take(2)?))
    }

    fn u32(&mut self) -> Result<u32, ParseError> {
        Ok(LittleEndian::read_u32(self.take(4)?))
    }
}

fn read_sequence_header(r: &mut Reader<'_>) -> Result<SequenceConfig, ParseError> {
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(ParseError::BadMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(ParseError::UnsupportedVersion(version));
    }
    let width = r.u16()?;
    let height = r.u16()?;
    let scale_factor = r.u8()?;
    let tile_cols = r.u8()?;
    let tile_rows = r.u8()?;
    let fps_num = r.u16()?;
    let fps_den = r.u16()?;
    let gop_size = r.u16()?;
    let flags_at = r.offset();
    let flags = r.u8()?;
    if flags & !(FLAG_BASE_SINGLE_TILE | FLAG_SINGLE_LAYER) != 0 {
        return Err(ParseError::InvalidField {
            field: "sequence flags",
            value: u32::from(flags),
            offset: flags_at,
        });
    }
    let ref_window = r.u8()?;
    Ok(SequenceConfig {
        width,
        height,
        scale_factor,
        tile_cols,
        tile_rows,
        fps: FrameRate::new(fps_num, fps_den),
        gop_size,
        base_single_tile: flags & FLAG_BASE_SINGLE_TILE != 0,
        ref_window,
        single_layer: flags & FLAG_SINGLE_LAYER != 0,
    })
}

fn read_frame_header(r: &mut Reader<'_>) -> Result<FrameHeader, ParseError> {
    let frame_index = r.u32()?;
    let at = r.offset();
    let layer = match r.u8()? {
        0 => Layer::Base,
        1 => Layer::Enhanced,
        v => {
            return Err(ParseError::InvalidField {
                field: "layer_id",
                value: u32::from(v),
                offset: at,
            })
        }
    };
    let at = r.offset();
    let frame_type = match r.u8()? {
        0 => FrameType::Key,
        1 => FrameType::Inter,
        v => {
            return Err(ParseError::InvalidField {
                field: "frame_type",
                value: u32::from(v),
                offset: at,
            })
        }
    };
    let at = r.offset();
    let flags = r.u8()?;
    if flags & !(FH_CDF_UPDATE_DISABLED | FH_GLOBAL_MV_ZERO | FH_ENHANCED_TEMPORAL_REF) != 0 {
        return Err(ParseError::InvalidField {
            field: "frame flags",
            value: u32::from(flags),
            offset: at,
        });
    }
    let base_ref_offset = r.u8()?;
    Ok(FrameHeader {
        frame_index,
        layer,
        frame_type,
        cdf_update_disabled: flags & FH_CDF_UPDATE_DISABLED != 0,
        global_mv_zero: flags & FH_GLOBAL_MV_ZERO != 0,
        enhanced_temporal_ref: flags & FH_ENHANCED_TEMPORAL_REF != 0,
        base_ref_offset,
    })
}

fn read_tile_group(r: &mut Reader<'_>) -> Result<TileGroup, ParseError> {
    let tg_start = r.u16()?;
    let tg_end = r.u16()?;
    let mut tiles = Vec::new();
    while r.remaining() > 0 {
        let tile_index = r.u16()?;
        let at = r.offset();
        let payload = match r.u8()? {
            TILE_CODED => {
                let len = r.u32()? as usize;
                TilePayload::Coded(r.take(len)?.to_vec())
            }
            TILE_SKIPPED => {
                let superblock_count = r.u16()?;
                let at = r.offset();
                let raw: [u8; MODE_RECORD_LEN] = r.take(MODE_RECORD_LEN)?.try_into().unwrap();
                let mode = SuperblockMode::from_bytes(&raw).map_err(|i| ParseError::InvalidField {
                    field: "superblock mode",
                    value: u32::from(raw[i]),
                    offset: at + i,
                })?;
                TilePayload::Skipped {
                    superblock_count,
                    mode,
                }
            }
            v => {
                return Err(ParseError::InvalidField {
                    field: "tile_kind",
                    value: u32::from(v),
                    offset: at,
                })
            }
        };
        tiles.push(Tile {
            tile_index,
            payload,
        });
    }
    Ok(TileGroup {
        tg_start,
        tg_end,
        tiles,
    })
}

/// Parses an SVB file into its object model. Never reads past a unit's
/// declared payload size.
pub fn parse(bytes: &[u8]) -> Result<Bitstream, ParseError> {
    let mut r = Reader::new(bytes, 0);
    let config = read_sequence_header(&mut r)?;
    let mut units = Vec::new();
    while r.remaining() > 0 {
        let unit_at = r.offset();
        let ty = r.u8()?;
        let unit_type =
            UnitType::from_u8(ty).ok_or(ParseError::UnknownUnitType { value: ty, offset: unit_at })?;
        let size = r.u32()? as usize;
        let payload_at = r.offset();
        let payload = r.take(size)?;
        let mut pr = Reader::new(payload, payload_at);
        let unit = match unit_type {
            UnitType::TemporalDelimiter => Unit::TemporalDelimiter,
            UnitType::FrameHeader => Unit::FrameHeader(read_frame_header(&mut pr)?),
            UnitType::TileGroup => Unit::TileGroup(read_tile_group(&mut pr)?),
            UnitType::Metadata => {
                pr.pos = size;
                Unit::Metadata(payload.to_vec())
            }
        };
        if pr.pos != size {
            return Err(ParseError::PayloadLength {
                offset: unit_at,
                declared: size,
                used: pr.pos,
            });
        }
        units.push(unit);
    }
    Ok(Bitstream { config, units })
}
