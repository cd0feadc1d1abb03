use std::fmt;

use serde::Serialize;

use super::{Bitstream, FrameType, Layer, LayerView, TilePayload, Unit};
use crate::config::SequenceConfig;
use crate::rle;

/// Structural rules checked by [`validate_structure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    /// Sequence header parameters out of range or grids not aligned.
    GridAlign,
    /// Every frame starts with exactly one temporal delimiter.
    TemporalDelimiter,
    /// Base header first, optional enhanced header second, matching indices.
    LayerOrder,
    /// Frame indices increase by one from temporal unit to temporal unit.
    FrameOrder,
    /// Base KEY frames sit exactly on GOP boundaries.
    GopStructure,
    /// No reference crosses a GOP boundary.
    ClosedGop,
    /// Base reference offset within the configured window.
    RefWindow,
    /// A referenced base frame is not present in the stream.
    MissingReference,
    /// Enhanced frame predicts from another enhanced frame.
    TemporalInEnhanced,
    /// tg_start/tg_end inconsistent with the grid or the carried tiles.
    TileGroupRange,
    /// Enhanced tile groups carry exactly one tile.
    EnhancedSingleTile,
    /// Every tile of the layer grid present exactly once.
    TileCoverage,
    SkippedInBase,
    /// Frames with skipped tiles disable CDF updates and zero the global MV.
    SkipFlags,
    /// Skipped tiles carry the canonical mode and superblock count.
    SkipMode,
    /// Coded payload does not expand to the tile's pixel count.
    Payload,
    /// Enhanced layer present in a single-layer track.
    SingleLayer,
}

impl Rule {
    pub fn id(&self) -> &'static str {
        match self {
            Rule::GridAlign => "R_GRID_ALIGN",
            Rule::TemporalDelimiter => "R_TEMPORAL_DELIMITER",
            Rule::LayerOrder => "R_LAYER_ORDER",
            Rule::FrameOrder => "R_FRAME_ORDER",
            Rule::GopStructure => "R_GOP_STRUCTURE",
            Rule::ClosedGop => "R_CLOSED_GOP",
            Rule::RefWindow => "R_REF_WINDOW",
            Rule::MissingReference => "R_MISSING_REF",
            Rule::TemporalInEnhanced => "R_TEMPORAL_IN_ENH",
            Rule::TileGroupRange => "R_TG_RANGE",
            Rule::EnhancedSingleTile => "R_ENH_ONE_TILE",
            Rule::TileCoverage => "R_TILE_COVERAGE",
            Rule::SkippedInBase => "R_SKIP_IN_BASE",
            Rule::SkipFlags => "R_SKIP_FLAGS",
            Rule::SkipMode => "R_SKIP_MODE",
            Rule::Payload => "R_PAYLOAD",
            Rule::SingleLayer => "R_SINGLE_LAYER",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub frame_index: Option<u32>,
    pub rule: Rule,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, frame_index: Option<u32>, rule: Rule, detail: impl Into<String>) {
        self.violations.push(Violation {
            frame_index,
            rule,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("clean");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            match v.frame_index {
                Some(idx) => write!(f, "frame {idx}: {} {}", v.rule, v.detail)?,
                None => write!(f, "{} {}", v.rule, v.detail)?,
            }
        }
        Ok(())
    }
}

/// Checks every structural invariant of the format. Violations are data:
/// the report is empty iff the stream is well formed and every frame can be
/// decoded.
pub fn validate_structure(bitstream: &Bitstream) -> ValidationReport {
    let mut report = ValidationReport::default();
    let config = &bitstream.config;
    if let Err(e) = config.validate() {
        report.push(None, Rule::GridAlign, e.to_string());
        // Grid-dependent checks below would only produce noise.
        return report;
    }

    check_unit_layout(bitstream, &mut report);

    let frames = bitstream.frames();
    let gop = u32::from(config.gop_size);
    let mut prev_index: Option<u32> = None;
    for (pos, frame) in frames.iter().enumerate() {
        let Some(base) = frame.base.as_ref() else {
            report.push(frame.frame_index(), Rule::LayerOrder, "temporal unit without base frame header");
            continue;
        };
        let idx = base.header.frame_index;
        let here = Some(idx);

        if let Some(prev) = prev_index {
            if prev.checked_add(1) != Some(idx) {
                report.push(here, Rule::FrameOrder, format!("follows frame {prev}"));
            }
        }
        prev_index = Some(idx);

        // Base layer temporal structure.
        let key_slot = idx % gop == 0;
        match base.header.frame_type {
            FrameType::Key if !key_slot => {
                report.push(here, Rule::GopStructure, "KEY frame off a GOP boundary")
            }
            FrameType::Inter if key_slot => {
                report.push(here, Rule::GopStructure, "INTER frame on a GOP boundary")
            }
            FrameType::Inter if pos == 0 => report.push(
                here,
                Rule::MissingReference,
                "INTER base frame without its predecessor",
            ),
            _ => {}
        }
        if base.header.base_ref_offset != 0 {
            report.push(here, Rule::RefWindow, "base frame carries a base_ref_offset");
        }
        if base.header.enhanced_temporal_ref {
            report.push(here, Rule::LayerOrder, "base frame flagged as enhanced temporal reference");
        }
        check_layer_tiles(config, base, &mut report);

        let Some(enh) = frame.enhanced.as_ref() else {
            continue;
        };
        if config.single_layer {
            report.push(here, Rule::SingleLayer, "enhanced frame in a single-layer track");
            continue;
        }
        if enh.header.frame_index != idx {
            report.push(
                here,
                Rule::LayerOrder,
                format!("enhanced header carries frame index {}", enh.header.frame_index),
            );
        }
        if enh.header.enhanced_temporal_ref {
            report.push(here, Rule::TemporalInEnhanced, "enhanced frame references a previous enhanced frame");
        }
        let offset = u32::from(enh.header.base_ref_offset);
        if offset >= u32::from(config.ref_window) {
            report.push(
                here,
                Rule::RefWindow,
                format!("base_ref_offset {offset} outside window {}", config.ref_window),
            );
        }
        if offset > idx % gop {
            report.push(
                here,
                Rule::ClosedGop,
                format!("base_ref_offset {offset} reaches before GOP start"),
            );
        } else if offset as usize > pos {
            report.push(here, Rule::MissingReference, format!("base frame {} not in stream", idx - offset));
        }
        check_layer_tiles(config, enh, &mut report);
    }
    report
}

fn check_unit_layout(bitstream: &Bitstream, report: &mut ValidationReport) {
    // Tracks the current frame index (for reporting) and layer state.
    let mut seen_delimiter = false;
    let mut units_since_delimiter = 0usize;
    let mut last_layer: Option<Layer> = None;
    let mut frame_index: Option<u32> = None;
    for unit in &bitstream.units {
        match unit {
            Unit::TemporalDelimiter => {
                if seen_delimiter && units_since_delimiter == 0 {
                    report.push(frame_index, Rule::TemporalDelimiter, "empty temporal unit");
                }
                seen_delimiter = true;
                units_since_delimiter = 0;
                last_layer = None;
                continue;
            }
            _ if !seen_delimiter => {
                report.push(None, Rule::TemporalDelimiter, "unit before the first temporal delimiter");
            }
            Unit::FrameHeader(h) => {
                frame_index = Some(h.frame_index);
                match (last_layer, h.layer) {
                    (None, Layer::Base) | (Some(Layer::Base), Layer::Enhanced) => {}
                    (None, Layer::Enhanced) => {
                        report.push(frame_index, Rule::LayerOrder, "enhanced header before base header")
                    }
                    (Some(_), _) => report.push(
                        frame_index,
                        Rule::LayerOrder,
                        format!("unexpected {:?} header", h.layer),
                    ),
                }
                last_layer = Some(h.layer);
            }
            Unit::TileGroup(_) if last_layer.is_none() => {
                report.push(frame_index, Rule::LayerOrder, "tile group before any frame header");
            }
            _ => {}
        }
        units_since_delimiter += 1;
    }
    if seen_delimiter && units_since_delimiter == 0 {
        report.push(frame_index, Rule::TemporalDelimiter, "stream ends with an empty temporal unit");
    }
}

fn check_layer_tiles(config: &SequenceConfig, view: &LayerView<'_>, report: &mut ValidationReport) {
    let h = view.header;
    let here = Some(h.frame_index);
    let enhanced = h.layer == Layer::Enhanced;
    let grid = if enhanced {
        config.tile_count()
    } else {
        config.base_tile_count()
    };
    let mut seen = vec![0u32; grid];
    let mut any_skipped = false;

    for tg in &view.tile_groups {
        let consistent = tg.tg_start <= tg.tg_end
            && usize::from(tg.tg_end) < grid
            && tg.tiles.len() == usize::from(tg.tg_end - tg.tg_start) + 1
            && tg
                .tiles
                .iter()
                .enumerate()
                .all(|(i, t)| usize::from(t.tile_index) == usize::from(tg.tg_start) + i);
        if !consistent {
            report.push(
                here,
                Rule::TileGroupRange,
                format!("tile group [{}, {}] with {} tiles", tg.tg_start, tg.tg_end, tg.tiles.len()),
            );
        }
        if enhanced && tg.tg_start != tg.tg_end {
            report.push(
                here,
                Rule::EnhancedSingleTile,
                format!("tile group [{}, {}]", tg.tg_start, tg.tg_end),
            );
        }
        for tile in &tg.tiles {
            let index = usize::from(tile.tile_index);
            if index >= grid {
                report.push(here, Rule::TileGroupRange, format!("tile index {index} outside grid of {grid}"));
                continue;
            }
            seen[index] += 1;
            match &tile.payload {
                TilePayload::Coded(bytes) => {
                    let rect = if enhanced {
                        config.tile_rect(index)
                    } else {
                        config.base_tile_rect(index)
                    };
                    if let Err(e) = rle::decompress_exact(bytes, rect.area() as usize) {
                        report.push(here, Rule::Payload, format!("tile {index}: {e}"));
                    }
                }
                TilePayload::Skipped {
                    superblock_count,
                    mode,
                } => {
                    any_skipped = true;
                    if !enhanced {
                        report.push(here, Rule::SkippedInBase, format!("tile {index}"));
                        continue;
                    }
                    if !mode.is_canonical_skip() {
                        report.push(here, Rule::SkipMode, format!("tile {index}: non-canonical mode {mode:?}"));
                    }
                    if u32::from(*superblock_count) != config.superblocks_per_tile() {
                        report.push(
                            here,
                            Rule::SkipMode,
                            format!(
                                "tile {index}: {superblock_count} superblocks, expected {}",
                                config.superblocks_per_tile()
                            ),
                        );
                    }
                }
            }
        }
    }
    for (index, &count) in seen.iter().enumerate() {
        if count != 1 {
            report.push(here, Rule::TileCoverage, format!("tile {index} present {count} times"));
        }
    }
    if enhanced && any_skipped && !(h.cdf_update_disabled && h.global_mv_zero) {
        report.push(
            here,
            Rule::SkipFlags,
            "skipped tiles without cdf_update_disabled and global_mv_zero",
        );
    }
}
