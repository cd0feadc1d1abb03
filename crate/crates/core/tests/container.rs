mod common;

use byteorder::{ByteOrder, LittleEndian};
use proptest::prelude::*;
use svb::codec::{encode_svc, generate_content};
use svb::container::{
    frame_byte_sizes, parse, serialize, validate_structure, Bitstream, ContainerError, FrameHeader, FrameType, Rule,
    Tile, TileGroup, Unit, SEQUENCE_HEADER_LEN,
};
use svb::rle;
use svb::SequenceConfig;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn round_trip(seed: u64) {
        let bs = common::random_valid_bitstream(seed);
        prop_assert!(validate_structure(&bs).is_clean(), "{}", validate_structure(&bs));
        let bytes = serialize(&bs).unwrap();
        prop_assert_eq!(bytes.len(), bs.encoded_len());
        prop_assert_eq!(parse(&bytes).unwrap(), bs);
    }

    #[test]
    fn every_frame_starts_with_one_delimiter(seed: u64) {
        let bs = common::random_valid_bitstream(seed);
        for frame in bs.frames() {
            prop_assert!(matches!(bs.units[frame.start], Unit::TemporalDelimiter));
            let extra = bs.units[frame.start + 1..frame.end]
                .iter()
                .filter(|u| matches!(u, Unit::TemporalDelimiter))
                .count();
            prop_assert_eq!(extra, 0);
        }
    }

    #[test]
    fn truncated_input_errors_or_is_a_unit_prefix(seed: u64, cut in 0usize..4096) {
        let bytes = serialize(&common::random_valid_bitstream(seed)).unwrap();
        if cut < bytes.len() {
            // a cut on a unit boundary is itself a well-formed, shorter stream
            if let Ok(prefix) = parse(&bytes[..cut]) {
                prop_assert_eq!(svb::container::serialize_unchecked(&prefix), &bytes[..cut]);
            }
        }
    }
}

#[test]
fn empty_stream_is_header_only() {
    let bs = Bitstream::new(SequenceConfig::default());
    let bytes = serialize(&bs).unwrap();
    assert_eq!(bytes.len(), SEQUENCE_HEADER_LEN);
    assert_eq!(&bytes[..5], b"SVBS\x01");
}

#[test]
fn encoder_output_is_deterministic() {
    let config = common::grid3(192, 96);
    let run = || serialize(&encode_svc(&generate_content(7, &config, 3).unwrap()).unwrap()).unwrap();
    assert_eq!(run(), run());
}

#[test]
fn encoder_output_validates_and_uses_one_tile_groups() {
    let config = common::grid3(192, 96);
    let bs = encode_svc(&generate_content(7, &config, 5).unwrap()).unwrap();
    assert!(validate_structure(&bs).is_clean());
    for frame in bs.frames() {
        for tg in &frame.enhanced.as_ref().unwrap().tile_groups {
            assert_eq!(tg.tg_start, tg.tg_end);
        }
    }
}

#[test]
fn three_byte_prefix_is_truncated() {
    let bytes = serialize(&common::random_valid_bitstream(1)).unwrap();
    assert!(matches!(parse(&bytes[..3]), Err(svb::container::ParseError::Truncated(_))));
}

#[test]
fn unknown_unit_type_reports_offset() {
    let config = common::grid3(192, 96);
    let mut bytes = serialize(&encode_svc(&generate_content(1, &config, 1).unwrap()).unwrap()).unwrap();
    // second unit: after the header and the empty delimiter unit
    let offset = SEQUENCE_HEADER_LEN + 5;
    bytes[offset] = 0xFF;
    match parse(&bytes) {
        Err(svb::container::ParseError::UnknownUnitType { value, offset: at }) => {
            assert_eq!((value, at), (0xFF, offset));
        }
        other => panic!("{other:?}"),
    }
}

/// Hand-built two-frame stream used by the violation cases.
fn two_frames(config: SequenceConfig, enhanced: FrameHeader) -> Bitstream {
    let mut bs = Bitstream::new(config);
    let base_area = (config.base_width() * config.base_height()) as usize;
    for idx in 0..2u32 {
        bs.units.push(Unit::TemporalDelimiter);
        let ft = if idx == 0 { FrameType::Key } else { FrameType::Inter };
        bs.units.push(Unit::FrameHeader(FrameHeader::base(idx, ft)));
        bs.units.push(Unit::TileGroup(TileGroup::single(Tile::coded(0, rle::compress(&vec![0; base_area])))));
        let header = if idx == 1 { enhanced } else { FrameHeader::enhanced(0, 0) };
        bs.units.push(Unit::FrameHeader(header));
        for t in 0..config.tile_count() {
            let area = config.tile_rect(t).area() as usize;
            bs.units.push(Unit::TileGroup(TileGroup::single(Tile::coded(t as u16, rle::compress(&vec![0; area])))));
        }
    }
    bs
}

#[test]
fn constructed_violations_are_detected() {
    let config = SequenceConfig {
        gop_size: 4,
        ref_window: 3,
        ..common::grid3(192, 96)
    };
    assert!(validate_structure(&two_frames(config, FrameHeader::enhanced(1, 1))).is_clean());

    let before_gop = validate_structure(&two_frames(config, FrameHeader::enhanced(1, 2)));
    assert!(before_gop.has(Rule::ClosedGop), "{before_gop}");

    let mut temporal = FrameHeader::enhanced(1, 0);
    temporal.enhanced_temporal_ref = true;
    let report = validate_structure(&two_frames(config, temporal));
    assert!(report.has(Rule::TemporalInEnhanced), "{report}");

    let mut no_delimiter = two_frames(config, FrameHeader::enhanced(1, 0));
    no_delimiter.units.remove(0);
    let report = validate_structure(&no_delimiter);
    assert!(report.has(Rule::TemporalDelimiter), "{report}");

    assert!(matches!(
        serialize(&two_frames(config, temporal)),
        Err(ContainerError::InvalidStructure(_))
    ));
}

#[test]
fn ids_are_stable() {
    assert_eq!(Rule::ClosedGop.id(), "R_CLOSED_GOP");
    assert_eq!(Rule::TemporalInEnhanced.id(), "R_TEMPORAL_IN_ENH");
}

/// Independent walk over the serialized bytes: sums unit sizes per frame,
/// splitting layers on the layer byte of each frame header.
fn scan(bytes: &[u8]) -> Vec<(usize, usize, usize)> {
    let mut out: Vec<(usize, usize, usize)> = Vec::new();
    let mut pos = SEQUENCE_HEADER_LEN;
    let mut layer = None;
    while pos < bytes.len() {
        let kind = bytes[pos];
        let len = LittleEndian::read_u32(&bytes[pos + 1..pos + 5]) as usize;
        let size = 5 + len;
        match kind {
            2 => {
                out.push((size, 0, 0));
                layer = None;
            }
            3 => layer = Some(bytes[pos + 5 + 4]),
            _ => {}
        }
        let last = out.last_mut().unwrap();
        match (kind, layer) {
            (2, _) | (5, _) => {}
            (_, Some(0)) => last.1 += size,
            (_, Some(1)) => last.2 += size,
            _ => unreachable!(),
        }
        if kind == 5 {
            last.0 += size;
        }
        pos += size;
    }
    out
}

#[test]
fn frame_sizes_match_file_scan() {
    for seed in 0..40 {
        let bs = common::random_valid_bitstream(seed);
        let bytes = serialize(&bs).unwrap();
        let sizes = frame_byte_sizes(&bs).unwrap();
        let total: usize = sizes.iter().map(|f| f.total()).sum();
        assert_eq!(total, bytes.len() - SEQUENCE_HEADER_LEN);
        let scanned = scan(&bytes);
        let ours: Vec<_> = sizes.iter().map(|f| (f.delimiter, f.base, f.enhanced)).collect();
        assert_eq!(ours, scanned, "seed {seed}");
    }
}

#[test]
fn one_frame_size_is_its_units() {
    let config = common::grid3(192, 96);
    let bs = encode_svc(&generate_content(3, &config, 1).unwrap()).unwrap();
    let sizes = frame_byte_sizes(&bs).unwrap();
    assert_eq!(sizes.len(), 1);
    let units: usize = bs.units.iter().map(Unit::encoded_len).sum();
    assert_eq!(sizes[0].total(), units);
}

#[test]
fn single_tile_base_is_no_larger() {
    let tiled = SequenceConfig {
        base_single_tile: false,
        ..common::grid3(384, 192)
    };
    let single = common::grid3(384, 192);
    let src = generate_content(1, &single, 6).unwrap();
    let base_total = |config: SequenceConfig| -> usize {
        let src = svb::codec::VideoSource { config, ..src.clone() };
        frame_byte_sizes(&encode_svc(&src).unwrap())
            .unwrap()
            .iter()
            .map(|f| f.base)
            .sum()
    };
    assert!(base_total(single) <= base_total(tiled));
}
