mod common;

use proptest::prelude::*;
use svb::codec::{downsample, encode_svc, generate_content, upsample_nearest, Decoder, VideoSource};
use svb::container::{frame_byte_sizes, parse, serialize, serialize_units, validate_structure, Bitstream};
use svb::geometry::{select_tiles, Projection, TileSet, Viewport, DEFAULT_STEP};
use svb::rewriter::{rewrite_session_frame, rewrite_stream, rewrite_viewport_frame, skipped_tile_unit_len, RewriteError};
use svb::SequenceConfig;

fn fixture(seed: u64, frames: usize) -> (VideoSource, Bitstream) {
    let config = SequenceConfig {
        gop_size: 4,
        ref_window: 2,
        ..common::grid3(192, 96)
    };
    let src = generate_content(seed, &config, frames).unwrap();
    let bs = encode_svc(&src).unwrap();
    (src, bs)
}

fn subset(mask: u16) -> TileSet {
    TileSet::from_indices((0..9).filter(|i| mask >> i & 1 == 1), 9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rewritten_streams_decode_and_keep_selected_pixels(seed in 0u64..1000, mask in 0u16..512) {
        let (src, bs) = fixture(seed, 6);
        let selected = subset(mask);
        let out = rewrite_stream(&bs, &selected).unwrap();
        prop_assert!(validate_structure(&out).is_clean());
        let reparsed = parse(&serialize(&out).unwrap()).unwrap();
        prop_assert_eq!(&reparsed, &out);

        let dec = Decoder::new(&out).unwrap();
        let all = TileSet::full(9);
        for (i, frame) in src.frames.iter().enumerate() {
            let got = dec.decode_frame(i as u32, &all).unwrap();
            let up = upsample_nearest(&downsample(frame, 2).unwrap(), 2);
            for t in 0..9usize {
                let rect = bs.config.tile_rect(t);
                let want = if selected.contains(t as u16) { frame } else { &up };
                prop_assert_eq!(got.crop(rect), want.crop(rect));
            }
        }
    }

    #[test]
    fn rewritten_size_is_base_plus_selected_plus_stubs(seed in 0u64..1000, mask in 0u16..512) {
        let (_, bs) = fixture(seed, 5);
        let selected = subset(mask);
        let sizes = frame_byte_sizes(&bs).unwrap();
        for frame in bs.frames() {
            let idx = frame.frame_index().unwrap();
            let units = rewrite_viewport_frame(&bs.config, &bs.units[frame.start..frame.end], &selected).unwrap();
            let enh = frame.enhanced.as_ref().unwrap();
            let kept: usize = enh
                .tile_groups
                .iter()
                .filter(|tg| selected.contains(tg.tg_start))
                .map(|tg| svb::container::Unit::TileGroup((*tg).clone()).encoded_len())
                .sum();
            let header = svb::container::Unit::FrameHeader(*enh.header).encoded_len();
            let f = sizes[idx as usize];
            let expected = f.delimiter + f.base + header + kept + (9 - selected.len()) * skipped_tile_unit_len();
            prop_assert_eq!(serialize_units(&units).len(), expected);
        }
    }

    #[test]
    fn rewriting_is_idempotent(seed in 0u64..1000, mask in 0u16..512) {
        let (_, bs) = fixture(seed, 4);
        let once = rewrite_stream(&bs, &subset(mask)).unwrap();
        let twice = rewrite_stream(&once, &subset(mask)).unwrap();
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn skipped_unit_is_twenty_bytes() {
    assert_eq!(skipped_tile_unit_len(), 20);
}

#[test]
fn full_selection_decodes_like_the_source_stream() {
    let (_, bs) = fixture(1, 6);
    let out = rewrite_stream(&bs, &TileSet::full(9)).unwrap();
    let (a, b) = (Decoder::new(&bs).unwrap(), Decoder::new(&out).unwrap());
    for i in 0..6 {
        let all = TileSet::full(9);
        assert_eq!(a.decode_frame(i, &all).unwrap(), b.decode_frame(i, &all).unwrap());
    }
}

#[test]
fn empty_selection_is_the_upscaled_base() {
    let (src, bs) = fixture(2, 3);
    let out = rewrite_stream(&bs, &TileSet::new()).unwrap();
    let dec = Decoder::new(&out).unwrap();
    for (i, frame) in src.frames.iter().enumerate() {
        let up = upsample_nearest(&downsample(frame, 2).unwrap(), 2);
        assert_eq!(dec.decode_frame(i as u32, &TileSet::full(9)).unwrap(), up);
    }
}

#[test]
fn selecting_a_skipped_tile_fails() {
    let (_, bs) = fixture(3, 2);
    let out = rewrite_stream(&bs, &subset(0b1)).unwrap();
    assert!(matches!(rewrite_stream(&out, &subset(0b11)), Err(RewriteError::TileMissing(1))));
}

#[test]
fn session_frame_uses_viewport_tiles() {
    let config = SequenceConfig::default();
    let src = generate_content(4, &config, 2).unwrap();
    let bs = encode_svc(&src).unwrap();
    let proj = Projection::erp(768, 384);
    let vp = Viewport::from_degrees(180.0, 0.0, 90.0, 90.0).unwrap();
    let units = rewrite_session_frame(&bs, 1, &vp, &proj, DEFAULT_STEP).unwrap();
    let expected = select_tiles(&vp, &proj, &config, DEFAULT_STEP).unwrap();
    let enh_start = units
        .iter()
        .rposition(|u| matches!(u, svb::container::Unit::FrameHeader(_)))
        .unwrap();
    let coded: TileSet = units[enh_start + 1..]
        .iter()
        .filter_map(|u| match u {
            svb::container::Unit::TileGroup(tg) if !tg.tiles[0].is_skipped() => Some(tg.tg_start),
            _ => None,
        })
        .collect();
    assert_eq!(units.len() - enh_start - 1, 24);
    assert_eq!(coded, expected);
    assert!(matches!(
        rewrite_session_frame(&bs, 9, &vp, &proj, DEFAULT_STEP),
        Err(RewriteError::NoFrame(9))
    ));
}
