mod common;

use proptest::prelude::*;
use svb::codec::{
    decode_frame, downsample, encode_svc, encode_track, generate_content, psnr, upsample_nearest, Decoder, Resolution,
};
use svb::container::{frame_byte_sizes, validate_structure, FrameType, Layer};
use svb::geometry::TileSet;
use svb::SequenceConfig;

fn small() -> SequenceConfig {
    SequenceConfig {
        gop_size: 6,
        ..common::grid3(192, 96)
    }
}

#[test]
fn full_decode_is_lossless() {
    let config = small();
    let src = generate_content(11, &config, 13).unwrap();
    let bs = encode_svc(&src).unwrap();
    let dec = Decoder::new(&bs).unwrap();
    let all = TileSet::full(config.tile_count());
    for (i, frame) in src.frames.iter().enumerate() {
        assert_eq!(&dec.decode_frame(i as u32, &all).unwrap(), frame, "frame {i}");
    }
}

#[test]
fn base_layer_decodes_alone() {
    let config = small();
    let src = generate_content(12, &config, 8).unwrap();
    let bs = encode_svc(&src).unwrap();
    let base_only = bs.without_enhanced_layer();
    assert!(validate_structure(&base_only).is_clean());
    let dec = Decoder::new(&base_only).unwrap();
    for (i, frame) in src.frames.iter().enumerate() {
        let expected = upsample_nearest(&downsample(frame, 2).unwrap(), 2);
        assert_eq!(dec.decode_frame(i as u32, &TileSet::full(9)).unwrap(), expected);
        assert_eq!(*dec.base_frame(i as u32).unwrap(), downsample(frame, 2).unwrap());
    }
}

#[test]
fn tracks_are_lossless() {
    let config = small();
    let src = generate_content(13, &config, 7).unwrap();
    for res in [Resolution::Full, Resolution::Base] {
        let track = encode_track(&src, 3, res).unwrap();
        assert!(track.config.single_layer);
        assert!(validate_structure(&track).is_clean());
        let dec = Decoder::new(&track).unwrap();
        for (i, frame) in src.frames.iter().enumerate() {
            let expected = match res {
                Resolution::Full => frame.clone(),
                Resolution::Base => downsample(frame, 2).unwrap(),
            };
            assert_eq!(dec.decode_frame(i as u32, &TileSet::new()).unwrap(), expected);
        }
    }
}

#[test]
fn static_inter_frames_cost_one_record_per_tile() {
    let config = small();
    let src = generate_content(14, &config, 1).unwrap().frozen(6);
    let bs = encode_svc(&src).unwrap();
    for frame in bs.frames().iter().skip(1) {
        let base = frame.layer(Layer::Base).unwrap();
        assert_eq!(base.header.frame_type, FrameType::Inter);
        for tile in base.tiles() {
            assert_eq!(tile.encoded_len() - 7, 5);
        }
    }
    let track = encode_track(&src, 6, Resolution::Full).unwrap();
    for frame in track.frames().iter().skip(1) {
        for tile in frame.layer(Layer::Base).unwrap().tiles() {
            assert_eq!(tile.encoded_len() - 7, 5);
        }
    }
}

#[test]
fn key_frames_outweigh_inter_frames() {
    let config = SequenceConfig::default();
    let src = generate_content(1, &config, 30).unwrap();
    let track = encode_track(&src, 30, Resolution::Full).unwrap();
    let sizes = frame_byte_sizes(&track).unwrap();
    let key = sizes[0].base;
    for f in &sizes[1..] {
        assert!(f.base < key / 2, "inter {} vs key {key}", f.base);
    }
}

#[test]
fn shorter_gops_cost_more() {
    let config = SequenceConfig::default();
    let src = generate_content(2, &config, 30).unwrap();
    let total = |gop| -> usize {
        frame_byte_sizes(&encode_track(&src, gop, Resolution::Full).unwrap())
            .unwrap()
            .iter()
            .map(|f| f.total())
            .sum()
    };
    let (g3, g5, g30) = (total(3), total(5), total(30));
    assert!(g3 >= g5 && g5 >= g30, "{g3} {g5} {g30}");
}

#[test]
fn wider_reference_window_never_costs_more() {
    let narrow = small();
    let wide = SequenceConfig { ref_window: 4, ..narrow };
    let src = generate_content(15, &narrow, 12).unwrap();
    let enhanced = |config: SequenceConfig| -> Vec<usize> {
        let src = svb::codec::VideoSource { config, ..src.clone() };
        frame_byte_sizes(&encode_svc(&src).unwrap())
            .unwrap()
            .iter()
            .map(|f| f.enhanced)
            .collect()
    };
    for (n, w) in enhanced(narrow).iter().zip(enhanced(wide)) {
        assert!(w <= *n);
    }
}

#[test]
fn partial_tiles_replace_only_their_pixels() {
    let config = small();
    let src = generate_content(16, &config, 4).unwrap();
    let bs = encode_svc(&src).unwrap();
    let received = TileSet::from_indices([3, 5, 6, 8], 9).unwrap();
    for i in 0..4u32 {
        let out = decode_frame(&bs, i, &received).unwrap();
        let up = upsample_nearest(&downsample(&src.frames[i as usize], 2).unwrap(), 2);
        for t in 0..9usize {
            let rect = config.tile_rect(t);
            let expected = if received.contains(t as u16) { &src.frames[i as usize] } else { &up };
            assert_eq!(out.crop(rect), expected.crop(rect), "frame {i} tile {t}");
        }
    }
}

#[test]
fn enhanced_quality_is_at_least_base() {
    let config = SequenceConfig::default();
    let src = generate_content(3, &config, 3).unwrap();
    let bs = encode_svc(&src).unwrap();
    let dec = Decoder::new(&bs).unwrap();
    for i in 0..3u32 {
        let orig = &src.frames[i as usize];
        let full = psnr(orig, &dec.decode_frame(i, &TileSet::full(24)).unwrap()).unwrap();
        let base = psnr(orig, &dec.decode_frame(i, &TileSet::new()).unwrap()).unwrap();
        assert!(full >= base);
        assert!(base.is_finite());
    }
}

#[test]
fn output_independent_of_thread_count() {
    let config = SequenceConfig::default();
    let src = generate_content(4, &config, 4).unwrap();
    let default = encode_svc(&src).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(|| encode_svc(&src).unwrap());
    assert_eq!(default, single);
}

#[test]
fn mismatched_frames_rejected() {
    let config = small();
    let mut src = generate_content(5, &config, 2).unwrap();
    src.frames[1] = svb::codec::RasterFrame::filled(64, 64, 0);
    assert!(encode_svc(&src).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_seed_round_trips(seed: u64, frames in 1usize..8, gop in 1u16..5) {
        let config = SequenceConfig { gop_size: gop, ref_window: gop.min(3) as u8, ..small() };
        let src = generate_content(seed, &config, frames).unwrap();
        let bs = encode_svc(&src).unwrap();
        prop_assert!(validate_structure(&bs).is_clean());
        let dec = Decoder::new(&bs).unwrap();
        for (i, f) in src.frames.iter().enumerate() {
            prop_assert_eq!(&dec.decode_frame(i as u32, &TileSet::full(9)).unwrap(), f);
        }
    }
}
