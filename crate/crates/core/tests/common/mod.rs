#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svb::config::{FrameRate, SequenceConfig};
use svb::container::{Bitstream, FrameHeader, FrameType, Tile, TileGroup, TilePayload, Unit};
use svb::geometry::TracePoint;
use svb::rewriter::SuperblockMode;
use svb::rle;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 3x3 grid on a small frame.
pub fn grid3(width: u16, height: u16) -> SequenceConfig {
    SequenceConfig {
        width,
        height,
        tile_cols: 3,
        tile_rows: 3,
        ..Default::default()
    }
}

fn payload(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    let zero_bias: f64 = rng.gen();
    let raw: Vec<u8> = (0..len)
        .map(|_| if rng.gen_bool(zero_bias) { 0 } else { rng.gen() })
        .collect();
    rle::compress(&raw)
}

/// A random stream that satisfies every structural rule.
pub fn random_valid_bitstream(seed: u64) -> Bitstream {
    let mut rng = rng(seed);
    let tile_cols = rng.gen_range(1..=4u8);
    let tile_rows = rng.gen_range(1..=3u8);
    let scale_factor = rng.gen_range(2..=3u8);
    let gop_size = rng.gen_range(1..=5u16);
    let single_layer = rng.gen_bool(0.2);
    let config = SequenceConfig {
        width: u16::from(tile_cols) * u16::from(scale_factor) * rng.gen_range(1..=4u16),
        height: u16::from(tile_rows) * u16::from(scale_factor) * rng.gen_range(1..=4u16),
        scale_factor,
        tile_cols,
        tile_rows,
        fps: FrameRate::new(rng.gen_range(1..=60), rng.gen_range(1..=2)),
        gop_size,
        base_single_tile: rng.gen(),
        ref_window: rng.gen_range(1..=gop_size.min(4)) as u8,
        single_layer,
    };
    config.validate().expect("generator builds valid configs");

    let mut bs = Bitstream::new(config);
    let frames = rng.gen_range(0..=6u32);
    for idx in 0..frames {
        bs.units.push(Unit::TemporalDelimiter);
        if rng.gen_bool(0.1) {
            let len = rng.gen_range(0..8);
            bs.units.push(Unit::Metadata((0..len).map(|_| rng.gen()).collect()));
        }
        let key = config.is_key_index(idx);
        let mut base = FrameHeader::base(idx, if key { FrameType::Key } else { FrameType::Inter });
        base.cdf_update_disabled = rng.gen();
        base.global_mv_zero = rng.gen();
        bs.units.push(Unit::FrameHeader(base));

        // Base tiles in runs of consecutive indices.
        let grid = config.base_tile_count();
        let mut start = 0usize;
        while start < grid {
            let end = rng.gen_range(start..grid);
            let tiles = (start..=end)
                .map(|i| Tile::coded(i as u16, payload(&mut rng, config.base_tile_rect(i).area() as usize)))
                .collect();
            bs.units.push(Unit::TileGroup(TileGroup {
                tg_start: start as u16,
                tg_end: end as u16,
                tiles,
            }));
            start = end + 1;
        }

        if single_layer || rng.gen_bool(0.15) {
            continue;
        }
        let max_offset = u32::from(config.ref_window).min(idx % u32::from(gop_size) + 1);
        let mut enh = FrameHeader::enhanced(idx, rng.gen_range(0..max_offset) as u8);
        let mut order: Vec<usize> = (0..config.tile_count()).collect();
        order.shuffle(&mut rng);
        let skip_rate: f64 = rng.gen();
        let mut groups = Vec::new();
        let mut any_skipped = false;
        for i in order {
            let tile = if rng.gen_bool(skip_rate) {
                any_skipped = true;
                Tile {
                    tile_index: i as u16,
                    payload: TilePayload::Skipped {
                        superblock_count: config.superblocks_per_tile() as u16,
                        mode: SuperblockMode::SKIPPED,
                    },
                }
            } else {
                Tile::coded(i as u16, payload(&mut rng, config.tile_rect(i).area() as usize))
            };
            groups.push(Unit::TileGroup(TileGroup::single(tile)));
        }
        if any_skipped {
            enh.cdf_update_disabled = true;
            enh.global_mv_zero = true;
        } else {
            enh.cdf_update_disabled = rng.gen();
            enh.global_mv_zero = rng.gen();
        }
        bs.units.push(Unit::FrameHeader(enh));
        bs.units.extend(groups);
    }
    bs
}

pub fn pose(t_ms: f64, yaw_deg: f64, pitch_deg: f64) -> TracePoint {
    TracePoint {
        t_ms,
        yaw_deg,
        pitch_deg,
        h_fov_deg: 90.0,
        v_fov_deg: 90.0,
    }
}

/// Switches between two opposite viewports at uniformly random phases,
/// spaced far enough apart that each can settle before the next.
pub fn alternating_trace(seed: u64, switches: usize, min_gap_ms: f64, max_gap_ms: f64) -> Vec<TracePoint> {
    let mut rng = rng(seed);
    let mut t = 0.0;
    let mut out = vec![pose(0.0, 0.0, 0.0)];
    for k in 0..switches {
        t += rng.gen_range(min_gap_ms..max_gap_ms);
        out.push(pose(t, if k % 2 == 0 { 180.0 } else { 0.0 }, 0.0));
    }
    out
}

/// Random equatorial wandering: yaw steps of up to 40 degrees every
/// `gap_ms` milliseconds.
pub fn wandering_trace(seed: u64, points: usize, gap_ms: f64) -> Vec<TracePoint> {
    let mut rng = rng(seed);
    let mut yaw: f64 = 0.0;
    (0..points)
        .map(|k| {
            if k > 0 {
                yaw += rng.gen_range(-40.0..40.0);
            }
            let wrapped = (yaw + 180.0).rem_euclid(360.0) - 180.0;
            pose(k as f64 * gap_ms, wrapped, 0.0)
        })
        .collect()
}
