//! Brute-force reference for [`super::select_tiles`]: visits every pixel
//! centre instead of sampling the viewport. Deliberately shares no
//! projection or membership code with the fast path.

use std::f64::consts::PI;

use super::{GeometryError, Projection, ProjectionKind, TileSet, Viewport};
use crate::config::SequenceConfig;

pub const DEFAULT_PIXEL_BUDGET: u64 = 16 * 1024 * 1024;

pub fn tile_coverage_oracle(
    viewport: &Viewport,
    projection: &Projection,
    config: &SequenceConfig,
) -> Result<TileSet, GeometryError> {
    tile_coverage_oracle_with_budget(viewport, projection, config, DEFAULT_PIXEL_BUDGET)
}

pub fn tile_coverage_oracle_with_budget(
    viewport: &Viewport,
    projection: &Projection,
    config: &SequenceConfig,
    budget: u64,
) -> Result<TileSet, GeometryError> {
    let (w, h) = (projection.width, projection.height);
    let pixels = u64::from(w) * u64::from(h);
    if pixels > budget {
        return Err(GeometryError::TooLarge { pixels, budget });
    }

    // Viewport basis: forward, left, up.
    let (sy, cy) = viewport.yaw.sin_cos();
    let (sp, cp) = viewport.pitch.sin_cos();
    let fwd = [cp * cy, cp * sy, sp];
    let left = [-sy, cy, 0.0];
    let up = [-sp * cy, -sp * sy, cp];
    let half_h = viewport.h_fov / 2.0 + super::ANGLE_EPS;
    let half_v = viewport.v_fov / 2.0 + super::ANGLE_EPS;
    let inside = |d: [f64; 3]| {
        let x = d[0] * fwd[0] + d[1] * fwd[1] + d[2] * fwd[2];
        let y = d[0] * left[0] + d[1] * left[1] + d[2] * left[2];
        let z = d[0] * up[0] + d[1] * up[1] + d[2] * up[2];
        y.atan2(x).abs() <= half_h && z.clamp(-1.0, 1.0).asin().abs() <= half_v
    };

    let tw = w / u32::from(config.tile_cols);
    let th = h / u32::from(config.tile_rows);
    let mut set = TileSet::new();
    for py in 0..h {
        for px in 0..w {
            let tile = ((py / th) * u32::from(config.tile_cols) + px / tw) as u16;
            if set.contains(tile) {
                continue;
            }
            if inside(inverse(projection.kind, w, h, px, py)) {
                set.insert(tile);
            }
        }
    }
    Ok(set)
}

fn inverse(kind: ProjectionKind, w: u32, h: u32, px: u32, py: u32) -> [f64; 3] {
    let u = (f64::from(px) + 0.5) / f64::from(w);
    let v = (f64::from(py) + 0.5) / f64::from(h);
    match kind {
        ProjectionKind::Erp => {
            let lon = (2.0 * u - 1.0) * PI;
            let lat = (0.5 - v) * PI;
            [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
        }
        ProjectionKind::Cubemap => {
            // 3x2 cells: left front right / bottom back top
            let col = (u * 3.0).floor().min(2.0);
            let row = (v * 2.0).floor().min(1.0);
            let a = (u * 3.0 - col) * 2.0 - 1.0; // rightwards on the face
            let b = (v * 2.0 - row) * 2.0 - 1.0; // downwards on the face
            let p = match (col as u8, row as u8) {
                (0, 0) => [a, 1.0, -b],
                (1, 0) => [1.0, -a, -b],
                (2, 0) => [-a, -1.0, -b],
                (0, 1) => [-b, -a, -1.0],
                (1, 1) => [-1.0, a, -b],
                _ => [b, -a, 1.0],
            };
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            [p[0] / n, p[1] / n, p[2] / n]
        }
    }
}
