//! Viewport to tile mapping for equirectangular and 3x2 cube-map frames.
//!
//! Axes: x forward, y left, z up. A viewport centred at (yaw, pitch) looks
//! along `(cos p cos y, cos p sin y, sin p)`; its local frame is obtained by
//! pitching about -y, then yawing about z. There is no roll.
//!
//! A direction is inside the field of view when its local azimuth `a` and
//! elevation `b` satisfy `|a| <= h_fov/2` and `|b| <= v_fov/2`.

mod oracle;
mod project;
mod trace;

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SequenceConfig;

pub use oracle::{tile_coverage_oracle, tile_coverage_oracle_with_budget, DEFAULT_PIXEL_BUDGET};
pub use project::{project, project_cubemap, project_erp, CubeFace};
pub use trace::{read_trace, write_trace, TracePoint};

/// Default angular sampling step, 0.25 degrees.
pub const DEFAULT_STEP: f64 = 0.25 * PI / 180.0;

/// Slack for comparisons against FOV bounds.
pub(crate) const ANGLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("bad sampling step {0} rad")]
    BadStep(f64),
    #[error("bad viewport: {0}")]
    BadViewport(String),
    #[error("bad projection: {0}")]
    BadProjection(String),
    #[error("{pixels} pixels exceeds the oracle budget of {budget}")]
    TooLarge { pixels: u64, budget: u64 },
    #[error("tile index {index} outside a grid of {count}")]
    BadIndex { index: usize, count: usize },
    #[error("trace line {line}: {reason}")]
    BadTrace { line: usize, reason: String },
}

pub type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Spherical field of view, all angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub yaw: f64,
    pub pitch: f64,
    pub h_fov: f64,
    pub v_fov: f64,
}

/// Wraps an angle into [-pi, pi).
pub fn normalize_yaw(yaw: f64) -> f64 {
    let y = (yaw + PI).rem_euclid(TAU) - PI;
    if y >= PI {
        -PI
    } else {
        y
    }
}

impl Viewport {
    pub fn new(yaw: f64, pitch: f64, h_fov: f64, v_fov: f64) -> Result<Self, GeometryError> {
        if ![yaw, pitch, h_fov, v_fov].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::BadViewport("non-finite angle".into()));
        }
        if !(-PI / 2.0..=PI / 2.0).contains(&pitch) {
            return Err(GeometryError::BadViewport(format!("pitch {pitch} outside [-pi/2, pi/2]")));
        }
        if !(h_fov > 0.0 && h_fov <= TAU) {
            return Err(GeometryError::BadViewport(format!("h_fov {h_fov} outside (0, 2pi]")));
        }
        if !(v_fov > 0.0 && v_fov <= PI) {
            return Err(GeometryError::BadViewport(format!("v_fov {v_fov} outside (0, pi]")));
        }
        Ok(Self {
            yaw: normalize_yaw(yaw),
            pitch,
            h_fov,
            v_fov,
        })
    }

    pub fn from_degrees(yaw: f64, pitch: f64, h_fov: f64, v_fov: f64) -> Result<Self, GeometryError> {
        Self::new(yaw.to_radians(), pitch.to_radians(), h_fov.to_radians(), v_fov.to_radians())
    }

    /// Whole sphere.
    pub fn full_sphere() -> Self {
        Self {
            yaw: 0.0,
            pitch: 0.0,
            h_fov: TAU,
            v_fov: PI,
        }
    }

    pub fn center(&self) -> Vec3 {
        self.to_world(angles_to_dir(0.0, 0.0))
    }

    /// Local viewport coordinates to world coordinates.
    pub fn to_world(&self, d: Vec3) -> Vec3 {
        Rotation::of(self).apply(d)
    }

    /// World coordinates to local viewport coordinates.
    pub fn to_local(&self, d: Vec3) -> Vec3 {
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        let x = d[0] * cy + d[1] * sy;
        let y = -d[0] * sy + d[1] * cy;
        [x * cp + d[2] * sp, y, -x * sp + d[2] * cp]
    }

    /// Local azimuth and elevation of a world direction.
    pub fn local_angles(&self, d: Vec3) -> (f64, f64) {
        let l = self.to_local(d);
        (l[1].atan2(l[0]), l[2].clamp(-1.0, 1.0).asin())
    }

    pub fn contains(&self, d: Vec3) -> bool {
        let (a, b) = self.local_angles(d);
        a.abs() <= self.h_fov / 2.0 + ANGLE_EPS && b.abs() <= self.v_fov / 2.0 + ANGLE_EPS
    }
}

/// Pitch-then-yaw rotation with its sines and cosines computed once.
#[derive(Debug, Clone, Copy)]
struct Rotation {
    sp: f64,
    cp: f64,
    sy: f64,
    cy: f64,
}

impl Rotation {
    fn of(v: &Viewport) -> Self {
        let (sp, cp) = v.pitch.sin_cos();
        let (sy, cy) = v.yaw.sin_cos();
        Self { sp, cp, sy, cy }
    }

    #[inline]
    fn apply(&self, d: Vec3) -> Vec3 {
        let x = d[0] * self.cp - d[2] * self.sp;
        let z = d[0] * self.sp + d[2] * self.cp;
        [x * self.cy - d[1] * self.sy, x * self.sy + d[1] * self.cy, z]
    }
}

/// Unit vector for azimuth `a` (towards +y) and elevation `b` (towards +z).
pub fn angles_to_dir(a: f64, b: f64) -> Vec3 {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    [cb * ca, cb * sa, sb]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionKind {
    Erp,
    Cubemap,
}

impl FromStr for ProjectionKind {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "erp" => Ok(Self::Erp),
            "cubemap" | "cubemap3x2" => Ok(Self::Cubemap),
            other => Err(GeometryError::BadProjection(format!("unknown projection {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projection {
    pub kind: ProjectionKind,
    pub width: u32,
    pub height: u32,
}

impl Projection {
    pub fn new(kind: ProjectionKind, width: u32, height: u32) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::BadProjection("empty frame".into()));
        }
        if kind == ProjectionKind::Cubemap && (width * 2 != height * 3 || width % 3 != 0) {
            return Err(GeometryError::BadProjection(format!(
                "cube map needs a 3:2 frame, got {width}x{height}"
            )));
        }
        Ok(Self { kind, width, height })
    }

    pub fn erp(width: u32, height: u32) -> Self {
        Self::new(ProjectionKind::Erp, width, height).expect("non-empty frame")
    }

    pub fn for_config(kind: ProjectionKind, config: &SequenceConfig) -> Result<Self, GeometryError> {
        Self::new(kind, u32::from(config.width), u32::from(config.height))
    }

    /// Pixel holding the projection of `d`.
    pub fn pixel(&self, d: Vec3) -> (u32, u32) {
        let (u, v) = project(self, d);
        ((u as u32).min(self.width - 1), (v as u32).min(self.height - 1))
    }
}

/// Set of tile indices, iterated in raster order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileSet(BTreeSet<u16>);

impl TileSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn full(count: usize) -> Self {
        Self((0..count as u16).collect())
    }

    /// Builds a set, rejecting indices outside a grid of `count` tiles.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>, count: usize) -> Result<Self, GeometryError> {
        let mut set = Self::new();
        for index in indices {
            if index >= count {
                return Err(GeometryError::BadIndex { index, count });
            }
            set.insert(index as u16);
        }
        Ok(set)
    }

    pub fn insert(&mut self, index: u16) -> bool {
        self.0.insert(index)
    }

    pub fn contains(&self, index: u16) -> bool {
        self.0.contains(&index)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u16> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &TileSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &TileSet) -> TileSet {
        Self(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &TileSet) -> TileSet {
        Self(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &TileSet) -> TileSet {
        Self(self.0.difference(&other.0).copied().collect())
    }

    /// Distinct tile columns present in the set.
    pub fn columns(&self, tile_cols: u8) -> BTreeSet<u16> {
        self.0.iter().map(|i| i % u16::from(tile_cols)).collect()
    }

    /// True when the occupied columns form one run (no wrap-around).
    pub fn columns_contiguous(&self, tile_cols: u8) -> bool {
        let cols = self.columns(tile_cols);
        match (cols.first(), cols.last()) {
            (Some(&lo), Some(&hi)) => usize::from(hi - lo) + 1 == cols.len(),
            _ => true,
        }
    }
}

impl FromIterator<u16> for TileSet {
    fn from_iter<I: IntoIterator<Item = u16>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for TileSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u16::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Sampling offsets `0, ±step, ±2·step, ...` strictly inside `half`, plus
/// `±half` itself.
fn offsets(half: f64, step: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut k = 1.0;
    while k * step < half - 1e-9 * step {
        out.push(k * step);
        out.push(-k * step);
        k += 1.0;
    }
    out.push(half);
    out.push(-half);
    out
}

fn check_step(viewport: &Viewport, step: f64) -> Result<(), GeometryError> {
    if !(step.is_finite() && step > 0.0 && step <= viewport.h_fov.min(viewport.v_fov) / 2.0 + ANGLE_EPS) {
        return Err(GeometryError::BadStep(step));
    }
    Ok(())
}

/// Calls `f` with every unit direction of the viewport's angular sampling
/// grid, row by row.
fn for_each_direction(viewport: &Viewport, step: f64, mut f: impl FnMut(Vec3)) -> Result<(), GeometryError> {
    check_step(viewport, step)?;
    let rot = Rotation::of(viewport);
    let h: Vec<(f64, f64)> = offsets(viewport.h_fov / 2.0, step).iter().map(|a| a.sin_cos()).collect();
    let v: Vec<(f64, f64)> = offsets(viewport.v_fov / 2.0, step).iter().map(|b| b.sin_cos()).collect();
    for &(sb, cb) in &v {
        for &(sa, ca) in &h {
            f(rot.apply([cb * ca, cb * sa, sb]));
        }
    }
    Ok(())
}

/// Unit directions on the viewport's angular sampling grid, including the
/// centre and the four corners.
pub fn viewport_directions(viewport: &Viewport, step: f64) -> Result<Vec<Vec3>, GeometryError> {
    let mut out = Vec::new();
    for_each_direction(viewport, step, |d| out.push(d))?;
    Ok(out)
}

/// Tile containing pixel (x, y) of a `projection`-sized frame split on the
/// grid of `config`.
pub fn tile_of_pixel(projection: &Projection, config: &SequenceConfig, x: u32, y: u32) -> u16 {
    let col = u64::from(x) * u64::from(config.tile_cols) / u64::from(projection.width);
    let row = u64::from(y) * u64::from(config.tile_rows) / u64::from(projection.height);
    (row * u64::from(config.tile_cols) + col) as u16
}

/// Tiles touched by the viewport.
///
/// Every sampled direction is projected to a pixel. That pixel and its eight
/// neighbours (wrapping horizontally on ERP) put their tile in the set when
/// the pixel centre lies inside the field of view, which is the same
/// membership test the brute-force oracle applies. The result is therefore
/// always a subset of the oracle's, and equal to it once the grid is dense
/// enough that every covered tile gets a sample near one of its covered
/// pixels.
pub fn select_tiles(
    viewport: &Viewport,
    projection: &Projection,
    config: &SequenceConfig,
    step: f64,
) -> Result<TileSet, GeometryError> {
    let (w, h) = (projection.width as i64, projection.height as i64);
    let cols = u64::from(config.tile_cols);
    let col_of: Vec<usize> = (0..projection.width)
        .map(|x| (u64::from(x) * cols / u64::from(projection.width)) as usize)
        .collect();
    let row_of: Vec<usize> = (0..projection.height)
        .map(|y| (u64::from(y) * u64::from(config.tile_rows) / u64::from(projection.height) * cols) as usize)
        .collect();
    let mut chosen = vec![false; config.tile_count()];
    // per pixel: bit 0 = already hit by a sample, bit 1 = centre tested
    let mut state = vec![0u8; (w * h) as usize];
    for_each_direction(viewport, step, |d| {
        let (px, py) = projection.pixel(d);
        let hit = &mut state[py as usize * w as usize + px as usize];
        if *hit & 1 != 0 {
            return;
        }
        *hit |= 1;
        for dy in -1i64..=1 {
            let y = i64::from(py) + dy;
            if y < 0 || y >= h {
                continue;
            }
            for dx in -1i64..=1 {
                let mut x = i64::from(px) + dx;
                if projection.kind == ProjectionKind::Erp {
                    x = x.rem_euclid(w);
                } else if x < 0 || x >= w {
                    continue;
                }
                let tile = row_of[y as usize] + col_of[x as usize];
                if chosen[tile] {
                    continue;
                }
                let cell = &mut state[(y * w + x) as usize];
                if *cell & 2 != 0 {
                    continue;
                }
                *cell |= 2;
                if viewport.contains(project::pixel_center_direction(projection, x as u32, y as u32)) {
                    chosen[tile] = true;
                }
            }
        }
    })?;
    let selected: TileSet = (0..chosen.len()).filter(|&t| chosen[t]).map(|t| t as u16).collect();
    Ok(selected)
}
