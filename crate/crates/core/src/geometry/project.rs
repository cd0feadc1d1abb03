use std::f64::consts::{PI, TAU};

use super::{dot, Projection, ProjectionKind, Vec3};

/// Cube faces with their forward, right and down vectors, in the order of
/// the 3x2 packing (top row left to right, then bottom row).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeFace {
    Left,
    Front,
    Right,
    Bottom,
    Back,
    Top,
}

impl CubeFace {
    pub const ALL: [CubeFace; 6] = [Self::Left, Self::Front, Self::Right, Self::Bottom, Self::Back, Self::Top];

    /// (forward, right, down)
    pub fn basis(self) -> (Vec3, Vec3, Vec3) {
        match self {
            Self::Front => ([1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]),
            Self::Right => ([0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]),
            Self::Back => ([-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]),
            Self::Left => ([0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]),
            Self::Top => ([0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]),
            Self::Bottom => ([0.0, 0.0, -1.0], [0.0, -1.0, 0.0], [-1.0, 0.0, 0.0]),
        }
    }

    /// (column, row) of the face cell in the 3x2 packing.
    pub fn cell(self) -> (u32, u32) {
        let i = Self::ALL.iter().position(|&f| f == self).unwrap() as u32;
        (i % 3, i / 3)
    }

    /// Face hit by `d`: the dominant axis, ties going to x, then y, then z.
    pub fn of_direction(d: Vec3) -> Self {
        let (ax, ay, az) = (d[0].abs(), d[1].abs(), d[2].abs());
        if ax >= ay && ax >= az {
            if d[0] >= 0.0 {
                Self::Front
            } else {
                Self::Back
            }
        } else if ay >= az {
            if d[1] >= 0.0 {
                Self::Left
            } else {
                Self::Right
            }
        } else if d[2] >= 0.0 {
            Self::Top
        } else {
            Self::Bottom
        }
    }
}

/// Continuous pixel coordinates of `d` on an equirectangular frame.
pub fn project_erp(d: Vec3, width: u32, height: u32) -> (f64, f64) {
    let (w, h) = (f64::from(width), f64::from(height));
    let lon = d[1].atan2(d[0]);
    let lat = d[2].clamp(-1.0, 1.0).asin();
    // lon is in [-pi, pi], so u is already in [0, w]
    let mut u = (lon / TAU + 0.5) * w;
    if u >= w {
        u = 0.0;
    }
    let v = ((0.5 - lat / PI) * h).clamp(0.0, h.next_down_f64());
    (u, v)
}

/// Continuous pixel coordinates of `d` on a 3x2 cube-map frame.
pub fn project_cubemap(d: Vec3, width: u32, height: u32) -> (f64, f64) {
    let face = CubeFace::of_direction(d);
    let (f, r, dn) = face.basis();
    let depth = dot(d, f);
    let s = dot(d, r) / depth;
    let t = dot(d, dn) / depth;
    let (fw, fh) = (f64::from(width) / 3.0, f64::from(height) / 2.0);
    let (cx, cy) = face.cell();
    let u = f64::from(cx) * fw + ((s + 1.0) / 2.0 * fw).clamp(0.0, fw.next_down_f64());
    let v = f64::from(cy) * fh + ((t + 1.0) / 2.0 * fh).clamp(0.0, fh.next_down_f64());
    (u, v)
}

pub fn project(projection: &Projection, d: Vec3) -> (f64, f64) {
    match projection.kind {
        ProjectionKind::Erp => project_erp(d, projection.width, projection.height),
        ProjectionKind::Cubemap => project_cubemap(d, projection.width, projection.height),
    }
}

/// Direction through the centre of pixel (x, y).
pub(crate) fn pixel_center_direction(projection: &Projection, x: u32, y: u32) -> Vec3 {
    let (u, v) = (f64::from(x) + 0.5, f64::from(y) + 0.5);
    let (w, h) = (f64::from(projection.width), f64::from(projection.height));
    match projection.kind {
        ProjectionKind::Erp => {
            let lon = (u / w - 0.5) * TAU;
            let lat = (0.5 - v / h) * PI;
            super::angles_to_dir(lon, lat)
        }
        ProjectionKind::Cubemap => {
            let (fw, fh) = (w / 3.0, h / 2.0);
            let (cx, cy) = ((u / fw) as usize, (v / fh) as usize);
            let face = CubeFace::ALL[cy.min(1) * 3 + cx.min(2)];
            let s = 2.0 * (u - cx as f64 * fw) / fw - 1.0;
            let t = 2.0 * (v - cy as f64 * fh) / fh - 1.0;
            let (f, r, dn) = face.basis();
            let p = [0, 1, 2].map(|i| f[i] + s * r[i] + t * dn[i]);
            let n = dot(p, p).sqrt();
            p.map(|c| c / n)
        }
    }
}

/// Largest float strictly below `self`.
trait NextDown {
    fn next_down_f64(self) -> f64;
}

impl NextDown for f64 {
    fn next_down_f64(self) -> f64 {
        f64::from_bits(self.to_bits() - 1)
    }
}
