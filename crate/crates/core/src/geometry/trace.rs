//! Viewport traces as JSON lines:
//! `{"t_ms": 0, "yaw_deg": 0, "pitch_deg": 0, "h_fov_deg": 90, "v_fov_deg": 90}`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{GeometryError, Viewport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t_ms: f64,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub h_fov_deg: f64,
    pub v_fov_deg: f64,
}

impl TracePoint {
    pub fn viewport(&self) -> Result<Viewport, GeometryError> {
        Viewport::from_degrees(self.yaw_deg, self.pitch_deg, self.h_fov_deg, self.v_fov_deg)
    }

    pub fn from_viewport(t_ms: f64, v: &Viewport) -> Self {
        Self {
            t_ms,
            yaw_deg: v.yaw.to_degrees(),
            pitch_deg: v.pitch.to_degrees(),
            h_fov_deg: v.h_fov.to_degrees(),
            v_fov_deg: v.v_fov.to_degrees(),
        }
    }
}

/// Reads a trace, skipping blank lines. Times must be strictly increasing
/// and every pose must be a valid viewport.
pub fn read_trace(reader: impl BufRead) -> Result<Vec<TracePoint>, GeometryError> {
    let mut out: Vec<TracePoint> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let bad = |reason: String| GeometryError::BadTrace { line: line_no, reason };
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: TracePoint = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if !p.t_ms.is_finite() || p.t_ms < 0.0 {
            return Err(bad(format!("bad time {}", p.t_ms)));
        }
        if let Some(prev) = out.last() {
            if p.t_ms <= prev.t_ms {
                return Err(bad(format!("time {} not after {}", p.t_ms, prev.t_ms)));
            }
        }
        p.viewport().map_err(|e| bad(e.to_string()))?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_trace(mut writer: impl Write, points: &[TracePoint]) -> std::io::Result<()> {
    for p in points {
        serde_json::to_writer(&mut writer, p)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
