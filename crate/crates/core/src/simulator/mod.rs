//! Frame-tick simulation of one client session, measuring how long a
//! viewport switch takes to show up (MTP) and to be fully in high quality
//! (MTHQ), and how many bytes each scheme moves.
//!
//! Timeline per frame `n` (period `T`):
//! - the server composes at `n·T` using the latest pose whose uplink
//!   arrival is no later than that instant;
//! - the payload goes out over a FIFO link (serialization at the link
//!   bandwidth, then the downlink delay);
//! - the client shows it at the first frame boundary strictly after arrival.

mod report;
mod session;
mod streams;

pub use report::{
    bitrate_report, latency_summary, summarize_switches, BitrateRow, BitrateTable, LatencySummary, Stats, MTHQ_BUDGET_MS,
};
pub use session::{run_session, ChannelBytes, FrameRecord, SessionOptions, SessionReport, SwitchSample};
pub use streams::StreamSet;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::CodecError;
use crate::config::FrameRate;
use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no encoded stream for {0}")]
    NoStream(String),
    #[error("trace is empty")]
    TraceEmpty,
    #[error("no reports to summarize")]
    Empty,
    #[error("bad arguments: {0}")]
    BadArgs(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Delivery scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scheme {
    /// Base layer plus per-frame rewritten enhanced layer.
    Svc,
    /// Low-resolution track always sent; full-resolution long-GOP track for
    /// the viewport, switchable at its KEY frames; optional short-GOP track
    /// covering newly needed tiles until the long track catches up.
    Multitrack {
        long_gop: u16,
        short_gop: u16,
        /// GOP of the low-resolution track; `None` means `long_gop`.
        low_gop: Option<u16>,
    },
}

impl Scheme {
    pub fn multitrack(long_gop: u16, short_gop: u16) -> Self {
        Self::Multitrack {
            long_gop,
            short_gop,
            low_gop: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if let Self::Multitrack {
            long_gop, low_gop, ..
        } = self
        {
            if *long_gop == 0 || *low_gop == Some(0) {
                return Err(SimError::BadArgs("multitrack GOPs must be at least 1".into()));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            Self::Svc => "svc".into(),
            Self::Multitrack {
                long_gop,
                short_gop,
                low_gop: None,
            } => format!("multitrack({long_gop},{short_gop})"),
            Self::Multitrack {
                long_gop,
                short_gop,
                low_gop: Some(low),
            } => format!("multitrack({long_gop},{short_gop},low={low})"),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Scheme {
    type Err = SimError;

    /// `svc`, `multitrack`, `multitrack:30,5` or `multitrack:30,5,30`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "svc" {
            return Ok(Self::Svc);
        }
        let rest = s
            .strip_prefix("multitrack")
            .ok_or_else(|| SimError::BadArgs(format!("unknown scheme {s:?}")))?;
        let rest = rest.trim_start_matches([':', '(']).trim_end_matches(')');
        if rest.is_empty() {
            return Ok(Self::multitrack(30, 0));
        }
        let nums: Vec<u16> = rest
            .split(',')
            .map(|p| p.trim().parse::<u16>())
            .collect::<Result<_, _>>()
            .map_err(|e| SimError::BadArgs(format!("scheme {s:?}: {e}")))?;
        let scheme = match nums[..] {
            [long] => Self::multitrack(long, 0),
            [long, short] => Self::multitrack(long, short),
            [long, short, low] => Self::Multitrack {
                long_gop: long,
                short_gop: short,
                low_gop: Some(low),
            },
            _ => return Err(SimError::BadArgs(format!("scheme {s:?}: too many numbers"))),
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// Link between client and server.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub uplink_delay_ms: f64,
    pub downlink_delay_ms: f64,
    /// `None` is an unlimited link (no serialization delay).
    pub bandwidth_bytes_per_s: Option<f64>,
}

impl NetworkModel {
    pub const IDEAL: NetworkModel = NetworkModel {
        uplink_delay_ms: 0.0,
        downlink_delay_ms: 0.0,
        bandwidth_bytes_per_s: None,
    };

    pub fn validate(&self) -> Result<(), SimError> {
        let ok_delay = |d: f64| d.is_finite() && d >= 0.0;
        if !ok_delay(self.uplink_delay_ms) || !ok_delay(self.downlink_delay_ms) {
            return Err(SimError::BadArgs("delays must be finite and non-negative".into()));
        }
        if let Some(b) = self.bandwidth_bytes_per_s {
            if !(b.is_finite() && b > 0.0) {
                return Err(SimError::BadArgs("bandwidth must be positive".into()));
            }
        }
        Ok(())
    }

    /// Milliseconds to push `bytes` onto the link.
    pub fn serialization_ms(&self, bytes: u64) -> f64 {
        self.bandwidth_bytes_per_s.map_or(0.0, |b| bytes as f64 * 1000.0 / b)
    }
}

/// Average wait for the next KEY frame when a switch lands at a uniformly
/// random phase inside a GOP: half the GOP duration.
pub fn expected_gop_wait_ms(gop: u32, fps: FrameRate) -> Result<f64, SimError> {
    if gop == 0 || fps.num == 0 || fps.den == 0 {
        return Err(SimError::BadArgs(format!("gop {gop}, fps {}/{}", fps.num, fps.den)));
    }
    Ok(1000.0 * f64::from(gop) / (2.0 * fps.as_f64()))
}
