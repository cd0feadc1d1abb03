use serde::{Deserialize, Serialize};

use super::session::ChannelBytes;
use super::{SessionReport, SimError, SwitchSample};

/// Interactive latency budget a scheme's p95 MTHQ is checked against.
pub const MTHQ_BUDGET_MS: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitrateRow {
    pub second: usize,
    pub bytes: ChannelBytes,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitrateTable {
    pub label: String,
    pub rows: Vec<BitrateRow>,
    pub totals: ChannelBytes,
    pub total: u64,
    /// Transported over full enhanced-layer bytes (SVC sessions only).
    pub enhanced_fraction: Option<f64>,
}

impl BitrateTable {
    /// Bytes in `second`; zero outside the simulated span.
    pub fn second(&self, second: usize) -> ChannelBytes {
        self.rows.get(second).map(|r| r.bytes).unwrap_or_default()
    }
}

pub fn bitrate_report(report: &SessionReport) -> BitrateTable {
    let rows = report
        .seconds
        .iter()
        .enumerate()
        .map(|(second, b)| BitrateRow {
            second,
            bytes: *b,
            total: b.total(),
        })
        .collect();
    BitrateTable {
        label: report.label.clone(),
        rows,
        totals: report.totals,
        total: report.totals.total(),
        enhanced_fraction: (report.full_enhanced_bytes > 0)
            .then(|| report.totals.enhanced as f64 / report.full_enhanced_bytes as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Nearest-rank 95th percentile.
    pub p95: f64,
}

impl Stats {
    pub fn of(samples: &[f64]) -> Option<Stats> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Some(Stats {
            count: n,
            mean: s.iter().sum::<f64>() / n as f64,
            median,
            p95: s[rank - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub label: String,
    pub switches: usize,
    pub mthq_not_reached: usize,
    pub mthq: Option<Stats>,
    pub mtp: Option<Stats>,
    /// Mean of MTHQ minus the display-alignment wait of the same frame.
    pub mean_mthq_minus_alignment_ms: Option<f64>,
    /// p95 MTHQ within the interactive budget (and every switch reached).
    pub compliant: bool,
}

/// Latency statistics over one scheme's switches.
pub fn summarize_switches<'a>(label: &str, samples: impl IntoIterator<Item = &'a SwitchSample>) -> LatencySummary {
    let samples: Vec<&SwitchSample> = samples.into_iter().collect();
    let mthq: Vec<f64> = samples.iter().filter_map(|s| s.mthq_ms).collect();
    let mtp: Vec<f64> = samples.iter().filter_map(|s| s.mtp_ms).collect();
    let corrected: Vec<f64> = samples
        .iter()
        .filter_map(|s| Some(s.mthq_ms? - s.alignment_ms?))
        .collect();
    let not_reached = samples.len() - mthq.len();
    let mthq = Stats::of(&mthq);
    LatencySummary {
        label: label.to_string(),
        switches: samples.len(),
        mthq_not_reached: not_reached,
        compliant: not_reached == 0 && mthq.is_some_and(|m| m.p95 <= MTHQ_BUDGET_MS),
        mthq,
        mtp: Stats::of(&mtp),
        mean_mthq_minus_alignment_ms: Stats::of(&corrected).map(|s| s.mean),
    }
}

/// Per-scheme latency statistics; reports with the same label are pooled.
pub fn latency_summary(reports: &[SessionReport]) -> Result<Vec<LatencySummary>, SimError> {
    if reports.is_empty() {
        return Err(SimError::Empty);
    }
    let mut labels: Vec<&str> = Vec::new();
    for r in reports {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    Ok(labels
        .into_iter()
        .map(|label| {
            summarize_switches(
                label,
                reports.iter().filter(|r| r.label == label).flat_map(|r| r.switches.iter()),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_basic() {
        let s = Stats::of(&[33.3]).unwrap();
        assert_eq!((s.mean, s.median, s.p95), (33.3, 33.3, 33.3));
        let s = Stats::of(&(1..=20).map(f64::from).collect::<Vec<_>>()).unwrap();
        assert_eq!(s.median, 10.5);
        assert_eq!(s.p95, 19.0);
        assert!(Stats::of(&[]).is_none());
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(latency_summary(&[]), Err(SimError::Empty)));
    }
}
