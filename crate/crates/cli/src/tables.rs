//! CSV output of `simulate` and the merge done by `report`.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use svb::simulator::{summarize_switches, BitrateTable, ChannelBytes, LatencySummary, SessionReport, SwitchSample};

#[derive(Debug, Serialize, Deserialize)]
struct SwitchRow {
    label: String,
    index: usize,
    t_ms: f64,
    mtp_ms: Option<f64>,
    mthq_ms: Option<f64>,
    alignment_ms: Option<f64>,
    needed_new_tiles: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct BitrateCsvRow {
    label: String,
    second: usize,
    base: u64,
    enhanced: u64,
    low_track: u64,
    long_track: u64,
    short_track: u64,
    total: u64,
}

pub fn switches_csv(reports: &[SessionReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        for s in &r.switches {
            w.serialize(SwitchRow {
                label: r.label.clone(),
                index: s.index,
                t_ms: s.t_ms,
                mtp_ms: s.mtp_ms,
                mthq_ms: s.mthq_ms,
                alignment_ms: s.alignment_ms,
                needed_new_tiles: s.needed_new_tiles,
            })?;
        }
    }
    Ok(w.into_inner()?)
}

pub fn bitrate_csv(tables: &[BitrateTable]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in tables {
        for row in &t.rows {
            let b = row.bytes;
            w.serialize(BitrateCsvRow {
                label: t.label.clone(),
                second: row.second,
                base: b.base,
                enhanced: b.enhanced,
                low_track: b.low_track,
                long_track: b.long_track,
                short_track: b.short_track,
                total: row.total,
            })?;
        }
    }
    Ok(w.into_inner()?)
}

#[derive(Debug, Serialize)]
pub struct BitrateTotals {
    label: String,
    seconds: usize,
    totals: ChannelBytes,
    total: u64,
    enhanced_fraction: Option<f64>,
}

pub fn totals(tables: &[BitrateTable]) -> Vec<BitrateTotals> {
    tables
        .iter()
        .map(|t| BitrateTotals {
            label: t.label.clone(),
            seconds: t.rows.len(),
            totals: t.totals,
            total: t.total,
            enhanced_fraction: t.enhanced_fraction,
        })
        .collect()
}

fn ms(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.1}"))
}

pub fn print_summary(summary: &[LatencySummary], tables: &[BitrateTable]) {
    println!(
        "{:<22} {:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>14} {:>9}",
        "scheme", "switches", "mthq_mean", "mthq_p95", "mtp_mean", "mthq-align", "not_reach", "bytes/s", "compliant"
    );
    for (s, t) in summary.iter().zip(tables) {
        let per_second = t.total as f64 / t.rows.len().max(1) as f64;
        println!(
            "{:<22} {:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>14.0} {:>9}",
            s.label,
            s.switches,
            ms(s.mthq.map(|m| m.mean)),
            ms(s.mthq.map(|m| m.p95)),
            ms(s.mtp.map(|m| m.mean)),
            ms(s.mean_mthq_minus_alignment_ms),
            s.mthq_not_reached,
            per_second,
            s.compliant
        );
        if let Some(f) = t.enhanced_fraction {
            println!("{:<22} enhanced bytes sent / full enhanced layer = {f:.4}", "");
        }
    }
}

/// Rows of any number of `switches.csv` and `bitrate.csv` files.
#[derive(Debug, Default)]
pub struct Merged {
    switches: BTreeMap<String, Vec<SwitchSample>>,
    seconds: BTreeMap<String, (usize, u64)>,
}

#[derive(Debug, Serialize)]
pub struct ReportRow {
    pub label: String,
    pub switches: usize,
    pub mthq_not_reached: usize,
    pub mthq_mean_ms: Option<f64>,
    pub mthq_median_ms: Option<f64>,
    pub mthq_p95_ms: Option<f64>,
    pub mtp_mean_ms: Option<f64>,
    pub mean_mthq_minus_alignment_ms: Option<f64>,
    pub compliant: Option<bool>,
    pub seconds: usize,
    pub total_bytes: u64,
    pub mean_bytes_per_s: Option<f64>,
}

impl Merged {
    pub fn add(&mut self, data: &[u8]) -> Result<()> {
        let mut r = csv::Reader::from_reader(data);
        let headers = r.headers()?.clone();
        if headers.iter().any(|h| h == "mthq_ms") {
            for row in r.deserialize::<SwitchRow>() {
                let row = row?;
                self.switches.entry(row.label).or_default().push(SwitchSample {
                    index: row.index,
                    t_ms: row.t_ms,
                    mtp_ms: row.mtp_ms,
                    mthq_ms: row.mthq_ms,
                    alignment_ms: row.alignment_ms,
                    needed_new_tiles: row.needed_new_tiles,
                });
            }
        } else if headers.iter().any(|h| h == "second") {
            for row in r.deserialize::<BitrateCsvRow>() {
                let row = row?;
                let entry = self.seconds.entry(row.label).or_default();
                entry.0 += 1;
                entry.1 += row.total;
            }
        } else {
            bail!("neither a switches nor a bitrate CSV (columns: {})", headers.iter().collect::<Vec<_>>().join(","));
        }
        Ok(())
    }

    pub fn summarize(&self) -> Result<Vec<ReportRow>> {
        let mut labels: Vec<&String> = self.switches.keys().chain(self.seconds.keys()).collect();
        labels.sort();
        labels.dedup();
        if labels.is_empty() {
            bail!("no rows in the inputs");
        }
        Ok(labels
            .into_iter()
            .map(|label| {
                let lat = self.switches.get(label).map(|s| summarize_switches(label, s));
                let (seconds, total) = self.seconds.get(label).copied().unwrap_or((0, 0));
                let mthq = lat.as_ref().and_then(|l| l.mthq);
                ReportRow {
                    label: label.clone(),
                    switches: lat.as_ref().map_or(0, |l| l.switches),
                    mthq_not_reached: lat.as_ref().map_or(0, |l| l.mthq_not_reached),
                    mthq_mean_ms: mthq.map(|m| m.mean),
                    mthq_median_ms: mthq.map(|m| m.median),
                    mthq_p95_ms: mthq.map(|m| m.p95),
                    mtp_mean_ms: lat.as_ref().and_then(|l| l.mtp).map(|m| m.mean),
                    mean_mthq_minus_alignment_ms: lat.as_ref().and_then(|l| l.mean_mthq_minus_alignment_ms),
                    compliant: lat.as_ref().map(|l| l.compliant),
                    seconds,
                    total_bytes: total,
                    mean_bytes_per_s: (seconds > 0).then(|| total as f64 / seconds as f64),
                }
            })
            .collect())
    }
}

pub fn print_report(rows: &[ReportRow]) {
    println!(
        "{:<22} {:>8} {:>10} {:>10} {:>10} {:>10} {:>14} {:>9}",
        "scheme", "switches", "mthq_mean", "mthq_med", "mthq_p95", "mthq-align", "bytes/s", "compliant"
    );
    for r in rows {
        println!(
            "{:<22} {:>8} {:>10} {:>10} {:>10} {:>10} {:>14} {:>9}",
            r.label,
            r.switches,
            ms(r.mthq_mean_ms),
            ms(r.mthq_median_ms),
            ms(r.mthq_p95_ms),
            ms(r.mean_mthq_minus_alignment_ms),
            r.mean_bytes_per_s.map_or("-".into(), |b| format!("{b:.0}")),
            r.compliant.map_or("-".into(), |c| c.to_string())
        );
    }
}

pub fn report_csv(rows: &[ReportRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}
