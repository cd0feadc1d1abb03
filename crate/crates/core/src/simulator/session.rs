use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{NetworkModel, Scheme, SimError, StreamSet};
use crate::codec::Resolution;
use crate::config::FrameRate;
use crate::container::{Bitstream, FrameType, Layer, Unit};
use crate::geometry::{select_tiles, Projection, ProjectionKind, TileSet, TracePoint, Viewport, DEFAULT_STEP};
use crate::rewriter::skipped_tile_unit_len;

/// Slack for comparing simulated timestamps.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionOptions {
    pub projection: ProjectionKind,
    pub step: f64,
    /// Simulated time after the last trace event; `None` picks enough to
    /// reach two KEY frames of the slowest track.
    pub tail_ms: Option<f64>,
    /// Keep the per-frame log in the report.
    pub record_frames: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            projection: ProjectionKind::Erp,
            step: DEFAULT_STEP,
            tail_ms: None,
            record_frames: true,
        }
    }
}

/// Bytes moved per layer (SVC) or track (multi-track).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelBytes {
    pub base: u64,
    pub enhanced: u64,
    pub low_track: u64,
    pub long_track: u64,
    pub short_track: u64,
}

impl ChannelBytes {
    pub fn total(&self) -> u64 {
        self.base + self.enhanced + self.low_track + self.long_track + self.short_track
    }

    pub fn add(&mut self, o: &ChannelBytes) {
        self.base += o.base;
        self.enhanced += o.enhanced;
        self.low_track += o.low_track;
        self.long_track += o.long_track;
        self.short_track += o.short_track;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    /// Session frame number.
    pub n: u64,
    /// Frame of the (looped) encoded streams.
    pub stream_frame: u32,
    pub compose_ms: f64,
    pub arrival_ms: f64,
    pub display_ms: f64,
    /// Trace index of the pose the server composed with.
    pub pose: usize,
    /// Enhanced tiles shown in high quality.
    pub hq_tiles: TileSet,
    pub bytes: ChannelBytes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchSample {
    /// Trace index of the new pose (1-based position in the trace's switch
    /// list; index 0 is the starting pose).
    pub index: usize,
    pub t_ms: f64,
    /// `None` marks NOT_REACHED within the session.
    pub mtp_ms: Option<f64>,
    pub mthq_ms: Option<f64>,
    /// Display minus arrival of the frame that reached high quality.
    pub alignment_ms: Option<f64>,
    /// The new viewport needed tiles the client was not receiving in high
    /// quality just before the switch took effect.
    pub needed_new_tiles: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub scheme: Scheme,
    pub label: String,
    pub fps: FrameRate,
    pub network: NetworkModel,
    pub frames_simulated: u64,
    pub switches: Vec<SwitchSample>,
    /// Bytes by compose-time second.
    pub seconds: Vec<ChannelBytes>,
    pub totals: ChannelBytes,
    /// Sum of the full enhanced layer over the simulated frames (SVC only);
    /// the denominator of the transported fraction.
    pub full_enhanced_bytes: u64,
    pub frames: Vec<FrameRecord>,
}

/// Unit sizes of one layer of one frame.
#[derive(Debug, Clone, Default)]
struct LayerSizes {
    /// Delimiter, header and (for layers always sent whole) every tile.
    fixed: u64,
    /// Per enhanced tile group; empty for layers sent whole.
    tiles: Vec<u64>,
    key: bool,
}

impl LayerSizes {
    fn total(&self) -> u64 {
        self.fixed + self.tiles.iter().sum::<u64>()
    }

    fn subset(&self, set: &TileSet) -> u64 {
        if set.is_empty() {
            return 0;
        }
        self.fixed + set.iter().map(|t| self.tiles[usize::from(t)]).sum::<u64>()
    }
}

/// Per-frame sizes of `layer`. The delimiter is charged to the layer when
/// `with_delimiter`; tiles are itemized when `itemize`.
fn layer_sizes(bs: &Bitstream, layer: Layer, with_delimiter: bool, itemize: bool) -> Vec<LayerSizes> {
    let tiles = bs.config.tile_count();
    bs.frames()
        .iter()
        .map(|frame| {
            let mut out = LayerSizes {
                tiles: if itemize { vec![0; tiles] } else { Vec::new() },
                ..Default::default()
            };
            let mut current = None;
            for unit in &bs.units[frame.start..frame.end] {
                let len = unit.encoded_len() as u64;
                match unit {
                    Unit::TemporalDelimiter if with_delimiter => out.fixed += len,
                    Unit::FrameHeader(h) => {
                        current = Some(h.layer);
                        if h.layer == layer {
                            out.fixed += len;
                            out.key = h.frame_type == FrameType::Key;
                        }
                    }
                    Unit::TileGroup(tg) if current == Some(layer) => {
                        if itemize {
                            out.tiles[usize::from(tg.tg_start)] += len;
                        } else {
                            out.fixed += len;
                        }
                    }
                    _ => {}
                }
            }
            out
        })
        .collect()
}

struct Selector<'a> {
    projection: Projection,
    config: &'a crate::config::SequenceConfig,
    step: f64,
    cache: HashMap<[u64; 4], TileSet>,
}

impl Selector<'_> {
    fn tiles(&mut self, v: &Viewport) -> Result<TileSet, SimError> {
        let key = [v.yaw.to_bits(), v.pitch.to_bits(), v.h_fov.to_bits(), v.v_fov.to_bits()];
        if let Some(t) = self.cache.get(&key) {
            return Ok(t.clone());
        }
        let t = select_tiles(v, &self.projection, self.config, self.step)?;
        self.cache.insert(key, t.clone());
        Ok(t)
    }
}

enum Plan {
    Svc {
        base: Vec<LayerSizes>,
        enhanced: Vec<LayerSizes>,
        stub: u64,
    },
    Multitrack {
        low: Vec<LayerSizes>,
        long: Vec<LayerSizes>,
        short: Option<Vec<LayerSizes>>,
    },
}

/// Simulates one client following `trace` under `scheme`.
///
/// The first trace entry is the starting pose, known to the server from the
/// beginning; each later entry is a switch. Encoded streams are looped.
pub fn run_session(
    scheme: &Scheme,
    trace: &[TracePoint],
    network: &NetworkModel,
    streams: &StreamSet,
    options: &SessionOptions,
) -> Result<SessionReport, SimError> {
    scheme.validate()?;
    network.validate()?;
    if trace.is_empty() {
        return Err(SimError::TraceEmpty);
    }
    if !(options.step.is_finite() && options.step > 0.0) {
        return Err(SimError::BadArgs(format!("step {}", options.step)));
    }
    let poses: Vec<Viewport> = trace.iter().map(TracePoint::viewport).collect::<Result<_, _>>()?;
    if trace.windows(2).any(|w| w[1].t_ms <= w[0].t_ms) {
        return Err(SimError::BadArgs("trace times must be strictly increasing".into()));
    }

    let config = &streams.config;
    let fps = config.fps;
    let period = fps.period_ms();
    let tile_count = config.tile_count();

    let plan = match *scheme {
        Scheme::Svc => {
            let bs = streams.svc()?;
            Plan::Svc {
                base: layer_sizes(bs, Layer::Base, true, false),
                enhanced: layer_sizes(bs, Layer::Enhanced, false, true),
                stub: skipped_tile_unit_len() as u64,
            }
        }
        Scheme::Multitrack {
            long_gop,
            short_gop,
            low_gop,
        } => {
            let long = streams.track(long_gop, Resolution::Full)?;
            if long.config.tile_count() != tile_count {
                return Err(SimError::BadArgs("track grid differs from the session grid".into()));
            }
            Plan::Multitrack {
                low: layer_sizes(streams.track(low_gop.unwrap_or(long_gop), Resolution::Base)?, Layer::Base, true, false),
                long: layer_sizes(long, Layer::Base, true, true),
                short: if short_gop > 0 {
                    Some(layer_sizes(streams.track(short_gop, Resolution::Full)?, Layer::Base, true, true))
                } else {
                    None
                },
            }
        }
    };

    let slowest_gop = match *scheme {
        Scheme::Svc => config.gop_size,
        Scheme::Multitrack {
            long_gop, low_gop, ..
        } => long_gop.max(low_gop.unwrap_or(0)),
    };
    let tail = options
        .tail_ms
        .unwrap_or_else(|| (2.0 * f64::from(slowest_gop) * period).max(1000.0));
    let last = trace.last().unwrap().t_ms;
    let horizon = last + network.uplink_delay_ms + network.downlink_delay_ms + tail;
    let frame_total = fps.ticks(horizon).ceil() as u64 + 1;

    let mut selector = Selector {
        projection: Projection::for_config(options.projection, config)?,
        config,
        step: options.step,
        cache: HashMap::new(),
    };
    let wanted: Vec<TileSet> = poses.iter().map(|v| selector.tiles(v)).collect::<Result<_, _>>()?;

    let mut switches: Vec<SwitchSample> = trace
        .iter()
        .enumerate()
        .skip(1)
        .map(|(index, p)| SwitchSample {
            index,
            t_ms: p.t_ms,
            mtp_ms: None,
            mthq_ms: None,
            alignment_ms: None,
            needed_new_tiles: false,
        })
        .collect();

    let mut pose = 0usize;
    let mut long_set = TileSet::new();
    let mut short_set = TileSet::new();
    let mut prev_hq = TileSet::new();
    let mut link_free = 0.0f64;
    let mut seconds: Vec<ChannelBytes> = Vec::new();
    let mut totals = ChannelBytes::default();
    let mut full_enhanced = 0u64;
    let mut frames = Vec::new();

    for n in 0..frame_total {
        let compose = fps.tick_ms(n);
        let prev_pose = pose;
        while pose + 1 < trace.len() && trace[pose + 1].t_ms + network.uplink_delay_ms <= compose + TIME_EPS {
            pose += 1;
        }
        let want = &wanted[pose];

        let mut bytes = ChannelBytes::default();
        let (hq, stream_frame) = match &plan {
            Plan::Svc { base, enhanced, stub } => {
                let f = (n % base.len() as u64) as usize;
                bytes.base = base[f].total();
                let enh = &enhanced[f];
                let coded: u64 = want.iter().map(|t| enh.tiles[usize::from(t)]).sum();
                bytes.enhanced = enh.fixed + coded + (tile_count - want.len()) as u64 * stub;
                full_enhanced += enh.total();
                (want.clone(), f)
            }
            Plan::Multitrack { low, long, short } => {
                let fl = (n % long.len() as u64) as usize;
                bytes.low_track = low[(n % low.len() as u64) as usize].total();
                long_set = if long[fl].key { want.clone() } else { long_set.intersection(want) };
                bytes.long_track = long[fl].subset(&long_set);
                if let Some(short) = short {
                    let fs = (n % short.len() as u64) as usize;
                    let missing = want.difference(&long_set);
                    short_set = if short[fs].key { missing } else { short_set.intersection(&missing) };
                    bytes.short_track = short[fs].subset(&short_set);
                }
                (long_set.union(&short_set), fl)
            }
        };

        let sent = bytes.total();
        let start = compose.max(link_free);
        let finish = start + network.serialization_ms(sent);
        link_free = finish;
        let arrival = finish + network.downlink_delay_ms;
        let display = fps.tick_ms((fps.ticks(arrival) + TIME_EPS).floor() as u64 + 1);

        if pose != prev_pose {
            // Every switch skipped over in one tick is superseded.
            let sample = &mut switches[pose - 1];
            sample.mtp_ms = Some(display - sample.t_ms);
            sample.needed_new_tiles = !want.is_subset(&prev_hq);
        }
        if pose > 0 {
            let sample = &mut switches[pose - 1];
            if sample.mthq_ms.is_none() && want.is_subset(&hq) {
                sample.mthq_ms = Some(display - sample.t_ms);
                sample.alignment_ms = Some(display - arrival);
            }
        }

        let sec = (compose / 1000.0 + TIME_EPS).floor() as usize;
        if seconds.len() <= sec {
            seconds.resize(sec + 1, ChannelBytes::default());
        }
        seconds[sec].add(&bytes);
        totals.add(&bytes);
        if options.record_frames {
            frames.push(FrameRecord {
                n,
                stream_frame: stream_frame as u32,
                compose_ms: compose,
                arrival_ms: arrival,
                display_ms: display,
                pose,
                hq_tiles: hq.clone(),
                bytes,
            });
        }
        prev_hq = hq;
    }

    Ok(SessionReport {
        scheme: *scheme,
        label: scheme.label(),
        fps,
        network: *network,
        frames_simulated: frame_total,
        switches,
        seconds,
        totals,
        full_enhanced_bytes: full_enhanced,
        frames,
    })
}
