//! `svb`: generate, encode, rewrite, decode and validate layered tiled
//! streams, select viewport tiles, and simulate viewport-switch latency.

mod manifest;
mod tables;

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use manifest::{manifest_path, write_atomic, RunManifest};
use svb::codec::{encode_svc, encode_track, generate_content, psnr, Decoder, Resolution, VideoSource};
use svb::container::{parse, serialize, validate_structure, Bitstream};
use svb::geometry::{
    read_trace, select_tiles, tile_coverage_oracle, Projection, ProjectionKind, TileSet, TracePoint, Viewport,
};
use svb::rewriter::rewrite_viewport_frame;
use svb::simulator::{
    bitrate_report, latency_summary, run_session, NetworkModel, Scheme, SessionOptions, StreamSet,
};
use svb::{FrameRate, SequenceConfig};

#[derive(Debug, Parser)]
#[command(name = "svb", version, about = "Layered tiled 360-degree video streams: encode, rewrite, simulate")]
struct Cli {
    /// Seed for every random choice (content generation).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output file, or directory for `simulate` and `report`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic 8-bit luma source (headerless, frames back to back).
    Generate {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 30)]
        frames: usize,
    },
    /// Encode a source into a two-layer stream or a single-layer track.
    Encode {
        #[command(flatten)]
        seq: SeqArgs,
        /// Raw source written by `generate`; regenerated from --seed when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Frames to generate when no --input is given.
        #[arg(long, default_value_t = 30)]
        frames: usize,
        #[arg(long, value_enum, default_value_t = Schema::Svc)]
        schema: Schema,
        /// GOP length in frames (defaults to --gop-size of the sequence).
        #[arg(long)]
        gop: Option<u16>,
        /// Track resolution (`--schema track` only).
        #[arg(long, value_enum, default_value_t = ResArg::Full)]
        resolution: ResArg,
    },
    /// Keep the enhanced tiles of one viewport and skip the rest.
    #[command(group(clap::ArgGroup::new("pose").required(true).multiple(false)))]
    Rewrite {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        view: ViewArgs,
        /// Last frame to emit; every frame from 0 is rewritten so the output decodes.
        #[arg(long)]
        frame: Option<u32>,
    },
    /// Decode to raw 8-bit luma at enhanced resolution.
    Decode {
        #[arg(long)]
        input: PathBuf,
        /// Enhanced tiles received: comma list, `all` or `none`.
        #[arg(long, default_value = "all")]
        tiles: String,
        /// Decode a single frame.
        #[arg(long)]
        frame: Option<u32>,
        /// Raw source to report PSNR against.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Check every structural rule; exit 0 iff the stream is clean.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Print the tiles a viewport needs.
    SelectTiles {
        #[command(flatten)]
        seq: SeqArgs,
        /// yaw,pitch,h_fov,v_fov in degrees.
        #[arg(long, allow_hyphen_values = true)]
        viewport: String,
        #[arg(long, value_enum, default_value_t = ProjArg::Erp)]
        projection: ProjArg,
        /// Angular sampling step, degrees.
        #[arg(long, default_value_t = 0.25)]
        step_deg: f64,
        /// Also run the brute-force per-pixel reference and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// Simulate viewport switches for one or more schemes.
    Simulate {
        #[command(flatten)]
        seq: SeqArgs,
        /// `svc`, `multitrack:LONG,SHORT` or `multitrack:LONG,SHORT,LOW`; repeatable.
        #[arg(long = "scheme", default_value = "svc")]
        schemes: Vec<String>,
        /// Viewport trace, JSON lines.
        #[arg(long)]
        trace: PathBuf,
        /// Network file of key=value lines (uplink_ms, downlink_ms, bandwidth_bytes_per_s).
        #[arg(long)]
        net: Option<PathBuf>,
        /// Uplink delay, ms (overrides --net).
        #[arg(long)]
        uplink_ms: Option<f64>,
        /// Downlink delay, ms (overrides --net).
        #[arg(long)]
        downlink_ms: Option<f64>,
        /// Link bandwidth, bytes per second (overrides --net).
        #[arg(long)]
        bandwidth: Option<f64>,
        /// Minimum source frames; rounded up to whole GOPs of every stream.
        #[arg(long, default_value_t = 30)]
        frames: usize,
        #[arg(long, value_enum, default_value_t = ProjArg::Erp)]
        projection: ProjArg,
        #[arg(long, default_value_t = 0.25)]
        step_deg: f64,
        /// Simulated time after the last trace event, ms.
        #[arg(long)]
        tail_ms: Option<f64>,
    },
    /// Merge switch and bitrate CSVs from `simulate` runs into one summary.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::Encode { .. } => "encode",
            Command::Rewrite { .. } => "rewrite",
            Command::Decode { .. } => "decode",
            Command::Validate { .. } => "validate",
            Command::SelectTiles { .. } => "select-tiles",
            Command::Simulate { .. } => "simulate",
            Command::Report { .. } => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Schema {
    Svc,
    Track,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ResArg {
    Full,
    Base,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ProjArg {
    Erp,
    Cubemap,
}

impl From<ProjArg> for ProjectionKind {
    fn from(p: ProjArg) -> Self {
        match p {
            ProjArg::Erp => ProjectionKind::Erp,
            ProjArg::Cubemap => ProjectionKind::Cubemap,
        }
    }
}

/// Sequence parameters.
#[derive(Debug, Clone, Args, Serialize)]
struct SeqArgs {
    /// Enhanced-layer width, pixels.
    #[arg(long, default_value_t = 768)]
    width: u16,
    /// Enhanced-layer height, pixels.
    #[arg(long, default_value_t = 384)]
    height: u16,
    /// Base-layer downscale factor.
    #[arg(long, default_value_t = 2)]
    scale: u8,
    #[arg(long, default_value_t = 6)]
    tile_cols: u8,
    #[arg(long, default_value_t = 4)]
    tile_rows: u8,
    /// Frame rate, `30` or `30000/1001`.
    #[arg(long, default_value = "30")]
    fps: String,
    /// GOP length of the two-layer stream, frames.
    #[arg(long, default_value_t = 30)]
    gop_size: u16,
    /// Base frames an enhanced frame may choose its reference from.
    #[arg(long, default_value_t = 1)]
    ref_window: u8,
    /// Split the base layer on the tile grid instead of one tile.
    #[arg(long)]
    tiled_base: bool,
}

impl SeqArgs {
    fn config(&self) -> Result<SequenceConfig, CliError> {
        let fps = parse_fps(&self.fps).map_err(|e| CliError::Usage(format!("--fps: {e}")))?;
        let config = SequenceConfig {
            width: self.width,
            height: self.height,
            scale_factor: self.scale,
            tile_cols: self.tile_cols,
            tile_rows: self.tile_rows,
            fps,
            gop_size: self.gop_size,
            base_single_tile: !self.tiled_base,
            ref_window: self.ref_window,
            single_layer: false,
        };
        config.validate().map_err(|e| CliError::Usage(format!("sequence flags: {e}")))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(skip)]
struct ViewArgs {
    /// yaw,pitch,h_fov,v_fov in degrees.
    #[arg(long, allow_hyphen_values = true, group = "pose")]
    viewport: Option<String>,
    /// Viewport trace; frame k uses the latest pose at or before k frame periods.
    #[arg(long, group = "pose")]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProjArg::Erp)]
    projection: ProjArg,
    #[arg(long, default_value_t = 0.25)]
    step_deg: f64,
}

fn parse_fps(s: &str) -> Result<FrameRate> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse()?, d.trim().parse()?),
        None => (s.trim().parse()?, 1),
    };
    if num == 0 || den == 0 {
        bail!("frame rate {s} must be positive");
    }
    Ok(FrameRate::new(num, den))
}

fn parse_viewport(s: &str) -> Result<Viewport, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--viewport {s:?}: {e}")))?;
    let [yaw, pitch, h, v] = parts[..] else {
        return Err(CliError::Usage(format!("--viewport {s:?}: expected yaw,pitch,h_fov,v_fov")));
    };
    Viewport::from_degrees(yaw, pitch, h, v).map_err(|e| CliError::Usage(format!("--viewport: {e}")))
}

fn parse_tiles(s: &str, count: usize) -> Result<TileSet, CliError> {
    match s.trim() {
        "all" => Ok(TileSet::full(count)),
        "none" | "" => Ok(TileSet::new()),
        list => {
            let idx: Vec<usize> = list
                .split(',')
                .map(|p| p.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Usage(format!("--tiles {list:?}: {e}")))?;
            TileSet::from_indices(idx, count).map_err(|e| CliError::Usage(format!("--tiles: {e}")))
        }
    }
}

fn parse_net(text: &str) -> Result<NetworkModel> {
    let mut net = NetworkModel::IDEAL;
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value", i + 1))?;
        let value = value.trim();
        match key.trim() {
            "uplink_ms" => net.uplink_delay_ms = value.parse()?,
            "downlink_ms" => net.downlink_delay_ms = value.parse()?,
            "bandwidth_bytes_per_s" => {
                net.bandwidth_bytes_per_s = match value {
                    "" | "inf" | "unlimited" => None,
                    v => Some(v.parse()?),
                }
            }
            other => bail!("line {}: unknown key {other:?}", i + 1),
        }
    }
    Ok(net)
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

macro_rules! data_err {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.into())
            }
        }
    )*};
}

data_err!(
    std::io::Error,
    svb::codec::CodecError,
    svb::container::ContainerError,
    svb::container::ParseError,
    svb::geometry::GeometryError,
    svb::rewriter::RewriteError,
    svb::simulator::SimError,
    serde_json::Error,
    csv::Error
);

fn require_out(out: &Option<PathBuf>, cmd: &str) -> Result<PathBuf, CliError> {
    out.clone()
        .ok_or_else(|| CliError::Usage(format!("--out is required for {cmd}")))
}

fn read_stream(path: &Path) -> Result<Bitstream, CliError> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse(&bytes).with_context(|| format!("parsing {}", path.display()))?)
}

fn load_trace(path: &Path) -> Result<Vec<TracePoint>, CliError> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let trace = read_trace(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    if trace.is_empty() {
        return Err(CliError::Data(anyhow!("{} holds no poses", path.display())));
    }
    Ok(trace)
}

fn finish(mut manifest: RunManifest, outputs: &[PathBuf], out: &Path) -> Result<(), CliError> {
    for o in outputs {
        manifest.output(o)?;
    }
    manifest.write(&manifest_path(out))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Data(e.into()))?;
    }
    let seed = cli.seed;
    match &cli.command {
        Command::Generate { seq, frames } => {
            let out = require_out(&cli.out, "generate")?;
            let config = seq.config()?;
            let src = generate_content(seed, &config, *frames)?;
            write_atomic(&out, &src.raw_bytes())?;
            let m = RunManifest::new(
                "generate",
                json!({ "seed": seed, "frames": frames, "sequence": config }),
            );
            finish(m, &[out.clone()], &out)?;
            println!("{} frames {}x{} -> {}", frames, config.width, config.height, out.display());
        }
        Command::Encode {
            seq,
            input,
            frames,
            schema,
            gop,
            resolution,
        } => {
            let out = require_out(&cli.out, "encode")?;
            let mut config = seq.config()?;
            if let (Schema::Svc, Some(g)) = (schema, gop) {
                config.gop_size = *g;
                config.validate().map_err(|e| CliError::Usage(format!("--gop: {e}")))?;
            }
            let mut m = RunManifest::new(
                "encode",
                json!({
                    "seed": seed, "frames": frames, "schema": schema, "gop": gop,
                    "resolution": resolution, "sequence": config,
                }),
            );
            let src = match input {
                Some(path) => {
                    m.input(path)?;
                    let raw = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                    VideoSource::from_raw(config, seed, &raw)?
                }
                None => generate_content(seed, &config, *frames)?,
            };
            let bs = match schema {
                Schema::Svc => encode_svc(&src)?,
                Schema::Track => {
                    let res = match resolution {
                        ResArg::Full => Resolution::Full,
                        ResArg::Base => Resolution::Base,
                    };
                    encode_track(&src, gop.unwrap_or(config.gop_size), res)?
                }
            };
            let bytes = serialize(&bs)?;
            write_atomic(&out, &bytes)?;
            finish(m, &[out.clone()], &out)?;
            println!("{} frames, {} bytes -> {}", bs.frame_count(), bytes.len(), out.display());
        }
        Command::Rewrite { input, view, frame } => {
            let out = require_out(&cli.out, "rewrite")?;
            let bs = read_stream(input)?;
            let mut m = RunManifest::new("rewrite", json!({ "view": view, "frame": frame }));
            m.input(input)?;
            let projection = Projection::for_config(view.projection.into(), &bs.config)?;
            let step = view.step_deg.to_radians();
            let trace = match &view.trace {
                Some(path) => {
                    m.input(path)?;
                    Some(load_trace(path)?)
                }
                None => None,
            };
            let fixed = view.viewport.as_deref().map(parse_viewport).transpose()?;
            let frames = bs.frames();
            let last = match frame {
                Some(k) if (*k as usize) < frames.len() => *k as usize,
                Some(k) => return Err(CliError::Data(anyhow!("frame {k} not in a {}-frame stream", frames.len()))),
                None => frames.len().saturating_sub(1),
            };
            let mut rewritten = Bitstream::new(bs.config);
            let mut last_tiles = TileSet::new();
            for (k, f) in frames.iter().enumerate().take(last + 1) {
                let vp = match (&fixed, &trace) {
                    (Some(v), _) => *v,
                    (None, Some(t)) => {
                        let now = bs.config.fps.tick_ms(k as u64);
                        let p = t.iter().rev().find(|p| p.t_ms <= now + 1e-9).unwrap_or(&t[0]);
                        p.viewport()?
                    }
                    (None, None) => unreachable!("clap requires one of --viewport or --trace"),
                };
                let tiles = select_tiles(&vp, &projection, &bs.config, step)?;
                rewritten
                    .units
                    .extend(rewrite_viewport_frame(&bs.config, &bs.units[f.start..f.end], &tiles)?);
                last_tiles = tiles;
            }
            let bytes = serialize(&rewritten)?;
            write_atomic(&out, &bytes)?;
            finish(m, &[out.clone()], &out)?;
            println!(
                "{} frames, {} bytes, tiles of frame {last}: {last_tiles} -> {}",
                last + 1,
                bytes.len(),
                out.display()
            );
        }
        Command::Decode {
            input,
            tiles,
            frame,
            reference,
        } => {
            let out = require_out(&cli.out, "decode")?;
            let bs = read_stream(input)?;
            let received = parse_tiles(tiles, bs.config.tile_count())?;
            let mut m = RunManifest::new("decode", json!({ "tiles": tiles, "frame": frame }));
            m.input(input)?;
            let dec = Decoder::new(&bs)?;
            let indices: Vec<u32> = match frame {
                Some(k) => vec![*k],
                None => dec.frame_indices().collect(),
            };
            let decoded = indices
                .par_iter()
                .map(|&i| dec.decode_frame(i, &received))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(path) = reference {
                m.input(path)?;
                let raw = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                let full = SequenceConfig {
                    single_layer: false,
                    ..bs.config
                };
                let src = VideoSource::from_raw(
                    SequenceConfig {
                        width: decoded[0].width as u16,
                        height: decoded[0].height as u16,
                        ..full
                    },
                    seed,
                    &raw,
                )?;
                for (i, f) in indices.iter().zip(&decoded) {
                    let orig = src
                        .frames
                        .get(*i as usize)
                        .ok_or_else(|| anyhow!("reference has no frame {i}"))?;
                    println!("frame {i} psnr {:.3} dB", psnr(orig, f)?);
                }
            }
            let raw: Vec<u8> = decoded.iter().flat_map(|f| f.samples.iter().copied()).collect();
            write_atomic(&out, &raw)?;
            finish(m, &[out.clone()], &out)?;
            println!(
                "{} frames {}x{} -> {}",
                decoded.len(),
                decoded[0].width,
                decoded[0].height,
                out.display()
            );
        }
        Command::Validate { input } => {
            let bs = read_stream(input)?;
            let report = validate_structure(&bs);
            if let Some(out) = &cli.out {
                let mut m = RunManifest::new("validate", json!({}));
                m.input(input)?;
                write_atomic(out, &serde_json::to_vec_pretty(&report)?)?;
                finish(m, &[out.clone()], out)?;
            }
            if report.is_clean() {
                println!("clean: {} frames", bs.frame_count());
            } else {
                for v in &report.violations {
                    match v.frame_index {
                        Some(i) => println!("frame {i}: {} {}", v.rule, v.detail),
                        None => println!("{} {}", v.rule, v.detail),
                    }
                }
                return Err(CliError::Data(anyhow!("{} violations", report.violations.len())));
            }
        }
        Command::SelectTiles {
            seq,
            viewport,
            projection,
            step_deg,
            oracle,
        } => {
            let config = seq.config()?;
            let vp = parse_viewport(viewport)?;
            let proj = Projection::for_config((*projection).into(), &config)?;
            let tiles = select_tiles(&vp, &proj, &config, step_deg.to_radians())?;
            println!("{tiles}");
            let mut result = json!({ "tiles": tiles, "columns": tiles.columns(config.tile_cols) });
            if *oracle {
                let reference = tile_coverage_oracle(&vp, &proj, &config)?;
                println!("oracle {reference} ({})", if reference == tiles { "equal" } else { "differs" });
                result["oracle"] = json!(reference);
            }
            if let Some(out) = &cli.out {
                let m = RunManifest::new(
                    "select-tiles",
                    json!({ "viewport": viewport, "projection": projection, "step_deg": step_deg, "sequence": config }),
                );
                write_atomic(out, &serde_json::to_vec_pretty(&result)?)?;
                finish(m, &[out.clone()], out)?;
            }
        }
        Command::Simulate {
            seq,
            schemes,
            trace,
            net,
            uplink_ms,
            downlink_ms,
            bandwidth,
            frames,
            projection,
            step_deg,
            tail_ms,
        } => {
            let config = seq.config()?;
            let schemes: Vec<Scheme> = schemes
                .iter()
                .map(|s| s.parse().map_err(|e| CliError::Usage(format!("--scheme: {e}"))))
                .collect::<Result<_, _>>()?;
            let mut m = RunManifest::new("simulate", serde_json::Value::Null);
            let poses = load_trace(trace)?;
            m.input(trace)?;
            let mut network = match net {
                Some(path) => {
                    m.input(path)?;
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    parse_net(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                None => NetworkModel::IDEAL,
            };
            if let Some(v) = uplink_ms {
                network.uplink_delay_ms = *v;
            }
            if let Some(v) = downlink_ms {
                network.downlink_delay_ms = *v;
            }
            if let Some(v) = bandwidth {
                network.bandwidth_bytes_per_s = Some(*v);
            }
            network.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let options = SessionOptions {
                projection: (*projection).into(),
                step: step_deg.to_radians(),
                tail_ms: *tail_ms,
                record_frames: false,
            };
            m.config = json!({
                "seed": seed, "sequence": config, "schemes": schemes, "network": network,
                "frames": frames, "projection": projection, "step_deg": step_deg, "tail_ms": tail_ms,
            });

            let loop_len = StreamSet::loop_frames(&config, &schemes, *frames);
            let src = generate_content(seed, &config, loop_len)?;
            let streams = StreamSet::encode_for(&src, &schemes)?;
            let reports = schemes
                .par_iter()
                .map(|s| run_session(s, &poses, &network, &streams, &options))
                .collect::<Result<Vec<_>, _>>()?;
            let summary = latency_summary(&reports)?;
            let tables: Vec<_> = reports.iter().map(bitrate_report).collect();
            tables::print_summary(&summary, &tables);

            if let Some(dir) = &cli.out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let switches = dir.join("switches.csv");
                let bitrate = dir.join("bitrate.csv");
                let summary_path = dir.join("summary.json");
                write_atomic(&switches, &tables::switches_csv(&reports)?)?;
                write_atomic(&bitrate, &tables::bitrate_csv(&tables)?)?;
                write_atomic(
                    &summary_path,
                    &serde_json::to_vec_pretty(&json!({ "latency": summary, "bitrate": tables::totals(&tables) }))?,
                )?;
                finish(m, &[switches, bitrate, summary_path], dir)?;
            }
        }
        Command::Report { inputs } => {
            let mut m = RunManifest::new("report", json!({ "inputs": inputs }));
            let mut merged = tables::Merged::default();
            for path in inputs {
                m.input(path)?;
                let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                merged
                    .add(&text)
                    .with_context(|| format!("reading {}", path.display()))?;
            }
            let report = merged.summarize()?;
            tables::print_report(&report);
            if let Some(dir) = &cli.out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let csv_path = dir.join("report.csv");
                let json_path = dir.join("report.json");
                write_atomic(&csv_path, &tables::report_csv(&report)?)?;
                write_atomic(&json_path, &serde_json::to_vec_pretty(&report)?)?;
                finish(m, &[csv_path, json_path], dir)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let sub = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            let mut cmd = Cli::command();
            cmd.build();
            if let Some(c) = cmd.find_subcommand_mut(sub) {
                eprintln!("{}", c.render_usage());
            }
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            let _ = std::io::stdout().flush();
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
