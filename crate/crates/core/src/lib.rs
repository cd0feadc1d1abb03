//! Scalable viewport bitstream toolkit for tiled 360-degree video.
//!
//! A two-layer stream (low-resolution base, tiled high-resolution enhanced
//! layer predicted only from the base) lets a server build each client's
//! frame by dropping unneeded enhanced tiles, with no GOP-bound wait when
//! the viewport moves. The crate holds the container format, a mock codec,
//! viewport geometry, the rewriter and a session simulator that compares
//! switch latency and transported bytes against multi-track streaming.

pub mod codec;
pub mod config;
pub mod container;
pub mod geometry;
pub mod rewriter;
pub mod rle;
pub mod simulator;

pub use config::{FrameRate, SequenceConfig};
