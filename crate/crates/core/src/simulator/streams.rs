use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{Scheme, SimError};
use crate::codec::{encode_svc, encode_track, Resolution, VideoSource};
use crate::config::SequenceConfig;
use crate::container::Bitstream;

/// Encoded streams a session may draw from. The SVC stream and every track
/// are encoded from the same source; sessions loop over them.
#[derive(Debug, Clone)]
pub struct StreamSet {
    /// Configuration of the two-layer stream; tracks derive from it.
    pub config: SequenceConfig,
    pub svc: Option<Bitstream>,
    pub tracks: BTreeMap<(u16, Resolution), Bitstream>,
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

impl StreamSet {
    pub fn new(config: SequenceConfig) -> Self {
        Self {
            config,
            svc: None,
            tracks: BTreeMap::new(),
        }
    }

    /// Streams needed by `schemes`.
    pub fn required(schemes: &[Scheme]) -> (bool, Vec<(u16, Resolution)>) {
        let mut svc = false;
        let mut tracks = Vec::new();
        for scheme in schemes {
            match *scheme {
                Scheme::Svc => svc = true,
                Scheme::Multitrack {
                    long_gop,
                    short_gop,
                    low_gop,
                } => {
                    tracks.push((long_gop, Resolution::Full));
                    tracks.push((low_gop.unwrap_or(long_gop), Resolution::Base));
                    if short_gop > 0 {
                        tracks.push((short_gop, Resolution::Full));
                    }
                }
            }
        }
        tracks.sort();
        tracks.dedup();
        (svc, tracks)
    }

    /// Shortest loop length, at least `min_frames`, that holds a whole
    /// number of GOPs of every stream the schemes use.
    pub fn loop_frames(config: &SequenceConfig, schemes: &[Scheme], min_frames: usize) -> usize {
        let (svc, tracks) = Self::required(schemes);
        let mut period = 1;
        if svc {
            period = lcm(period, usize::from(config.gop_size));
        }
        for (gop, _) in tracks {
            period = lcm(period, usize::from(gop));
        }
        min_frames.max(1).div_ceil(period) * period
    }

    /// Encodes every stream the schemes need from `source`.
    pub fn encode_for(source: &VideoSource, schemes: &[Scheme]) -> Result<Self, SimError> {
        for s in schemes {
            s.validate()?;
        }
        let (svc, tracks) = Self::required(schemes);
        let mut set = Self::new(source.config);
        if svc {
            set.svc = Some(encode_svc(source)?);
        }
        let encoded: Vec<((u16, Resolution), Bitstream)> = tracks
            .into_par_iter()
            .map(|(gop, res)| Ok(((gop, res), encode_track(source, gop, res)?)))
            .collect::<Result<_, SimError>>()?;
        set.tracks.extend(encoded);
        Ok(set)
    }

    pub fn svc(&self) -> Result<&Bitstream, SimError> {
        self.svc.as_ref().ok_or_else(|| SimError::NoStream("svc".into()))
    }

    pub fn track(&self, gop: u16, resolution: Resolution) -> Result<&Bitstream, SimError> {
        self.tracks
            .get(&(gop, resolution))
            .ok_or_else(|| SimError::NoStream(format!("{resolution:?} track with gop {gop}").to_lowercase()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_length_covers_all_gops() {
        let config = SequenceConfig::default();
        let schemes = [Scheme::Svc, Scheme::multitrack(30, 5), Scheme::multitrack(10, 3)];
        assert_eq!(StreamSet::loop_frames(&config, &schemes, 1), 30);
        assert_eq!(StreamSet::loop_frames(&config, &[Scheme::multitrack(7, 0)], 30), 35);
    }

    #[test]
    fn missing_stream() {
        let set = StreamSet::new(SequenceConfig::default());
        assert!(matches!(set.svc(), Err(SimError::NoStream(_))));
        assert!(matches!(set.track(30, Resolution::Full), Err(SimError::NoStream(_))));
    }
}
