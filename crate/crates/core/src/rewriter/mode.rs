use serde::{Deserialize, Serialize};

/// Serialized size of a [`SuperblockMode`] record.
pub const MODE_RECORD_LEN: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum PartitionMode {
    None = 0,
    Horz = 1,
    Vert = 2,
    Split = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum RefFrames {
    BaseLayerOnly = 0,
    Last = 1,
    Golden = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum InterMode {
    ZeroMv = 0,
    NearestMv = 1,
    NearMv = 2,
    NewMv = 3,
    GlobalMv = 4,
}

/// Syntax elements written for every superblock of a skipped tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuperblockMode {
    pub partition: PartitionMode,
    pub skip: bool,
    pub is_inter: bool,
    pub ref_frames: RefFrames,
    pub inter_mode: InterMode,
    pub use_obmc: bool,
}

impl SuperblockMode {
    /// The only mode a skipped tile may carry: no split, no residual,
    /// inter-predicted from the co-located base layer with a zero vector and
    /// plain translation.
    pub const SKIPPED: SuperblockMode = SuperblockMode {
        partition: PartitionMode::None,
        skip: true,
        is_inter: true,
        ref_frames: RefFrames::BaseLayerOnly,
        inter_mode: InterMode::ZeroMv,
        use_obmc: false,
    };

    pub fn is_canonical_skip(&self) -> bool {
        *self == Self::SKIPPED
    }

    pub fn to_bytes(&self) -> [u8; MODE_RECORD_LEN] {
        [
            self.partition as u8,
            u8::from(self.skip),
            u8::from(self.is_inter),
            self.ref_frames as u8,
            self.inter_mode as u8,
            u8::from(self.use_obmc),
        ]
    }

    /// Decodes a record; on failure returns the index of the offending byte.
    pub fn from_bytes(b: &[u8; MODE_RECORD_LEN]) -> Result<Self, usize> {
        let flag = |i: usize| match b[i] {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(i),
        };
        let partition = match b[0] {
            0 => PartitionMode::None,
            1 => PartitionMode::Horz,
            2 => PartitionMode::Vert,
            3 => PartitionMode::Split,
            _ => return Err(0),
        };
        let ref_frames = match b[3] {
            0 => RefFrames::BaseLayerOnly,
            1 => RefFrames::Last,
            2 => RefFrames::Golden,
            _ => return Err(3),
        };
        let inter_mode = match b[4] {
            0 => InterMode::ZeroMv,
            1 => InterMode::NearestMv,
            2 => InterMode::NearMv,
            3 => InterMode::NewMv,
            4 => InterMode::GlobalMv,
            _ => return Err(4),
        };
        Ok(SuperblockMode {
            partition,
            skip: flag(1)?,
            is_inter: flag(2)?,
            ref_frames,
            inter_mode,
            use_obmc: flag(5)?,
        })
    }
}
