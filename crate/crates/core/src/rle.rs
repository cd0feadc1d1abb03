//! Zero-run length coding for residual payloads.
//!
//! A stream is a sequence of records:
//!
//! ```text
//! run_type u8 | length u32 LE | literal bytes (run_type = 1 only)
//! ```
//!
//! `run_type` 0 expands to `length` zero bytes, 1 copies `length` literal
//! bytes. Zero runs shorter than [`MIN_ZERO_RUN`] stay inside literals, since
//! a separate record would cost more than it saves.

use byteorder::{ByteOrder, LittleEndian};
use thiserror::Error;

pub const ZERO_RUN: u8 = 0;
pub const LITERAL: u8 = 1;
pub const RECORD_HEADER_LEN: usize = 5;
pub const MIN_ZERO_RUN: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RleError {
    #[error("corrupt rle stream at offset {offset}: {reason}")]
    Corrupt { offset: usize, reason: &'static str },
    #[error("rle stream expands past {limit} bytes")]
    TooLong { limit: usize },
}

fn push_record(out: &mut Vec<u8>, run_type: u8, len: usize) {
    let mut header = [run_type, 0, 0, 0, 0];
    LittleEndian::write_u32(&mut header[1..], len as u32);
    out.extend_from_slice(&header);
}

fn push_literal(out: &mut Vec<u8>, bytes: &[u8]) {
    if bytes.is_empty() {
        return;
    }
    for chunk in bytes.chunks(u32::MAX as usize) {
        push_record(out, LITERAL, chunk.len());
        out.extend_from_slice(chunk);
    }
}

pub fn compress(input: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(input.len() / 4 + RECORD_HEADER_LEN);
    let mut literal_start = 0;
    let mut i = 0;
    while i < input.len() {
        if input[i] != 0 {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < input.len() && input[i] == 0 {
            i += 1;
        }
        let run = i - run_start;
        if run >= MIN_ZERO_RUN {
            push_literal(&mut out, &input[literal_start..run_start]);
            let mut remaining = run;
            while remaining > 0 {
                let n = remaining.min(u32::MAX as usize);
                push_record(&mut out, ZERO_RUN, n);
                remaining -= n;
            }
            literal_start = i;
        }
    }
    push_literal(&mut out, &input[literal_start..]);
    out
}

/// Expands a record stream, refusing to produce more than `limit` bytes.
pub fn decompress_bounded(input: &[u8], limit: usize) -> Result<Vec<u8>, RleError> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < input.len() {
        if input.len() - pos < RECORD_HEADER_LEN {
            return Err(RleError::Corrupt {
                offset: pos,
                reason: "truncated record header",
            });
        }
        let run_type = input[pos];
        let len = LittleEndian::read_u32(&input[pos + 1..pos + 5]) as usize;
        if out.len().saturating_add(len) > limit {
            return Err(RleError::TooLong { limit });
        }
        let body = pos + RECORD_HEADER_LEN;
        match run_type {
            ZERO_RUN => {
                out.resize(out.len() + len, 0);
                pos = body;
            }
            LITERAL => {
                if input.len() - body < len {
                    return Err(RleError::Corrupt {
                        offset: pos,
                        reason: "literal runs past end of input",
                    });
                }
                out.extend_from_slice(&input[body..body + len]);
                pos = body + len;
            }
            _ => {
                return Err(RleError::Corrupt {
                    offset: pos,
                    reason: "unknown run type",
                })
            }
        }
    }
    Ok(out)
}

/// Expands a record stream. Output is capped at 1 GiB.
pub fn decompress(input: &[u8]) -> Result<Vec<u8>, RleError> {
    decompress_bounded(input, 1 << 30)
}

/// Expands a record stream that must produce exactly `expected` bytes.
pub fn decompress_exact(input: &[u8], expected: usize) -> Result<Vec<u8>, RleError> {
    let out = decompress_bounded(input, expected)?;
    if out.len() != expected {
        return Err(RleError::Corrupt {
            offset: input.len(),
            reason: "stream shorter than expected",
        });
    }
    Ok(out)
}
