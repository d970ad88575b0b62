//! Binary container for streamed descriptors.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 4    | magic `"LBD1"`                         |
//! | 4      | 2    | version (1)                            |
//! | 6      | 1    | payload kind: 1 binary, 0 real         |
//! | 7      | 1    | reserved (0)                           |
//! | 8      | 8    | pattern id (FNV-1a of the pattern JSON)|
//! | 16     | 4    | patch side                             |
//! | 20     | 4    | `M`, measurements per descriptor       |
//! | 24     | 4    | record count                           |
//!
//! Each record is the keypoint `x: u32`, `y: u32` (the patch center,
//! i.e. top-left corner plus `side / 2`) followed by the payload. Binary
//! payloads pack `M` bits into `ceil(M / 8)` bytes: bit `j` is bit `j % 8`
//! (LSB first) of byte `j / 8`, set for `+1`. Real payloads are `M` `f64`.

use crate::error::{LbdError, Result};
use crate::pipeline::{PatchRecord, Position};
use crate::sensing::{Descriptor, Payload, Pattern};
use std::io::{Read, Write};

pub const MAGIC: &[u8; 4] = b"LBD1";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 28;

#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorFile {
    pub pattern_id: u64,
    pub patch_side: usize,
    pub m: usize,
    pub binary: bool,
    pub records: Vec<PatchRecord>,
}

fn u32_field(v: usize, what: &str) -> Result<[u8; 4]> {
    u32::try_from(v)
        .map(u32::to_le_bytes)
        .map_err(|_| LbdError::Parameter(format!("{what} {v} does not fit in 32 bits")))
}

pub fn pack_bits(signs: &[i8]) -> Vec<u8> {
    let mut out = vec![0u8; signs.len().div_ceil(8)];
    for (j, &s) in signs.iter().enumerate() {
        if s > 0 {
            out[j / 8] |= 1 << (j % 8);
        }
    }
    out
}

pub fn unpack_bits(bytes: &[u8], m: usize) -> Vec<i8> {
    (0..m)
        .map(|j| if bytes[j / 8] >> (j % 8) & 1 == 1 { 1 } else { -1 })
        .collect()
}

impl DescriptorFile {
    /// Wraps records produced with `pattern`; every descriptor must match it
    /// and share one payload kind.
    pub fn new(pattern: &Pattern, records: Vec<PatchRecord>) -> Result<Self> {
        let binary = records.first().is_none_or(|r| r.descriptor.is_binary());
        for r in &records {
            r.descriptor.check_pattern(pattern)?;
            if r.descriptor.is_binary() != binary {
                return Err(LbdError::PayloadType("mixed binary and real payloads".into()));
            }
        }
        Ok(Self {
            pattern_id: pattern.id(),
            patch_side: pattern.patch_side(),
            m: pattern.len(),
            binary,
            records,
        })
    }

    pub fn payload_len(&self) -> usize {
        if self.binary {
            self.m.div_ceil(8)
        } else {
            8 * self.m
        }
    }

    /// Smallest canvas containing every patch.
    pub fn extent(&self) -> (usize, usize) {
        self.records.iter().fold((0, 0), |(w, h), r| {
            (w.max(r.position.x + self.patch_side), h.max(r.position.y + self.patch_side))
        })
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let half = self.patch_side / 2;
        let mut header = Vec::with_capacity(HEADER_LEN);
        header.extend_from_slice(MAGIC);
        header.extend_from_slice(&VERSION.to_le_bytes());
        header.push(u8::from(self.binary));
        header.push(0);
        header.extend_from_slice(&self.pattern_id.to_le_bytes());
        header.extend_from_slice(&u32_field(self.patch_side, "patch side")?);
        header.extend_from_slice(&u32_field(self.m, "M")?);
        header.extend_from_slice(&u32_field(self.records.len(), "record count")?);
        w.write_all(&header)?;

        let mut buf = Vec::with_capacity(8 + self.payload_len());
        for r in &self.records {
            buf.clear();
            buf.extend_from_slice(&u32_field(r.position.x + half, "keypoint x")?);
            buf.extend_from_slice(&u32_field(r.position.y + half, "keypoint y")?);
            match r.descriptor.payload() {
                Payload::Binary(v) if self.binary && v.len() == self.m => buf.extend(pack_bits(v)),
                Payload::Real(v) if !self.binary && v.len() == self.m => {
                    v.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()))
                }
                _ => return Err(LbdError::PayloadType("record does not match the header".into())),
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header).map_err(truncated)?;
        if &header[0..4] != MAGIC {
            return Err(LbdError::Format("bad magic, not a descriptor file".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != VERSION {
            return Err(LbdError::Format(format!("unsupported version {version}")));
        }
        let binary = match header[6] {
            0 => false,
            1 => true,
            k => return Err(LbdError::Format(format!("unknown payload kind {k}"))),
        };
        let le32 = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
        let pattern_id = u64::from_le_bytes(header[8..16].try_into().unwrap());
        let (patch_side, m, count) = (le32(16), le32(20), le32(24));

        let mut file = Self {
            pattern_id,
            patch_side,
            m,
            binary,
            records: Vec::new(),
        };
        let half = patch_side / 2;
        let mut buf = vec![0u8; 8 + file.payload_len()];
        for _ in 0..count {
            r.read_exact(&mut buf).map_err(truncated)?;
            let kx = u32::from_le_bytes(buf[0..4].try_into().unwrap()) as usize;
            let ky = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
            if kx < half || ky < half {
                return Err(LbdError::Format(format!("keypoint ({kx}, {ky}) too close to the origin")));
            }
            let body = &buf[8..];
            let descriptor = if binary {
                Descriptor::binary(unpack_bits(body, m), pattern_id)?
            } else {
                let values = body
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                Descriptor::real(values, pattern_id)
            };
            file.records.push(PatchRecord {
                position: Position::new(kx - half, ky - half),
                descriptor,
            });
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(LbdError::Format("trailing bytes after the last record".into()));
        }
        Ok(file)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    /// Fails unless the file was written for `pattern`.
    pub fn check_pattern(&self, pattern: &Pattern) -> Result<()> {
        let id = pattern.id();
        if id != self.pattern_id {
            return Err(LbdError::PatternMismatch {
                descriptor: self.pattern_id,
                pattern: id,
            });
        }
        if self.patch_side != pattern.patch_side() || self.m != pattern.len() {
            return Err(LbdError::Format("header dimensions disagree with the pattern".into()));
        }
        Ok(())
    }
}

fn truncated(e: std::io::Error) -> LbdError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        LbdError::Format("truncated descriptor file".into())
    } else {
        e.into()
    }
}
