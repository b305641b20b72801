//! The compression ensemble and its container format.
//!
//! A container is
//!
//! ```text
//! "ODC1"  magic (4 bytes)
//! 0x01    format version
//! u8      codec id (0 LITERAL, 1 RLE, 2 LZ, 3 BWT-CHAIN)
//! varint  original length (LEB128)
//! ...     codec payload
//! ```
//!
//! Decoding also returns a [`StepCount`], the machine-independent work
//! measure: one step per output byte emitted, one per token decoded, and for
//! BWT-CHAIN one per inverse-BWT pointer hop and one per MTF list access.
//! LITERAL has no tokens, so a LITERAL container of `n` bytes costs `n` steps.

mod bwt;
pub mod bwt_chain;
mod huffman;
pub mod lz;
mod mtf;
pub mod rle;
pub mod varint;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{ByteObject, Provenance};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"ODC1";
pub const FORMAT_VERSION: u8 = 0x01;
/// Magic + version + codec id; the length varint follows.
pub const FIXED_HEADER_BYTES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CodecId {
    Literal,
    Rle,
    Lz,
    BwtChain,
}

impl CodecId {
    pub const ALL: [CodecId; 4] = [CodecId::Literal, CodecId::Rle, CodecId::Lz, CodecId::BwtChain];

    pub fn byte(self) -> u8 {
        match self {
            CodecId::Literal => 0,
            CodecId::Rle => 1,
            CodecId::Lz => 2,
            CodecId::BwtChain => 3,
        }
    }

    pub fn from_byte(b: u8) -> Option<CodecId> {
        Self::ALL.into_iter().find(|c| c.byte() == b)
    }

    pub fn name(self) -> &'static str {
        match self {
            CodecId::Literal => "LITERAL",
            CodecId::Rle => "RLE",
            CodecId::Lz => "LZ",
            CodecId::BwtChain => "BWT-CHAIN",
        }
    }
}

impl fmt::Display for CodecId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodecId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_uppercase().replace('_', "-");
        match norm.as_str() {
            "LITERAL" => Ok(CodecId::Literal),
            "RLE" => Ok(CodecId::Rle),
            "LZ" => Ok(CodecId::Lz),
            "BWT-CHAIN" | "BWT" => Ok(CodecId::BwtChain),
            _ => Err(Error::UnknownCodec(s.to_owned())),
        }
    }
}

impl Serialize for CodecId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for CodecId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Registered codecs in their fixed order (also the tie-break order).
pub fn codec_list() -> Vec<CodecId> {
    CodecId::ALL.to_vec()
}

/// Deterministic tally of decompressor work.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepCount(u64);

impl StepCount {
    pub fn new(steps: u64) -> Self {
        StepCount(steps)
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub(crate) fn emit(&mut self, bytes: u64) {
        self.0 += bytes;
    }

    pub(crate) fn token(&mut self, tokens: u64) {
        self.0 += tokens;
    }

    pub(crate) fn traverse(&mut self, hops: u64) {
        self.0 += hops;
    }

    pub(crate) fn mtf(&mut self, accesses: u64) {
        self.0 += accesses;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    codec: CodecId,
    original_len: u64,
    payload: Vec<u8>,
}

impl Container {
    pub fn codec(&self) -> CodecId {
        self.codec
    }

    pub fn original_len(&self) -> u64 {
        self.original_len
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn header_len(&self) -> usize {
        FIXED_HEADER_BYTES + varint::encoded_len(self.original_len)
    }

    /// Full serialized size, header included.
    pub fn size_bytes(&self) -> usize {
        self.header_len() + self.payload.len()
    }

    pub fn size_bits(&self) -> u64 {
        8 * self.size_bytes() as u64
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.size_bytes());
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(self.codec.byte());
        varint::encode(self.original_len, &mut out);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses the header; the payload is validated only by [`decompress`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Container> {
        let magic = bytes.get(..4).unwrap_or(bytes);
        if magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic: expected {} (\"ODC1\"), found {}",
                hex_bytes(&MAGIC),
                if magic.is_empty() { "nothing".to_owned() } else { hex_bytes(magic) }
            )));
        }
        let version = *bytes
            .get(4)
            .ok_or_else(|| Error::Format("truncated header: missing version byte".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version 0x{version:02x} (expected 0x{FORMAT_VERSION:02x})"
            )));
        }
        let id = *bytes
            .get(5)
            .ok_or_else(|| Error::Format("truncated header: missing codec byte".into()))?;
        let codec = CodecId::from_byte(id)
            .ok_or_else(|| Error::Format(format!("unknown codec id 0x{id:02x}")))?;
        let mut pos = FIXED_HEADER_BYTES;
        let original_len = varint::decode(bytes, &mut pos)
            .map_err(|e| Error::Format(format!("original length varint: {e:?}")))?;
        Ok(Container {
            codec,
            original_len,
            payload: bytes[pos..].to_vec(),
        })
    }
}

fn hex_bytes(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn compress_bytes(input: &[u8], codec: CodecId) -> Container {
    let payload = match codec {
        CodecId::Literal => input.to_vec(),
        CodecId::Rle => rle::encode(input),
        CodecId::Lz => lz::encode(input),
        CodecId::BwtChain => bwt_chain::encode(input),
    };
    Container {
        codec,
        original_len: input.len() as u64,
        payload,
    }
}

pub fn compress(s: &ByteObject, codec: CodecId) -> Container {
    compress_bytes(s.bytes(), codec)
}

/// Decodes a container, counting steps.
pub fn decode(container: &Container) -> Result<(Vec<u8>, StepCount)> {
    let len = usize::try_from(container.original_len)
        .map_err(|_| Error::Corrupt("declared length does not fit in memory".into()))?;
    let payload = &container.payload;
    let mut steps = StepCount::default();
    let bytes = match container.codec {
        CodecId::Literal => {
            if payload.len() != len {
                return Err(Error::Corrupt(format!(
                    "LITERAL payload has {} bytes, header declares {len}",
                    payload.len()
                )));
            }
            steps.emit(len as u64);
            payload.clone()
        }
        CodecId::Rle => rle::decode(payload, len, &mut steps)?,
        CodecId::Lz => lz::decode(payload, len, &mut steps)?,
        CodecId::BwtChain => bwt_chain::decode(payload, len, &mut steps)?,
    };
    debug_assert_eq!(bytes.len(), len);
    Ok((bytes, steps))
}

pub fn decompress(container: &Container) -> Result<(ByteObject, StepCount)> {
    let (bytes, steps) = decode(container)?;
    let obj = ByteObject::new(
        "decompressed",
        bytes,
        Provenance::derived(
            "decompress",
            json!({ "codec": container.codec.name(), "container_bytes": container.size_bytes() }),
        ),
    );
    Ok((obj, steps))
}
