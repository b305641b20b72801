//! Greedy LZ77 over a fixed 64 KiB window.
//!
//! Token stream, each token starting with a varint tag:
//!
//! * `tag = run << 1` — literal run of `run ≥ 1` bytes, copied verbatim after the tag;
//! * `tag = (len − 3) << 1 | 1` — back-reference of `len ≥ 3` bytes, followed by
//!   `varint(distance − 1)`, `1 ≤ distance ≤ 65536`. Matches may overlap the
//!   bytes they produce.
//!
//! The parser is greedy: at every position it takes the longest match found
//! among the 256 most recent positions sharing the next three bytes (nearest
//! wins on equal length) and falls back to a literal when no match of three
//! bytes exists. Match length is unbounded.

use super::varint;
use super::StepCount;
use crate::{Error, Result};

pub const WINDOW: usize = 1 << 16;
pub const MIN_MATCH: usize = 3;
pub const MAX_CHAIN: usize = 256;

const HASH_BITS: u32 = 16;
const NONE: u32 = u32::MAX;

#[inline]
fn hash3(b: &[u8]) -> usize {
    let v = (b[0] as u32) << 16 | (b[1] as u32) << 8 | b[2] as u32;
    (v.wrapping_mul(2_654_435_761) >> (32 - HASH_BITS)) as usize
}

struct MatchFinder<'a> {
    input: &'a [u8],
    head: Vec<u32>,
    prev: Vec<u32>,
}

impl<'a> MatchFinder<'a> {
    fn new(input: &'a [u8]) -> Self {
        MatchFinder {
            input,
            head: vec![NONE; 1 << HASH_BITS],
            prev: vec![NONE; input.len()],
        }
    }

    fn insert(&mut self, pos: usize) {
        if pos + MIN_MATCH <= self.input.len() {
            let h = hash3(&self.input[pos..]);
            self.prev[pos] = self.head[h];
            self.head[h] = pos as u32;
        }
    }

    /// Longest match for `pos` as `(length, distance)`.
    fn find(&self, pos: usize) -> Option<(usize, usize)> {
        let input = self.input;
        if pos + MIN_MATCH > input.len() {
            return None;
        }
        let mut candidate = self.head[hash3(&input[pos..])];
        let mut best: Option<(usize, usize)> = None;
        let mut visited = 0;
        while candidate != NONE && visited < MAX_CHAIN {
            let cand = candidate as usize;
            let distance = pos - cand;
            if distance > WINDOW {
                break;
            }
            let len = input[pos..]
                .iter()
                .zip(&input[cand..])
                .take_while(|(a, b)| a == b)
                .count();
            if len >= MIN_MATCH && best.is_none_or(|(l, _)| len > l) {
                best = Some((len, distance));
                if pos + len == input.len() {
                    break;
                }
            }
            candidate = self.prev[cand];
            visited += 1;
        }
        best
    }
}

fn flush_literals(out: &mut Vec<u8>, literals: &[u8]) {
    if !literals.is_empty() {
        varint::encode((literals.len() as u64) << 1, out);
        out.extend_from_slice(literals);
    }
}

pub fn encode(input: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut finder = MatchFinder::new(input);
    let mut literal_start = 0;
    let mut pos = 0;
    while pos < input.len() {
        match finder.find(pos) {
            Some((len, distance)) => {
                flush_literals(&mut out, &input[literal_start..pos]);
                varint::encode(((len - MIN_MATCH) as u64) << 1 | 1, &mut out);
                varint::encode((distance - 1) as u64, &mut out);
                for p in pos..pos + len {
                    finder.insert(p);
                }
                pos += len;
                literal_start = pos;
            }
            None => {
                finder.insert(pos);
                pos += 1;
            }
        }
    }
    flush_literals(&mut out, &input[literal_start..]);
    out
}

pub fn decode(payload: &[u8], len: usize, steps: &mut StepCount) -> Result<Vec<u8>> {
    let corrupt = |msg: String| Error::Corrupt(format!("LZ: {msg}"));
    let mut out: Vec<u8> = Vec::with_capacity(len);
    let mut pos = 0;
    while out.len() < len {
        let tag = varint::decode(payload, &mut pos).map_err(|e| corrupt(format!("tag {e:?}")))?;
        let remaining = (len - out.len()) as u64;
        steps.token(1);
        if tag & 1 == 0 {
            let run = tag >> 1;
            if run == 0 || run > remaining {
                return Err(corrupt(format!("literal run {run} with {remaining} bytes left")));
            }
            let run = run as usize;
            let bytes = payload
                .get(pos..pos + run)
                .ok_or_else(|| corrupt("literal run past end of payload".into()))?;
            out.extend_from_slice(bytes);
            pos += run;
            steps.emit(run as u64);
        } else {
            let match_len = (tag >> 1) + MIN_MATCH as u64;
            let distance = varint::decode(payload, &mut pos)
                .map_err(|e| corrupt(format!("distance {e:?}")))?
                + 1;
            if match_len > remaining {
                return Err(corrupt(format!("match of {match_len} with {remaining} bytes left")));
            }
            if distance > out.len() as u64 || distance > WINDOW as u64 {
                return Err(corrupt(format!(
                    "distance {distance} at output offset {}",
                    out.len()
                )));
            }
            let start = out.len() - distance as usize;
            for i in 0..match_len as usize {
                let b = out[start + i];
                out.push(b);
            }
            steps.emit(match_len);
        }
    }
    if pos != payload.len() {
        return Err(corrupt(format!("{} trailing payload bytes", payload.len() - pos)));
    }
    Ok(out)
}
