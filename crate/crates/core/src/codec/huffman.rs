//! Canonical Huffman coding with an MSB-first bit stream.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::{Error, Result};

pub const MAX_CODE_LEN: u8 = 32;

/// Code length per symbol (0 = unused). Ties in the merge order are broken
/// by the smallest symbol in each subtree so the result is deterministic.
pub fn code_lengths(freqs: &[u64]) -> Vec<u8> {
    let mut lengths = vec![0u8; freqs.len()];
    let used: Vec<usize> = (0..freqs.len()).filter(|&s| freqs[s] > 0).collect();
    match used.len() {
        0 => return lengths,
        1 => {
            lengths[used[0]] = 1;
            return lengths;
        }
        _ => {}
    }
    // Nodes: leaves first, then internal nodes; parent links give depths.
    let mut parent: Vec<usize> = vec![usize::MAX; used.len()];
    let mut heap: BinaryHeap<Reverse<(u64, usize, usize)>> = used
        .iter()
        .enumerate()
        .map(|(node, &sym)| Reverse((freqs[sym], sym, node)))
        .collect();
    while heap.len() > 1 {
        let Reverse((fa, sa, na)) = heap.pop().expect("len > 1");
        let Reverse((fb, sb, nb)) = heap.pop().expect("len > 1");
        let node = parent.len();
        parent.push(usize::MAX);
        parent[na] = node;
        parent[nb] = node;
        heap.push(Reverse((fa + fb, sa.min(sb), node)));
    }
    for (leaf, &sym) in used.iter().enumerate() {
        let mut depth = 0u8;
        let mut node = leaf;
        while parent[node] != usize::MAX {
            node = parent[node];
            depth += 1;
        }
        lengths[sym] = depth;
    }
    lengths
}

/// Canonical codes: sorted by (length, symbol), consecutive values.
pub fn canonical_codes(lengths: &[u8]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..lengths.len()).filter(|&s| lengths[s] > 0).collect();
    order.sort_by_key(|&s| (lengths[s], s));
    let mut codes = vec![0u32; lengths.len()];
    let mut code = 0u32;
    let mut prev_len = 0u8;
    for s in order {
        code <<= lengths[s] - prev_len;
        codes[s] = code;
        code += 1;
        prev_len = lengths[s];
    }
    codes
}

#[derive(Default)]
pub struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, code: u32, len: u8) {
        self.acc = (self.acc << len) | code as u64;
        self.nbits += len as u32;
        while self.nbits >= 8 {
            self.nbits -= 8;
            self.out.push((self.acc >> self.nbits) as u8);
        }
        self.acc &= (1u64 << self.nbits) - 1;
    }

    /// Pads the last byte with zero bits.
    pub fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            self.out.push((self.acc << (8 - self.nbits)) as u8);
        }
        self.out
    }
}

pub struct BitReader<'a> {
    data: &'a [u8],
    bit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitReader { data, bit: 0 }
    }

    pub fn read_bit(&mut self) -> Option<u32> {
        let byte = *self.data.get(self.bit / 8)?;
        let b = (byte >> (7 - self.bit % 8)) & 1;
        self.bit += 1;
        Some(b as u32)
    }

    /// Bytes consumed so far, counting a partial byte as whole.
    pub fn bytes_consumed(&self) -> usize {
        self.bit.div_ceil(8)
    }
}

/// Table-free canonical decoder.
pub struct Decoder {
    /// Symbols sorted by (length, symbol).
    symbols: Vec<u16>,
    count: [u32; MAX_CODE_LEN as usize + 1],
}

impl Decoder {
    pub fn new(lengths: &[u8]) -> Result<Self> {
        let mut count = [0u32; MAX_CODE_LEN as usize + 1];
        let mut symbols: Vec<u16> = Vec::new();
        for (s, &l) in lengths.iter().enumerate() {
            if l > MAX_CODE_LEN {
                return Err(Error::Corrupt(format!("Huffman code length {l} too long")));
            }
            if l > 0 {
                count[l as usize] += 1;
                symbols.push(s as u16);
            }
        }
        symbols.sort_by_key(|&s| (lengths[s as usize], s));
        // Kraft sum must not exceed one.
        let mut room: i64 = 1;
        for &c in &count[1..] {
            room = room * 2 - c as i64;
            if room < 0 {
                return Err(Error::Corrupt("over-subscribed Huffman code".into()));
            }
        }
        Ok(Decoder { symbols, count })
    }

    pub fn decode(&self, reader: &mut BitReader<'_>) -> Result<u16> {
        let mut code: u32 = 0;
        let mut first: u32 = 0;
        let mut index: u32 = 0;
        for len in 1..=MAX_CODE_LEN as usize {
            let bit = reader
                .read_bit()
                .ok_or_else(|| Error::Corrupt("Huffman stream truncated".into()))?;
            code |= bit;
            let count = self.count[len];
            if code.wrapping_sub(first) < count {
                return Ok(self.symbols[(index + code - first) as usize]);
            }
            index += count;
            first = (first + count) << 1;
            code <<= 1;
        }
        Err(Error::Corrupt("invalid Huffman code".into()))
    }
}
