//! BWT → MTF → zero-run coding → canonical Huffman, in 64 KiB blocks.
//!
//! Block layout (blocks are 65536 bytes except the last):
//!
//! ```text
//! varint  primary row of the BWT
//! varint  number of Huffman symbols that follow
//! 33 B    bitmap of used symbols 0..=256 (bit s%8 of byte s/8, LSB first)
//! 1 B     code length for each used symbol, ascending symbol order
//! ...     Huffman bit stream, MSB first, zero-padded to a byte boundary
//! ```
//!
//! Symbol alphabet after MTF: runs of MTF index 0 are written in bijective
//! base 2 with digits RUNA (= 1, symbol 0) and RUNB (= 2, symbol 1), least
//! significant digit first; a non-zero MTF index `v` becomes symbol `v + 1`.

use super::huffman::{self, BitReader, BitWriter};
use super::{bwt, mtf, varint, StepCount};
use crate::{Error, Result};

pub const BLOCK_SIZE: usize = 1 << 16;
const RUNA: u16 = 0;
const RUNB: u16 = 1;
const ALPHABET: usize = 257;
const BITMAP_BYTES: usize = ALPHABET.div_ceil(8);

fn push_zero_run(mut run: usize, out: &mut Vec<u16>) {
    while run > 0 {
        if run & 1 == 1 {
            out.push(RUNA);
            run = (run - 1) / 2;
        } else {
            out.push(RUNB);
            run = (run - 2) / 2;
        }
    }
}

fn to_symbols(indices: &[u8]) -> Vec<u16> {
    let mut out = Vec::with_capacity(indices.len());
    let mut zeros = 0;
    for &i in indices {
        if i == 0 {
            zeros += 1;
        } else {
            push_zero_run(zeros, &mut out);
            zeros = 0;
            out.push(i as u16 + 1);
        }
    }
    push_zero_run(zeros, &mut out);
    out
}

fn encode_block(block: &[u8], out: &mut Vec<u8>) {
    let (last, primary) = bwt::forward(block);
    let symbols = to_symbols(&mtf::encode(&last));
    let mut freqs = [0u64; ALPHABET];
    for &s in &symbols {
        freqs[s as usize] += 1;
    }
    let lengths = huffman::code_lengths(&freqs);
    let codes = huffman::canonical_codes(&lengths);

    varint::encode(primary as u64, out);
    varint::encode(symbols.len() as u64, out);
    let mut bitmap = [0u8; BITMAP_BYTES];
    for s in (0..ALPHABET).filter(|&s| lengths[s] > 0) {
        bitmap[s / 8] |= 1 << (s % 8);
    }
    out.extend_from_slice(&bitmap);
    out.extend(lengths.iter().copied().filter(|&l| l > 0));
    let mut writer = BitWriter::new();
    for &s in &symbols {
        writer.write(codes[s as usize], lengths[s as usize]);
    }
    out.extend(writer.finish());
}

pub fn encode(input: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    for block in input.chunks(BLOCK_SIZE) {
        encode_block(block, &mut out);
    }
    out
}

fn decode_block(
    payload: &[u8],
    pos: &mut usize,
    block_len: usize,
    steps: &mut StepCount,
) -> Result<Vec<u8>> {
    let corrupt = |msg: &str| Error::Corrupt(format!("BWT-CHAIN: {msg}"));
    let primary = varint::decode(payload, pos).map_err(|_| corrupt("primary index"))? as usize;
    let symbol_count = varint::decode(payload, pos).map_err(|_| corrupt("symbol count"))?;
    let bitmap = payload
        .get(*pos..*pos + BITMAP_BYTES)
        .ok_or_else(|| corrupt("truncated symbol bitmap"))?;
    *pos += BITMAP_BYTES;
    let mut lengths = [0u8; ALPHABET];
    for (s, len) in lengths.iter_mut().enumerate() {
        if bitmap[s / 8] >> (s % 8) & 1 == 1 {
            *len = *payload.get(*pos).ok_or_else(|| corrupt("truncated code lengths"))?;
            if *len == 0 {
                return Err(corrupt("zero code length for a used symbol"));
            }
            *pos += 1;
        }
    }
    if bitmap[BITMAP_BYTES - 1] >> (ALPHABET % 8) != 0 {
        return Err(corrupt("bitmap marks symbols beyond the alphabet"));
    }
    let decoder = huffman::Decoder::new(&lengths)?;

    let mut reader = BitReader::new(&payload[*pos..]);
    let mut indices: Vec<u8> = Vec::with_capacity(block_len);
    let mut run = 0usize;
    let mut run_weight = 1usize;
    let too_long = || corrupt("block decodes to more bytes than declared");
    for _ in 0..symbol_count {
        let sym = decoder.decode(&mut reader)?;
        steps.token(1);
        match sym {
            RUNA | RUNB => {
                run += run_weight * (sym as usize + 1);
                run_weight = run_weight.checked_mul(2).ok_or_else(too_long)?;
                if run > block_len {
                    return Err(too_long());
                }
            }
            _ => {
                indices.resize(indices.len() + run, 0);
                run = 0;
                run_weight = 1;
                indices.push((sym - 1) as u8);
            }
        }
        if indices.len() + run > block_len {
            return Err(too_long());
        }
    }
    indices.resize(indices.len() + run, 0);
    if indices.len() != block_len {
        return Err(corrupt("block decodes to fewer bytes than declared"));
    }
    *pos += reader.bytes_consumed();

    let last = mtf::decode(&indices, steps);
    let block = bwt::inverse(&last, primary, steps)?;
    steps.emit(block.len() as u64);
    Ok(block)
}

pub fn decode(payload: &[u8], len: usize, steps: &mut StepCount) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(len);
    let mut pos = 0;
    while out.len() < len {
        let block_len = BLOCK_SIZE.min(len - out.len());
        out.extend(decode_block(payload, &mut pos, block_len, steps)?);
    }
    if pos != payload.len() {
        return Err(Error::Corrupt(format!(
            "BWT-CHAIN: {} trailing payload bytes",
            payload.len() - pos
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_runs_are_bijective() {
        for run in 1..200usize {
            let mut syms = Vec::new();
            push_zero_run(run, &mut syms);
            let value: usize = syms
                .iter()
                .enumerate()
                .map(|(i, &s)| (s as usize + 1) << i)
                .sum();
            assert_eq!(value, run);
        }
    }

    #[test]
    fn round_trips_and_counts_steps() {
        let input = b"abracadabra abracadabra abracadabra";
        let enc = encode(input);
        let mut steps = StepCount::default();
        assert_eq!(decode(&enc, input.len(), &mut steps).unwrap(), input);
        let n = input.len() as u64;
        // emit + inverse-BWT hop + MTF access per byte, plus one step per token.
        let tokens = to_symbols(&mtf::encode(&bwt::forward(input).0)).len() as u64;
        assert_eq!(steps.get(), 3 * n + tokens);
    }

    #[test]
    fn multi_block() {
        let input: Vec<u8> = (0..BLOCK_SIZE * 2 + 17).map(|i| (i % 7) as u8).collect();
        let enc = encode(&input);
        let mut steps = StepCount::default();
        assert_eq!(decode(&enc, input.len(), &mut steps).unwrap(), input);
    }

    #[test]
    fn truncated_payload() {
        let input = b"hello hello hello";
        let enc = encode(input);
        for cut in 0..enc.len() {
            let mut steps = StepCount::default();
            assert!(decode(&enc[..cut], input.len(), &mut steps).is_err(), "cut {cut}");
        }
    }
}
