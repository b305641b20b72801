//! Elementary (radius-1, two-state) cellular automata on a ring.

use super::prng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaInit {
    /// Only the cell at index `width / 2` is alive.
    SingleCenter,
    /// Each cell is the top bit of one SplitMix64 output.
    SeededRandom(u64),
}

pub fn initial_row(width: usize, init: CaInit) -> Vec<bool> {
    match init {
        CaInit::SingleCenter => {
            let mut row = vec![false; width];
            row[width / 2] = true;
            row
        }
        CaInit::SeededRandom(seed) => {
            let mut rng = SplitMix64::new(seed);
            (0..width).map(|_| rng.next_u64() >> 63 == 1).collect()
        }
    }
}

/// One synchronous update with cyclic boundary. The neighbourhood
/// `(left, centre, right)` indexes bit `4·l + 2·c + r` of `rule`.
pub fn step(rule: u8, row: &[bool]) -> Vec<bool> {
    let n = row.len();
    (0..n)
        .map(|i| {
            let l = row[(i + n - 1) % n] as u8;
            let c = row[i] as u8;
            let r = row[(i + 1) % n] as u8;
            (rule >> (4 * l + 2 * c + r)) & 1 == 1
        })
        .collect()
}

/// Runs `steps` updates and packs every produced row (not the initial one)
/// into one continuous MSB-first bit stream; the last byte is zero-padded.
pub fn run(rule: u8, width: usize, steps: usize, init: CaInit) -> Vec<u8> {
    let mut bits = Vec::with_capacity(width * steps);
    let mut row = initial_row(width, init);
    for _ in 0..steps {
        row = step(rule, &row);
        bits.extend_from_slice(&row);
    }
    pack_bits(&bits)
}

pub(crate) fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
        })
        .collect()
}
