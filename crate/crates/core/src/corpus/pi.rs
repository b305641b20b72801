//! Hexadecimal digits of π by digit extraction.
//!
//! Uses the Bailey–Borwein–Plouffe series
//! `π = Σ 16^-k (4/(8k+1) − 2/(8k+4) − 1/(8k+5) − 1/(8k+6))`.
//! Each series is evaluated modulo 1 in 0.64 fixed point: the head terms use
//! exact modular exponentiation, the tail terms a shifted reciprocal. All
//! arithmetic is integer, so the output does not depend on the host FPU.
//! Accumulated truncation error is below `8·(d + 16)·2^-64` at position `d`,
//! so 8 hex digits (32 bits) are taken from each evaluation.

const DIGITS_PER_EVAL: usize = 8;

fn pow16_mod(mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut base = 16 % modulus;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// `frac(Σ_k 16^(d−k) / (8k+j))` scaled by 2^64.
fn series(j: u64, d: u64) -> u64 {
    let mut sum = 0u64;
    for k in 0..=d {
        let m = 8 * k + j;
        let r = pow16_mod(d - k, m);
        let term = (((r as u128) << 64) / m as u128) as u64;
        sum = sum.wrapping_add(term);
    }
    let mut k = d + 1;
    loop {
        let shift = 4 * (k - d);
        if shift >= 64 {
            break;
        }
        let m = 8 * k + j;
        let term = ((1u128 << (64 - shift)) / m as u128) as u64;
        if term == 0 {
            break;
        }
        sum = sum.wrapping_add(term);
        k += 1;
    }
    sum
}

/// The fractional part of `16^d · π`, scaled by 2^64.
fn fraction_at(d: u64) -> u64 {
    series(1, d)
        .wrapping_mul(4)
        .wrapping_sub(series(4, d).wrapping_mul(2))
        .wrapping_sub(series(5, d))
        .wrapping_sub(series(6, d))
}

/// First `count` hexadecimal digits of the fractional part of π.
pub fn hex_digits(count: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(count);
    let mut pos = 0usize;
    while out.len() < count {
        let word = fraction_at(pos as u64);
        let take = DIGITS_PER_EVAL.min(count - out.len());
        for i in 0..take {
            out.push(((word >> (60 - 4 * i)) & 0xF) as u8);
        }
        pos += DIGITS_PER_EVAL;
    }
    out
}

/// First `bits` binary digits of π's fractional part, packed MSB first.
/// The final byte is zero-padded.
pub fn pi_bits(bits: usize) -> Vec<u8> {
    let digits = hex_digits(bits.div_ceil(4));
    let mut bytes: Vec<u8> = digits
        .chunks(2)
        .map(|pair| (pair[0] << 4) | pair.get(1).copied().unwrap_or(0))
        .collect();
    bytes.truncate(bits.div_ceil(8));
    let spare = bytes.len() * 8 - bits;
    if let Some(last) = bytes.last_mut() {
        *last &= 0xFFu8 << spare;
    }
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_digits() {
        assert_eq!(hex_digits(8), vec![2, 4, 3, 0xF, 6, 0xA, 8, 8]);
    }

    #[test]
    fn bit_packing() {
        assert_eq!(pi_bits(4), vec![0x20]);
        assert_eq!(pi_bits(8), vec![0x24]);
        assert_eq!(pi_bits(12), vec![0x24, 0x30]);
        assert_eq!(pi_bits(32), vec![0x24, 0x3F, 0x6A, 0x88]);
        assert_eq!(pi_bits(1), vec![0x00]);
        assert_eq!(pi_bits(3), vec![0x20]);
    }

    #[test]
    fn pow16_mod_small() {
        assert_eq!(pow16_mod(0, 7), 1);
        assert_eq!(pow16_mod(3, 1000), 4096 % 1000);
        assert_eq!(pow16_mod(5, 1), 0);
    }
}
