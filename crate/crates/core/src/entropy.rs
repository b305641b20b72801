//! Order-0 Shannon entropy of byte objects.

use serde::Serialize;

use crate::corpus::ByteObject;
use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Probability of each byte value at any position.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolModel {
    probabilities: [f64; 256],
}

impl SymbolModel {
    pub fn new(probabilities: [f64; 256]) -> Result<Self> {
        if let Some((b, p)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::InvalidModel(format!(
                "probability of 0x{b:02x} is {p}"
            )));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(SymbolModel { probabilities })
    }

    /// Builds a model from `(byte, probability)` pairs; unlisted bytes get 0.
    pub fn from_pairs(pairs: &[(u8, f64)]) -> Result<Self> {
        let mut probabilities = [0.0; 256];
        for &(b, p) in pairs {
            probabilities[b as usize] += p;
        }
        Self::new(probabilities)
    }

    pub fn probability(&self, byte: u8) -> f64 {
        self.probabilities[byte as usize]
    }

    /// `−Σ p·log2 p`, with `0·log 0 = 0`.
    pub fn bits_per_symbol(&self) -> f64 {
        self.probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    /// Byte values with non-zero probability, in ascending order.
    pub fn support(&self) -> Vec<u8> {
        (0..=255u8).filter(|&b| self.probability(b) > 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub n: usize,
    pub bits_per_symbol: f64,
    pub total_bits: f64,
}

pub fn symbol_frequencies(s: &ByteObject) -> Result<SymbolModel> {
    if s.is_empty() {
        return Err(Error::invalid("symbol model of an empty object is undefined"));
    }
    let mut counts = [0u64; 256];
    for &b in s.bytes() {
        counts[b as usize] += 1;
    }
    let n = s.len() as f64;
    let mut probabilities = [0.0; 256];
    for (p, &c) in probabilities.iter_mut().zip(counts.iter()) {
        *p = c as f64 / n;
    }
    // Counts/n can drift from 1 by a few ulps; the empirical model is valid by construction.
    Ok(SymbolModel { probabilities })
}

/// `H(S) = n · (−Σ_C pr(C) log2 pr(C))`. `None` uses the empirical model of `s`.
pub fn shannon_entropy(s: &ByteObject, model: Option<&SymbolModel>) -> Result<EntropyReport> {
    let owned;
    let model = match model {
        Some(m) => {
            if let Some(&b) = s.bytes().iter().find(|&&b| m.probability(b) == 0.0) {
                return Err(Error::InvalidModel(format!(
                    "byte 0x{b:02x} occurs but has probability 0"
                )));
            }
            m
        }
        None => {
            owned = symbol_frequencies(s)?;
            &owned
        }
    };
    let bits_per_symbol = model.bits_per_symbol();
    Ok(EntropyReport {
        n: s.len(),
        bits_per_symbol,
        total_bits: s.len() as f64 * bits_per_symbol,
    })
}
