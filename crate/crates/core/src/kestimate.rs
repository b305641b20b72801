//! Kolmogorov-complexity proxy: the smallest container over the codec
//! ensemble. This is an upper-bound heuristic, never the true (uncomputable)
//! complexity; per-codec sizes are always reported so codec dependence
//! stays visible.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::codec::{self, CodecId, Container};
use crate::corpus::ByteObject;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityEstimate {
    pub original_bits: u64,
    /// Container size in bits (header included), in registry order.
    pub per_codec: BTreeMap<CodecId, u64>,
    pub best_codec: CodecId,
    pub best_bits: u64,
    /// `best_bits / original_bits`; `None` for the empty object.
    pub ratio: Option<f64>,
}

/// Compresses with every registered codec and returns the estimate together
/// with the winning container. Ties go to the earlier codec in the registry.
pub fn k_estimate_with_container(bytes: &[u8]) -> (ComplexityEstimate, Container) {
    let containers: Vec<Container> = codec::codec_list()
        .into_iter()
        .map(|c| codec::compress_bytes(bytes, c))
        .collect();
    let per_codec = containers
        .iter()
        .map(|c| (c.codec(), c.size_bits()))
        .collect();
    let best = containers
        .into_iter()
        .reduce(|best, c| if c.size_bits() < best.size_bits() { c } else { best })
        .expect("registry is never empty");
    let original_bits = 8 * bytes.len() as u64;
    let estimate = ComplexityEstimate {
        original_bits,
        per_codec,
        best_codec: best.codec(),
        best_bits: best.size_bits(),
        ratio: (original_bits > 0).then(|| best.size_bits() as f64 / original_bits as f64),
    };
    (estimate, best)
}

pub fn k_estimate(s: &ByteObject) -> ComplexityEstimate {
    k_estimate_with_container(s.bytes()).0
}

/// Best container size in bits per original byte.
pub fn k_rate(s: &ByteObject) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::invalid("K-rate of an empty object is undefined"));
    }
    Ok(k_estimate(s).best_bits as f64 / s.len() as f64)
}
