//! Logical-depth proxy and the slow-growth analyzer.
//!
//! Depth is the deterministic [`StepCount`] of decompressing the
//! ensemble-best container. Wall-clock timing is optional, advisory and
//! never used for any pass/fail decision.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::codec::{self, CodecId, Container, StepCount};
use crate::corpus::ByteObject;
use crate::kestimate::k_estimate_with_container;
use crate::{Error, Result};

/// Largest per-byte step excess allowed for "shallow" objects: a
/// best container that spends at most one token per 20 bytes.
pub const EPSILON_TOKEN: f64 = 0.05;

/// Codecs whose size is within this fraction of the best are near-ties.
pub const NEAR_TIE_SIZE: f64 = 0.05;
/// Near-tie step counts differing by more than this fraction are flagged.
pub const NEAR_TIE_STEPS: f64 = 0.10;

static WALLCLOCK: Mutex<()> = Mutex::new(());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimingProtocol {
    pub warmups: u32,
    pub repetitions: u32,
}

impl Default for TimingProtocol {
    fn default() -> Self {
        TimingProtocol {
            warmups: 2,
            repetitions: 11,
        }
    }
}

impl TimingProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 5 {
            return Err(Error::invalid(format!(
                "wall-clock timing needs at least 5 repetitions, got {}",
                self.repetitions
            )));
        }
        if self.warmups < 1 {
            return Err(Error::invalid("wall-clock timing needs at least 1 warm-up run"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingStats {
    pub median_s: f64,
    pub mad_s: f64,
    pub repetitions: u32,
    pub warmups: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthEstimate {
    pub best_codec: CodecId,
    pub steps: StepCount,
    /// `None` for the empty object.
    pub steps_per_byte: Option<f64>,
    /// Decompression steps of every codec's container.
    pub per_codec_steps: BTreeMap<CodecId, u64>,
    /// Another codec is within 5% of the best size but needs materially
    /// different work; the depth reading is then codec-dependent.
    pub near_tie_ambiguous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wallclock: Option<TimingStats>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Median and median absolute deviation of decompression wall time.
/// Measurements from all threads are serialized through one lock.
pub fn wallclock_measure(container: &Container, timing: &TimingProtocol) -> Result<TimingStats> {
    timing.validate()?;
    let _guard = WALLCLOCK.lock().unwrap_or_else(|e| e.into_inner());
    for _ in 0..timing.warmups {
        std::hint::black_box(codec::decode(container)?);
    }
    let mut runs = Vec::with_capacity(timing.repetitions as usize);
    for _ in 0..timing.repetitions {
        let start = Instant::now();
        std::hint::black_box(codec::decode(container)?);
        runs.push(start.elapsed().as_secs_f64());
    }
    runs.sort_by(f64::total_cmp);
    let med = median(&runs);
    let mut dev: Vec<f64> = runs.iter().map(|r| (r - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    Ok(TimingStats {
        median_s: med,
        mad_s: median(&dev),
        repetitions: timing.repetitions,
        warmups: timing.warmups,
    })
}

pub fn depth_of_bytes(bytes: &[u8], timing: Option<&TimingProtocol>) -> Result<DepthEstimate> {
    if let Some(t) = timing {
        t.validate()?;
    }
    let (estimate, best) = k_estimate_with_container(bytes);
    let mut per_codec_steps = BTreeMap::new();
    let mut steps = StepCount::default();
    for codec_id in codec::codec_list() {
        let container = codec::compress_bytes(bytes, codec_id);
        let (_, s) = codec::decode(&container)?;
        if codec_id == best.codec() {
            steps = s;
        }
        per_codec_steps.insert(codec_id, s.get());
    }
    let best_bits = estimate.best_bits as f64;
    let near_tie_ambiguous = estimate.per_codec.iter().any(|(&c, &bits)| {
        c != estimate.best_codec
            && (bits as f64) <= best_bits * (1.0 + NEAR_TIE_SIZE)
            && (per_codec_steps[&c] as f64 - steps.get() as f64).abs()
                > NEAR_TIE_STEPS * steps.get().max(1) as f64
    });
    let wallclock = match timing {
        Some(t) => Some(wallclock_measure(&best, t)?),
        None => None,
    };
    Ok(DepthEstimate {
        best_codec: best.codec(),
        steps,
        steps_per_byte: (!bytes.is_empty()).then(|| steps.get() as f64 / bytes.len() as f64),
        per_codec_steps,
        near_tie_ambiguous,
        wallclock,
    })
}

pub fn depth_estimate(s: &ByteObject, timing: Option<&TimingProtocol>) -> Result<DepthEstimate> {
    depth_of_bytes(s.bytes(), timing)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlowGrowthReport {
    /// `max(0, steps[i+1] − steps[i])`.
    pub deltas: Vec<u64>,
    pub max_delta: u64,
    pub bound: u64,
    /// Indices `i` with `deltas[i] > bound`.
    pub violations: Vec<usize>,
}

pub fn slow_growth_check(depths: &[StepCount], bound: u64) -> Result<SlowGrowthReport> {
    if depths.len() < 2 {
        return Err(Error::invalid(format!(
            "slow-growth check needs at least 2 depth values, got {}",
            depths.len()
        )));
    }
    if bound == 0 {
        return Err(Error::invalid("slow-growth bound must be positive"));
    }
    let deltas: Vec<u64> = depths
        .windows(2)
        .map(|w| w[1].get().saturating_sub(w[0].get()))
        .collect();
    let violations = deltas
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > bound)
        .map(|(i, _)| i)
        .collect();
    Ok(SlowGrowthReport {
        max_delta: deltas.iter().copied().max().unwrap_or(0),
        deltas,
        bound,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{gen_constant, gen_random};

    fn steps(v: &[u64]) -> Vec<StepCount> {
        v.iter().map(|&s| StepCount::new(s)).collect()
    }

    #[test]
    fn constant_depth_matches_rle_schedule() {
        let d = depth_estimate(&gen_constant(1000, 0), None).unwrap();
        assert_eq!(d.best_codec, CodecId::Rle);
        assert_eq!(d.steps.get(), 1001);
        assert!(d.wallclock.is_none());
    }

    #[test]
    fn random_is_shallow() {
        let s = gen_random(4096, 1);
        let d = depth_estimate(&s, None).unwrap();
        assert_eq!(d.best_codec, CodecId::Literal);
        assert_eq!(d.steps_per_byte, Some(1.0));
    }

    #[test]
    fn steps_cover_every_byte() {
        for s in crate::corpus::fixture_classes(1024, 2) {
            let d = depth_estimate(&s, None).unwrap();
            assert!(d.steps.get() >= s.len() as u64);
            assert_eq!(d.per_codec_steps[&d.best_codec], d.steps.get());
        }
    }

    #[test]
    fn slow_growth_cases() {
        let r = slow_growth_check(&steps(&[100, 100, 100]), 5).unwrap();
        assert_eq!(r.max_delta, 0);
        assert!(r.violations.is_empty());

        let b = 7;
        let r = slow_growth_check(&steps(&[100, 100 + b + 1]), b).unwrap();
        assert_eq!(r.violations, vec![0]);

        let r = slow_growth_check(&steps(&[50, 10, 12, 40]), 20).unwrap();
        assert_eq!(r.deltas, vec![0, 2, 28]);
        assert_eq!(r.violations, vec![2]);

        assert!(slow_growth_check(&steps(&[1]), 5).is_err());
        assert!(slow_growth_check(&steps(&[1, 2]), 0).is_err());
    }

    #[test]
    fn timing_protocol_validation() {
        let c = codec::compress_bytes(&[1, 2, 3], CodecId::Literal);
        let bad = TimingProtocol { warmups: 1, repetitions: 4 };
        assert!(wallclock_measure(&c, &bad).is_err());
        let bad = TimingProtocol { warmups: 0, repetitions: 5 };
        assert!(wallclock_measure(&c, &bad).is_err());
        let stats = wallclock_measure(&c, &TimingProtocol::default()).unwrap();
        assert!(stats.median_s >= 0.0 && stats.mad_s >= 0.0);
        assert_eq!(stats.repetitions, 11);
    }
}
