//! Cumulative versus memoryless evolutionary search toward a structured
//! target, and the complexity trajectory of the resulting traces.
//!
//! * `Cumulative`: elitist (1 + λ). Each generation λ = `population`
//!   offspring are mutated copies of the elite; the elite is replaced only
//!   by a strictly fitter offspring (lowest index wins ties).
//! * `Memoryless`: each generation draws `population` fresh uniform genomes;
//!   nothing is inherited. Both modes spend `population` fitness
//!   evaluations per generation.
//!
//! Every offspring has its own SplitMix64 stream derived from
//! `(seed, generation, index)`, so evaluation order never affects results.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::codec::{CodecId, StepCount};
use crate::corpus::prng::derive_seed;
use crate::corpus::{gen_family, ByteObject, FamilySpec, Provenance, SplitMix64};
use crate::depth::{depth_of_bytes, slow_growth_check, SlowGrowthReport};
use crate::kestimate::k_estimate_with_container;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Cumulative,
    Memoryless,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cumulative" => Ok(Mode::Cumulative),
            "memoryless" => Ok(Mode::Memoryless),
            _ => Err(Error::invalid(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub family: FamilySpec,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvoConfig {
    pub mode: Mode,
    pub genome_len: usize,
    pub target: TargetSpec,
    pub population: usize,
    /// Expected number of replaced bytes per offspring.
    pub mutation_rate: f64,
    pub generations: usize,
    pub sample_every: usize,
    pub seed: u64,
}

/// Alphabet of the standard evolution target.
pub const TARGET_ALPHABET: &[u8] = b"acgt";

impl EvoConfig {
    /// The calibrated configuration used by the memory-hypothesis experiments.
    pub fn standard(mode: Mode, seed: u64) -> Self {
        EvoConfig {
            mode,
            genome_len: 1024,
            target: TargetSpec {
                family: FamilySpec {
                    family_id: "target".into(),
                    order: 3,
                    transition_seed: 2024,
                    alphabet: TARGET_ALPHABET.to_vec(),
                },
                seed: 1,
            },
            population: 1024,
            mutation_rate: 1.0,
            generations: 2000,
            sample_every: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::invalid(m.to_owned()));
        if self.population < 2 {
            return fail("population must be at least 2");
        }
        let rate = self.mutation_rate;
        if rate.is_nan() || rate <= 0.0 || rate > self.genome_len as f64 {
            return fail("mutation rate must be in (0, genome length]");
        }
        if self.generations < 1 {
            return fail("generations must be at least 1");
        }
        if self.sample_every < 1 {
            return fail("sample stride must be at least 1");
        }
        if self.genome_len < 1 {
            return fail("genome length must be at least 1");
        }
        self.target.family.validate()
    }

    pub fn target(&self) -> Result<ByteObject> {
        gen_family(&self.target.family, self.genome_len, self.target.seed)
    }
}

/// Fraction of positions where `g` equals `target`.
pub fn fitness(g: &[u8], target: &[u8]) -> Result<f64> {
    if g.len() != target.len() {
        return Err(Error::invalid(format!(
            "genome length {} differs from target length {}",
            g.len(),
            target.len()
        )));
    }
    if g.is_empty() {
        return Ok(1.0);
    }
    Ok(matches(g, target) as f64 / g.len() as f64)
}

fn matches(g: &[u8], target: &[u8]) -> usize {
    g.iter().zip(target).filter(|(a, b)| a == b).count()
}

/// Samples point mutations: each byte independently, with probability
/// `rate / len`, is replaced by a uniform random byte.
///
/// The number of replaced bytes is drawn from the exact binomial law by
/// inverse CDF (table built with IEEE basic arithmetic only), positions by
/// Floyd's sampling, then one fresh byte per position in ascending order.
#[derive(Debug, Clone)]
pub struct Mutator {
    len: usize,
    rate: f64,
    /// `thresholds[k]` = P(K ≤ k) scaled to u64; `None` = per-byte trials.
    thresholds: Option<Vec<u64>>,
}

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

fn pow_f64(mut base: f64, mut exp: usize) -> f64 {
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

impl Mutator {
    pub fn new(len: usize, rate: f64) -> Self {
        let p = if len == 0 { 0.0 } else { (rate / len as f64).clamp(0.0, 1.0) };
        let thresholds = if p <= 0.0 {
            Some(vec![u64::MAX])
        } else if p >= 1.0 {
            None
        } else {
            let mut pmf = pow_f64(1.0 - p, len);
            if pmf < 1e-300 {
                None
            } else {
                let odds = p / (1.0 - p);
                let mut cdf = 0.0;
                let mut table = Vec::new();
                for k in 0..=len {
                    cdf += pmf;
                    if cdf >= 1.0 - 1e-16 || k == len {
                        table.push(u64::MAX);
                        break;
                    }
                    table.push((cdf * TWO_POW_64) as u64);
                    pmf *= (len - k) as f64 / (k + 1) as f64 * odds;
                }
                Some(table)
            }
        };
        Mutator { len, rate, thresholds }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Mutations as `(position, new byte)`, ascending positions.
    pub fn draw(&self, rng: &mut SplitMix64) -> Vec<(usize, u8)> {
        let positions: Vec<usize> = match &self.thresholds {
            Some(table) => {
                let u = rng.next_u64();
                let k = table.iter().position(|&t| u <= t).unwrap_or(table.len() - 1);
                let mut chosen: Vec<usize> = Vec::with_capacity(k);
                for j in self.len - k..self.len {
                    let t = rng.below(j as u64 + 1) as usize;
                    chosen.push(if chosen.contains(&t) { j } else { t });
                }
                chosen.sort_unstable();
                chosen
            }
            None => {
                let p = (self.rate / self.len as f64).clamp(0.0, 1.0);
                let cut = if p >= 1.0 { u64::MAX } else { (p * TWO_POW_64) as u64 };
                (0..self.len).filter(|_| rng.next_u64() < cut || p >= 1.0).collect()
            }
        };
        positions.into_iter().map(|p| (p, rng.next_byte())).collect()
    }

    pub fn apply(&self, g: &[u8], rng: &mut SplitMix64) -> Vec<u8> {
        let mut out = g.to_vec();
        for (p, b) in self.draw(rng) {
            out[p] = b;
        }
        out
    }
}

pub fn mutate(g: &[u8], rate: f64, rng: &mut SplitMix64) -> Result<Vec<u8>> {
    if rate.is_nan() || rate < 0.0 {
        return Err(Error::invalid("mutation rate must be non-negative"));
    }
    Ok(Mutator::new(g.len(), rate).apply(g, rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    #[serde(with = "hex::serde")]
    pub best_genome: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub config: EvoConfig,
    pub initial_genome: Vec<u8>,
    pub samples: Vec<Sample>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TraceLine {
    Header {
        config: EvoConfig,
        #[serde(with = "hex::serde")]
        initial_genome: Vec<u8>,
    },
    Sample(Sample),
}

impl EvolutionTrace {
    /// JSON lines: a header line, then one line per sampled generation.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<trace output>", e);
        let header = TraceLine::Header {
            config: self.config.clone(),
            initial_genome: self.initial_genome.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&header)?).map_err(io)?;
        for s in &self.samples {
            writeln!(w, "{}", serde_json::to_string(&TraceLine::Sample(s.clone()))?).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut header = None;
        let mut samples = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<trace input>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<TraceLine>(&line)? {
                TraceLine::Header { config, initial_genome } if i == 0 => {
                    header = Some((config, initial_genome))
                }
                TraceLine::Header { .. } => {
                    return Err(Error::invalid(format!("trace line {}: repeated header", i + 1)))
                }
                TraceLine::Sample(s) => samples.push(s),
            }
        }
        let (config, initial_genome) =
            header.ok_or_else(|| Error::invalid("trace has no header line"))?;
        Ok(EvolutionTrace { config, initial_genome, samples })
    }

    pub fn final_sample(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

fn offspring_rng(seed: u64, generation: usize, index: usize) -> SplitMix64 {
    SplitMix64::new(derive_seed(derive_seed(seed, generation as u64), index as u64))
}

fn random_genome(rng: &mut SplitMix64, len: usize) -> Vec<u8> {
    let mut g = vec![0u8; len];
    rng.fill_bytes(&mut g);
    g
}

pub fn run_evolution(cfg: &EvoConfig) -> Result<EvolutionTrace> {
    cfg.validate()?;
    let target = cfg.target()?.into_bytes();
    let len = cfg.genome_len;
    let initial = random_genome(&mut offspring_rng(cfg.seed, 0, 0), len);
    let mut samples = Vec::new();
    let budget = (cfg.population * len) as f64;
    let sampled = |g: usize| g.is_multiple_of(cfg.sample_every) || g == cfg.generations;

    match cfg.mode {
        Mode::Cumulative => {
            let mutator = Mutator::new(len, cfg.mutation_rate);
            let mut elite = initial.clone();
            let mut elite_matches = matches(&elite, &target);
            for generation in 1..=cfg.generations {
                let mut best: Option<(usize, Vec<(usize, u8)>)> = None;
                let mut total = 0usize;
                for i in 0..cfg.population {
                    let muts = mutator.draw(&mut offspring_rng(cfg.seed, generation, i));
                    let m = muts.iter().fold(elite_matches, |m, &(p, b)| {
                        m + usize::from(b == target[p]) - usize::from(elite[p] == target[p])
                    });
                    total += m;
                    let beats = match &best {
                        Some((bm, _)) => m > *bm,
                        None => m > elite_matches,
                    };
                    if beats {
                        best = Some((m, muts));
                    }
                }
                if let Some((m, muts)) = best {
                    for (p, b) in muts {
                        elite[p] = b;
                    }
                    elite_matches = m;
                }
                if sampled(generation) {
                    samples.push(Sample {
                        generation,
                        best_fitness: elite_matches as f64 / len as f64,
                        mean_fitness: total as f64 / budget,
                        best_genome: elite.clone(),
                    });
                }
            }
        }
        Mode::Memoryless => {
            let mut scratch = vec![0u8; len];
            for generation in 1..=cfg.generations {
                let mut best = (0usize, 0usize);
                let mut total = 0usize;
                for i in 0..cfg.population {
                    offspring_rng(cfg.seed, generation, i).fill_bytes(&mut scratch);
                    let m = matches(&scratch, &target);
                    total += m;
                    if m > best.0 || i == 0 {
                        best = (m, i);
                    }
                }
                if sampled(generation) {
                    let genome = random_genome(&mut offspring_rng(cfg.seed, generation, best.1), len);
                    samples.push(Sample {
                        generation,
                        best_fitness: best.0 as f64 / len as f64,
                        mean_fitness: total as f64 / budget,
                        best_genome: genome,
                    });
                }
            }
        }
    }
    Ok(EvolutionTrace {
        config: cfg.clone(),
        initial_genome: initial,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_codec: CodecId,
    pub best_bits: u64,
    pub k_ratio: f64,
    pub steps: StepCount,
    pub steps_per_byte: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityTrajectory {
    pub initial: TrajectoryPoint,
    pub points: Vec<TrajectoryPoint>,
    /// `None` when the trace has a single sample.
    pub slow_growth: Option<SlowGrowthReport>,
}

fn measure(generation: usize, best_fitness: f64, mean_fitness: f64, genome: &[u8]) -> Result<TrajectoryPoint> {
    if genome.is_empty() {
        return Err(Error::invalid("cannot measure an empty genome"));
    }
    let (k, _) = k_estimate_with_container(genome);
    let depth = depth_of_bytes(genome, None)?;
    Ok(TrajectoryPoint {
        generation,
        best_fitness,
        mean_fitness,
        best_codec: k.best_codec,
        best_bits: k.best_bits,
        k_ratio: k.ratio.expect("non-empty genome"),
        steps: depth.steps,
        steps_per_byte: depth.steps_per_byte.expect("non-empty genome"),
    })
}

/// K-proxy and depth of every sampled best genome, plus the slow-growth
/// report over the depth sequence. Genomes repeated between samples are
/// measured once.
pub fn analyze_trace(t: &EvolutionTrace, bound: u64) -> Result<ComplexityTrajectory> {
    if t.samples.is_empty() {
        return Err(Error::invalid("trace has no samples"));
    }
    let target = t.config.target()?.into_bytes();
    let initial_fitness = fitness(&t.initial_genome, &target)?;
    let initial = measure(0, initial_fitness, initial_fitness, &t.initial_genome)?;
    let mut cache: HashMap<&[u8], TrajectoryPoint> = HashMap::new();
    let mut points = Vec::with_capacity(t.samples.len());
    for s in &t.samples {
        let base = match cache.get(s.best_genome.as_slice()) {
            Some(p) => p.clone(),
            None => {
                let p = measure(s.generation, s.best_fitness, s.mean_fitness, &s.best_genome)?;
                cache.insert(&s.best_genome, p.clone());
                p
            }
        };
        points.push(TrajectoryPoint {
            generation: s.generation,
            best_fitness: s.best_fitness,
            mean_fitness: s.mean_fitness,
            ..base
        });
    }
    let slow_growth = if points.len() >= 2 {
        let depths: Vec<StepCount> = points.iter().map(|p| p.steps).collect();
        Some(slow_growth_check(&depths, bound)?)
    } else {
        None
    };
    Ok(ComplexityTrajectory { initial, points, slow_growth })
}

impl ComplexityTrajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "generation,best_fitness,mean_fitness,best_codec,best_bits,k_ratio,steps,steps_per_byte,depth_delta,violation\n",
        );
        let violations: Vec<usize> = self
            .slow_growth
            .as_ref()
            .map(|r| r.violations.clone())
            .unwrap_or_default();
        for (i, p) in self.points.iter().enumerate() {
            let delta = match (&self.slow_growth, i) {
                (Some(r), i) if i > 0 => r.deltas[i - 1].to_string(),
                _ => String::new(),
            };
            let violation = i > 0 && violations.contains(&(i - 1));
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                p.generation,
                p.best_fitness,
                p.mean_fitness,
                p.best_codec,
                p.best_bits,
                p.k_ratio,
                p.steps.get(),
                p.steps_per_byte,
                delta,
                u8::from(violation)
            );
        }
        s
    }
}

/// Seed of the reference run used for bound calibration.
pub const CALIBRATION_SEED: u64 = 0xCA1B;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub genomes: usize,
    pub percentile: f64,
    /// Per-mutation depth delta at `percentile` (at least 1).
    pub per_mutation: u64,
    /// Mutated bytes between consecutive samples: ceil(rate) · stride.
    pub mutations_per_sample: u64,
    pub bound: u64,
    pub codec_switches: usize,
}

/// Slow-growth bound calibration: `genomes` best genomes are drawn
/// uniformly from the samples of `reference`, each gets one byte replaced
/// by a different uniform byte, and the depth increase is recorded.
/// `bound = p99(delta) · ceil(rate) · sample_every`.
pub fn calibrate_bound(reference: &EvolutionTrace, genomes: usize, seed: u64) -> Result<Calibration> {
    if reference.samples.is_empty() {
        return Err(Error::invalid("reference trace has no samples"));
    }
    if genomes == 0 {
        return Err(Error::invalid("calibration needs at least one genome"));
    }
    let percentile = 0.99;
    let mut rng = SplitMix64::new(seed);
    let mut deltas = Vec::with_capacity(genomes);
    let mut codec_switches = 0;
    let mut cache: HashMap<&[u8], (CodecId, u64)> = HashMap::new();
    for _ in 0..genomes {
        let s = &reference.samples[rng.below(reference.samples.len() as u64) as usize];
        let g = &s.best_genome;
        if g.is_empty() {
            return Err(Error::invalid("cannot calibrate on empty genomes"));
        }
        let (codec, base) = match cache.get(g.as_slice()) {
            Some(&v) => v,
            None => {
                let d = depth_of_bytes(g, None)?;
                cache.insert(g, (d.best_codec, d.steps.get()));
                (d.best_codec, d.steps.get())
            }
        };
        let mut m = g.clone();
        let pos = rng.below(g.len() as u64) as usize;
        m[pos] = m[pos].wrapping_add(1 + rng.below(255) as u8);
        let d = depth_of_bytes(&m, None)?;
        if d.best_codec != codec {
            codec_switches += 1;
        }
        deltas.push(d.steps.get().saturating_sub(base));
    }
    deltas.sort_unstable();
    let rank = ((percentile * genomes as f64).ceil() as usize).clamp(1, genomes);
    let per_mutation = deltas[rank - 1].max(1);
    let cfg = &reference.config;
    let mutations_per_sample = cfg.mutation_rate.ceil() as u64 * cfg.sample_every as u64;
    Ok(Calibration {
        genomes,
        percentile,
        per_mutation,
        mutations_per_sample,
        bound: per_mutation * mutations_per_sample,
        codec_switches,
    })
}

/// Provenance-carrying object for an evolved genome.
pub fn genome_object(cfg: &EvoConfig, sample: &Sample) -> ByteObject {
    ByteObject::new(
        format!("genome-g{}", sample.generation),
        sample.best_genome.clone(),
        Provenance::derived(
            "evolve",
            json!({ "mode": cfg.mode, "seed": cfg.seed, "generation": sample.generation }),
        ),
    )
}
