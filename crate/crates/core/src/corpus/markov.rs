//! Order-k Markov sources used as "structured text" fixtures.
//!
//! A family is the pair (family id, transition seed). For every context of
//! `order` previous symbols the family fixes up to four successor symbols
//! with weights 8:4:2:1, all drawn from a SplitMix64 stream keyed by the
//! family and the context. Documents of one family share these tables and
//! differ only in the document seed that drives sampling.

use std::collections::HashMap;

use super::prng::{derive_seed, SplitMix64};
use super::FamilySpec;

const SUCCESSOR_WEIGHTS: [u64; 4] = [8, 4, 2, 1];

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone)]
struct Successors {
    symbols: Vec<usize>,
    total: u64,
}

impl Successors {
    fn sample(&self, rng: &mut SplitMix64) -> usize {
        let mut pick = rng.below(self.total);
        for (i, &sym) in self.symbols.iter().enumerate() {
            if pick < SUCCESSOR_WEIGHTS[i] {
                return sym;
            }
            pick -= SUCCESSOR_WEIGHTS[i];
        }
        unreachable!("weights sum to total")
    }
}

pub(crate) struct Chain<'a> {
    spec: &'a FamilySpec,
    family_key: u64,
    tables: HashMap<Vec<usize>, Successors>,
}

impl<'a> Chain<'a> {
    pub(crate) fn new(spec: &'a FamilySpec) -> Self {
        Chain {
            spec,
            family_key: fnv1a(spec.family_id.as_bytes()) ^ spec.transition_seed,
            tables: HashMap::new(),
        }
    }

    fn successors(&mut self, context: &[usize]) -> &Successors {
        let alphabet = self.spec.alphabet.len();
        let family_key = self.family_key;
        self.tables.entry(context.to_vec()).or_insert_with(|| {
            let ctx_code = context
                .iter()
                .fold(0u64, |acc, &c| acc.wrapping_mul(257).wrapping_add(c as u64 + 1));
            let mut rng = SplitMix64::new(derive_seed(family_key, ctx_code));
            let branching = alphabet.min(SUCCESSOR_WEIGHTS.len());
            let mut symbols = Vec::with_capacity(branching);
            while symbols.len() < branching {
                let s = rng.below(alphabet as u64) as usize;
                if !symbols.contains(&s) {
                    symbols.push(s);
                }
            }
            let total = SUCCESSOR_WEIGHTS[..branching].iter().sum();
            Successors { symbols, total }
        })
    }

    pub(crate) fn generate(&mut self, n: usize, doc_seed: u64) -> Vec<u8> {
        let order = self.spec.order;
        let alphabet = self.spec.alphabet.clone();
        let mut rng = SplitMix64::new(derive_seed(doc_seed, self.family_key));
        let mut symbols: Vec<usize> = Vec::with_capacity(n);
        for _ in 0..order.min(n) {
            symbols.push(rng.below(alphabet.len() as u64) as usize);
        }
        while symbols.len() < n {
            let ctx_start = symbols.len() - order;
            let context = symbols[ctx_start..].to_vec();
            let next = self.successors(&context).sample(&mut rng);
            symbols.push(next);
        }
        symbols.into_iter().map(|s| alphabet[s]).collect()
    }
}
