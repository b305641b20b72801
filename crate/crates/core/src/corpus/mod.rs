//! Reference byte objects with known complexity character.
//!
//! Every generator is a pure function of its parameters; the same call
//! produces the same bytes on every host. Objects always carry a
//! [`Provenance`] describing how they were made.

pub mod ca;
mod markov;
pub mod pi;
pub mod prng;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use ca::CaInit;
pub use prng::SplitMix64;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Generator {
        name: String,
        params: BTreeMap<String, Value>,
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
    /// Produced by a pipeline step from other objects (e.g. an evolved genome).
    Derived {
        operation: String,
        params: BTreeMap<String, Value>,
    },
}

impl Provenance {
    fn generator(name: &str, params: Value, seed: Option<u64>) -> Self {
        let params = match params {
            Value::Object(map) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Provenance::Generator {
            name: name.to_owned(),
            params,
            seed,
        }
    }

    pub fn derived(operation: &str, params: Value) -> Self {
        let params = match params {
            Value::Object(map) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Provenance::Derived {
            operation: operation.to_owned(),
            params,
        }
    }
}

/// An immutable finite byte sequence with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ByteObject {
    bytes: Vec<u8>,
    label: String,
    provenance: Provenance,
}

impl ByteObject {
    pub fn new(label: impl Into<String>, bytes: Vec<u8>, provenance: Provenance) -> Self {
        ByteObject {
            bytes,
            label: label.into(),
            provenance,
        }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn sha256_hex(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }

    /// The sidecar record written next to generated raw files.
    pub fn sidecar(&self) -> Value {
        json!({
            "label": self.label,
            "length": self.bytes.len(),
            "sha256": self.sha256_hex(),
            "provenance": self.provenance,
        })
    }

    /// Writes the raw bytes to `path` and the provenance record to `path.json`.
    pub fn write_with_sidecar(&self, path: &Path) -> Result<PathBuf> {
        fs::write(path, &self.bytes).map_err(|e| Error::io(path, e))?;
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".json");
        let sidecar = PathBuf::from(sidecar);
        let text = serde_json::to_string_pretty(&self.sidecar())? + "\n";
        fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))?;
        Ok(sidecar)
    }
}

/// Parameters of a Markov text family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family_id: String,
    pub order: usize,
    pub transition_seed: u64,
    pub alphabet: Vec<u8>,
}

impl FamilySpec {
    pub fn new(family_id: impl Into<String>, order: usize, transition_seed: u64, alphabet: &[u8]) -> Result<Self> {
        let spec = FamilySpec {
            family_id: family_id.into(),
            order,
            transition_seed,
            alphabet: alphabet.to_vec(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::invalid("family order must be at least 1"));
        }
        if self.alphabet.is_empty() {
            return Err(Error::invalid("family alphabet is empty"));
        }
        let mut seen = [false; 256];
        for &b in &self.alphabet {
            if std::mem::replace(&mut seen[b as usize], true) {
                return Err(Error::invalid(format!("alphabet repeats byte 0x{b:02x}")));
            }
        }
        Ok(())
    }
}

/// Lowercase letters plus space.
pub const TEXT_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz ";

/// The three order-2 text families used by the classification experiments.
pub fn standard_families() -> Vec<FamilySpec> {
    ["alpha", "beta", "gamma"]
        .iter()
        .zip([11u64, 22, 33])
        .map(|(id, seed)| FamilySpec {
            family_id: (*id).to_owned(),
            order: 2,
            transition_seed: seed,
            alphabet: TEXT_ALPHABET.to_vec(),
        })
        .collect()
}

/// `n` bytes of SplitMix64 output seeded with `seed`.
pub fn gen_random(n: usize, seed: u64) -> ByteObject {
    let mut bytes = vec![0u8; n];
    SplitMix64::new(seed).fill_bytes(&mut bytes);
    ByteObject::new(
        format!("random-{n}-s{seed}"),
        bytes,
        Provenance::generator("random", json!({ "n": n, "prng": "splitmix64" }), Some(seed)),
    )
}

pub fn gen_constant(n: usize, byte: u8) -> ByteObject {
    ByteObject::new(
        format!("constant-{n}-{byte:02x}"),
        vec![byte; n],
        Provenance::generator("constant", json!({ "n": n, "byte": byte }), None),
    )
}

/// `pattern` repeated and truncated to exactly `n` bytes.
pub fn gen_periodic(pattern: &[u8], n: usize) -> Result<ByteObject> {
    if pattern.is_empty() {
        return Err(Error::invalid("periodic pattern must be non-empty"));
    }
    let bytes = pattern.iter().copied().cycle().take(n).collect();
    Ok(ByteObject::new(
        format!("periodic-{n}-p{}", pattern.len()),
        bytes,
        Provenance::generator(
            "periodic",
            json!({ "n": n, "pattern_hex": hex::encode(pattern) }),
            None,
        ),
    ))
}

/// The first `k` binary digits of π's fractional part.
pub fn gen_pi_bits(k: usize) -> Result<ByteObject> {
    if k == 0 {
        return Err(Error::invalid("pi bit count must be at least 1"));
    }
    Ok(ByteObject::new(
        format!("pi-{k}b"),
        pi::pi_bits(k),
        Provenance::generator("pi_bits", json!({ "bits": k, "method": "bbp-hex" }), None),
    ))
}

pub fn gen_ca(rule: u8, width: usize, steps: usize, init: CaInit) -> Result<ByteObject> {
    if width < 3 {
        return Err(Error::invalid("automaton width must be at least 3"));
    }
    if steps < 1 {
        return Err(Error::invalid("automaton needs at least one step"));
    }
    let (init_name, seed) = match init {
        CaInit::SingleCenter => ("single-center", None),
        CaInit::SeededRandom(s) => ("seeded-random", Some(s)),
    };
    Ok(ByteObject::new(
        format!("ca-r{rule}-w{width}-t{steps}"),
        ca::run(rule, width, steps, init),
        Provenance::generator(
            "ca",
            json!({ "rule": rule, "width": width, "steps": steps, "init": init_name }),
            seed,
        ),
    ))
}

/// A document of `n` bytes from the Markov family described by `spec`.
pub fn gen_family(spec: &FamilySpec, n: usize, doc_seed: u64) -> Result<ByteObject> {
    spec.validate()?;
    if n < 1 {
        return Err(Error::invalid("family documents need at least one byte"));
    }
    let bytes = markov::Chain::new(spec).generate(n, doc_seed);
    Ok(ByteObject::new(
        format!("{}-{doc_seed}", spec.family_id),
        bytes,
        Provenance::generator(
            "family",
            json!({
                "family_id": spec.family_id,
                "order": spec.order,
                "transition_seed": spec.transition_seed,
                "alphabet_hex": hex::encode(&spec.alphabet),
                "n": n,
            }),
            Some(doc_seed),
        ),
    ))
}

pub fn load_file(path: impl AsRef<Path>) -> Result<ByteObject> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(ByteObject::new(
        label,
        bytes,
        Provenance::File {
            path: path.to_path_buf(),
        },
    ))
}

/// One object of each fixture class, sized around `n` bytes: empty, single
/// byte, constant, periodic, random, π bits, rule-30 automaton, Markov text.
pub fn fixture_classes(n: usize, seed: u64) -> Vec<ByteObject> {
    let n = n.max(64);
    let families = standard_families();
    vec![
        gen_constant(0, 0).with_label("empty"),
        gen_constant(1, 0x5a).with_label("one-byte"),
        gen_constant(n, 0),
        gen_periodic(b"organized", n).expect("non-empty pattern"),
        gen_random(n, seed),
        gen_pi_bits(8 * n.min(2048)).expect("positive bit count"),
        gen_ca(30, 64, 8 * n / 64, CaInit::SingleCenter).expect("valid automaton"),
        gen_family(&families[0], n, seed).expect("valid family"),
    ]
}
