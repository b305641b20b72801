//! Normalized compression distance and distance matrices.
//!
//! `NCD(x, y) = (C(xy) − min(C(x), C(y))) / max(C(x), C(y))` with `C` the
//! container size in bytes. `C(xy)` is the smaller of both concatenation
//! orders, so the distance is exactly symmetric.

mod cluster;

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Serialize;

pub use cluster::{cluster, purity, Dendrogram, Merge};

use crate::codec::{self, CodecId};
use crate::corpus::ByteObject;
use crate::kestimate::k_estimate_with_container;
use crate::{Error, Result};

/// Upper cap for distances; compressor imperfection can push NCD past 1.
pub const NCD_CAP: f64 = 1.5;
pub const DEFAULT_SELF_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NcdCompressor {
    Codec(CodecId),
    EnsembleBest,
}

impl Default for NcdCompressor {
    fn default() -> Self {
        NcdCompressor::Codec(CodecId::Lz)
    }
}

impl std::str::FromStr for NcdCompressor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "best" | "ensemble" | "ensemble-best" => Ok(NcdCompressor::EnsembleBest),
            _ => s.parse().map(NcdCompressor::Codec),
        }
    }
}

impl NcdCompressor {
    pub fn name(self) -> &'static str {
        match self {
            NcdCompressor::Codec(c) => c.name(),
            NcdCompressor::EnsembleBest => "ensemble-best",
        }
    }

    pub fn compressed_size(self, bytes: &[u8]) -> u64 {
        match self {
            NcdCompressor::Codec(c) => codec::compress_bytes(bytes, c).size_bytes() as u64,
            NcdCompressor::EnsembleBest => k_estimate_with_container(bytes).0.best_bits / 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NcdDetail {
    pub distance: f64,
    pub size_x: u64,
    pub size_y: u64,
    pub size_xy: u64,
    pub size_yx: u64,
}

impl NcdDetail {
    /// The distance the single-order formula would give with `C(x‖y)` only.
    pub fn one_order_distance(&self) -> f64 {
        formula(self.size_xy, self.size_x, self.size_y)
    }
}

fn formula(joint: u64, cx: u64, cy: u64) -> f64 {
    let (lo, hi) = (cx.min(cy) as f64, cx.max(cy) as f64);
    ((joint as f64 - lo) / hi).clamp(0.0, NCD_CAP)
}

fn concat(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

fn ncd_sized(x: &[u8], cx: u64, y: &[u8], cy: u64, comp: NcdCompressor) -> NcdDetail {
    let size_xy = comp.compressed_size(&concat(x, y));
    let size_yx = comp.compressed_size(&concat(y, x));
    NcdDetail {
        distance: formula(size_xy.min(size_yx), cx, cy),
        size_x: cx,
        size_y: cy,
        size_xy,
        size_yx,
    }
}

pub fn ncd_detail(x: &ByteObject, y: &ByteObject, comp: NcdCompressor) -> Result<NcdDetail> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::invalid("NCD needs two non-empty objects"));
    }
    let cx = comp.compressed_size(x.bytes());
    let cy = comp.compressed_size(y.bytes());
    Ok(ncd_sized(x.bytes(), cx, y.bytes(), cy, comp))
}

pub fn ncd(x: &ByteObject, y: &ByteObject, comp: NcdCompressor) -> Result<f64> {
    ncd_detail(x, y, comp).map(|d| d.distance)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    /// Validates symmetry, a zero diagonal and non-negative entries.
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::invalid("a distance matrix needs at least 2 objects"));
        }
        let unique: HashSet<&String> = labels.iter().collect();
        if unique.len() != n {
            return Err(Error::invalid("distance matrix labels must be distinct"));
        }
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(format!("distance matrix must be {n}×{n}")));
        }
        for i in 0..n {
            if values[i][i] != 0.0 {
                return Err(Error::invalid(format!("non-zero diagonal at {}", labels[i])));
            }
            for j in 0..n {
                let v = values[i][j];
                if !(v.is_finite() && v >= 0.0) || v != values[j][i] {
                    return Err(Error::invalid(format!(
                        "entry ({}, {}) is negative or asymmetric",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Header row of labels (first cell empty), then one row per object.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = std::iter::once("").chain(self.labels.iter().map(String::as_str));
        w.write_record(header).expect("in-memory write");
        for (label, row) in self.labels.iter().zip(&self.values) {
            let mut record = vec![label.clone()];
            record.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(text.as_bytes());
        let mut rows = r.records();
        let header = rows
            .next()
            .ok_or_else(|| Error::invalid("empty matrix CSV"))?
            .map_err(|e| Error::invalid(format!("matrix CSV: {e}")))?;
        let labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut values = Vec::new();
        for (i, row) in rows.enumerate() {
            let row = row.map_err(|e| Error::invalid(format!("matrix CSV: {e}")))?;
            if row.get(0) != labels.get(i).map(String::as_str) {
                return Err(Error::invalid(format!("matrix CSV row {} label mismatch", i + 1)));
            }
            let parsed = row
                .iter()
                .skip(1)
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::invalid(format!("matrix CSV row {}: {e}", i + 1)))?;
            values.push(parsed);
        }
        Self::new(labels, values)
    }

    /// Human-readable aligned table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for (label, row) in self.labels.iter().zip(&self.values) {
            let _ = write!(s, "{label:>12}");
            for v in row {
                let _ = write!(s, " {v:6.3}");
            }
            s.push('\n');
        }
        s
    }
}

/// All pairwise distances; `C(x)` of each object is computed once.
pub fn distance_matrix(objects: &[ByteObject], comp: NcdCompressor) -> Result<DistanceMatrix> {
    if objects.len() < 2 {
        return Err(Error::invalid("a distance matrix needs at least 2 objects"));
    }
    let labels: Vec<String> = objects.iter().map(|o| o.label().to_owned()).collect();
    if labels.iter().collect::<HashSet<_>>().len() != labels.len() {
        return Err(Error::invalid("distance matrix labels must be distinct"));
    }
    if let Some(o) = objects.iter().find(|o| o.is_empty()) {
        return Err(Error::invalid(format!("object {} is empty", o.label())));
    }
    let sizes: Vec<u64> = objects.iter().map(|o| comp.compressed_size(o.bytes())).collect();
    let n = objects.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = ncd_sized(objects[i].bytes(), sizes[i], objects[j].bytes(), sizes[j], comp)
                .distance;
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    DistanceMatrix::new(labels, values)
}
