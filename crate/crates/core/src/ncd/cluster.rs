//! Average-linkage (UPGMA) agglomerative clustering.
//!
//! Every cluster is keyed by its lexicographically smallest leaf label.
//! Among equal minimum distances the pair with the smallest
//! `(min key, max key)` merges first, so the tree does not depend on the
//! input order of the matrix.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::DistanceMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merge {
    /// Node ids: `0..n` are leaves, `n + i` is the cluster made by merge `i`.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

struct Active {
    node: usize,
    key: String,
    size: usize,
}

pub fn cluster(m: &DistanceMatrix) -> Dendrogram {
    let n = m.len();
    let mut active: Vec<Active> = m
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| Active {
            node: i,
            key: l.clone(),
            size: 1,
        })
        .collect();
    // dist[a][b] indexed by position in `active`.
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..active.len() {
            for b in a + 1..active.len() {
                let d = dist[a][b];
                let better = match best {
                    None => true,
                    Some((bd, ba, bb)) => {
                        d < bd || (d == bd && pair_key(&active, a, b) < pair_key(&active, ba, bb))
                    }
                };
                if better {
                    best = Some((d, a, b));
                }
            }
        }
        let (height, a, b) = best.expect("at least two active clusters");
        let (a, b) = if active[a].key <= active[b].key { (a, b) } else { (b, a) };
        let (sa, sb) = (active[a].size as f64, active[b].size as f64);
        let new_row: Vec<f64> = (0..active.len())
            .map(|k| (sa * dist[a][k] + sb * dist[b][k]) / (sa + sb))
            .collect();
        merges.push(Merge {
            left: active[a].node,
            right: active[b].node,
            height,
            size: active[a].size + active[b].size,
        });
        let merged = Active {
            node: n + merges.len() - 1,
            key: active[a].key.clone(),
            size: active[a].size + active[b].size,
        };
        // Replace slot `a` with the merged cluster and drop slot `b`.
        for k in 0..active.len() {
            dist[a][k] = new_row[k];
            dist[k][a] = new_row[k];
        }
        dist[a][a] = 0.0;
        active[a] = merged;
        active.remove(b);
        dist.remove(b);
        for row in dist.iter_mut() {
            row.remove(b);
        }
    }
    Dendrogram {
        labels: m.labels().to_vec(),
        merges,
    }
}

fn pair_key(active: &[Active], a: usize, b: usize) -> (&str, &str) {
    let (x, y) = (active[a].key.as_str(), active[b].key.as_str());
    if x <= y { (x, y) } else { (y, x) }
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    /// Leaves under `node`.
    fn leaves(&self, node: usize, out: &mut Vec<usize>) {
        let n = self.leaf_count();
        if node < n {
            out.push(node);
        } else {
            let m = &self.merges[node - n];
            self.leaves(m.left, out);
            self.leaves(m.right, out);
        }
    }

    /// Cuts the tree into `k` clusters by undoing the `k − 1` highest merges.
    /// Returns `label → cluster index`, clusters numbered in order of their
    /// smallest label.
    pub fn cut(&self, k: usize) -> Result<BTreeMap<String, usize>> {
        let n = self.leaf_count();
        if k < 1 || k > n {
            return Err(Error::invalid(format!("cluster count {k} outside 1..={n}")));
        }
        let kept = n - k;
        // Roots after applying the first `kept` merges.
        let mut roots: Vec<usize> = (0..n).collect();
        for (i, m) in self.merges[..kept].iter().enumerate() {
            roots.retain(|&r| r != m.left && r != m.right);
            roots.push(n + i);
        }
        let mut groups: Vec<Vec<String>> = roots
            .iter()
            .map(|&r| {
                let mut leaves = Vec::new();
                self.leaves(r, &mut leaves);
                let mut labels: Vec<String> = leaves.iter().map(|&l| self.labels[l].clone()).collect();
                labels.sort();
                labels
            })
            .collect();
        groups.sort();
        Ok(groups
            .into_iter()
            .enumerate()
            .flat_map(|(c, labels)| labels.into_iter().map(move |l| (l, c)))
            .collect())
    }

    /// Newick text with ultrametric branch lengths (node height = merge distance / 2).
    pub fn to_newick(&self) -> String {
        let n = self.leaf_count();
        if n == 1 {
            return format!("{};", newick_label(&self.labels[0]));
        }
        let mut s = String::new();
        self.write_newick(n + self.merges.len() - 1, &mut s);
        s.push(';');
        s
    }

    fn height(&self, node: usize) -> f64 {
        let n = self.leaf_count();
        if node < n { 0.0 } else { self.merges[node - n].height / 2.0 }
    }

    fn write_newick(&self, node: usize, s: &mut String) {
        let n = self.leaf_count();
        if node < n {
            s.push_str(&newick_label(&self.labels[node]));
            return;
        }
        let m = &self.merges[node - n];
        let h = self.height(node);
        s.push('(');
        self.write_newick(m.left, s);
        s.push_str(&format!(":{}", h - self.height(m.left)));
        s.push(',');
        self.write_newick(m.right, s);
        s.push_str(&format!(":{}", h - self.height(m.right)));
        s.push(')');
    }
}

fn newick_label(label: &str) -> String {
    if label
        .chars()
        .any(|c| c.is_whitespace() || "()[]':;,".contains(c))
    {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_owned()
    }
}

/// Fraction of leaves that belong to the majority family of their cluster.
pub fn purity(d: &Dendrogram, k: usize, truth: &HashMap<String, String>) -> Result<f64> {
    let assignment = d.cut(k)?;
    let mut tallies: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    for (label, &c) in &assignment {
        let family = truth
            .get(label)
            .ok_or_else(|| Error::invalid(format!("no family given for {label}")))?;
        *tallies.entry(c).or_default().entry(family.as_str()).or_default() += 1;
    }
    let majority: usize = tallies
        .values()
        .map(|t| t.values().copied().max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / assignment.len() as f64)
}
