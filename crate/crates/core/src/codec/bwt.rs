//! Burrows–Wheeler transform over cyclic rotations.

use super::StepCount;
use crate::{Error, Result};

/// Sorted order of all cyclic rotations of `data`, by prefix doubling.
/// Identical rotations are ordered by start index.
fn sorted_rotations(data: &[u8]) -> Vec<u32> {
    let n = data.len();
    let mut rank: Vec<u32> = data.iter().map(|&b| b as u32).collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut next_rank = vec![0u32; n];
    let mut k = 1usize;
    loop {
        let key = |i: u32| {
            let i = i as usize;
            (rank[i], rank[(i + k) % n], i as u32)
        };
        order.sort_unstable_by_key(|&i| key(i));
        next_rank[order[0] as usize] = 0;
        for w in 1..n {
            let (a, b) = (order[w - 1], order[w]);
            let (ka, kb) = (key(a), key(b));
            let same = ka.0 == kb.0 && ka.1 == kb.1;
            next_rank[b as usize] = next_rank[a as usize] + u32::from(!same);
        }
        std::mem::swap(&mut rank, &mut next_rank);
        if rank[order[n - 1] as usize] as usize == n - 1 || k >= n {
            return order;
        }
        k *= 2;
    }
}

/// Returns the last column of the sorted rotation matrix and the row holding
/// the unrotated input.
pub fn forward(data: &[u8]) -> (Vec<u8>, usize) {
    let n = data.len();
    if n == 0 {
        return (Vec::new(), 0);
    }
    let order = sorted_rotations(data);
    let mut primary = 0;
    let last = order
        .iter()
        .enumerate()
        .map(|(row, &start)| {
            let start = start as usize;
            if start == 0 {
                primary = row;
            }
            data[(start + n - 1) % n]
        })
        .collect();
    (last, primary)
}

/// Rebuilds the input from the last column, one pointer hop per byte.
pub fn inverse(last: &[u8], primary: usize, steps: &mut StepCount) -> Result<Vec<u8>> {
    let n = last.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if primary >= n {
        return Err(Error::Corrupt(format!(
            "BWT primary index {primary} out of range for block of {n}"
        )));
    }
    let mut starts = [0usize; 256];
    for &b in last {
        starts[b as usize] += 1;
    }
    let mut sum = 0;
    for s in starts.iter_mut() {
        let c = *s;
        *s = sum;
        sum += c;
    }
    // links[LF(i)] = i
    let mut links = vec![0u32; n];
    for (i, &b) in last.iter().enumerate() {
        links[starts[b as usize]] = i as u32;
        starts[b as usize] += 1;
    }
    let mut out = Vec::with_capacity(n);
    let mut row = primary;
    for _ in 0..n {
        row = links[row] as usize;
        steps.traverse(1);
        out.push(last[row]);
    }
    Ok(out)
}
