//! Brute-force ground truth.
//!
//! Partition counting uses restricted-growth enumeration (item `i` joins one of
//! the blocks opened so far or opens a new one), which shares no code with the
//! exact-cover search in the pipeline.

use serde::Serialize;

use crate::encoding::{binary_objective, k_schedule, Bitstring, BppInstance, EncodingParams};
use crate::error::{Error, Result};

/// Subset enumeration cap.
pub const SUBSET_CAP: usize = 20;
/// Partition enumeration cap.
pub const PARTITION_CAP: usize = 14;

const TIE_TOL: f64 = 1e-9;

fn cap(what: &'static str, inst: &BppInstance, cap: usize) -> Result<usize> {
    let n = inst.num_items();
    if n > cap {
        return Err(Error::CapExceeded { what, n, cap });
    }
    Ok(n)
}

/// Every nonempty subset whose weight fits in one bin, in bitstring order.
pub fn brute_force_partial(inst: &BppInstance) -> Result<Vec<Bitstring>> {
    let n = cap("subset enumeration", inst, SUBSET_CAP)?;
    Ok((1..1u64 << n).map(|b| Bitstring::from_index(n, b)).filter(|b| b.weight_sum(inst) <= inst.capacity()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactPacking {
    pub m_opt: usize,
    pub fs_unordered: u64,
    pub fs_ordered: u128,
}

/// Minimal bin count and the number of optimal partitions.
pub fn brute_force_pack(inst: &BppInstance) -> Result<ExactPacking> {
    let n = cap("partition enumeration", inst, PARTITION_CAP)?;
    let mut search = PartitionSearch {
        weights: inst.weights(),
        capacity: inst.capacity(),
        loads: Vec::with_capacity(n),
        remaining: inst.total_weight(),
        best: n,
        count: 0,
    };
    search.visit(0);
    let m = search.best;
    let fs_ordered = (1..=m as u128)
        .try_fold(search.count as u128, |acc, k| acc.checked_mul(k))
        .ok_or(Error::Overflow("ordered final solution count"))?;
    Ok(ExactPacking { m_opt: m, fs_unordered: search.count, fs_ordered })
}

struct PartitionSearch<'a> {
    weights: &'a [u64],
    capacity: u64,
    loads: Vec<u64>,
    remaining: u64,
    /// Fewest blocks seen so far (n is always achievable).
    best: usize,
    count: u64,
}

impl PartitionSearch<'_> {
    fn visit(&mut self, item: usize) {
        if item == self.weights.len() {
            let used = self.loads.len();
            if used < self.best {
                self.best = used;
                self.count = 0;
            }
            if used == self.best {
                self.count += 1;
            }
            return;
        }
        if self.loads.len() > self.best {
            return;
        }
        // Prune: what is left cannot fit in the open slack plus the bins still allowed.
        let slack: u64 = self.loads.iter().map(|l| self.capacity - l).sum();
        let spare_bins = (self.best - self.loads.len()) as u64;
        if self.remaining > slack + spare_bins * self.capacity {
            return;
        }
        let w = self.weights[item];
        self.remaining -= w;
        for b in 0..self.loads.len() {
            if self.loads[b] + w <= self.capacity {
                self.loads[b] += w;
                self.visit(item + 1);
                self.loads[b] -= w;
            }
        }
        if self.loads.len() < self.best {
            self.loads.push(w);
            self.visit(item + 1);
            self.loads.pop();
        }
        self.remaining += w;
    }
}

/// All minimizers of the binary objective (ties within 1e-9 relative).
pub fn exact_ground_states(inst: &BppInstance, p: &EncodingParams) -> Result<Vec<Bitstring>> {
    let n = cap("ground-state scan", inst, SUBSET_CAP)?;
    let values: Vec<f64> = (0..1u64 << n).map(|b| binary_objective(inst, p, &Bitstring::from_index(n, b))).collect();
    Ok(minimizers(n, &values))
}

/// Indices whose value lies within the tie tolerance of the minimum.
pub fn minimizers(n: usize, values: &[f64]) -> Vec<Bitstring> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * min.abs().max(1.0);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v - min <= tol)
        .map(|(b, _)| Bitstring::from_index(n, b as u64))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStates {
    pub k: f64,
    pub target: f64,
    pub states: Vec<Bitstring>,
}

/// Everything the oracle knows about an instance.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub n: usize,
    pub capacity: u64,
    pub fps: usize,
    pub m_opt: usize,
    pub fs_unordered: u64,
    pub fs_ordered: u128,
    pub fps_set: Vec<Bitstring>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ground_states: Vec<GroundStates>,
}

/// Runs every oracle; ground states are listed per k when a schedule is given
/// as `(B, dw, stepsize)`.
pub fn oracle(inst: &BppInstance, schedule: Option<(f64, f64, f64)>) -> Result<OracleResult> {
    let fps_set = brute_force_partial(inst)?;
    let pack = brute_force_pack(inst)?;
    let mut ground_states = Vec::new();
    if let Some((b, dw, step)) = schedule {
        for k in k_schedule(inst.capacity() as f64, dw, step)? {
            let p = EncodingParams::new(inst.capacity(), b, k, dw)?;
            ground_states.push(GroundStates { k, target: p.target(), states: exact_ground_states(inst, &p)? });
        }
    }
    Ok(OracleResult {
        n: inst.num_items(),
        capacity: inst.capacity(),
        fps: fps_set.len(),
        m_opt: pack.m_opt,
        fs_unordered: pack.fs_unordered,
        fs_ordered: pack.fs_ordered,
        fps_set,
        ground_states,
    })
}
