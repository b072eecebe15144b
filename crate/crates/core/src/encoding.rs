//! Single-bin penalty encoding of a bin packing instance.
//!
//! For a target weight sum `k * dw` the binary objective
//! `A (s - C) + B (s - C)^2`, with `s = sum_i w_i x_i` and
//! `A = 2 B (C - k dw)`, is minimized at `s = k dw`. Substituting
//! `x_i = (1 - z_i) / 2` turns it into an Ising Hamiltonian with one Z term per
//! item and one ZZ term per item pair, plus a constant offset that is kept so
//! the objective can be reconstructed exactly.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{nc_first_order, Pauli, PauliString, PauliSum, PauliTerm, DEFAULT_SIMPLIFY_TOL, MAX_PAULI_QUBITS};

/// Item weights and a bin capacity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct BppInstance {
    capacity: u64,
    weights: Vec<u64>,
}

#[derive(Deserialize)]
struct RawInstance {
    capacity: u64,
    weights: Vec<u64>,
}

impl TryFrom<RawInstance> for BppInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        BppInstance::new(raw.weights, raw.capacity)
    }
}

impl BppInstance {
    pub fn new(weights: Vec<u64>, capacity: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidInstance("capacity must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidInstance("at least one item is required".into()));
        }
        if weights.len() > MAX_PAULI_QUBITS {
            return Err(Error::InvalidInstance(format!(
                "{} items exceed the supported maximum of {MAX_PAULI_QUBITS}",
                weights.len()
            )));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, &w)| w == 0 || w > capacity) {
            return Err(Error::InvalidInstance(format!(
                "item {i} has weight {w}; weights must lie in [1, {capacity}]"
            )));
        }
        Ok(Self { capacity, weights })
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn num_items(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    /// Reads an instance; `.csv` files use the CSV layout, anything else JSON.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            Self::from_csv(&text)
        } else {
            Self::from_json(&text)
        };
        parsed.map_err(|e| match e {
            Error::InvalidInstance(message) => Error::Parse { path: path.into(), message },
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInstance(e.to_string()))
    }

    /// CSV layout: a header `capacity,<C>` followed by one weight per line.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let bad = |m: String| Error::InvalidInstance(m);
        let mut records = reader.records();
        let header = records.next().ok_or_else(|| bad("empty CSV instance".into()))?.map_err(|e| bad(e.to_string()))?;
        let capacity = match (header.get(0), header.get(1)) {
            (Some(key), Some(value)) if key.eq_ignore_ascii_case("capacity") => {
                value.parse().map_err(|_| bad(format!("bad capacity {value:?}")))?
            }
            _ => return Err(bad("CSV header must read `capacity,<C>`".into())),
        };
        let mut weights = Vec::new();
        for rec in records {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let field = rec.get(0).unwrap_or("");
            if field.is_empty() {
                continue;
            }
            weights.push(field.parse().map_err(|_| bad(format!("bad weight {field:?}")))?);
        }
        Self::new(weights, capacity)
    }

    /// Canonical JSON: `{"capacity":C,"weights":[...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }
}

/// A subset of items, one bit per item.
///
/// The backing integer doubles as the statevector index: item `i` is bit
/// `n - 1 - i`, so item 0 is the leftmost rendered character and ordering by
/// index is lexicographic on the rendered string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bitstring {
    n: usize,
    bits: u64,
}

impl Bitstring {
    pub fn from_index(n: usize, index: u64) -> Self {
        debug_assert!(n <= 64 && (n == 64 || index >> n == 0));
        Self { n, bits: index }
    }

    pub fn from_items(n: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let bits = items.into_iter().fold(0u64, |acc, i| acc | 1u64 << (n - 1 - i));
        Self { n, bits }
    }

    pub fn index(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// True when no item is selected.
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, item: usize) -> bool {
        self.bits >> (self.n - 1 - item) & 1 == 1
    }

    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&i| self.contains(i))
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn weight_sum(&self, inst: &BppInstance) -> u64 {
        self.items().map(|i| inst.weights[i]).sum()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.len() > 64 {
            return Err(Error::Config(format!("bad bitstring {s:?}")));
        }
        let mut bits = 0u64;
        for ch in s.chars() {
            bits = bits << 1
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Config(format!("bad bitstring {s:?}"))),
                };
        }
        Ok(Self { n: s.len(), bits })
    }
}

impl Serialize for Bitstring {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Penalty weights for one target weight sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EncodingParams {
    pub b: f64,
    pub k: f64,
    pub delta_w: f64,
    pub a: f64,
}

impl EncodingParams {
    /// Derives `A = 2 B (C - k dw)`; requires `k dw` in `[dw, C]`.
    pub fn new(capacity: u64, b: f64, k: f64, delta_w: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Config(format!("penalty weight B must be positive, got {b}")));
        }
        if !(k > 0.0 && delta_w > 0.0) {
            return Err(Error::Config(format!("k ({k}) and dw ({delta_w}) must be positive")));
        }
        let target = k * delta_w;
        let c = capacity as f64;
        if target < delta_w * (1.0 - 1e-12) || target > c * (1.0 + 1e-12) {
            return Err(Error::Config(format!("target weight sum {target} outside [{delta_w}, {c}]")));
        }
        Ok(Self { b, k, delta_w, a: 2.0 * b * (c - target) })
    }

    pub fn target(&self) -> f64 {
        self.k * self.delta_w
    }
}

/// Minimum positive pairwise gap between weights; 1 when all weights are equal.
pub fn delta_omega(inst: &BppInstance) -> f64 {
    let mut sorted = inst.weights.clone();
    sorted.sort_unstable();
    sorted.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0).min().unwrap_or(1) as f64
}

/// `{s, 2s, ...}` up to the largest multiple of `stepsize` not above `C/dw`.
pub fn k_schedule(capacity: f64, delta_w: f64, stepsize: f64) -> Result<Vec<f64>> {
    if !(stepsize > 0.0 && stepsize.is_finite()) {
        return Err(Error::Config(format!("stepsize must be positive, got {stepsize}")));
    }
    if delta_w.is_nan() || delta_w <= 0.0 {
        return Err(Error::Config(format!("dw must be positive, got {delta_w}")));
    }
    let ratio = capacity / delta_w;
    // Absorb rounding in ratios like 120 / 0.1.
    let steps = (ratio / stepsize * (1.0 + 1e-12)).floor() as usize;
    if steps == 0 {
        return Err(Error::EmptySchedule { stepsize, ratio });
    }
    Ok((1..=steps).map(|j| j as f64 * stepsize).collect())
}

/// `A (s - C) + B (s - C)^2` for the subset `x`.
pub fn binary_objective(inst: &BppInstance, p: &EncodingParams, x: &Bitstring) -> f64 {
    let d = x.weight_sum(inst) as f64 - inst.capacity as f64;
    p.a * d + p.b * d * d
}

/// Ising form of the binary objective.
#[derive(Debug, Clone, PartialEq)]
pub struct CostHamiltonian {
    /// `n` linear Z terms followed by every `Z_i Z_j`, `i < j`, in canonical order.
    pub hamiltonian: PauliSum,
    /// Offset with `diag(H_c, x) + constant == binary_objective(x)`.
    pub constant: f64,
}

/// Builds `H_c`. Zero coefficients are kept, so the term count is always
/// `n + n(n-1)/2`.
pub fn build_cost_hamiltonian(inst: &BppInstance, p: &EncodingParams) -> Result<CostHamiltonian> {
    let n = inst.num_items();
    let w: Vec<f64> = inst.weights.iter().map(|&w| w as f64).collect();
    let c = inst.capacity as f64;
    let total: f64 = w.iter().sum();
    let linear = -p.a / 2.0 + p.b * (c - total / 2.0);

    let mut terms = Vec::with_capacity(n + n * (n - 1) / 2);
    for (i, wi) in w.iter().enumerate() {
        terms.push(PauliTerm::real(linear * wi, PauliString::single(n, i, Pauli::Z)?));
    }
    for i in 0..n {
        for j in i + 1..n {
            let s = PauliString::from_ops(n, &[(i, Pauli::Z), (j, Pauli::Z)])?;
            terms.push(PauliTerm::real(p.b / 2.0 * w[i] * w[j], s));
        }
    }
    let mut hamiltonian = PauliSum::from_terms(n, terms)?;
    // Canonical order without merging or dropping anything.
    hamiltonian = sorted_without_dropping(&hamiltonian);

    let d = total / 2.0 - c;
    let sum_sq: f64 = w.iter().map(|x| x * x).sum();
    let constant = p.a * d + p.b * d * d + p.b / 4.0 * sum_sq;
    Ok(CostHamiltonian { hamiltonian, constant })
}

fn sorted_without_dropping(sum: &PauliSum) -> PauliSum {
    let mut terms = sum.terms().to_vec();
    terms.sort_by_key(|t| t.string);
    PauliSum::from_terms(sum.num_qubits(), terms).expect("same qubit count")
}

/// `H_m = sum_i X_i`.
pub fn build_mixer(n: usize) -> Result<PauliSum> {
    PauliSum::from_terms(
        n,
        (0..n)
            .map(|q| PauliString::single(n, q, Pauli::X).map(|s| PauliTerm::real(1.0, s)))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Counter-diabatic pool `sum_{i<j} (Y_i Z_j + Z_i Y_j) + sum_i Y_i`.
///
/// With `weighted_by = None` every string carries coefficient 1. Passing the
/// cost Hamiltonian keeps the coefficients of the first-order commutator
/// `i [H_m, H_c]` instead.
pub fn build_cd_pool(n: usize, weighted_by: Option<&PauliSum>) -> Result<PauliSum> {
    match weighted_by {
        Some(cost) => {
            if cost.num_qubits() != n {
                return Err(Error::QubitMismatch { left: n, right: cost.num_qubits() });
            }
            let pool = nc_first_order(&build_mixer(n)?, cost)?;
            if pool.max_imag() > DEFAULT_SIMPLIFY_TOL {
                return Err(Error::NonHermitian(pool.max_imag()));
            }
            let real = pool.terms().iter().map(|t| PauliTerm::new(Complex64::new(t.coeff.re, 0.0), t.string));
            PauliSum::from_terms(n, real)
        }
        None => {
            let mut terms = Vec::new();
            for i in 0..n {
                terms.push(PauliTerm::real(1.0, PauliString::single(n, i, Pauli::Y)?));
            }
            for i in 0..n {
                for j in i + 1..n {
                    terms.push(PauliTerm::real(1.0, PauliString::from_ops(n, &[(i, Pauli::Y), (j, Pauli::Z)])?));
                    terms.push(PauliTerm::real(1.0, PauliString::from_ops(n, &[(i, Pauli::Z), (j, Pauli::Y)])?));
                }
            }
            Ok(sorted_without_dropping(&PauliSum::from_terms(n, terms)?))
        }
    }
}
