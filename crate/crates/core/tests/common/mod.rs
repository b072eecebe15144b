//! Dense reference linear algebra for cross-checking the simulator.
#![allow(dead_code)]

use dcbpp::simulator::StateVector;
use dcbpp::{BppInstance, Pauli, PauliString, PauliSum};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn single(p: Pauli) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match p {
        Pauli::I => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        Pauli::X => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Qubit 0 is the leftmost tensor factor.
pub fn dense(p: &PauliString) -> CMat {
    (0..p.num_qubits()).fold(CMat::identity(1, 1), |acc, q| acc.kronecker(&single(p.get(q))))
}

pub fn dense_sum(h: &PauliSum) -> CMat {
    let dim = 1usize << h.num_qubits();
    h.terms().iter().fold(CMat::zeros(dim, dim), |acc, t| acc + dense(&t.string) * t.coeff)
}

/// `exp(-i theta P)` by the matrix exponential.
pub fn rotation(p: &PauliString, theta: f64) -> CMat {
    (dense(p) * c(0.0, -theta)).exp()
}

pub fn vector(s: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn max_abs(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn random_string(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    loop {
        let ops: Vec<(usize, Pauli)> =
            (0..n).map(|q| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])).collect();
        let p = PauliString::from_ops(n, &ops).unwrap();
        if !p.is_identity() {
            return p;
        }
    }
}

/// Instance with `n` weights uniform on `[lo, hi]`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, lo: u64, hi: u64, capacity: u64) -> BppInstance {
    BppInstance::new((0..n).map(|_| rng.random_range(lo..=hi)).collect(), capacity).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
