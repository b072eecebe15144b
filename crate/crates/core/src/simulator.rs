//! Exact statevector simulation of Pauli-rotation programs.
//!
//! Amplitude index `b` encodes qubit `q` at bit `n - 1 - q`, so qubit 0 is the
//! leftmost character of a rendered bitstring. Every kernel below is a plain
//! sequential loop; results are bit-identical from run to run.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ansatz::Circuit;
use crate::encoding::Bitstring;
use crate::error::{Error, Result};
use crate::pauli::{qubit_mask_to_index_mask, PauliString, PauliSum};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Default shot count for sampled runs.
pub const DEFAULT_SHOTS: u64 = 4096;

const HERMITIAN_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Index-space masks for applying a Pauli string to amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliKernel {
    x: u64,
    z: u64,
    /// `i^(number of Y letters)`.
    y_phase: Complex64,
}

impl PauliKernel {
    pub fn new(p: &PauliString) -> Self {
        let n = p.num_qubits();
        let y_phase = match p.count(crate::pauli::Pauli::Y) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Self { x: qubit_mask_to_index_mask(p.x_mask(), n), z: qubit_mask_to_index_mask(p.z_mask(), n), y_phase }
    }

    #[inline]
    fn sign(&self, b: usize) -> f64 {
        if (b as u64 & self.z).count_ones() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// In place `a <- exp(-i phi P) a`.
    fn rotate(&self, amps: &mut [Complex64], phi: f64) {
        let (s, c) = phi.sin_cos();
        if self.x == 0 {
            let plus = Complex64::new(c, -s);
            let minus = Complex64::new(c, s);
            for (b, a) in amps.iter_mut().enumerate() {
                *a *= if self.sign(b) > 0.0 { plus } else { minus };
            }
            return;
        }
        let x = self.x as usize;
        // Visit each pair once: `b` runs over indices with the pivot bit clear.
        let low = (1usize << (63 - self.x.leading_zeros())) - 1;
        let f = Complex64::new(0.0, -s) * self.y_phase;
        // sign(b ^ x) = sign(b) * sign(x)
        let fx = f * self.sign(x);
        for i in 0..amps.len() / 2 {
            let b = ((i & !low) << 1) | (i & low);
            let b2 = b ^ x;
            let sb = self.sign(b);
            let (a1, a2) = (amps[b], amps[b2]);
            amps[b] = a1 * c + fx * sb * a2;
            amps[b2] = a2 * c + f * sb * a1;
        }
    }

    /// One backward adjoint step: returns `<lambda| P |phi>` for the current
    /// vectors, then rotates both by `exp(-i angle P)`.
    fn adjoint_step(&self, lambda: &mut [Complex64], phi: &mut [Complex64], angle: f64) -> Complex64 {
        let (s, c) = angle.sin_cos();
        let mut acc = ZERO;
        if self.x == 0 {
            let plus = Complex64::new(c, -s);
            let minus = Complex64::new(c, s);
            for b in 0..phi.len() {
                let (l, p) = (lambda[b], phi[b]);
                if self.sign(b) > 0.0 {
                    acc += l.conj() * p;
                    lambda[b] = l * plus;
                    phi[b] = p * plus;
                } else {
                    acc -= l.conj() * p;
                    lambda[b] = l * minus;
                    phi[b] = p * minus;
                }
            }
            return acc;
        }
        let x = self.x as usize;
        let low = (1usize << (63 - self.x.leading_zeros())) - 1;
        let f = Complex64::new(0.0, -s) * self.y_phase;
        let sx = self.sign(x);
        let fx = f * sx;
        for i in 0..phi.len() / 2 {
            let b = ((i & !low) << 1) | (i & low);
            let b2 = b ^ x;
            let sb = self.sign(b);
            let (l1, l2, p1, p2) = (lambda[b], lambda[b2], phi[b], phi[b2]);
            acc += (l1.conj() * p2 * sx + l2.conj() * p1) * sb;
            lambda[b] = l1 * c + fx * sb * l2;
            lambda[b2] = l2 * c + f * sb * l1;
            phi[b] = p1 * c + fx * sb * p2;
            phi[b2] = p2 * c + f * sb * p1;
        }
        acc * self.y_phase
    }

    /// `<bra| P |ket>`.
    fn matrix_element(&self, bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
        let x = self.x as usize;
        let mut acc = ZERO;
        for (b, l) in bra.iter().enumerate() {
            let b2 = b ^ x;
            acc += l.conj() * ket[b2] * self.sign(b2);
        }
        acc * self.y_phase
    }

    /// `out += coeff * P a`.
    fn apply_add(&self, coeff: Complex64, a: &[Complex64], out: &mut [Complex64]) {
        let x = self.x as usize;
        let k = coeff * self.y_phase;
        for (b, o) in out.iter_mut().enumerate() {
            let b2 = b ^ x;
            *o += k * self.sign(b2) * a[b2];
        }
    }
}

/// A normalized n-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

fn check_register(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitsOutOfRange(n, MAX_QUBITS));
    }
    Ok(())
}

impl StateVector {
    /// Equal superposition `|+>^n`.
    pub fn init_plus(n: usize) -> Result<Self> {
        check_register(n)?;
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self { n, amps: vec![a; dim] })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: u64) -> Result<Self> {
        check_register(n)?;
        let dim = 1usize << n;
        if index as usize >= dim {
            return Err(Error::Precondition(format!("basis index {index} out of range")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes; the caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if !amps.len().is_power_of_two() {
            return Err(Error::Precondition("amplitude count must be a power of two".into()));
        }
        check_register(n)?;
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `s <- exp(-i theta P) s`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        self.check(p.num_qubits())?;
        PauliKernel::new(p).rotate(&mut self.amps, theta);
        Ok(())
    }

    pub(crate) fn rotate_kernel(&mut self, k: &PauliKernel, phi: f64) {
        k.rotate(&mut self.amps, phi);
    }

    /// `s <- P s`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check(p.num_qubits())?;
        let mut out = vec![ZERO; self.amps.len()];
        PauliKernel::new(p).apply_add(Complex64::new(1.0, 0.0), &self.amps, &mut out);
        self.amps = out;
        Ok(())
    }

    /// Applies a 2x2 matrix `[[m00, m01], [m10, m11]]` to one qubit.
    pub fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        if qubit >= self.n {
            return Err(Error::Precondition(format!("qubit {qubit} out of range")));
        }
        let bit = 1usize << (self.n - 1 - qubit);
        for b in 0..self.amps.len() {
            if b & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[b], self.amps[b | bit]);
            self.amps[b] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[b | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control >= self.n || target >= self.n || control == target {
            return Err(Error::Precondition(format!("bad CNOT({control}, {target})")));
        }
        let cbit = 1usize << (self.n - 1 - control);
        let tbit = 1usize << (self.n - 1 - target);
        for b in 0..self.amps.len() {
            if b & cbit != 0 && b & tbit == 0 {
                self.amps.swap(b, b | tbit);
            }
        }
        Ok(())
    }

    /// `<s|H|s>`; fails when the imaginary part exceeds 1e-9.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        self.check(h.num_qubits())?;
        let mut acc = ZERO;
        for t in h.terms() {
            acc += t.coeff * PauliKernel::new(&t.string).matrix_element(&self.amps, &self.amps);
        }
        if acc.im.abs() > HERMITIAN_TOL {
            return Err(Error::NonHermitian(acc.im));
        }
        Ok(acc.re)
    }

    /// Exact probabilities of every basis state with nonzero amplitude.
    pub fn full_distribution(&self) -> SampleSet {
        let probabilities = self
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(b, a)| (Bitstring::from_index(self.n, b as u64), a.norm_sqr()))
            .collect();
        SampleSet::Exact { n: self.n, probabilities }
    }

    /// Multinomial draw of `shots` outcomes, reproducible from `seed`.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<SampleSet> {
        if shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        let weights: Vec<f64> = self.amps.iter().map(|a| a.norm_sqr()).collect();
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::Precondition(format!("cannot sample: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<Bitstring, u64> = BTreeMap::new();
        for _ in 0..shots {
            let b = dist.sample(&mut rng);
            *counts.entry(Bitstring::from_index(self.n, b as u64)).or_default() += 1;
        }
        Ok(SampleSet::Shots { n: self.n, shots, counts })
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::QubitMismatch { left: self.n, right: n });
        }
        Ok(())
    }
}

/// Measured or exact outcome distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSet {
    Exact { n: usize, probabilities: BTreeMap<Bitstring, f64> },
    Shots { n: usize, shots: u64, counts: BTreeMap<Bitstring, u64> },
}

impl SampleSet {
    pub fn num_qubits(&self) -> usize {
        match self {
            SampleSet::Exact { n, .. } | SampleSet::Shots { n, .. } => *n,
        }
    }

    /// `(bitstring, probability or relative frequency)` in bitstring order.
    pub fn frequencies(&self) -> Vec<(Bitstring, f64)> {
        match self {
            SampleSet::Exact { probabilities, .. } => probabilities.iter().map(|(b, p)| (*b, *p)).collect(),
            SampleSet::Shots { shots, counts, .. } => {
                counts.iter().map(|(b, c)| (*b, *c as f64 / *shots as f64)).collect()
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SampleSet::Exact { probabilities, .. } => probabilities.len(),
            SampleSet::Shots { counts, .. } => counts.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV rows `bitstring,probability_or_count`, with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            SampleSet::Exact { probabilities, .. } => {
                out.push_str("bitstring,probability\n");
                for (b, p) in probabilities {
                    out.push_str(&format!("{b},{p}\n"));
                }
            }
            SampleSet::Shots { counts, .. } => {
                out.push_str("bitstring,count\n");
                for (b, c) in counts {
                    out.push_str(&format!("{b},{c}\n"));
                }
            }
        }
        out
    }
}

/// Observable prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub enum Observable {
    /// Diagonal Hamiltonian stored as its values on every basis state.
    Diagonal(Vec<f64>),
    General(Vec<(Complex64, PauliKernel)>),
}

impl Observable {
    pub fn new(h: &PauliSum) -> Result<Self> {
        check_register(h.num_qubits())?;
        if h.max_imag() > HERMITIAN_TOL {
            return Err(Error::NonHermitian(h.max_imag()));
        }
        if h.is_diagonal() {
            let n = h.num_qubits();
            let masks: Vec<(f64, u64)> =
                h.terms().iter().map(|t| (t.coeff.re, qubit_mask_to_index_mask(t.string.z_mask(), n))).collect();
            let values = (0..1u64 << n)
                .map(|b| masks.iter().map(|&(c, m)| if (b & m).count_ones() & 1 == 0 { c } else { -c }).sum())
                .collect();
            Ok(Observable::Diagonal(values))
        } else {
            Ok(Observable::General(h.terms().iter().map(|t| (t.coeff, PauliKernel::new(&t.string))).collect()))
        }
    }

    pub fn expectation(&self, s: &StateVector) -> f64 {
        match self {
            Observable::Diagonal(d) => s.amps.iter().zip(d).map(|(a, v)| a.norm_sqr() * v).sum(),
            Observable::General(terms) => terms.iter().map(|(c, k)| (c * k.matrix_element(&s.amps, &s.amps)).re).sum(),
        }
    }

    fn apply(&self, a: &[Complex64]) -> Vec<Complex64> {
        match self {
            Observable::Diagonal(d) => a.iter().zip(d).map(|(x, v)| x * v).collect(),
            Observable::General(terms) => {
                let mut out = vec![ZERO; a.len()];
                for (c, k) in terms {
                    k.apply_add(*c, a, &mut out);
                }
                out
            }
        }
    }
}

/// Runs `circuit` on `|+>^n` with the given parameters.
pub fn evolve(circuit: &Circuit, params: &[f64]) -> Result<StateVector> {
    circuit.check_params(params)?;
    let mut s = StateVector::init_plus(circuit.num_qubits())?;
    for g in circuit.gates() {
        s.rotate_kernel(g.kernel(), params[g.slot] * g.coeff);
    }
    Ok(s)
}

/// Cost and gradient by reverse-mode (adjoint) differentiation.
///
/// For a gate `exp(-i theta c P)` the derivative of `<H>` is
/// `2 c Im <lambda| P |phi>`, where `phi` is the state right after the gate and
/// `lambda` is `H psi` propagated backwards to the same point. This computes
/// exactly the quantity the parameter-shift rule estimates, in one forward and
/// one backward sweep.
pub fn value_and_gradient(circuit: &Circuit, params: &[f64], obs: &Observable) -> Result<(f64, Vec<f64>, StateVector)> {
    let psi = evolve(circuit, params)?;
    let value = obs.expectation(&psi);
    let mut phi = psi.amps.clone();
    let mut lambda = obs.apply(&psi.amps);
    let mut grad = vec![0.0; circuit.num_params()];
    for g in circuit.gates().iter().rev() {
        let m = g.kernel().adjoint_step(&mut lambda, &mut phi, -params[g.slot] * g.coeff);
        grad[g.slot] += 2.0 * g.coeff * m.im;
    }
    Ok((value, grad, psi))
}

/// `d<H>/d theta_j` for every shared parameter (adjoint method).
pub fn gradient(circuit: &Circuit, params: &[f64], h: &PauliSum) -> Result<Vec<f64>> {
    Ok(value_and_gradient(circuit, params, &Observable::new(h)?)?.1)
}

/// Gate-level parameter-shift gradient: for each gate bound to `theta_j`,
/// `c * [f(phi + pi/4) - f(phi - pi/4)]` with `phi = theta_j c` shifted at that
/// gate only. Costs two circuit runs per gate; kept as a reference.
pub fn parameter_shift_gradient(circuit: &Circuit, params: &[f64], h: &PauliSum) -> Result<Vec<f64>> {
    circuit.check_params(params)?;
    let obs = Observable::new(h)?;
    let run = |shifted: usize, delta: f64| -> Result<f64> {
        let mut s = StateVector::init_plus(circuit.num_qubits())?;
        for (t, g) in circuit.gates().iter().enumerate() {
            let phi = params[g.slot] * g.coeff + if t == shifted { delta } else { 0.0 };
            s.rotate_kernel(g.kernel(), phi);
        }
        Ok(obs.expectation(&s))
    };
    let mut grad = vec![0.0; circuit.num_params()];
    for (t, g) in circuit.gates().iter().enumerate() {
        grad[g.slot] += g.coeff * (run(t, FRAC_PI_4)? - run(t, -FRAC_PI_4)?);
    }
    Ok(grad)
}
