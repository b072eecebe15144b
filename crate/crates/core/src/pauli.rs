//! Symbolic algebra on n-qubit Pauli strings.
//!
//! A [`PauliString`] stores its letters as two bitplanes (`x`, `z`), bit `q`
//! describing qubit `q`: `I = (0,0)`, `X = (1,0)`, `Z = (0,1)`, `Y = (1,1)`.
//! Products track their scalar phase exactly as a power of `i`.
//!
//! Sums are kept in a canonical order so that serialized Hamiltonians are
//! byte-stable: strings are ordered by weight, then by their support (qubit
//! indices, ascending), then by letters in `I < X < Y < Z` order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest qubit count a bitplane string can hold.
pub const MAX_PAULI_QUBITS: usize = 64;

/// Coefficients at or below this magnitude are dropped by [`PauliSum::simplify`].
pub const DEFAULT_SIMPLIFY_TOL: f64 = 1e-12;

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Product of two letters as `(power of i, letter)`.
    fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' | 'i' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            other => Err(Error::ParsePauli(format!("unexpected letter {other:?}"))),
        }
    }
}

/// A phase from the set {+1, +i, -1, -i}, stored as a power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(power: u8) -> Self {
        Phase(power % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    // Powers of i add.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_power(self.0 + rhs.0)
    }
}

/// An n-qubit Pauli string without a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PAULI_QUBITS {
        return Err(Error::QubitsOutOfRange(n, MAX_PAULI_QUBITS));
    }
    Ok(())
}

fn check_same(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::QubitMismatch { left, right });
    }
    Ok(())
}

impl PauliString {
    /// The all-identity string.
    pub fn identity(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self { n, x: 0, z: 0 })
    }

    /// Builds a string from `(qubit, letter)` pairs; unlisted qubits are `I`.
    pub fn from_ops(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n)?;
        for &(q, p) in ops {
            if q >= n {
                return Err(Error::ParsePauli(format!("qubit {q} out of range for n = {n}")));
            }
            s.set(q, p);
        }
        Ok(s)
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        Self::from_ops(n, &[(qubit, p)])
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    fn set(&mut self, qubit: usize, p: Pauli) {
        let (x, z) = p.bits();
        let bit = 1u64 << qubit;
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    /// X bitplane; bit `q` is set when qubit `q` carries X or Y.
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    /// Z bitplane; bit `q` is set when qubit `q` carries Z or Y.
    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        bits_ascending(self.support_mask()).collect()
    }

    /// Non-identity letters with their qubit, ascending by qubit.
    pub fn ops(&self) -> Vec<(usize, Pauli)> {
        bits_ascending(self.support_mask()).map(|q| (q, self.get(q))).collect()
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support_mask() == 0
    }

    /// True when the string contains only `I` and `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn count(&self, p: Pauli) -> usize {
        let m = match p {
            Pauli::I => return self.n - self.weight(),
            Pauli::X => self.x & !self.z,
            Pauli::Y => self.x & self.z,
            Pauli::Z => self.z & !self.x,
        };
        m.count_ones() as usize
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti.is_multiple_of(2)
    }

    /// Returns `(phase, product)` with `self * other = phase * product`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        check_same(self.n, other.n)?;
        let mut power = 0u8;
        for q in bits_ascending(self.support_mask() & other.support_mask()) {
            let (p, _) = self.get(q).product(other.get(q));
            power += p;
        }
        let product = PauliString { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z };
        Ok((Phase::from_power(power), product))
    }
}

fn bits_ascending(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let q = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(q)
        }
    })
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.weight().cmp(&other.weight()))
            .then_with(|| bits_ascending(self.support_mask()).cmp(bits_ascending(other.support_mask())))
            .then_with(|| {
                let a = bits_ascending(self.support_mask()).map(|q| self.get(q));
                let b = bits_ascending(other.support_mask()).map(|q| other.get(q));
                a.cmp(b)
            })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<char> = s.trim().chars().collect();
        let mut out =
            PauliString::identity(letters.len()).map_err(|_| Error::ParsePauli(format!("bad length in {s:?}")))?;
        for (q, c) in letters.into_iter().enumerate() {
            out.set(q, Pauli::try_from(c)?);
        }
        Ok(out)
    }
}

/// A Pauli string with a complex coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coeff: Complex64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coeff: Complex64, string: PauliString) -> Self {
        Self { coeff, string }
    }

    pub fn real(coeff: f64, string: PauliString) -> Self {
        Self::new(Complex64::new(coeff, 0.0), string)
    }

    pub fn num_qubits(&self) -> usize {
        self.string.num_qubits()
    }

    /// `[a, b] = ab - ba`, simplified. Empty when the strings commute.
    pub fn commutator(&self, other: &PauliTerm) -> Result<PauliSum> {
        check_same(self.num_qubits(), other.num_qubits())?;
        let mut out = PauliSum::new(self.num_qubits())?;
        if self.string.commutes_with(&other.string) {
            return Ok(out);
        }
        // Anticommuting strings: ab - ba = 2ab.
        let (phase, product) = self.string.multiply(&other.string)?;
        let coeff = 2.0 * self.coeff * other.coeff * phase.to_complex();
        out.push(PauliTerm::new(coeff, product))?;
        Ok(out.simplify(DEFAULT_SIMPLIFY_TOL))
    }
}

/// A weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn new(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self { n, terms: Vec::new() })
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        let mut sum = Self::new(n)?;
        for t in terms {
            sum.push(t)?;
        }
        Ok(sum)
    }

    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        check_same(self.n, term.num_qubits())?;
        self.terms.push(term);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn strings(&self) -> impl Iterator<Item = &PauliString> {
        self.terms.iter().map(|t| &t.string)
    }

    /// Merges like strings, drops terms with `|coeff| <= tol` and sorts canonically.
    pub fn simplify(&self, tol: f64) -> PauliSum {
        let mut sorted = self.terms.clone();
        sorted.sort_by_key(|t| t.string);
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(sorted.len());
        for t in sorted {
            match merged.last_mut() {
                Some(last) if last.string == t.string => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.norm() > tol);
        PauliSum { n: self.n, terms: merged }
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        PauliSum { n: self.n, terms: self.terms.iter().map(|t| PauliTerm::new(t.coeff * factor, t.string)).collect() }
    }

    /// Concatenation of terms; call [`simplify`](Self::simplify) to merge.
    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        check_same(self.n, other.n)?;
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(PauliSum { n: self.n, terms })
    }

    /// `[self, other]`, expanded term by term and simplified.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        check_same(self.n, other.n)?;
        let mut out = PauliSum::new(self.n)?;
        for a in &self.terms {
            for b in &other.terms {
                out.terms.extend(a.commutator(b)?.terms);
            }
        }
        Ok(out.simplify(DEFAULT_SIMPLIFY_TOL))
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.string.is_diagonal())
    }

    /// Largest imaginary coefficient magnitude.
    pub fn max_imag(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.im.abs()).fold(0.0, f64::max)
    }

    /// Value of a diagonal sum on the computational basis state with
    /// statevector index `index` (qubit 0 is the most significant bit).
    pub fn diagonal_entry(&self, index: u64) -> Result<Complex64> {
        if !self.is_diagonal() {
            return Err(Error::Precondition("diagonal_entry on a non-diagonal sum".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mask = qubit_mask_to_index_mask(t.string.z_mask(), self.n);
            if (index & mask).count_ones().is_multiple_of(2) {
                acc += t.coeff;
            } else {
                acc -= t.coeff;
            }
        }
        Ok(acc)
    }

    /// One `coeff_re coeff_im STRING` line per term, in stored order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!("{} {} {}\n", t.coeff.re, t.coeff.im, t.string));
        }
        out
    }

    /// Parses the format written by [`to_text`](Self::to_text). Blank lines
    /// and lines starting with `#` are ignored.
    pub fn from_text(n: usize, text: &str) -> Result<PauliSum> {
        let mut sum = PauliSum::new(n)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::ParsePauli(format!("line {}: {line:?}", lineno + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            let re: f64 = fields[0].parse().map_err(|_| bad())?;
            let im: f64 = fields[1].parse().map_err(|_| bad())?;
            let string: PauliString = fields[2].parse()?;
            sum.push(PauliTerm::new(Complex64::new(re, im), string))?;
        }
        Ok(sum)
    }
}

/// Maps a qubit-indexed bitmask onto statevector index bits, where qubit `q`
/// lives at bit `n - 1 - q`.
pub fn qubit_mask_to_index_mask(mask: u64, n: usize) -> u64 {
    bits_ascending(mask).fold(0, |acc, q| acc | 1u64 << (n - 1 - q))
}

/// `i [H_a(lambda), dH_a/dlambda]` with `H_a = (1 - lambda) H_m + lambda H_c`.
pub fn adiabatic_commutator(h_mixer: &PauliSum, h_cost: &PauliSum, lambda: f64) -> Result<PauliSum> {
    let h_a =
        h_mixer.scale(Complex64::new(1.0 - lambda, 0.0)).add(&h_cost.scale(Complex64::new(lambda, 0.0)))?.simplify(0.0);
    let dh = h_cost.add(&h_mixer.scale(Complex64::new(-1.0, 0.0)))?.simplify(0.0);
    Ok(h_a.commutator(&dh)?.scale(Complex64::i()).simplify(DEFAULT_SIMPLIFY_TOL))
}

/// First-order nested-commutator term `i [H_a, dH_a/dlambda]`.
///
/// The lambda dependence cancels at first order, leaving `i [H_m, H_c]`; the
/// result is therefore returned with its exact coefficients. Requires a
/// diagonal cost and a mixer made of single-qubit X terms.
pub fn nc_first_order(h_mixer: &PauliSum, h_cost: &PauliSum) -> Result<PauliSum> {
    check_same(h_mixer.num_qubits(), h_cost.num_qubits())?;
    if !h_cost.is_diagonal() {
        return Err(Error::Precondition("cost Hamiltonian must contain only Z/I letters".into()));
    }
    let mixer_ok = h_mixer.strings().all(|s| s.weight() == 1 && s.count(Pauli::X) == 1);
    if !mixer_ok {
        return Err(Error::Precondition("mixer must be a sum of single-qubit X terms".into()));
    }
    Ok(h_mixer.commutator(h_cost)?.scale(Complex64::i()).simplify(DEFAULT_SIMPLIFY_TOL))
}
