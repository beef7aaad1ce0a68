//! Dense statevector simulation of layered RY + CNOT-chain ansatz circuits
//! and Pauli-sum expectation values.
//!
//! Qubit `i` is bit `i` of the basis-state index, and character `i` of a
//! Pauli string acts on qubit `i`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = nalgebra::Complex<f64>;

pub const MAX_QUBITS: usize = 12;

/// A tensor product of single-qubit Paulis, stored as X/Z bit masks
/// (`Y` sets both).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    len: usize,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// `P|x⟩ = phase(x) |x ⊕ x_mask⟩`.
    #[inline]
    fn phase(&self, x: usize) -> Complex {
        let sign = if ((x as u64) & self.z_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        // i^{#Y}
        match self.y_count() % 4 {
            0 => Complex::new(sign, 0.0),
            1 => Complex::new(0.0, sign),
            2 => Complex::new(-sign, 0.0),
            _ => Complex::new(0.0, -sign),
        }
    }

    /// `⟨ψ|P|ψ⟩` (real for Hermitian `P`).
    pub fn expectation(&self, state: &[Complex]) -> f64 {
        let flip = self.x_mask as usize;
        let mut acc = Complex::new(0.0, 0.0);
        for (x, amp) in state.iter().enumerate() {
            acc += state[x ^ flip].conj() * self.phase(x) * amp;
        }
        acc.re
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > 64 {
            return Err(Error::InvalidObjective(format!("bad Pauli string length: {s:?}")));
        }
        let (mut x_mask, mut z_mask) = (0u64, 0u64);
        for (i, c) in s.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x_mask |= 1 << i,
                'Z' => z_mask |= 1 << i,
                'Y' => {
                    x_mask |= 1 << i;
                    z_mask |= 1 << i;
                }
                other => {
                    return Err(Error::InvalidObjective(format!(
                        "invalid Pauli character {other:?} in {s:?}"
                    )))
                }
            }
        }
        Ok(PauliString {
            len: s.len(),
            x_mask,
            z_mask,
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            let c = match ((self.x_mask >> i) & 1, (self.z_mask >> i) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub pauli: PauliString,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Hamiltonian {
    pub fn new(qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::ObjectiveTooLarge(format!(
                "{qubits} qubits (supported: 1..={MAX_QUBITS})"
            )));
        }
        for t in &terms {
            if t.pauli.len() != qubits {
                return Err(Error::InvalidObjective(format!(
                    "Pauli string {} has length {}, expected {qubits}",
                    t.pauli,
                    t.pauli.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidObjective("non-finite coefficient".into()));
            }
        }
        Ok(Hamiltonian { qubits, terms })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn expectation(&self, state: &[Complex]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.pauli.expectation(state))
            .sum()
    }

    /// Dense `2^q × 2^q` matrix.
    pub fn to_dense(&self) -> DMatrix<Complex> {
        let dim = 1usize << self.qubits;
        let mut h = DMatrix::from_element(dim, dim, Complex::new(0.0, 0.0));
        for t in &self.terms {
            let flip = t.pauli.x_mask as usize;
            for x in 0..dim {
                h[(x ^ flip, x)] += t.pauli.phase(x) * t.coeff;
            }
        }
        h
    }
}

/// `layers` repetitions of per-qubit RY rotations followed by a CNOT chain
/// `(0→1), (1→2), …`. Parameter `l·q + i` drives qubit `i` in layer `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ansatz {
    pub qubits: usize,
    pub layers: usize,
}

impl Ansatz {
    pub fn dim(&self) -> usize {
        self.qubits * self.layers
    }

    pub fn state(&self, theta: &[f64]) -> Vec<Complex> {
        debug_assert_eq!(theta.len(), self.dim());
        let mut psi = vec![Complex::new(0.0, 0.0); 1 << self.qubits];
        psi[0] = Complex::new(1.0, 0.0);
        for layer in 0..self.layers {
            for q in 0..self.qubits {
                apply_ry(&mut psi, q, theta[layer * self.qubits + q]);
            }
            for q in 0..self.qubits.saturating_sub(1) {
                apply_cnot(&mut psi, q, q + 1);
            }
        }
        psi
    }
}

pub(crate) fn apply_ry(psi: &mut [Complex], qubit: usize, angle: f64) {
    let (s, c) = (angle / 2.0).sin_cos();
    let bit = 1usize << qubit;
    for x in 0..psi.len() {
        if x & bit == 0 {
            let a0 = psi[x];
            let a1 = psi[x | bit];
            psi[x] = a0 * c - a1 * s;
            psi[x | bit] = a0 * s + a1 * c;
        }
    }
}

pub(crate) fn apply_cnot(psi: &mut [Complex], control: usize, target: usize) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for x in 0..psi.len() {
        if x & cb != 0 && x & tb == 0 {
            psi.swap(x, x | tb);
        }
    }
}

/// `⟨ψ(θ)| H |ψ(θ)⟩` for the given ansatz.
pub fn expectation(ansatz: &Ansatz, hamiltonian: &Hamiltonian, theta: &[f64]) -> f64 {
    hamiltonian.expectation(&ansatz.state(theta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub coeff: f64,
    pub pauli: String,
}

/// On-disk form: `{qubits, layers, terms: [{coeff, pauli}]}` plus an
/// optional single-shot variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub qubits: usize,
    pub layers: usize,
    pub terms: Vec<TermConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitObjective {
    pub ansatz: Ansatz,
    pub hamiltonian: Hamiltonian,
}

impl CircuitObjective {
    pub fn new(ansatz: Ansatz, hamiltonian: Hamiltonian) -> Result<Self> {
        if ansatz.qubits != hamiltonian.qubits() {
            return Err(Error::InvalidObjective(format!(
                "ansatz has {} qubits, Hamiltonian {}",
                ansatz.qubits,
                hamiltonian.qubits()
            )));
        }
        if ansatz.layers == 0 {
            return Err(Error::InvalidObjective("ansatz needs at least one layer".into()));
        }
        Ok(CircuitObjective {
            ansatz,
            hamiltonian,
        })
    }

    pub fn from_config(cfg: &CircuitConfig) -> Result<Self> {
        let terms = cfg
            .terms
            .iter()
            .map(|t| {
                Ok(PauliTerm {
                    coeff: t.coeff,
                    pauli: t.pauli.parse()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            Ansatz {
                qubits: cfg.qubits,
                layers: cfg.layers,
            },
            Hamiltonian::new(cfg.qubits, terms)?,
        )
    }

    pub fn dim(&self) -> usize {
        self.ansatz.dim()
    }

    pub fn energy(&self, theta: &[f64]) -> f64 {
        expectation(&self.ansatz, &self.hamiltonian, theta)
    }
}
