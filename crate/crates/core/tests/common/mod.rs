//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's numerics.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nalgebra::Complex;

type Complex64 = Complex<f64>;

/// Matérn correlation written from the textbook closed forms.
pub fn matern(nu: f64, r: f64) -> f64 {
    if nu == 0.5 {
        (-r).exp()
    } else if nu == 1.5 {
        (1.0 + 3f64.sqrt() * r) * (-(3f64.sqrt()) * r).exp()
    } else {
        (1.0 + 5f64.sqrt() * r + 5.0 / 3.0 * r * r) * (-(5f64.sqrt()) * r).exp()
    }
}

#[derive(Clone, Debug)]
pub enum OracleKernel {
    Matern { nu: f64 },
    Periodic { period: f64 },
}

pub fn kernel(k: &OracleKernel, ls: &[f64], sf2: f64, a: &[f64], b: &[f64]) -> f64 {
    match k {
        OracleKernel::Matern { nu } => {
            let r = a
                .iter()
                .zip(b)
                .zip(ls)
                .map(|((x, y), l)| ((x - y) / l).powi(2))
                .sum::<f64>()
                .sqrt();
            sf2 * matern(*nu, r)
        }
        OracleKernel::Periodic { period } => {
            let s: f64 = a
                .iter()
                .zip(b)
                .zip(ls)
                .map(|((x, y), l)| (std::f64::consts::PI * (x - y) / period).sin().powi(2) / l)
                .sum();
            sf2 * (-2.0 * s).exp()
        }
    }
}

/// Posterior mean and variance from the explicit inverse of `K + σ² I`.
pub fn dense_posterior(
    k: &OracleKernel,
    ls: &[f64],
    sf2: f64,
    noise: f64,
    mean: f64,
    xs: &[Vec<f64>],
    ys: &[f64],
    q: &[f64],
) -> (f64, f64) {
    let n = xs.len();
    let kmat = DMatrix::from_fn(n, n, |i, j| {
        kernel(k, ls, sf2, &xs[i], &xs[j]) + if i == j { noise } else { 0.0 }
    });
    let inv = kmat.try_inverse().expect("invertible");
    let kstar = DVector::from_fn(n, |i, _| kernel(k, ls, sf2, q, &xs[i]));
    let resid = DVector::from_fn(n, |i, _| ys[i] - mean);
    let m = mean + (kstar.transpose() * &inv * resid)[(0, 0)];
    let v = kernel(k, ls, sf2, q, q) - (kstar.transpose() * &inv * &kstar)[(0, 0)];
    (m, v)
}

/// `log N(y; m, K + σ² I)` via the dense determinant and inverse.
pub fn dense_log_likelihood(
    k: &OracleKernel,
    ls: &[f64],
    sf2: f64,
    noise: f64,
    mean: f64,
    xs: &[Vec<f64>],
    ys: &[f64],
) -> f64 {
    let n = xs.len();
    let kmat = DMatrix::from_fn(n, n, |i, j| {
        kernel(k, ls, sf2, &xs[i], &xs[j]) + if i == j { noise } else { 0.0 }
    });
    let det = kmat.determinant();
    let inv = kmat.try_inverse().expect("invertible");
    let r = DVector::from_fn(n, |i, _| ys[i] - mean);
    -0.5 * (r.transpose() * inv * &r)[(0, 0)] - 0.5 * det.ln() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
}

pub type CMat = DMatrix<Complex64>;

fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn pauli(c: char) -> CMat {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match c {
        'I' => CMat::from_row_slice(2, 2, &[one, o, o, one]),
        'X' => CMat::from_row_slice(2, 2, &[o, one, one, o]),
        'Y' => CMat::from_row_slice(2, 2, &[o, -i, i, o]),
        'Z' => CMat::from_row_slice(2, 2, &[one, o, o, -one]),
        _ => panic!("bad pauli {c}"),
    }
}

/// Embeds single-qubit operators (`ops[i]` on qubit `i`) into the full
/// space, where qubit `i` is bit `i` of the basis index: the Kronecker
/// product runs from the highest qubit down to qubit 0.
fn embed(ops: &[CMat]) -> CMat {
    let mut m = CMat::identity(1, 1);
    for op in ops.iter().rev() {
        m = kron(&m, op);
    }
    m
}

pub fn pauli_matrix(s: &str) -> CMat {
    let ops: Vec<CMat> = s.chars().map(pauli).collect();
    embed(&ops)
}

pub fn hamiltonian_matrix(qubits: usize, terms: &[(f64, String)]) -> CMat {
    let dim = 1 << qubits;
    let mut h = CMat::zeros(dim, dim);
    for (c, p) in terms {
        h += pauli_matrix(p) * Complex64::new(*c, 0.0);
    }
    h
}

fn ry(theta: f64) -> CMat {
    let (s, c) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(
        2,
        2,
        &[Complex64::new(c, 0.0), Complex64::new(-s, 0.0), Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    )
}

/// CNOT as an explicit permutation matrix on basis indices.
fn cnot(qubits: usize, control: usize, target: usize) -> CMat {
    let dim = 1 << qubits;
    let mut m = CMat::zeros(dim, dim);
    for b in 0..dim {
        let out = if b >> control & 1 == 1 { b ^ (1 << target) } else { b };
        m[(out, b)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Full circuit unitary: per layer, RY on every qubit then a CNOT chain.
pub fn ansatz_unitary(qubits: usize, layers: usize, theta: &[f64]) -> CMat {
    let dim = 1 << qubits;
    let mut u = CMat::identity(dim, dim);
    for l in 0..layers {
        let rots: Vec<CMat> = (0..qubits).map(|i| ry(theta[l * qubits + i])).collect();
        u = embed(&rots) * u;
        for c in 0..qubits.saturating_sub(1) {
            u = cnot(qubits, c, c + 1) * u;
        }
    }
    u
}

pub fn dense_energy(qubits: usize, layers: usize, terms: &[(f64, String)], theta: &[f64]) -> f64 {
    let u = ansatz_unitary(qubits, layers, theta);
    let psi = u.column(0).into_owned();
    let h = hamiltonian_matrix(qubits, terms);
    (psi.adjoint() * h * &psi)[(0, 0)].re
}

/// Circular distance on `[0, 2π)`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}
