//! Dense square complex matrices.
//!
//! The carrier type for states, observables, unitaries and Choi matrices.
//! Entries are stored row-major; all operations are pure and the type is
//! immutable once constructed (mutation helpers are crate-internal).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::{Error, Result};

/// Double-precision complex scalar used throughout the crate.
pub type Complex64 = Complex<f64>;

/// Shorthand complex constructor.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from a flat row-major entry vector of length `dim * dim`.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadParameters {
                reason: "matrix dimension must be >= 1".into(),
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    /// Build from nested rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_entries(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.entries[k * dim + k] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag_real(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (k, &v) in values.iter().enumerate() {
            m.entries[k * dim + k] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.entries[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.entries[c * n + r] = self.entries[r * n + c];
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.entries[k * self.dim + k]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `A - A^dagger`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                let d = self.entries[r * n + c] - self.entries[c * n + r].conj();
                acc += d.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Frobenius norm of `A^dagger A - I`.
    pub fn unitary_residual(&self) -> f64 {
        let gram = &self.adjoint() * self;
        (&gram - &Self::identity(self.dim)).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol * self.frobenius_norm().max(1.0)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_residual() <= tol * (self.dim as f64).sqrt().max(1.0)
    }

    /// Entrywise closeness, scaled by the larger of the two norms (floor 1).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let scale = self.frobenius_norm().max(other.frobenius_norm()).max(1.0);
        (self - other).frobenius_norm() <= tol * scale
    }

    /// `(A + A^dagger) / 2`; used to scrub rounding noise off Hermitian results.
    pub fn hermitized(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let v = (self.entries[r * n + c] + self.entries[c * n + r].conj()) * 0.5;
                out.entries[r * n + c] = v;
            }
        }
        out
    }

    /// Kronecker product, `self` acting on the first (leftmost) factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let dim = da * db;
        let mut out = Self::zeros(dim);
        for ra in 0..da {
            for ca in 0..da {
                let a = self.entries[ra * da + ca];
                for rb in 0..db {
                    for cb in 0..db {
                        out.entries[(ra * db + rb) * dim + (ca * db + cb)] =
                            a * other.entries[rb * db + cb];
                    }
                }
            }
        }
        out
    }

    /// Partial trace over the first factor of a `d1 x d2` tensor structure.
    pub fn partial_trace_first(&self, d1: usize, d2: usize) -> Result<Self> {
        if d1 * d2 != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: d1 * d2,
            });
        }
        let mut out = Self::zeros(d2);
        for a in 0..d1 {
            for rb in 0..d2 {
                for cb in 0..d2 {
                    let v = self.entries[(a * d2 + rb) * self.dim + (a * d2 + cb)];
                    out.entries[rb * d2 + cb] += v;
                }
            }
        }
        Ok(out)
    }

    /// Partial trace over the second factor of a `d1 x d2` tensor structure.
    pub fn partial_trace_second(&self, d1: usize, d2: usize) -> Result<Self> {
        if d1 * d2 != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: d1 * d2,
            });
        }
        let mut out = Self::zeros(d1);
        for ra in 0..d1 {
            for ca in 0..d1 {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..d2 {
                    acc += self.entries[(ra * d2 + b) * self.dim + (ca * d2 + b)];
                }
                out.entries[ra * d1 + ca] = acc;
            }
        }
        Ok(out)
    }

    /// Column `k` as a vector.
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim)
            .map(|r| self.entries[r * self.dim + k])
            .collect()
    }

    /// Apply to a vector.
    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        assert_eq!(v.len(), n, "vector length must match matrix dimension");
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for r in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..n {
                acc += self.entries[r * n + c] * v[c];
            }
            out[r] = acc;
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix(dim={})", self.dim)?;
        for r in 0..self.dim {
            write!(f, "  [")?;
            for c in 0..self.dim {
                let e = self.get(r, c);
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:+.4}{:+.4}i", e.re, e.im)?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix addition");
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.dim, rhs.dim,
            "dimension mismatch in matrix subtraction"
        );
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.entries[r * n + c] += a * rhs.entries[k * n + c];
                }
            }
        }
        out
    }
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * b) - &(b * a)
}

/// Inner product of two vectors, conjugating the first argument.
pub fn vec_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Projector `|v><v|` from an unnormalized vector.
pub fn projector(v: &[Complex64]) -> ComplexMatrix {
    let n = v.len();
    let norm_sq: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let mut m = ComplexMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            m.entries[r * n + c] = v[r] * v[c].conj() / norm_sq;
        }
    }
    m
}

/// Density matrix of the pure state with the given (unnormalized) amplitudes.
pub fn ket_density(amplitudes: &[Complex64]) -> ComplexMatrix {
    projector(amplitudes)
}

/// Computational basis vector `|k>`.
pub fn basis_ket(dim: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![c64(0.0, 0.0), c64(1.0, 0.0)],
        vec![c64(1.0, 0.0), c64(0.0, 0.0)],
    ])
    .expect("static 2x2")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![c64(0.0, 0.0), c64(0.0, -1.0)],
        vec![c64(0.0, 1.0), c64(0.0, 0.0)],
    ])
    .expect("static 2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diag_real(&[1.0, -1.0])
}
