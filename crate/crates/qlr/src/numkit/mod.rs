//! Self-contained dense complex linear algebra and quadrature primitives.
//!
//! Sized for the small Hilbert-space dimensions this crate works with
//! (d up to ~8, Choi matrices up to d^2). Everything is deterministic:
//! same input bits, same output bits.

mod eig;
mod funcs;
mod matrix;
mod quad;

pub use eig::{hermitian_eig, unitary_eig, HermitianEig, UnitaryEig};
pub use funcs::{expm_i_hermitian, unitary_log};
pub use matrix::{
    basis_ket, c64, commutator, ket_density, pauli_x, pauli_y, pauli_z, projector, vec_inner,
    Complex64, ComplexMatrix,
};
pub use quad::{simpson_integrate, simpson_integrate_scalar};
