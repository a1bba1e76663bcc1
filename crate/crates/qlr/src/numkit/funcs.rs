//! Matrix functions built on the spectral decomposition.

use num_complex::Complex;

use super::eig::{hermitian_eig, unitary_eig};
use super::matrix::{Complex64, ComplexMatrix};
use crate::{Error, Result, DEFAULT_TOL};

/// `exp(-i s H)` for Hermitian `H` via spectral decomposition.
pub fn expm_i_hermitian(h: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h, DEFAULT_TOL)?;
    Ok(eig.apply_function(|x| Complex::from_polar(1.0, -s * x)))
}

/// Hermitian `H` with `U = exp(-i H)` and eigenphases in `(-pi, pi]`.
///
/// Reports `BranchAmbiguity` when an eigenphase sits within `tol` of pi,
/// where the principal branch is not well defined.
pub fn unitary_log(u: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = unitary_eig(u, tol)?;
    for &phase in &eig.phases {
        if (phase.abs() - std::f64::consts::PI).abs() <= tol {
            return Err(Error::BranchAmbiguity { phase });
        }
    }
    let n = u.dim();
    let mut out = ComplexMatrix::zeros(n);
    for k in 0..n {
        let lam = eig.phases[k];
        if lam == 0.0 {
            continue;
        }
        for r in 0..n {
            let vr = eig.eigenvectors.get(r, k) * Complex64::new(lam, 0.0);
            for c in 0..n {
                let add = vr * eig.eigenvectors.get(c, k).conj();
                out.set(r, c, out.get(r, c) + add);
            }
        }
    }
    Ok(out.hermitized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::matrix::{c64, pauli_x};

    #[test]
    fn zero_exponent_gives_identity() {
        let h = pauli_x();
        let u = expm_i_hermitian(&h, 0.0).unwrap();
        assert!(u.approx_eq(&ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn diagonal_phases() {
        let h = ComplexMatrix::diag_real(&[0.0, std::f64::consts::PI]);
        let u = expm_i_hermitian(&h, 1.0).unwrap();
        assert!(u.approx_eq(&ComplexMatrix::diag_real(&[1.0, -1.0]), 1e-14));
    }

    #[test]
    fn euler_formula_for_pauli_x() {
        // exp(-i theta sigma_x) = cos(theta) I - i sin(theta) sigma_x; at
        // theta = pi/2 this is -i sigma_x.
        let u = expm_i_hermitian(&pauli_x(), std::f64::consts::FRAC_PI_2).unwrap();
        let expected = pauli_x().scale(c64(0.0, -1.0));
        assert!(u.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn log_of_identity_is_zero() {
        let h = unitary_log(&ComplexMatrix::identity(3), 1e-10).unwrap();
        assert!(h.frobenius_norm() < 1e-12);
    }

    #[test]
    fn log_of_diagonal_phases() {
        let u = ComplexMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(0.0, 0.0)],
            vec![
                c64(0.0, 0.0),
                Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_3),
            ],
        ])
        .unwrap();
        let h = unitary_log(&u, 1e-10).unwrap();
        let expected = ComplexMatrix::diag_real(&[0.0, std::f64::consts::FRAC_PI_3]);
        assert!(h.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn branch_ambiguity_at_pi() {
        let u = ComplexMatrix::diag_real(&[1.0, -1.0]);
        assert!(matches!(
            unitary_log(&u, 1e-10),
            Err(Error::BranchAmbiguity { .. })
        ));
    }

    #[test]
    fn round_trip_log_exp() {
        // Hermitian with spectrum safely inside (-pi, pi).
        let h = ComplexMatrix::from_rows(&[
            vec![c64(0.4, 0.0), c64(0.3, 0.7), c64(0.0, -0.2)],
            vec![c64(0.3, -0.7), c64(-1.1, 0.0), c64(0.5, 0.0)],
            vec![c64(0.0, 0.2), c64(0.5, 0.0), c64(2.0, 0.0)],
        ])
        .unwrap();
        let u = expm_i_hermitian(&h, 1.0).unwrap();
        let back = unitary_log(&u, 1e-9).unwrap();
        assert!(back.approx_eq(&h, 1e-9));
    }
}
