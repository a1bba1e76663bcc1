//! Minimal disturbance probability of a weak rotation.
//!
//! Decomposes `(U . U^dag + U^dag . U)/2 = (1 - p) I + p C` with `p`
//! minimal, shows `p ~ g^2` for a qubit rotation, cross-checks the
//! Choi-level bisection against the eigenphase closed form, and contrasts
//! the qubit with the qutrit, where three distinct eigenphases obstruct the
//! decomposition entirely.
//!
//! ```bash
//! cargo run --release -p qlr --example disturbance_scaling
//! ```

use qlr::channels::{closed_form_disturbance, minimal_disturbance, mix_with_depolarising};
use qlr::numkit::{expm_i_hermitian, pauli_x, ComplexMatrix};

fn main() -> Result<(), qlr::Error> {
    println!("qubit, U = exp(-i g sigma_x):");
    println!(
        "{:>10}  {:>14}  {:>14}  {:>10}",
        "g", "p_d (bisect)", "closed form", "p_d/g^2"
    );
    for k in 0..7 {
        let g = 1e-3 * 10f64.powf(k as f64 / 3.0);
        let u = expm_i_hermitian(&pauli_x(), g)?;
        let cert = minimal_disturbance(&u, 1e-9)?;
        let closed = closed_form_disturbance(&u, 1e-9)?;
        println!(
            "{g:>10.3e}  {:>14.6e}  {closed:>14.6e}  {:>10.6}",
            cert.p_d,
            cert.p_d / (g * g)
        );
    }
    println!("quadratic in the coupling, as the stochastic-reversibility picture demands.");
    println!();

    // Qutrit with two distinct eigenphases: still qubit-like.
    let g = 0.05;
    let u = expm_i_hermitian(&ComplexMatrix::diag_real(&[0.0, 0.0, 1.0]), g)?;
    let cert = minimal_disturbance(&u, 1e-9)?;
    println!(
        "qutrit with doubly degenerate phase (gap {g}): p_d = {:.6e} = (1 - cos g)/2",
        cert.p_d
    );

    // Qutrit with three distinct order-one eigenphases: the cosine Gram
    // matrix has rank 2 and cannot donate any identity weight, so the
    // minimal disturbance saturates.
    let u = expm_i_hermitian(&ComplexMatrix::diag_real(&[0.0, 0.4, 1.0]), 1.0)?;
    let cert = minimal_disturbance(&u, 1e-9)?;
    println!(
        "qutrit with three distinct phases:            p_d = {:.9} (no reversal possible)",
        cert.p_d
    );
    println!();

    let noisy = mix_with_depolarising(
        &minimal_disturbance(&expm_i_hermitian(&pauli_x(), 0.1)?, 1e-9)?,
        0.05,
    )?;
    println!(
        "depolarising admixture s = 0.05 on the g = 0.1 qubit rotation: p_d = {:.9}",
        noisy.p_d
    );
    println!(
        "(composition rule p = p_tilde + s (1 - p_tilde); reconstruction residual {:.2e})",
        noisy.reconstruction_residual()
    );
    Ok(())
}
