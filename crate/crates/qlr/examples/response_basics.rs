//! Exact vs first-order linear response on a driven qubit.
//!
//! Propagates `h0 + g V(t)` exactly, evaluates the first-order commutator
//! formula, and shows the two agree to second order in the coupling.
//!
//! ```bash
//! cargo run --release -p qlr --example response_basics
//! ```

use qlr::certify::fit_scaling_exponent;
use qlr::dynamics::{response_exact, response_linear, DrivenSystem, Pulse};
use qlr::numkit::{c64, ket_density, pauli_x, ComplexMatrix};

fn main() -> Result<(), qlr::Error> {
    let h0 = ComplexMatrix::diag_real(&[0.0, 1.0]);
    let rho0 = ket_density(&[c64(1.0, 0.0), c64(1.0, 0.0)]);
    let obs = ComplexMatrix::diag_real(&[0.0, 1.0]);
    let t = 1.0;

    println!("driven qubit: h0 = diag(0, 1), V(t) = sin(pi t) sigma_x, rho0 = |+><+|");
    println!();
    println!(
        "{:>10}  {:>14}  {:>14}  {:>10}",
        "g", "exact", "first order", "|diff|"
    );
    let g_grid: Vec<f64> = (0..10)
        .map(|k| 10f64.powf(-3.0 + 2.0 * k as f64 / 9.0))
        .collect();
    let mut exact = Vec::new();
    let mut diffs = Vec::new();
    for &g in &g_grid {
        let sys = DrivenSystem::new(h0.clone(), Pulse::HalfSine(pauli_x()), g, 1.0)?;
        let e = response_exact(&sys, &rho0, &obs, t, 1024)?.delta_o;
        let l = response_linear(&sys, &rho0, &obs, t, 512)?.delta_o;
        println!(
            "{g:>10.3e}  {e:>14.6e}  {l:>14.6e}  {:>10.3e}",
            (e - l).abs()
        );
        exact.push(e);
        diffs.push(e - l);
    }

    let response_fit = fit_scaling_exponent(&g_grid, &exact)?;
    let diff_fit = fit_scaling_exponent(&g_grid, &diffs)?;
    println!();
    println!(
        "response scaling exponent:   {:.4} (linear in g)",
        response_fit.slope
    );
    println!(
        "truncation-error exponent:   {:.4} (second order or better)",
        diff_fit.slope
    );
    Ok(())
}
