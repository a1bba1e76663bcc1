//! End-to-end gap certification on the reference qubit.
//!
//! Checks the operational condition, sweeps the coupling, and compares the
//! measured response against the noncontextual ceiling `4 p_d o_max`.
//!
//! ```bash
//! cargo run --release -p qlr --example certify_qubit
//! ```

use qlr::certify::{certify_gap, CertifyOptions};
use qlr::dynamics::{DrivenSystem, Pulse};
use qlr::numkit::{c64, ket_density, pauli_x, ComplexMatrix};

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

fn main() -> Result<(), qlr::Error> {
    let rho0 = ket_density(&[c64(1.0, 0.0), c64(1.0, 0.0)]);
    let obs = ComplexMatrix::diag_real(&[0.0, 1.0]);
    let family = |g: f64| {
        DrivenSystem::new(
            ComplexMatrix::diag_real(&[0.0, 1.0]),
            Pulse::HalfSine(pauli_x()),
            g,
            1.0,
        )
    };
    let g_grid = logspace(1e-3, 1e-1, 20);
    let report = certify_gap(
        family,
        &rho0,
        &obs,
        1.0,
        &g_grid,
        &CertifyOptions::default(),
    )?;

    println!("operational condition: {:?}", report.condition.verdict);
    println!(
        "  alpha = {:?}, best C = {:.3e}, min eigenvalue = {:.3e}",
        report.condition.alpha, report.condition.c_used, report.condition.best_min_eigenvalue
    );
    println!();
    println!(
        "{:>10}  {:>13}  {:>12}  {:>12}  {:>4}",
        "g", "response", "p_d", "nc bound", "gap"
    );
    for i in 0..report.g_grid.len() {
        println!(
            "{:>10.3e}  {:>13.5e}  {:>12.5e}  {:>12.5e}  {:>4}",
            report.g_grid[i],
            report.response_exact[i],
            report.p_d[i],
            report.nc_bound[i],
            if report.gap_flags[i] { "yes" } else { "no" }
        );
    }
    println!();
    if let (Some(r), Some(b)) = (&report.response_fit, &report.bound_fit) {
        println!(
            "response slope = {:.4}, bound slope = {:.4}",
            r.slope, b.slope
        );
    }
    if let Some(g) = report.crossing {
        println!("fitted crossing at g* = {g:.4}");
    }
    println!("verdict: {:?}", report.verdict);
    Ok(())
}
