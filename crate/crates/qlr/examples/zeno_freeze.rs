//! Zeno freezing: noncontextual model vs monitored Rabi oscillation.
//!
//! A noncontextual model with disturbance rate `p_d(t) = c t^2` survives `N`
//! projective checks with probability `(1 - c tau^2 / N^2)^N`; the monitored
//! qubit survives with `cos^{2N}(omega tau / 2N)`. Both freeze as `1 - O(1/N)`.
//! The constant `c` here is matched to the quantum system through the
//! disturbance constant of a small evolution step.
//!
//! ```bash
//! cargo run --release -p qlr --example zeno_freeze
//! ```

use qlr::certify::fit_scaling_exponent;
use qlr::metrology::disturbance_constant;
use qlr::numkit::pauli_x;
use qlr::ontomodel::{nc_zeno_survival, quantum_zeno_survival};

fn main() -> Result<(), qlr::Error> {
    let omega = std::f64::consts::PI;
    let tau = 1.0;
    // Matched noncontextual rate: p_d of a step of duration t under
    // exp(-i omega sigma_x t / 2) grows as c t^2.
    let c = disturbance_constant(&pauli_x().scale_re(omega / 2.0))?;
    println!("omega = pi, tau = 1, matched c = {c:.6} (= omega^2 / 4)");
    println!();
    println!(
        "{:>7}  {:>16}  {:>16}",
        "N", "NC survival", "quantum survival"
    );
    // N = 2 already satisfies c tau^2 / N^2 < 1 for the matched rate.
    let n_grid: Vec<u32> = vec![2, 3, 10, 32, 100, 316, 1000, 3162, 10000];
    let mut ns = Vec::new();
    let mut nc_deficit = Vec::new();
    let mut q_deficit = Vec::new();
    for &n in &n_grid {
        let nc = nc_zeno_survival(c, tau, n)?;
        let q = quantum_zeno_survival(omega, tau, n)?;
        println!("{n:>7}  {nc:>16.10}  {q:>16.10}");
        if n >= 10 {
            ns.push(n as f64);
            nc_deficit.push(1.0 - nc);
            q_deficit.push(1.0 - q);
        }
    }
    let nc_fit = fit_scaling_exponent(&ns, &nc_deficit)?;
    let q_fit = fit_scaling_exponent(&ns, &q_deficit)?;
    println!();
    println!("deficit 1 - survival shrinks as 1/N:");
    println!("  noncontextual model: slope {:.4}", nc_fit.slope);
    println!("  monitored qubit:     slope {:.4}", q_fit.slope);
    Ok(())
}
