//! Brute-force oracle for the noncontextual response bound.
//!
//! Samples finite ontological models whose forward/reverse pair satisfies
//! the stochastic-reversibility constraint exactly, evaluates each model's
//! predicted response, and confirms `|response| <= 4 p_d o_max` throughout.
//!
//! ```bash
//! cargo run --release -p qlr --example om_oracle
//! ```

use qlr::ontomodel::{oracle_run, sample_constrained, TransformLabel};

fn main() -> Result<(), qlr::Error> {
    let (om, constraint) = sample_constrained(42, 5, 3, 0.15)?;
    println!("one sampled model (5 hidden states, 3 outcomes, p_d = 0.15):");
    println!("  mu = {:?}", om.mu);
    println!("  outcome values = {:?}", om.outcome_values);
    println!(
        "  constraint residual = {:.3e}",
        constraint.verified_residual
    );
    println!(
        "  response under forward / reverse / residual transforms: {:+.5e} / {:+.5e} / {:+.5e}",
        om.response_value(TransformLabel::Forward),
        om.response_value(TransformLabel::Reverse),
        om.response_value(TransformLabel::Residual),
    );
    println!(
        "  bound 4 p_d o_max = {:.5e}",
        4.0 * constraint.p_d * om.o_max()
    );
    println!();

    let samples = 100_000;
    println!("sampling {samples} constrained models (up to 6 states, 4 outcomes, p_d <= 0.2)...");
    let (report, _) = oracle_run(20260809, samples, 6, 4, 0.2)?;
    println!(
        "  violations of |response| <= 4 p_d o_max: {}",
        report.violations
    );
    println!(
        "  max |response| / (p_d o_max) = {:.6} (bound demands <= 4)",
        report.max_ratio
    );
    println!(
        "  max excess of the off-diagonal chain T <= 2 p_d T': {:.3e}",
        report.max_chain_excess
    );
    Ok(())
}
