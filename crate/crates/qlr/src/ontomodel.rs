//! Finite ontological-model simulator.
//!
//! A model over `n_lambda` hidden states carries a preparation distribution,
//! column-stochastic transition matrices for the forward evolution, its
//! reversal partner and the residual channel, a response matrix for the
//! measurement, and nonnegative outcome values. The constrained sampler
//! builds models that satisfy the stochastic-reversibility constraint
//! `(T + T*)/2 = (1 - p_d) I + p_d T'` exactly by construction, and the
//! predicted responses of those models brute-force the `4 p_d o_max` bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Which transition matrix a statistic is computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformLabel {
    /// The driven evolution `T`.
    Forward,
    /// Its reversal partner `T*`.
    Reverse,
    /// The residual channel `T'` of the constraint.
    Residual,
    /// Do nothing; represented by the exact identity matrix, since one way
    /// to realize it is to let no time pass.
    Identity,
}

/// Verified stochastic-reversibility constraint of a sampled model.
#[derive(Debug, Clone, Copy)]
pub struct NcConstraint {
    pub p_d: f64,
    /// Max-norm residual of `(T + T*)/2 - (1 - p_d) I - p_d T'`.
    pub verified_residual: f64,
}

/// A finite noncontextual ontological model.
///
/// Transition matrices are column-stochastic with entry `[row = to,
/// col = from]`; the response matrix has entry `[row = outcome,
/// col = lambda]` with columns summing to one.
#[derive(Debug, Clone)]
pub struct FiniteOm {
    pub n_lambda: usize,
    pub n_outcomes: usize,
    /// Preparation distribution over hidden states.
    pub mu: Vec<f64>,
    pub forward: Vec<f64>,
    pub reverse: Vec<f64>,
    pub residual: Vec<f64>,
    pub response: Vec<f64>,
    /// Nonnegative outcome values `o_k`.
    pub outcome_values: Vec<f64>,
}

impl FiniteOm {
    fn transition(&self, label: TransformLabel) -> Option<&[f64]> {
        match label {
            TransformLabel::Forward => Some(&self.forward),
            TransformLabel::Reverse => Some(&self.reverse),
            TransformLabel::Residual => Some(&self.residual),
            TransformLabel::Identity => None,
        }
    }

    /// Outcome distribution `p(k) = sum_{l, l'} mu(l) T(l'|l) xi(k|l')`.
    ///
    /// Summation order is fixed (outcome, then source state, then target
    /// state) so results are bit-for-bit reproducible.
    pub fn statistics(&self, label: TransformLabel) -> Vec<f64> {
        let n = self.n_lambda;
        let mut p = vec![0.0; self.n_outcomes];
        match self.transition(label) {
            None => {
                for (k, pk) in p.iter_mut().enumerate() {
                    for l in 0..n {
                        *pk += self.mu[l] * self.response[k * n + l];
                    }
                }
            }
            Some(t) => {
                for (k, pk) in p.iter_mut().enumerate() {
                    for l in 0..n {
                        for l2 in 0..n {
                            *pk += self.mu[l] * t[l2 * n + l] * self.response[k * n + l2];
                        }
                    }
                }
            }
        }
        p
    }

    /// Predicted response `sum_k o_k [p(k | label) - p(k | identity)]`.
    pub fn response_value(&self, label: TransformLabel) -> f64 {
        let with = self.statistics(label);
        let without = self.statistics(TransformLabel::Identity);
        self.outcome_values
            .iter()
            .zip(with.iter().zip(&without))
            .map(|(o, (a, b))| o * (a - b))
            .sum()
    }

    /// Largest outcome value.
    pub fn o_max(&self) -> f64 {
        self.outcome_values.iter().copied().fold(0.0, f64::max)
    }

    /// Check stochasticity and normalization invariants.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.n_lambda;
        let sum_mu: f64 = self.mu.iter().sum();
        if (sum_mu - 1.0).abs() > tol || self.mu.iter().any(|&x| x < -tol) {
            return Err(Error::BadParameters {
                reason: "preparation distribution not normalized".into(),
            });
        }
        for (name, t) in [
            ("forward", &self.forward),
            ("reverse", &self.reverse),
            ("residual", &self.residual),
        ] {
            for col in 0..n {
                let mut sum = 0.0;
                for row in 0..n {
                    let v = t[row * n + col];
                    if !(-tol..=1.0 + tol).contains(&v) {
                        return Err(Error::BadParameters {
                            reason: format!("{name}[{row},{col}] = {v} outside [0, 1]"),
                        });
                    }
                    sum += v;
                }
                if (sum - 1.0).abs() > tol {
                    return Err(Error::BadParameters {
                        reason: format!("{name} column {col} sums to {sum}"),
                    });
                }
            }
        }
        for col in 0..n {
            let mut sum = 0.0;
            for k in 0..self.n_outcomes {
                let v = self.response[k * n + col];
                if !(-tol..=1.0 + tol).contains(&v) {
                    return Err(Error::BadParameters {
                        reason: format!("response[{k},{col}] = {v} outside [0, 1]"),
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > tol {
                return Err(Error::BadParameters {
                    reason: format!("response column {col} sums to {sum}"),
                });
            }
        }
        if self.outcome_values.iter().any(|&o| o < 0.0) {
            return Err(Error::BadParameters {
                reason: "negative outcome value".into(),
            });
        }
        Ok(())
    }
}

fn flat_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Normalized exponentials sample the flat Dirichlet.
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    v
}

/// Sample a model satisfying the reversibility constraint exactly.
///
/// The base `B = (1 - p_d) I + p_d T'` is split as `T = B + A`,
/// `T* = B - A` with `A` a zero-column-sum perturbation rescaled by the
/// largest factor keeping both sides stochastic (times a uniform draw), so
/// the constraint holds by construction instead of by rejection. The seed
/// fully determines the model.
pub fn sample_constrained(
    seed: u64,
    n_lambda: usize,
    n_outcomes: usize,
    p_d: f64,
) -> Result<(FiniteOm, NcConstraint)> {
    if n_lambda < 1 || n_outcomes < 1 {
        return Err(Error::BadParameters {
            reason: "need at least one hidden state and one outcome".into(),
        });
    }
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::BadInputRange {
            name: "p_d",
            value: p_d,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_lambda;

    // Draw order is part of the determinism contract: preparation,
    // response columns, outcome values, residual columns, perturbation,
    // perturbation scale.
    let mu = flat_simplex(&mut rng, n);
    let mut response = vec![0.0; n_outcomes * n];
    for col in 0..n {
        let column = flat_simplex(&mut rng, n_outcomes);
        for (k, &v) in column.iter().enumerate() {
            response[k * n + col] = v;
        }
    }
    let outcome_values: Vec<f64> = (0..n_outcomes).map(|_| rng.gen::<f64>()).collect();
    let mut residual = vec![0.0; n * n];
    for col in 0..n {
        let column = flat_simplex(&mut rng, n);
        for (row, &v) in column.iter().enumerate() {
            residual[row * n + col] = v;
        }
    }

    let mut base = vec![0.0; n * n];
    for row in 0..n {
        for col in 0..n {
            let id = if row == col { 1.0 } else { 0.0 };
            base[row * n + col] = (1.0 - p_d) * id + p_d * residual[row * n + col];
        }
    }

    // Zero-column-sum perturbation.
    let mut perturbation: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for col in 0..n {
        let mean: f64 = (0..n).map(|row| perturbation[row * n + col]).sum::<f64>() / n as f64;
        for row in 0..n {
            perturbation[row * n + col] -= mean;
        }
    }
    // Largest factor keeping B +- c A entrywise inside [0, 1].
    let mut c_max = f64::INFINITY;
    for i in 0..n * n {
        let a = perturbation[i].abs();
        if a > 0.0 {
            let b = base[i];
            c_max = c_max.min(b.min(1.0 - b) / a);
        }
    }
    if !c_max.is_finite() {
        c_max = 0.0;
    }
    let scale = c_max * rng.gen::<f64>();
    let mut forward = base.clone();
    let mut reverse = base.clone();
    for i in 0..n * n {
        forward[i] += scale * perturbation[i];
        reverse[i] -= scale * perturbation[i];
    }

    let om = FiniteOm {
        n_lambda,
        n_outcomes,
        mu,
        forward,
        reverse,
        residual,
        response,
        outcome_values,
    };
    om.validate(1e-9)?;

    let mut verified_residual = 0.0_f64;
    for row in 0..n {
        for col in 0..n {
            let id = if row == col { 1.0 } else { 0.0 };
            let lhs = 0.5 * om.forward[row * n + col] + 0.5 * om.reverse[row * n + col];
            let rhs = (1.0 - p_d) * id + p_d * om.residual[row * n + col];
            verified_residual = verified_residual.max((lhs - rhs).abs());
        }
    }
    if verified_residual > 1e-12 {
        return Err(Error::CrossCheck {
            detail: format!("constraint residual {verified_residual:.3e}"),
        });
    }
    Ok((
        om,
        NcConstraint {
            p_d,
            verified_residual,
        },
    ))
}

/// Aggregate of a brute-force oracle run over sampled constrained models.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest observed `|response| / (p_d * o_max)`; the bound demands <= 4.
    pub max_ratio: f64,
    /// Largest observed residual of the one-sided off-diagonal chain
    /// `T(l'|l) <= 2 p_d T'(l'|l)`.
    pub max_chain_excess: f64,
}

/// Per-sample record from an oracle run.
#[derive(Debug, Clone, Copy)]
pub struct OracleSample {
    pub seed: u64,
    pub n_lambda: usize,
    pub n_outcomes: usize,
    pub p_d: f64,
    pub o_max: f64,
    pub response: f64,
    pub bound: f64,
}

/// Sample `count` constrained models and test each predicted response
/// against the noncontextual bound `4 p_d o_max`.
///
/// Also checks the off-diagonal chain inequality implied by the constraint.
/// Deterministic in the master seed; samples are independent and evaluated
/// in parallel.
pub fn oracle_run(
    master_seed: u64,
    count: usize,
    max_lambda: usize,
    max_outcomes: usize,
    max_pd: f64,
) -> Result<(OracleReport, Vec<OracleSample>)> {
    if max_lambda < 1 || max_outcomes < 1 || count < 1 {
        return Err(Error::BadParameters {
            reason: "count, max_lambda and max_outcomes must be >= 1".into(),
        });
    }
    if !(0.0..=1.0).contains(&max_pd) {
        return Err(Error::BadInputRange {
            name: "max_pd",
            value: max_pd,
        });
    }
    let mut master = ChaCha8Rng::seed_from_u64(master_seed);
    let params: Vec<(u64, usize, usize, f64)> = (0..count)
        .map(|_| {
            (
                master.gen::<u64>(),
                master.gen_range(1..=max_lambda),
                master.gen_range(1..=max_outcomes),
                master.gen::<f64>() * max_pd,
            )
        })
        .collect();

    let samples: Vec<Result<(OracleSample, f64)>> = params
        .par_iter()
        .map(|&(seed, n_lambda, n_outcomes, p_d)| {
            let (om, constraint) = sample_constrained(seed, n_lambda, n_outcomes, p_d)?;
            let response = om.response_value(TransformLabel::Forward);
            let bound = 4.0 * constraint.p_d * om.o_max();
            let mut chain_excess = 0.0_f64;
            for row in 0..n_lambda {
                for col in 0..n_lambda {
                    if row != col {
                        let lhs = om.forward[row * n_lambda + col];
                        let rhs = 2.0 * p_d * om.residual[row * n_lambda + col];
                        chain_excess = chain_excess.max(lhs - rhs);
                    }
                }
            }
            Ok((
                OracleSample {
                    seed,
                    n_lambda,
                    n_outcomes,
                    p_d,
                    o_max: om.o_max(),
                    response,
                    bound,
                },
                chain_excess,
            ))
        })
        .collect();

    let mut violations = 0;
    let mut max_ratio = 0.0_f64;
    let mut max_chain_excess = 0.0_f64;
    let mut rows = Vec::with_capacity(count);
    for s in samples {
        let (sample, chain) = s?;
        if sample.response.abs() > sample.bound + 1e-12 {
            violations += 1;
        }
        let denom = sample.p_d * sample.o_max;
        if denom > 1e-12 {
            max_ratio = max_ratio.max(sample.response.abs() / denom);
        }
        max_chain_excess = max_chain_excess.max(chain);
        rows.push(sample);
    }
    Ok((
        OracleReport {
            samples: count,
            violations,
            max_ratio,
            max_chain_excess,
        },
        rows,
    ))
}

/// Survival probability `(1 - c tau^2 / N^2)^N` of the noncontextual Zeno
/// model with disturbance rate `p_d(t) = c t^2` and `N` projective checks.
pub fn nc_zeno_survival(c: f64, tau: f64, n: u32) -> Result<f64> {
    if n < 1 || !(c >= 0.0) {
        return Err(Error::BadParameters {
            reason: format!("need c >= 0 and N >= 1, got c = {c}, N = {n}"),
        });
    }
    let step = c * tau * tau / (n as f64 * n as f64);
    if step > 1.0 {
        return Err(Error::BadParameters {
            reason: format!("c tau^2 / N^2 = {step} exceeds 1"),
        });
    }
    Ok((1.0 - step).powi(n as i32))
}

/// Survival probability of a qubit Rabi oscillation interrupted by `N`
/// projective measurements onto the initial state: simulated step by step
/// and cross-checked against `cos^{2N}(omega tau / 2N)`.
pub fn quantum_zeno_survival(omega: f64, tau: f64, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::BadParameters {
            reason: "N must be >= 1".into(),
        });
    }
    let theta = omega * tau / (2.0 * n as f64);
    let (c, s) = (theta.cos(), theta.sin());
    // Step unitary exp(-i theta sigma_x) = [[c, -is], [-is, c]].
    let u00 = num_complex::Complex::new(c, 0.0);
    let u01 = num_complex::Complex::new(0.0, -s);
    let mut survival = 1.0_f64;
    let mut state = [
        num_complex::Complex::new(1.0, 0.0),
        num_complex::Complex::new(0.0, 0.0),
    ];
    for _ in 0..n {
        let a0 = u00 * state[0] + u01 * state[1];
        let p0 = a0.norm_sqr();
        survival *= p0;
        // Project onto |0> and renormalize.
        state = [
            num_complex::Complex::new(1.0, 0.0),
            num_complex::Complex::new(0.0, 0.0),
        ];
    }
    let closed_form = c.powi(2 * n as i32);
    assert!(
        (survival - closed_form).abs() <= 1e-10,
        "stepwise simulation drifted from cos^2N: {survival} vs {closed_form}"
    );
    Ok(survival)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_statistics_reflect_preparation() {
        // Deterministic response: outcome k supported on state k.
        let om = FiniteOm {
            n_lambda: 2,
            n_outcomes: 2,
            mu: vec![0.3, 0.7],
            forward: vec![1.0, 0.0, 0.0, 1.0],
            reverse: vec![1.0, 0.0, 0.0, 1.0],
            residual: vec![1.0, 0.0, 0.0, 1.0],
            response: vec![1.0, 0.0, 0.0, 1.0],
            outcome_values: vec![0.0, 1.0],
        };
        om.validate(1e-12).unwrap();
        let p = om.statistics(TransformLabel::Identity);
        assert_eq!(p, vec![0.3, 0.7]);
        assert_eq!(om.response_value(TransformLabel::Identity), 0.0);
    }

    #[test]
    fn uniform_preparation_is_swap_invariant() {
        let swap = vec![0.0, 1.0, 1.0, 0.0];
        let om = FiniteOm {
            n_lambda: 2,
            n_outcomes: 2,
            mu: vec![0.5, 0.5],
            forward: swap.clone(),
            reverse: swap.clone(),
            residual: swap,
            response: vec![1.0, 0.0, 0.0, 1.0],
            outcome_values: vec![0.0, 1.0],
        };
        let swapped = om.statistics(TransformLabel::Forward);
        let idle = om.statistics(TransformLabel::Identity);
        assert_eq!(swapped, idle);
    }

    #[test]
    fn statistics_match_independent_triple_loop() {
        let (om, _) = sample_constrained(99, 5, 3, 0.15).unwrap();
        let p = om.statistics(TransformLabel::Forward);
        // Independent re-summation in the documented order.
        let n = om.n_lambda;
        for k in 0..om.n_outcomes {
            let mut acc = 0.0;
            for l in 0..n {
                for l2 in 0..n {
                    acc += om.mu[l] * om.forward[l2 * n + l] * om.response[k * n + l2];
                }
            }
            assert_eq!(acc, p[k], "summation order must match bit-for-bit");
        }
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn zero_disturbance_forces_identity() {
        let (om, constraint) = sample_constrained(7, 4, 3, 0.0).unwrap();
        assert_eq!(constraint.p_d, 0.0);
        for row in 0..4 {
            for col in 0..4 {
                let expected = if row == col { 1.0 } else { 0.0 };
                assert_eq!(om.forward[row * 4 + col], expected);
                assert_eq!(om.reverse[row * 4 + col], expected);
            }
        }
        assert!(om.response_value(TransformLabel::Forward).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic() {
        let (a, _) = sample_constrained(123456, 6, 4, 0.18).unwrap();
        let (b, _) = sample_constrained(123456, 6, 4, 0.18).unwrap();
        assert_eq!(a.mu, b.mu);
        assert_eq!(a.forward, b.forward);
        assert_eq!(a.reverse, b.reverse);
        assert_eq!(a.response, b.response);
        assert_eq!(a.outcome_values, b.outcome_values);
    }

    #[test]
    fn sampled_models_respect_the_bound() {
        let (report, samples) = oracle_run(2024, 2000, 6, 4, 0.2).unwrap();
        assert_eq!(report.violations, 0, "bound violated: {report:?}");
        assert!(report.max_ratio <= 4.0 + 1e-9);
        assert!(report.max_chain_excess <= 1e-12);
        assert_eq!(samples.len(), 2000);
        // The symmetric role of T and T*: rerunning the bound with the roles
        // exchanged changes nothing.
        for s in samples.iter().take(50) {
            let (om, c) = sample_constrained(s.seed, s.n_lambda, s.n_outcomes, s.p_d).unwrap();
            let reversed = om.response_value(TransformLabel::Reverse);
            assert!(reversed.abs() <= 4.0 * c.p_d * om.o_max() + 1e-12);
        }
    }

    #[test]
    fn nc_zeno_values() {
        assert_eq!(nc_zeno_survival(0.0, 1.0, 50).unwrap(), 1.0);
        let v = nc_zeno_survival(1.0, 1.0, 10).unwrap();
        assert!((v - 0.99f64.powi(10)).abs() < 1e-15);
        // Monotone nondecreasing in N.
        let mut prev = 0.0;
        for n in [1, 2, 5, 10, 100, 1000] {
            let s = nc_zeno_survival(1.0, 1.0, n).unwrap();
            assert!(s >= prev);
            prev = s;
        }
        // Deficit bounded by c tau^2 / N.
        for n in [10, 100, 1000] {
            let s = nc_zeno_survival(1.0, 1.0, n).unwrap();
            assert!(1.0 - s <= 1.0 / n as f64);
        }
        assert!(nc_zeno_survival(50.0, 1.0, 2).is_err());
    }

    #[test]
    fn quantum_zeno_values() {
        // Full flip at N = 1, omega tau = pi.
        let v = quantum_zeno_survival(std::f64::consts::PI, 1.0, 1).unwrap();
        assert!(v.abs() < 1e-15);
        // Frequent measurement freezes the evolution.
        let v100 = quantum_zeno_survival(std::f64::consts::PI, 1.0, 100).unwrap();
        assert!(v100 >= 0.975);
        let v10000 = quantum_zeno_survival(std::f64::consts::PI, 1.0, 10000).unwrap();
        assert!(v10000 > v100);
    }
}
