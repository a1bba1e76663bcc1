//! Single-parameter phase estimation.
//!
//! A pure probe evolves under `exp(-i H eta)` and is read out by a finite
//! POVM. The classical Fisher information of the outcome statistics is
//! benchmarked against `4 Var(H)`, and against the leading-order ceiling
//! `4 K^2 delta^2 sum_x 1/p(x)` that noncontextual models satisfy when the
//! disturbance probability of a small phase step `delta` grows as
//! `K delta^2`. The ceiling vanishes as `delta -> 0`: noncontextual
//! statistics carry no phase information at this order.

use crate::channels::minimal_disturbance;
use crate::numkit::{expm_i_hermitian, ComplexMatrix};
use crate::{Error, Result, DEFAULT_TOL};

/// Outcome probabilities below this floor are excluded from Fisher sums.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// A phase-estimation scheme: pure probe, generator, POVM, true phase.
#[derive(Debug, Clone)]
pub struct EstimationScheme {
    pub psi0: ComplexMatrix,
    pub h: ComplexMatrix,
    pub povm: Vec<ComplexMatrix>,
    pub eta: f64,
}

impl EstimationScheme {
    /// Validate purity of the probe, Hermiticity of the generator, and POVM
    /// positivity/completeness.
    pub fn new(
        psi0: ComplexMatrix,
        h: ComplexMatrix,
        povm: Vec<ComplexMatrix>,
        eta: f64,
    ) -> Result<Self> {
        let dim = h.dim();
        crate::dynamics::validate_density(&psi0, dim)?;
        let purity = (&psi0 * &psi0).trace().re;
        if (purity - 1.0).abs() > 1e-8 {
            return Err(Error::NotPure { purity });
        }
        if !h.is_hermitian(DEFAULT_TOL) {
            return Err(Error::NotHermitian {
                residual: h.hermitian_residual(),
                tol: DEFAULT_TOL,
            });
        }
        if povm.is_empty() {
            return Err(Error::BadPovm {
                reason: "empty POVM".into(),
            });
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for (x, m) in povm.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::BadPovm {
                    reason: format!("element {x} has dimension {}", m.dim()),
                });
            }
            if !m.is_psd(1e-9) {
                return Err(Error::BadPovm {
                    reason: format!("element {x} is not PSD"),
                });
            }
            sum = &sum + m;
        }
        if !sum.approx_eq(&ComplexMatrix::identity(dim), 1e-9) {
            return Err(Error::BadPovm {
                reason: "elements do not sum to the identity".into(),
            });
        }
        Ok(Self { psi0, h, povm, eta })
    }

    fn probabilities_at(&self, eta: f64) -> Result<Vec<f64>> {
        let u = expm_i_hermitian(&self.h, eta)?;
        let evolved = &(&u * &self.psi0) * &u.adjoint();
        Ok(self
            .povm
            .iter()
            .map(|m| (m * &evolved).trace().re)
            .collect())
    }
}

/// Outcome distribution `p(x | eta) = Tr[M_x U rho U^dag]`.
pub fn outcome_probabilities(scheme: &EstimationScheme) -> Result<Vec<f64>> {
    scheme.probabilities_at(scheme.eta)
}

/// Fisher information with its bookkeeping.
#[derive(Debug, Clone)]
pub struct FisherInfo {
    pub value: f64,
    /// Outcomes excluded because their probability sat below the floor.
    pub excluded: Vec<usize>,
}

/// Classical Fisher information `sum_x p (d ln p / d eta)^2` by
/// Richardson-refined central differences with step `d_eta`.
///
/// Outcomes below the probability floor at `eta` are excluded (and listed);
/// a retained outcome dipping below the floor inside the stencil is an
/// error.
pub fn fisher_information(scheme: &EstimationScheme, d_eta: f64) -> Result<FisherInfo> {
    if !(d_eta > 0.0) {
        return Err(Error::BadInputRange {
            name: "d_eta",
            value: d_eta,
        });
    }
    let p0 = scheme.probabilities_at(scheme.eta)?;
    let stencil: Vec<Vec<f64>> = [
        scheme.eta - d_eta,
        scheme.eta - d_eta / 2.0,
        scheme.eta + d_eta / 2.0,
        scheme.eta + d_eta,
    ]
    .iter()
    .map(|&e| scheme.probabilities_at(e))
    .collect::<Result<_>>()?;

    let mut value = 0.0;
    let mut excluded = Vec::new();
    for (x, &p) in p0.iter().enumerate() {
        if p <= PROBABILITY_FLOOR {
            excluded.push(x);
            continue;
        }
        for grid in &stencil {
            if grid[x] <= PROBABILITY_FLOOR {
                return Err(Error::DegenerateProbability {
                    outcome: x,
                    probability: grid[x],
                });
            }
        }
        // Central differences at h and h/2, one Richardson level.
        let d_coarse = (stencil[3][x] - stencil[0][x]) / (2.0 * d_eta);
        let d_fine = (stencil[2][x] - stencil[1][x]) / d_eta;
        let derivative = (4.0 * d_fine - d_coarse) / 3.0;
        value += derivative * derivative / p;
    }
    Ok(FisherInfo { value, excluded })
}

/// Full single-phase report: statistics, Fisher information, the quantum
/// benchmark and the noncontextual ceiling over a delta grid.
#[derive(Debug, Clone)]
pub struct FisherReport {
    pub probabilities: Vec<f64>,
    pub fisher: f64,
    pub excluded_outcomes: Vec<usize>,
    pub qfi_benchmark: f64,
    pub nc_upper: Vec<f64>,
}

/// Assemble a [`FisherReport`] for one scheme. `k` is the disturbance-rate
/// constant of the generator (see [`disturbance_constant`]); the ceiling is
/// evaluated on the retained (above-floor) outcomes.
pub fn fisher_report(
    scheme: &EstimationScheme,
    d_eta: f64,
    k: f64,
    delta_grid: &[f64],
) -> Result<FisherReport> {
    let probabilities = outcome_probabilities(scheme)?;
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::BadPovm {
            reason: format!("probabilities sum to {total}"),
        });
    }
    let fisher = fisher_information(scheme, d_eta)?;
    let retained: Vec<f64> = probabilities
        .iter()
        .enumerate()
        .filter(|(x, _)| !fisher.excluded.contains(x))
        .map(|(_, &p)| p)
        .collect();
    let nc_upper = nc_fisher_bound(&retained, k, delta_grid)?;
    Ok(FisherReport {
        probabilities,
        fisher: fisher.value,
        excluded_outcomes: fisher.excluded,
        qfi_benchmark: qfi_benchmark(&scheme.psi0, &scheme.h)?,
        nc_upper,
    })
}

/// Quantum benchmark `4 Var(H)` for a pure probe.
pub fn qfi_benchmark(psi0: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    crate::dynamics::validate_density(psi0, h.dim())?;
    let purity = (psi0 * psi0).trace().re;
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::NotPure { purity });
    }
    if !h.is_hermitian(DEFAULT_TOL) {
        return Err(Error::NotHermitian {
            residual: h.hermitian_residual(),
            tol: DEFAULT_TOL,
        });
    }
    let mean = (psi0 * h).trace().re;
    let second = (&(psi0 * h) * h).trace().re;
    Ok(4.0 * (second - mean * mean))
}

/// Leading-order noncontextual Fisher ceiling
/// `4 K^2 delta^2 sum_x 1/p(x)` for each `delta` in the grid.
///
/// Requires `2 K delta^2 < min p` so the leading-order expansion applies
/// (`DeltaTooLarge` otherwise). The quadratic decay in `delta` embodies the
/// vanishing of the noncontextual Fisher information.
pub fn nc_fisher_bound(probabilities: &[f64], k: f64, delta_grid: &[f64]) -> Result<Vec<f64>> {
    if !(k >= 0.0) {
        return Err(Error::BadInputRange {
            name: "K",
            value: k,
        });
    }
    let mut min_p = f64::INFINITY;
    let mut inv_sum = 0.0;
    for (x, &p) in probabilities.iter().enumerate() {
        if p <= PROBABILITY_FLOOR {
            return Err(Error::DegenerateProbability {
                outcome: x,
                probability: p,
            });
        }
        min_p = min_p.min(p);
        inv_sum += 1.0 / p;
    }
    let mut out = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        if !(delta > 0.0) {
            return Err(Error::BadInputRange {
                name: "delta",
                value: delta,
            });
        }
        if 2.0 * k * delta * delta >= min_p {
            return Err(Error::DeltaTooLarge { delta });
        }
        out.push(4.0 * k * k * delta * delta * inv_sum);
    }
    Ok(out)
}

/// Disturbance-rate constant `K = lim_{delta->0} p_d(e^{-i H delta}) / delta^2`.
///
/// Estimated at `delta = 1e-3` with a stability check at `5e-4`; a relative
/// drift above 1% is an `UnstableLimit` error.
pub fn disturbance_constant(h: &ComplexMatrix) -> Result<f64> {
    if !h.is_hermitian(DEFAULT_TOL) {
        return Err(Error::NotHermitian {
            residual: h.hermitian_residual(),
            tol: DEFAULT_TOL,
        });
    }
    let estimate = |delta: f64| -> Result<f64> {
        let u = expm_i_hermitian(h, delta)?;
        Ok(minimal_disturbance(&u, 1e-8)?.p_d / (delta * delta))
    };
    let first = estimate(1e-3)?;
    let second = estimate(5e-4)?;
    if first.abs() < 1e-9 && second.abs() < 1e-9 {
        return Ok(0.0);
    }
    if ((first - second) / first.abs().max(f64::MIN_POSITIVE)).abs() > 0.01 {
        return Err(Error::UnstableLimit { first, second });
    }
    Ok(first)
}
