//! Time evolution of driven systems.
//!
//! A `DrivenSystem` carries a static Hamiltonian `h0`, a pulse shape `V(t)`
//! and a coupling `g`; the generator at time `t` is `h0 + g V(t)` (hbar = 1
//! throughout). Exact propagation uses midpoint exponential stepping with a
//! built-in Richardson self-check; the first-order route goes through the
//! integrated interaction-picture perturbation.

use std::fmt;
use std::sync::Arc;

use crate::numkit::{expm_i_hermitian, hermitian_eig, simpson_integrate, Complex64, ComplexMatrix};
use crate::{Error, Result, DEFAULT_TOL};

/// Error-estimate ceiling for the propagator self-check.
const RICHARDSON_TOL: f64 = 1e-7;

/// Time-dependent perturbation shape, evaluated as a pure function of `t`.
#[derive(Clone)]
pub enum Pulse {
    /// `V(t) = M` for all `t`.
    Constant(ComplexMatrix),
    /// `V(t) = sin(pi t / tau) M`; vanishes at both ends of the protocol,
    /// satisfying the cyclic requirement of the engine stroke.
    HalfSine(ComplexMatrix),
    /// Caller-supplied shape. Must be a pure function of `t`.
    Custom(Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>),
}

impl Pulse {
    /// Evaluate `V(t)` for a protocol of duration `tau`.
    pub fn at(&self, t: f64, tau: f64) -> ComplexMatrix {
        match self {
            Pulse::Constant(m) => m.clone(),
            Pulse::HalfSine(m) => m.scale_re((std::f64::consts::PI * t / tau).sin()),
            Pulse::Custom(f) => f(t),
        }
    }
}

impl fmt::Debug for Pulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pulse::Constant(_) => write!(f, "Pulse::Constant"),
            Pulse::HalfSine(_) => write!(f, "Pulse::HalfSine"),
            Pulse::Custom(_) => write!(f, "Pulse::Custom"),
        }
    }
}

/// A finite-dimensional system driven by `h0 + g V(t)` on `[0, tau]`.
#[derive(Debug, Clone)]
pub struct DrivenSystem {
    pub h0: ComplexMatrix,
    pub pulse: Pulse,
    pub g: f64,
    pub tau: f64,
    /// Set when `V(0) = V(tau) = 0` was verified at construction.
    pub cyclic: bool,
}

impl DrivenSystem {
    /// Build and validate a driven system. `h0` and sampled `V(t)` must be
    /// Hermitian, `g >= 0`, `tau > 0`.
    pub fn new(h0: ComplexMatrix, pulse: Pulse, g: f64, tau: f64) -> Result<Self> {
        if !(g >= 0.0) {
            return Err(Error::BadInputRange {
                name: "g",
                value: g,
            });
        }
        if !(tau > 0.0) {
            return Err(Error::BadInputRange {
                name: "tau",
                value: tau,
            });
        }
        if !h0.is_hermitian(DEFAULT_TOL) {
            return Err(Error::NotHermitian {
                residual: h0.hermitian_residual(),
                tol: DEFAULT_TOL,
            });
        }
        let sys = Self {
            h0,
            pulse,
            g,
            tau,
            cyclic: false,
        };
        for k in 0..=8 {
            let t = tau * k as f64 / 8.0;
            let v = sys.v_at(t);
            if v.dim() != sys.h0.dim() {
                return Err(Error::DimMismatch {
                    expected: sys.h0.dim(),
                    got: v.dim(),
                });
            }
            if !v.is_hermitian(DEFAULT_TOL) {
                return Err(Error::NotHermitian {
                    residual: v.hermitian_residual(),
                    tol: DEFAULT_TOL,
                });
            }
        }
        Ok(sys)
    }

    /// As [`DrivenSystem::new`], additionally requiring `V(0) = V(tau) = 0`.
    pub fn new_cyclic(h0: ComplexMatrix, pulse: Pulse, g: f64, tau: f64) -> Result<Self> {
        let mut sys = Self::new(h0, pulse, g, tau)?;
        let v0 = sys.v_at(0.0).frobenius_norm();
        let vtau = sys.v_at(sys.tau).frobenius_norm();
        let scale = sys.v_at(sys.tau / 2.0).frobenius_norm().max(1.0);
        if v0 > DEFAULT_TOL * scale || vtau > DEFAULT_TOL * scale {
            return Err(Error::NotCyclic { v0, vtau });
        }
        sys.cyclic = true;
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// `V(t)`.
    pub fn v_at(&self, t: f64) -> ComplexMatrix {
        self.pulse.at(t, self.tau)
    }

    /// Interaction-picture perturbation `V_I(t) = e^{i h0 t} V(t) e^{-i h0 t}`.
    pub fn v_interaction(&self, t: f64) -> ComplexMatrix {
        interaction_picture(&self.v_at(t), &self.h0, t).expect("h0 validated at construction")
    }

    /// Same system with a different coupling.
    pub fn with_coupling(&self, g: f64) -> Result<Self> {
        if !(g >= 0.0) {
            return Err(Error::BadInputRange {
                name: "g",
                value: g,
            });
        }
        let mut sys = self.clone();
        sys.g = g;
        Ok(sys)
    }
}

/// Which route produced a response value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseOrder {
    Exact,
    FirstOrder,
}

/// Change of an observable's expectation value under the driving.
#[derive(Debug, Clone, Copy)]
pub struct ResponseResult {
    pub delta_o: f64,
    pub order: ResponseOrder,
    pub t: f64,
    /// Amount added to the observable (`O + shift * I`) to make its spectrum
    /// nonnegative; the response itself is invariant under this shift.
    pub spectral_shift: f64,
    /// Largest eigenvalue of the shifted observable.
    pub o_max: f64,
}

fn step_product(sys: &DrivenSystem, t: f64, n_steps: usize) -> Result<ComplexMatrix> {
    let dt = t / n_steps as f64;
    let mut u = ComplexMatrix::identity(sys.dim());
    for k in 0..n_steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let h = &sys.h0 + &sys.v_at(t_mid).scale_re(sys.g);
        // Time ordering: latest factor on the left.
        u = &expm_i_hermitian(&h, dt)? * &u;
    }
    Ok(u)
}

/// Schroedinger-picture propagator `U(t)` as an ordered product of midpoint
/// step unitaries.
///
/// Runs the step product at `n_steps` and `2 n_steps`; the Richardson error
/// estimate for the finer result must stay below an internal ceiling, else
/// `StepCountTooSmall`. Returns the finer result.
pub fn propagate_exact(sys: &DrivenSystem, t: f64, n_steps: usize) -> Result<ComplexMatrix> {
    if n_steps < 1 {
        return Err(Error::BadInputRange {
            name: "n_steps",
            value: n_steps as f64,
        });
    }
    if !(0.0..=sys.tau).contains(&t) {
        return Err(Error::BadInputRange {
            name: "t",
            value: t,
        });
    }
    if t == 0.0 {
        return Ok(ComplexMatrix::identity(sys.dim()));
    }
    let coarse = step_product(sys, t, n_steps)?;
    let fine = step_product(sys, t, 2 * n_steps)?;
    // Second-order stepping: err(2n) ~ ||U_n - U_2n|| / 3.
    let estimate = (&coarse - &fine).frobenius_norm() / 3.0;
    if estimate > RICHARDSON_TOL {
        return Err(Error::StepCountTooSmall {
            n_steps,
            estimate,
            tol: RICHARDSON_TOL,
        });
    }
    Ok(fine)
}

/// `e^{i h0 t} op e^{-i h0 t}`.
pub fn interaction_picture(
    op: &ComplexMatrix,
    h0: &ComplexMatrix,
    t: f64,
) -> Result<ComplexMatrix> {
    let forward = expm_i_hermitian(h0, -t)?; // e^{+i h0 t}
    let backward = expm_i_hermitian(h0, t)?; // e^{-i h0 t}
    Ok(&(&forward * op) * &backward)
}

/// First-order truncation `1 - i g \int_0^t V_I(t') dt'` of the
/// interaction-picture propagator. Not unitary.
pub fn dyson_first_order(sys: &DrivenSystem, t: f64, n_panels: usize) -> Result<ComplexMatrix> {
    let w = simpson_integrate(|tp| sys.v_interaction(tp), 0.0, t, n_panels)?;
    let correction = w.scale(Complex64::new(0.0, -sys.g));
    Ok(&ComplexMatrix::identity(sys.dim()) + &correction)
}

pub(crate) fn validate_density(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if rho.dim() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            got: rho.dim(),
        });
    }
    if !rho.is_hermitian(DEFAULT_TOL) {
        return Err(Error::NotDensityMatrix {
            reason: "not Hermitian".into(),
        });
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::NotDensityMatrix {
            reason: format!("trace = {tr} instead of 1"),
        });
    }
    if !rho.is_psd(DEFAULT_TOL) {
        return Err(Error::NotDensityMatrix {
            reason: "negative eigenvalue".into(),
        });
    }
    Ok(())
}

/// Shift an observable so its spectrum is nonnegative.
///
/// Returns `(shifted, shift, o_max)` with `shifted = obs + shift * I`.
pub fn shift_observable(obs: &ComplexMatrix) -> Result<(ComplexMatrix, f64, f64)> {
    if !obs.is_hermitian(DEFAULT_TOL) {
        return Err(Error::NotHermitian {
            residual: obs.hermitian_residual(),
            tol: DEFAULT_TOL,
        });
    }
    let eig = hermitian_eig(obs, DEFAULT_TOL)?;
    let min = eig.eigenvalues[0];
    let max = *eig.eigenvalues.last().expect("dim >= 1");
    let shift = if min < 0.0 { -min } else { 0.0 };
    let shifted = if shift != 0.0 {
        obs + &ComplexMatrix::identity(obs.dim()).scale_re(shift)
    } else {
        obs.clone()
    };
    Ok((shifted, shift, max + shift))
}

/// Exact response `Tr[U_I rho U_I^dag O_I(t)] - Tr[rho O_I(t)]` using full
/// propagation.
pub fn response_exact(
    sys: &DrivenSystem,
    rho0: &ComplexMatrix,
    obs: &ComplexMatrix,
    t: f64,
    n_steps: usize,
) -> Result<ResponseResult> {
    validate_density(rho0, sys.dim())?;
    let (obs_shifted, shift, o_max) = shift_observable(obs)?;
    let u = propagate_exact(sys, t, n_steps)?;
    let u_i = &expm_i_hermitian(&sys.h0, -t)? * &u;
    let o_i = interaction_picture(&obs_shifted, &sys.h0, t)?;
    let evolved = &(&u_i * rho0) * &u_i.adjoint();
    let delta = (&evolved * &o_i).trace() - (rho0 * &o_i).trace();
    check_real(delta, obs_shifted.frobenius_norm())?;
    Ok(ResponseResult {
        delta_o: delta.re,
        order: ResponseOrder::Exact,
        t,
        spectral_shift: shift,
        o_max,
    })
}

/// First-order response `i g Tr[rho [W, O_I(t)]]` with
/// `W = \int_0^t V_I(t') dt'`.
pub fn response_linear(
    sys: &DrivenSystem,
    rho0: &ComplexMatrix,
    obs: &ComplexMatrix,
    t: f64,
    n_panels: usize,
) -> Result<ResponseResult> {
    validate_density(rho0, sys.dim())?;
    let (obs_shifted, shift, o_max) = shift_observable(obs)?;
    let w = simpson_integrate(|tp| sys.v_interaction(tp), 0.0, t, n_panels)?;
    let o_i = interaction_picture(&obs_shifted, &sys.h0, t)?;
    let comm = &(&w * &o_i) - &(&o_i * &w);
    let delta = (rho0 * &comm).trace() * Complex64::new(0.0, sys.g);
    check_real(delta, obs_shifted.frobenius_norm())?;
    Ok(ResponseResult {
        delta_o: delta.re,
        order: ResponseOrder::FirstOrder,
        t,
        spectral_shift: shift,
        o_max,
    })
}

fn check_real(value: Complex64, scale: f64) -> Result<()> {
    let tol = 1e3 * DEFAULT_TOL * scale.max(1.0);
    if value.im.abs() > tol {
        return Err(Error::ImaginaryResidue {
            residue: value.im.abs(),
            tol,
        });
    }
    Ok(())
}

/// Protocol-averaged interaction-picture perturbation
/// `X = (1/tau) \int_0^tau V_I(t) dt`.
pub fn time_averaged_perturbation(sys: &DrivenSystem, n_panels: usize) -> Result<ComplexMatrix> {
    let w = simpson_integrate(|t| sys.v_interaction(t), 0.0, sys.tau, n_panels)?;
    let x = w.scale_re(1.0 / sys.tau);
    if !x.is_hermitian(DEFAULT_TOL) {
        return Err(Error::NotHermitian {
            residual: x.hermitian_residual(),
            tol: DEFAULT_TOL,
        });
    }
    Ok(x)
}
