//! Pipeline orchestration: dispatch a validated config to the right
//! computation and assemble its report bundle.
//!
//! Every pipeline is deterministic given its config (including seeds), and
//! per-grid-point work fans out over the rayon pool with order-preserving
//! collection, so thread count never changes the output bytes.

use serde::Serialize;

use crate::certify::{
    certify_gap, fit_scaling_exponent, CertVerdict, CertificationReport, CertifyOptions,
    ConditionVerdict,
};
use crate::config::{
    CertifyConfig, EngineConfig, ExperimentConfig, ExperimentKind, MetrologyConfig, OmOracleConfig,
    PulseShape, ZenoConfig,
};
use crate::dynamics::{DrivenSystem, Pulse};
use crate::engine::{weak_value_decomposition, EngineSpec, WorkResult};
use crate::metrology::{disturbance_constant, fisher_report, qfi_benchmark, EstimationScheme};
use crate::numkit::{
    expm_i_hermitian, ket_density, pauli_x, pauli_z, simpson_integrate, unitary_log, ComplexMatrix,
};
use crate::ontomodel::{nc_zeno_survival, oracle_run, quantum_zeno_survival};
use crate::report::{Cell, ReportBundle, SeriesTable};
use crate::{Error, Result};

fn verdict_name(v: CertVerdict) -> &'static str {
    match v {
        CertVerdict::Contextual => "contextual",
        CertVerdict::NotContextual => "not_contextual",
        CertVerdict::Inconclusive => "inconclusive",
    }
}

fn condition_name(v: ConditionVerdict) -> &'static str {
    match v {
        ConditionVerdict::Pass => "pass",
        ConditionVerdict::Marginal => "marginal",
        ConditionVerdict::Fail => "fail",
    }
}

fn build_pulse(shape: PulseShape, amplitude: &ComplexMatrix) -> Pulse {
    match shape {
        PulseShape::Constant => Pulse::Constant(amplitude.clone()),
        PulseShape::HalfSine => Pulse::HalfSine(amplitude.clone()),
    }
}

#[derive(Debug, Serialize)]
struct FitSummary {
    slope: f64,
    intercept: f64,
    r_squared: f64,
    points_used: usize,
}

impl FitSummary {
    fn from(fit: &crate::certify::ScalingFit) -> Self {
        Self {
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            points_used: fit.points_used,
        }
    }
}

#[derive(Debug, Serialize)]
struct ConditionSummary {
    verdict: String,
    c_used: f64,
    best_min_eigenvalue: f64,
    kernel_dim: usize,
    strictly_positive: bool,
    alpha: Vec<f64>,
}

impl ConditionSummary {
    fn from(c: &crate::certify::ReversibilityCondition) -> Self {
        Self {
            verdict: condition_name(c.verdict).to_string(),
            c_used: c.c_used,
            best_min_eigenvalue: c.best_min_eigenvalue,
            kernel_dim: c.kernel_dim,
            strictly_positive: c.strictly_positive,
            alpha: c.alpha.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct CertifySummary {
    kind: String,
    verdict: String,
    o_max: f64,
    spectral_shift: f64,
    depolarising_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossing_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    response_fit: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_fit: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reversibility_fit: Option<FitSummary>,
    condition: ConditionSummary,
}

fn certify_report(cfg: &CertifyConfig) -> Result<CertificationReport> {
    let opts = CertifyOptions {
        n_steps: cfg.n_steps,
        n_panels: cfg.n_panels,
        c_grid: cfg.c_grid.clone(),
        depolarising: cfg.s,
        tol: crate::DEFAULT_TOL,
    };
    let h0 = cfg.h0.clone();
    let pulse_shape = cfg.pulse.shape;
    let amplitude = cfg.pulse.amplitude.clone();
    let tau = cfg.tau;
    let family =
        move |g: f64| DrivenSystem::new(h0.clone(), build_pulse(pulse_shape, &amplitude), g, tau);
    certify_gap(
        family,
        &cfg.psi0,
        &cfg.observable,
        cfg.t,
        &cfg.g_grid,
        &opts,
    )
}

fn run_certify(cfg: &CertifyConfig, names: (&str, &str)) -> Result<ReportBundle> {
    let report = certify_report(cfg)?;
    let mut series = SeriesTable::new(&[
        "g",
        "delta_o_exact",
        "delta_o_linear",
        "p_d",
        "nc_bound",
        "gap_flag",
        "p_d_unitary",
    ]);
    for i in 0..report.g_grid.len() {
        series.push(vec![
            Cell::F(report.g_grid[i]),
            Cell::F(report.response_exact[i]),
            Cell::F(report.response_linear[i]),
            Cell::F(report.p_d[i]),
            Cell::F(report.nc_bound[i]),
            Cell::B(report.gap_flags[i]),
            Cell::F(report.p_d_unitary[i]),
        ]);
    }
    let summary = CertifySummary {
        kind: "certify".into(),
        verdict: verdict_name(report.verdict).into(),
        o_max: report.o_max,
        spectral_shift: report.spectral_shift,
        depolarising_s: cfg.s,
        crossing_g: report.crossing,
        response_fit: report.response_fit.as_ref().map(FitSummary::from),
        bound_fit: report.bound_fit.as_ref().map(FitSummary::from),
        reversibility_fit: report.reversibility_fit.as_ref().map(FitSummary::from),
        condition: ConditionSummary::from(&report.condition),
    };
    Ok(ReportBundle {
        summary: to_toml(&summary)?,
        series,
        summary_name: names.0.to_string(),
        series_name: names.1.to_string(),
    })
}

#[derive(Debug, Serialize)]
struct LevelSummary {
    energy: f64,
    population: f64,
    im_kd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    im_weak_value: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EngineSummary {
    kind: String,
    verdict: String,
    e_max: f64,
    e_max_shifted: f64,
    tau: f64,
    depolarising_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossing_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    work_fit: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_fit: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reversibility_fit: Option<FitSummary>,
    condition: ConditionSummary,
    /// Decomposition at the largest grid coupling.
    reference_g: f64,
    levels: Vec<LevelSummary>,
}

fn run_engine(cfg: &EngineConfig, names: (&str, &str)) -> Result<ReportBundle> {
    // Certification leg: the work response is the response of h0 itself.
    let cert_cfg = CertifyConfig {
        h0: cfg.h0.clone(),
        pulse: cfg.pulse.clone(),
        psi0: cfg.rho0.clone(),
        observable: cfg.h0.clone(),
        tau: cfg.tau,
        t: cfg.tau,
        g_grid: cfg.g_grid.clone(),
        n_steps: cfg.n_steps,
        n_panels: cfg.n_panels,
        s: cfg.s,
        c_grid: None,
    };
    let report = certify_report(&cert_cfg)?;

    // Work leg: per-coupling engine analysis.
    let engine_at = |g: f64| -> Result<(EngineSpec, WorkResult)> {
        let sys = DrivenSystem::new_cyclic(
            cfg.h0.clone(),
            build_pulse(cfg.pulse.shape, &cfg.pulse.amplitude),
            g,
            cfg.tau,
        )?;
        let spec = EngineSpec::new(sys, cfg.rho0.clone())?;
        let result = weak_value_decomposition(&spec, cfg.n_steps, cfg.n_panels, cfg.s)?;
        Ok((spec, result))
    };

    let mut series = SeriesTable::new(&[
        "g",
        "w_exact",
        "w_linear",
        "w_two_point",
        "w_from_kd",
        "w_from_weak_values",
        "p_d",
        "w_nc_bound",
        "gap_flag",
        "power_exact",
        "power_linear",
    ]);
    let mut works = Vec::with_capacity(cfg.g_grid.len());
    let mut last: Option<(EngineSpec, WorkResult)> = None;
    for &g in &cfg.g_grid {
        let (spec, result) = engine_at(g)?;
        series.push(vec![
            Cell::F(g),
            Cell::F(result.w_exact),
            Cell::F(result.w_linear),
            Cell::F(result.w_two_point),
            Cell::F(result.w_from_kd),
            Cell::F(result.w_from_weak_values),
            Cell::F(result.p_d),
            Cell::F(result.w_nc_bound),
            Cell::B(result.w_exact.abs() > result.w_nc_bound),
            Cell::F(result.w_exact / cfg.tau),
            Cell::F(result.w_linear / cfg.tau),
        ]);
        works.push(result.w_exact);
        last = Some((spec, result));
    }
    let (last_spec, last_result) = last.expect("grid is nonempty");
    let work_fit = fit_scaling_exponent(&cfg.g_grid, &works).ok();

    let summary = EngineSummary {
        kind: "engine".into(),
        verdict: verdict_name(report.verdict).into(),
        e_max: last_spec.e_max,
        e_max_shifted: last_spec.e_max_shifted(),
        tau: cfg.tau,
        depolarising_s: cfg.s,
        crossing_g: report.crossing,
        work_fit: work_fit.as_ref().map(FitSummary::from),
        bound_fit: report.bound_fit.as_ref().map(FitSummary::from),
        reversibility_fit: report.reversibility_fit.as_ref().map(FitSummary::from),
        condition: ConditionSummary::from(&report.condition),
        reference_g: *cfg.g_grid.last().expect("grid is nonempty"),
        levels: last_result
            .weak_value_terms
            .iter()
            .zip(&last_result.kd_terms)
            .map(|(wv, kd)| LevelSummary {
                energy: wv.energy,
                population: wv.population,
                im_kd: kd.im_kd,
                im_weak_value: wv.im_weak_value,
            })
            .collect(),
    };
    Ok(ReportBundle {
        summary: to_toml(&summary)?,
        series,
        summary_name: names.0.to_string(),
        series_name: names.1.to_string(),
    })
}

#[derive(Debug, Serialize)]
struct MetrologyEtaSummary {
    eta: f64,
    fisher: f64,
    excluded_outcomes: Vec<usize>,
    probabilities: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct MetrologySummary {
    kind: String,
    qfi_benchmark: f64,
    disturbance_constant: f64,
    d_eta: f64,
    /// The quadratic remainder of the ceiling is not computed; the series
    /// holds the leading order only.
    bound_order: String,
    gap_certified: bool,
    per_eta: Vec<MetrologyEtaSummary>,
}

fn run_metrology(cfg: &MetrologyConfig, names: (&str, &str)) -> Result<ReportBundle> {
    let qfi = qfi_benchmark(&cfg.psi0, &cfg.h)?;
    let k = disturbance_constant(&cfg.h)?;
    let mut series = SeriesTable::new(&["eta", "delta", "nc_fisher_upper", "fisher", "qfi"]);
    let mut per_eta = Vec::with_capacity(cfg.eta_grid.len());
    let mut gap_certified = true;
    for &eta in &cfg.eta_grid {
        let scheme = EstimationScheme::new(cfg.psi0.clone(), cfg.h.clone(), cfg.povm.clone(), eta)?;
        let report = fisher_report(&scheme, cfg.d_eta, k, &cfg.delta_grid)?;
        for (&delta, &bound) in cfg.delta_grid.iter().zip(&report.nc_upper) {
            if bound >= report.fisher {
                gap_certified = false;
            }
            series.push(vec![
                Cell::F(eta),
                Cell::F(delta),
                Cell::F(bound),
                Cell::F(report.fisher),
                Cell::F(report.qfi_benchmark),
            ]);
        }
        per_eta.push(MetrologyEtaSummary {
            eta,
            fisher: report.fisher,
            excluded_outcomes: report.excluded_outcomes,
            probabilities: report.probabilities,
        });
    }
    let summary = MetrologySummary {
        kind: "metrology".into(),
        qfi_benchmark: qfi,
        disturbance_constant: k,
        d_eta: cfg.d_eta,
        bound_order: "leading (delta^2); O(p_d^3)/delta^2 remainder omitted".into(),
        gap_certified,
        per_eta,
    };
    Ok(ReportBundle {
        summary: to_toml(&summary)?,
        series,
        summary_name: names.0.to_string(),
        series_name: names.1.to_string(),
    })
}

#[derive(Debug, Serialize)]
struct ZenoSummary {
    kind: String,
    c: f64,
    omega: f64,
    tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    nc_deficit_fit: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantum_deficit_fit: Option<FitSummary>,
}

fn run_zeno(cfg: &ZenoConfig, names: (&str, &str)) -> Result<ReportBundle> {
    let mut series = SeriesTable::new(&["n", "nc_survival", "quantum_survival"]);
    let mut ns = Vec::new();
    let mut nc_deficit = Vec::new();
    let mut q_deficit = Vec::new();
    for &n in &cfg.n_grid {
        let nc = nc_zeno_survival(cfg.c, cfg.tau, n)?;
        let q = quantum_zeno_survival(cfg.omega, cfg.tau, n)?;
        series.push(vec![Cell::U(n as u64), Cell::F(nc), Cell::F(q)]);
        ns.push(n as f64);
        nc_deficit.push(1.0 - nc);
        q_deficit.push(1.0 - q);
    }
    let summary = ZenoSummary {
        kind: "zeno".into(),
        c: cfg.c,
        omega: cfg.omega,
        tau: cfg.tau,
        nc_deficit_fit: fit_scaling_exponent(&ns, &nc_deficit)
            .ok()
            .as_ref()
            .map(FitSummary::from),
        quantum_deficit_fit: fit_scaling_exponent(&ns, &q_deficit)
            .ok()
            .as_ref()
            .map(FitSummary::from),
    };
    Ok(ReportBundle {
        summary: to_toml(&summary)?,
        series,
        summary_name: names.0.to_string(),
        series_name: names.1.to_string(),
    })
}

#[derive(Debug, Serialize)]
struct OmOracleSummary {
    kind: String,
    seed: u64,
    samples: usize,
    violations: usize,
    max_ratio: f64,
    max_chain_excess: f64,
    bound_satisfied: bool,
}

fn run_om_oracle(cfg: &OmOracleConfig, names: (&str, &str)) -> Result<ReportBundle> {
    let (report, samples) = oracle_run(
        cfg.seed,
        cfg.sample_count,
        cfg.max_lambda,
        cfg.max_outcomes,
        cfg.max_pd,
    )?;
    let mut series = SeriesTable::new(&[
        "index",
        "seed",
        "n_lambda",
        "n_outcomes",
        "p_d",
        "o_max",
        "delta_o",
        "nc_bound",
        "within_bound",
    ]);
    for (i, s) in samples.iter().enumerate() {
        series.push(vec![
            Cell::I(i as i64),
            Cell::U(s.seed),
            Cell::I(s.n_lambda as i64),
            Cell::I(s.n_outcomes as i64),
            Cell::F(s.p_d),
            Cell::F(s.o_max),
            Cell::F(s.response),
            Cell::F(s.bound),
            Cell::B(s.response.abs() <= s.bound + 1e-12),
        ]);
    }
    let summary = OmOracleSummary {
        kind: "om_oracle".into(),
        seed: cfg.seed,
        samples: report.samples,
        violations: report.violations,
        max_ratio: report.max_ratio,
        max_chain_excess: report.max_chain_excess,
        bound_satisfied: report.violations == 0,
    };
    Ok(ReportBundle {
        summary: to_toml(&summary)?,
        series,
        summary_name: names.0.to_string(),
        series_name: names.1.to_string(),
    })
}

fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string_pretty(value).map_err(|e| Error::BadParameters {
        reason: format!("summary serialization failed: {e}"),
    })
}

/// Run a validated experiment configuration.
pub fn run(config: &ExperimentConfig) -> Result<ReportBundle> {
    let names = (config.summary_name.as_str(), config.series_name.as_str());
    match &config.kind {
        ExperimentKind::Certify(c) => run_certify(c, names),
        ExperimentKind::Engine(c) => run_engine(c, names),
        ExperimentKind::Metrology(c) => run_metrology(c, names),
        ExperimentKind::Zeno(c) => run_zeno(c, names),
        ExperimentKind::OmOracle(c) => run_om_oracle(c, names),
    }
}

/// Run and write the bundle under `out_dir`.
pub fn run_to_dir(config: &ExperimentConfig, out_dir: &std::path::Path) -> Result<ReportBundle> {
    let bundle = run(config)?;
    bundle.write(out_dir)?;
    Ok(bundle)
}

#[derive(Debug, Serialize)]
struct SelftestSummary {
    kind: String,
    checks: usize,
    failures: usize,
    all_pass: bool,
}

/// Deterministic invariant suite: a handful of fixed-input checks spanning
/// every module, reported as a series of (check, value, threshold, pass).
pub fn selftest() -> Result<ReportBundle> {
    let mut series = SeriesTable::new(&["check", "value", "threshold", "pass"]);
    let mut failures = 0usize;
    let mut record = |name: &str, value: f64, threshold: f64| {
        let pass = value <= threshold;
        if !pass {
            failures += 1;
        }
        series.push(vec![
            Cell::S(name.to_string()),
            Cell::F(value),
            Cell::F(threshold),
            Cell::B(pass),
        ]);
    };

    // Spectral round trip on a fixed Hermitian matrix.
    let h = ComplexMatrix::from_rows(&[
        vec![
            crate::numkit::c64(0.4, 0.0),
            crate::numkit::c64(0.3, 0.7),
            crate::numkit::c64(0.0, -0.2),
        ],
        vec![
            crate::numkit::c64(0.3, -0.7),
            crate::numkit::c64(-1.1, 0.0),
            crate::numkit::c64(0.5, 0.0),
        ],
        vec![
            crate::numkit::c64(0.0, 0.2),
            crate::numkit::c64(0.5, 0.0),
            crate::numkit::c64(2.0, 0.0),
        ],
    ])?;
    let u = expm_i_hermitian(&h, 1.0)?;
    record("unitarity_of_exponential", u.unitary_residual(), 1e-12);
    let back = unitary_log(&u, 1e-9)?;
    record("log_exp_round_trip", (&back - &h).frobenius_norm(), 1e-9);

    // Propagator unitarity on the reference driven qubit.
    let sys = DrivenSystem::new(
        ComplexMatrix::diag_real(&[0.0, 1.0]),
        Pulse::HalfSine(pauli_x()),
        0.05,
        1.0,
    )?;
    let u = crate::dynamics::propagate_exact(&sys, 1.0, 256)?;
    record("propagator_unitarity", u.unitary_residual(), 1e-9);

    // Choi reconstruction of the minimal decomposition.
    let u_rot = expm_i_hermitian(&pauli_x(), 0.05)?;
    let cert = crate::channels::minimal_disturbance(&u_rot, 1e-9)?;
    record("choi_reconstruction", cert.reconstruction_residual(), 1e-9);
    record(
        "disturbance_vs_closed_form",
        (cert.p_d - 0.05f64.sin().powi(2)).abs(),
        1e-7,
    );

    // Condition matrix eigenvalues for the qubit case.
    let condition = crate::certify::condition_matrix(&[0.0, 1.0], 2.0)?;
    record(
        "condition_matrix_eigenvalues",
        (condition.eigenvalues[0] - 0.5).abs() + (condition.eigenvalues[1] - 1.5).abs(),
        1e-12,
    );

    // Simpson vs analytic antiderivative.
    let q = simpson_integrate(
        |t| pauli_x().scale_re(t.sin()),
        0.0,
        std::f64::consts::PI,
        64,
    )?;
    record(
        "simpson_sine_integral",
        (&q - &pauli_x().scale_re(2.0)).frobenius_norm(),
        1e-5,
    );

    // Reference metrology scheme: unit Fisher information.
    let scheme = EstimationScheme::new(
        ket_density(&[crate::numkit::c64(1.0, 0.0), crate::numkit::c64(1.0, 0.0)]),
        pauli_z().scale_re(0.5),
        vec![
            crate::numkit::projector(&[crate::numkit::c64(1.0, 0.0), crate::numkit::c64(1.0, 0.0)]),
            crate::numkit::projector(&[
                crate::numkit::c64(1.0, 0.0),
                crate::numkit::c64(-1.0, 0.0),
            ]),
        ],
        std::f64::consts::FRAC_PI_3,
    )?;
    let fisher = crate::metrology::fisher_information(&scheme, 1e-4)?;
    record("fisher_reference_value", (fisher.value - 1.0).abs(), 1e-6);

    // Ontological-model oracle on a small deterministic batch.
    let (oracle, _) = oracle_run(7, 500, 5, 3, 0.2)?;
    record("om_bound_violations", oracle.violations as f64, 0.0);
    record("om_max_ratio_minus_4", oracle.max_ratio - 4.0, 0.0);

    // Zeno closed form.
    let z = nc_zeno_survival(1.0, 1.0, 10)?;
    record("zeno_nc_value", (z - 0.99f64.powi(10)).abs(), 1e-15);
    let zq = quantum_zeno_survival(std::f64::consts::PI, 1.0, 100)?;
    record("zeno_quantum_freeze", (1.0 - zq).max(0.0), 0.025);

    let summary = SelftestSummary {
        kind: "selftest".into(),
        checks: series.rows.len(),
        failures,
        all_pass: failures == 0,
    };
    Ok(ReportBundle {
        summary: to_toml(&summary)?,
        series,
        summary_name: "selftest_summary.toml".into(),
        series_name: "selftest_series.csv".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes_and_is_deterministic() {
        let a = selftest().unwrap();
        let b = selftest().unwrap();
        assert_eq!(a.series.to_csv(), b.series.to_csv());
        assert_eq!(a.summary, b.summary);
        assert!(a.summary.contains("all_pass = true"), "{}", a.summary);
    }
}
