//! Experiment configuration: TOML ingestion and validation.
//!
//! Operators live under `[matrices]` as nested arrays of `[re, im]` pairs;
//! role fields (`h0`, `psi0`, `observable`, ...) reference them by name.
//! Grids are either explicit arrays or `{ log10_start, log10_stop, points }`.
//! Validation errors name the offending field.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::numkit::{Complex64, ComplexMatrix};
use crate::{Error, Result, DEFAULT_TOL};

/// Grid given literally or as a log-spaced description.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Explicit(Vec<f64>),
    LogSpace {
        log10_start: f64,
        log10_stop: f64,
        points: usize,
    },
}

impl GridSpec {
    pub fn materialize(&self, field: &str) -> Result<Vec<f64>> {
        let grid = match self {
            GridSpec::Explicit(v) => v.clone(),
            GridSpec::LogSpace {
                log10_start,
                log10_stop,
                points,
            } => {
                if *points < 2 {
                    return Err(Error::Validation {
                        field: field.into(),
                        message: "log-spaced grid needs at least 2 points".into(),
                    });
                }
                (0..*points)
                    .map(|k| {
                        10f64.powf(
                            log10_start
                                + (log10_stop - log10_start) * k as f64 / (*points - 1) as f64,
                        )
                    })
                    .collect()
            }
        };
        if grid.is_empty() {
            return Err(Error::Validation {
                field: field.into(),
                message: "grid is empty".into(),
            });
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct PulseSpec {
    /// `constant` or `half_sine`.
    pub shape: String,
    /// Name of the amplitude matrix in `[matrices]`.
    pub amplitude: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct OutputSpec {
    pub summary: Option<String>,
    pub series: Option<String>,
}

type RawMatrix = Vec<Vec<[f64; 2]>>;

/// Raw deserialized configuration; `validate` turns it into a typed
/// [`ExperimentConfig`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub kind: String,
    pub tau: Option<f64>,
    pub t: Option<f64>,
    pub n_steps: Option<usize>,
    pub n_panels: Option<usize>,
    pub s: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub sample_count: Option<usize>,
    pub max_lambda: Option<usize>,
    pub max_outcomes: Option<usize>,
    pub max_pd: Option<f64>,
    pub d_eta: Option<f64>,
    pub c: Option<f64>,
    pub omega: Option<f64>,
    pub pulse: Option<PulseSpec>,
    pub h0: Option<String>,
    pub psi0: Option<String>,
    pub observable: Option<String>,
    pub rho0: Option<String>,
    pub h: Option<String>,
    pub povm: Option<Vec<String>>,
    pub g_grid: Option<GridSpec>,
    pub delta_grid: Option<GridSpec>,
    pub eta_grid: Option<GridSpec>,
    pub n_grid: Option<Vec<u32>>,
    pub c_grid: Option<Vec<f64>>,
    pub matrices: Option<BTreeMap<String, RawMatrix>>,
    pub output: Option<OutputSpec>,
}

/// Pulse shape plus amplitude, resolved.
#[derive(Debug, Clone)]
pub struct ResolvedPulse {
    pub shape: PulseShape,
    pub amplitude: ComplexMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    Constant,
    HalfSine,
}

#[derive(Debug, Clone)]
pub struct CertifyConfig {
    pub h0: ComplexMatrix,
    pub pulse: ResolvedPulse,
    pub psi0: ComplexMatrix,
    pub observable: ComplexMatrix,
    pub tau: f64,
    pub t: f64,
    pub g_grid: Vec<f64>,
    pub n_steps: usize,
    pub n_panels: usize,
    pub s: f64,
    pub c_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub h0: ComplexMatrix,
    pub pulse: ResolvedPulse,
    pub rho0: ComplexMatrix,
    pub tau: f64,
    pub g_grid: Vec<f64>,
    pub n_steps: usize,
    pub n_panels: usize,
    pub s: f64,
}

#[derive(Debug, Clone)]
pub struct MetrologyConfig {
    pub h: ComplexMatrix,
    pub psi0: ComplexMatrix,
    pub povm: Vec<ComplexMatrix>,
    pub eta_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub d_eta: f64,
}

#[derive(Debug, Clone)]
pub struct ZenoConfig {
    pub c: f64,
    pub omega: f64,
    pub tau: f64,
    pub n_grid: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct OmOracleConfig {
    pub seed: u64,
    pub sample_count: usize,
    pub max_lambda: usize,
    pub max_outcomes: usize,
    pub max_pd: f64,
}

#[derive(Debug, Clone)]
pub enum ExperimentKind {
    Certify(CertifyConfig),
    Engine(EngineConfig),
    Metrology(MetrologyConfig),
    Zeno(ZenoConfig),
    OmOracle(OmOracleConfig),
}

/// Validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Basename for the summary file.
    pub summary_name: String,
    /// Basename for the series file.
    pub series_name: String,
}

impl ExperimentConfig {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ExperimentKind::Certify(_) => "certify",
            ExperimentKind::Engine(_) => "engine",
            ExperimentKind::Metrology(_) => "metrology",
            ExperimentKind::Zeno(_) => "zeno",
            ExperimentKind::OmOracle(_) => "om_oracle",
        }
    }
}

/// Read and validate a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        message: format!("{}: {e}", path.display()),
    })?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| Error::Parse {
        message: format!("{}: {e}", path.display()),
    })?;
    validate(raw)
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        field: field.into(),
        message: message.into(),
    }
}

fn parse_matrix(field: &str, raw: &RawMatrix) -> Result<ComplexMatrix> {
    let dim = raw.len();
    if dim == 0 {
        return Err(invalid(field, "matrix has no rows"));
    }
    let mut rows = Vec::with_capacity(dim);
    for (r, row) in raw.iter().enumerate() {
        if row.len() != dim {
            return Err(invalid(
                field,
                format!("row {r} has {} entries, expected {dim}", row.len()),
            ));
        }
        rows.push(
            row.iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect::<Vec<_>>(),
        );
    }
    ComplexMatrix::from_rows(&rows)
}

struct MatrixTable {
    matrices: BTreeMap<String, ComplexMatrix>,
}

impl MatrixTable {
    fn resolve(&self, field: &str, name: &Option<String>) -> Result<ComplexMatrix> {
        let name = name
            .as_ref()
            .ok_or_else(|| invalid(field, "missing required matrix reference"))?;
        self.matrices
            .get(name)
            .cloned()
            .ok_or_else(|| invalid(field, format!("references unknown matrix `{name}`")))
    }

    fn resolve_named(&self, field: &str, name: &str) -> Result<ComplexMatrix> {
        self.matrices
            .get(name)
            .cloned()
            .ok_or_else(|| invalid(field, format!("references unknown matrix `{name}`")))
    }
}

fn require_hermitian(field: &str, m: &ComplexMatrix) -> Result<()> {
    if !m.is_hermitian(DEFAULT_TOL) {
        return Err(invalid(field, "matrix is not Hermitian"));
    }
    Ok(())
}

fn require_dim(field: &str, m: &ComplexMatrix, dim: usize) -> Result<()> {
    if m.dim() != dim {
        return Err(invalid(
            field,
            format!(
                "dimension {} does not match the system dimension {dim}",
                m.dim()
            ),
        ));
    }
    Ok(())
}

fn positive_grid(field: &str, grid: &[f64]) -> Result<()> {
    if let Some(&bad) = grid.iter().find(|&&g| g <= 0.0) {
        return Err(invalid(
            field,
            format!("log-log scaling fits require strictly positive entries, found {bad}"),
        ));
    }
    Ok(())
}

fn resolve_pulse(table: &MatrixTable, spec: &Option<PulseSpec>) -> Result<ResolvedPulse> {
    let spec = spec
        .as_ref()
        .ok_or_else(|| invalid("pulse", "missing pulse section"))?;
    let shape = match spec.shape.as_str() {
        "constant" => PulseShape::Constant,
        "half_sine" => PulseShape::HalfSine,
        other => {
            return Err(invalid(
                "pulse.shape",
                format!("unknown shape `{other}` (expected `constant` or `half_sine`)"),
            ))
        }
    };
    let amplitude = table.resolve_named("pulse.amplitude", &spec.amplitude)?;
    require_hermitian("pulse.amplitude", &amplitude)?;
    Ok(ResolvedPulse { shape, amplitude })
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig> {
    let matrices = raw
        .matrices
        .as_ref()
        .map(|m| {
            m.iter()
                .map(|(name, rm)| {
                    Ok((name.clone(), parse_matrix(&format!("matrices.{name}"), rm)?))
                })
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .transpose()?
        .unwrap_or_default();
    let table = MatrixTable { matrices };

    let n_steps = raw.n_steps.unwrap_or(1024);
    let n_panels = raw.n_panels.unwrap_or(512);
    let s = raw.s.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid("s", "depolarising weight must lie in [0, 1]"));
    }

    let kind = match raw.kind.as_str() {
        "certify" => {
            let h0 = table.resolve("h0", &raw.h0)?;
            require_hermitian("h0", &h0)?;
            let pulse = resolve_pulse(&table, &raw.pulse)?;
            require_dim("pulse.amplitude", &pulse.amplitude, h0.dim())?;
            let psi0 = table.resolve("psi0", &raw.psi0)?;
            require_dim("psi0", &psi0, h0.dim())?;
            let observable = table.resolve("observable", &raw.observable)?;
            require_hermitian("observable", &observable)?;
            require_dim("observable", &observable, h0.dim())?;
            let tau = raw.tau.ok_or_else(|| invalid("tau", "required"))?;
            let t = raw.t.unwrap_or(tau);
            let g_grid = raw
                .g_grid
                .as_ref()
                .ok_or_else(|| invalid("g_grid", "required"))?
                .materialize("g_grid")?;
            positive_grid("g_grid", &g_grid)?;
            ExperimentKind::Certify(CertifyConfig {
                h0,
                pulse,
                psi0,
                observable,
                tau,
                t,
                g_grid,
                n_steps,
                n_panels,
                s,
                c_grid: raw.c_grid.clone(),
            })
        }
        "engine" => {
            let h0 = table.resolve("h0", &raw.h0)?;
            require_hermitian("h0", &h0)?;
            let pulse = resolve_pulse(&table, &raw.pulse)?;
            if pulse.shape == PulseShape::Constant {
                return Err(invalid(
                    "pulse.shape",
                    "engine stroke must be cyclic; a constant pulse has V(0) != 0",
                ));
            }
            require_dim("pulse.amplitude", &pulse.amplitude, h0.dim())?;
            let rho0 = table.resolve("rho0", &raw.rho0)?;
            require_dim("rho0", &rho0, h0.dim())?;
            let tau = raw.tau.ok_or_else(|| invalid("tau", "required"))?;
            let g_grid = raw
                .g_grid
                .as_ref()
                .ok_or_else(|| invalid("g_grid", "required"))?
                .materialize("g_grid")?;
            positive_grid("g_grid", &g_grid)?;
            ExperimentKind::Engine(EngineConfig {
                h0,
                pulse,
                rho0,
                tau,
                g_grid,
                n_steps,
                n_panels,
                s,
            })
        }
        "metrology" => {
            let h = table.resolve("h", &raw.h)?;
            require_hermitian("h", &h)?;
            let psi0 = table.resolve("psi0", &raw.psi0)?;
            require_dim("psi0", &psi0, h.dim())?;
            let povm_names = raw
                .povm
                .as_ref()
                .ok_or_else(|| invalid("povm", "required"))?;
            let povm = povm_names
                .iter()
                .map(|n| table.resolve_named("povm", n))
                .collect::<Result<Vec<_>>>()?;
            for m in &povm {
                require_dim("povm", m, h.dim())?;
            }
            let eta_grid = raw
                .eta_grid
                .as_ref()
                .ok_or_else(|| invalid("eta_grid", "required"))?
                .materialize("eta_grid")?;
            let delta_grid = raw
                .delta_grid
                .as_ref()
                .ok_or_else(|| invalid("delta_grid", "required"))?
                .materialize("delta_grid")?;
            positive_grid("delta_grid", &delta_grid)?;
            ExperimentKind::Metrology(MetrologyConfig {
                h,
                psi0,
                povm,
                eta_grid,
                delta_grid,
                d_eta: raw.d_eta.unwrap_or(1e-4),
            })
        }
        "zeno" => {
            let c = raw.c.ok_or_else(|| invalid("c", "required"))?;
            if c < 0.0 {
                return Err(invalid("c", "must be nonnegative"));
            }
            let omega = raw.omega.ok_or_else(|| invalid("omega", "required"))?;
            let tau = raw.tau.ok_or_else(|| invalid("tau", "required"))?;
            let n_grid = raw
                .n_grid
                .clone()
                .ok_or_else(|| invalid("n_grid", "required"))?;
            if n_grid.is_empty() || n_grid.iter().any(|&n| n < 1) {
                return Err(invalid("n_grid", "needs entries >= 1"));
            }
            ExperimentKind::Zeno(ZenoConfig {
                c,
                omega,
                tau,
                n_grid,
            })
        }
        "om_oracle" => ExperimentKind::OmOracle(OmOracleConfig {
            seed: raw.seed.unwrap_or(0),
            sample_count: raw
                .sample_count
                .ok_or_else(|| invalid("sample_count", "required"))?,
            max_lambda: raw.max_lambda.unwrap_or(6),
            max_outcomes: raw.max_outcomes.unwrap_or(4),
            max_pd: raw.max_pd.unwrap_or(0.2),
        }),
        other => {
            return Err(invalid(
                "kind",
                format!(
                    "unknown kind `{other}` (expected certify, engine, metrology, zeno, om_oracle)"
                ),
            ))
        }
    };

    let kind_name = match &kind {
        ExperimentKind::Certify(_) => "certify",
        ExperimentKind::Engine(_) => "engine",
        ExperimentKind::Metrology(_) => "metrology",
        ExperimentKind::Zeno(_) => "zeno",
        ExperimentKind::OmOracle(_) => "om_oracle",
    };
    let summary_name = raw
        .output
        .as_ref()
        .and_then(|o| o.summary.clone())
        .unwrap_or_else(|| format!("{kind_name}_summary.toml"));
    let series_name = raw
        .output
        .as_ref()
        .and_then(|o| o.series.clone())
        .unwrap_or_else(|| format!("{kind_name}_series.csv"));
    Ok(ExperimentConfig {
        kind,
        summary_name,
        series_name,
    })
}

/// Resolve an output file path under `out_dir`.
pub fn output_path(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const MINIMAL_CERTIFY: &str = r#"
kind = "certify"
tau = 1.0
t = 1.0
g_grid = { log10_start = -3.0, log10_stop = -1.0, points = 20 }
pulse = { shape = "half_sine", amplitude = "v" }
h0 = "h0"
psi0 = "plus"
observable = "n1"

[matrices]
h0 = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
v = [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]
plus = [[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]]
n1 = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
"#;

    #[test]
    fn minimal_certify_config_loads() {
        let f = write_temp(MINIMAL_CERTIFY);
        let cfg = load_config(f.path()).unwrap();
        match cfg.kind {
            ExperimentKind::Certify(c) => {
                assert_eq!(c.g_grid.len(), 20);
                assert!((c.g_grid[0] - 1e-3).abs() < 1e-12);
                assert!((c.g_grid[19] - 1e-1).abs() < 1e-12);
            }
            _ => panic!("wrong kind"),
        }
        assert_eq!(cfg.series_name, "certify_series.csv");
    }

    #[test]
    fn non_hermitian_h0_is_named_in_error() {
        let bad = MINIMAL_CERTIFY.replace(
            "h0 = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]",
            "h0 = [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]",
        );
        let f = write_temp(&bad);
        match load_config(f.path()) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "h0"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn zero_in_g_grid_is_rejected() {
        let bad = MINIMAL_CERTIFY.replace(
            "g_grid = { log10_start = -3.0, log10_stop = -1.0, points = 20 }",
            "g_grid = [0.0, 0.01, 0.1]",
        );
        let f = write_temp(&bad);
        match load_config(f.path()) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "g_grid"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_matrix_reference_is_rejected() {
        let bad = MINIMAL_CERTIFY.replace("psi0 = \"plus\"", "psi0 = \"nope\"");
        let f = write_temp(&bad);
        assert!(matches!(
            load_config(f.path()),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn parse_errors_carry_location() {
        let f = write_temp("kind = \"certify\"\nthis is not toml");
        match load_config(f.path()) {
            Err(Error::Parse { message }) => assert!(message.contains("line")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
