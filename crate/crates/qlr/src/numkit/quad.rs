//! Composite Simpson quadrature for matrix- and scalar-valued integrands.

use super::matrix::{Complex64, ComplexMatrix};
use crate::{Error, Result};

fn check_interval(t0: f64, t1: f64, n_panels: usize) -> Result<()> {
    if n_panels < 2 || n_panels % 2 != 0 {
        return Err(Error::BadPanelCount { n_panels });
    }
    if t1 < t0 {
        return Err(Error::BadParameters {
            reason: format!("integration interval reversed: [{t0}, {t1}]"),
        });
    }
    Ok(())
}

/// Simpson weight for node `k` of `n` subintervals (endpoints get 1).
fn weight(k: usize, n: usize) -> f64 {
    if k == 0 || k == n {
        1.0
    } else if k % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Entrywise composite Simpson rule over `n_panels` subintervals
/// (`n_panels` even). Fourth-order accurate for smooth integrands.
pub fn simpson_integrate<F>(f: F, t0: f64, t1: f64, n_panels: usize) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> ComplexMatrix,
{
    check_interval(t0, t1, n_panels)?;
    let first = f(t0);
    let dim = first.dim();
    if t1 == t0 {
        return Ok(ComplexMatrix::zeros(dim));
    }
    let h = (t1 - t0) / n_panels as f64;
    let mut acc = first.scale_re(weight(0, n_panels));
    for k in 1..=n_panels {
        let t = if k == n_panels { t1 } else { t0 + h * k as f64 };
        let fk = f(t);
        if fk.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: fk.dim(),
            });
        }
        acc = &acc + &fk.scale_re(weight(k, n_panels));
    }
    Ok(acc.scale_re(h / 3.0))
}

/// Scalar composite Simpson rule with the same panel convention.
pub fn simpson_integrate_scalar<F>(f: F, t0: f64, t1: f64, n_panels: usize) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    check_interval(t0, t1, n_panels)?;
    if t1 == t0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let h = (t1 - t0) / n_panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=n_panels {
        let t = if k == n_panels { t1 } else { t0 + h * k as f64 };
        acc += f(t) * weight(k, n_panels);
    }
    Ok(acc * (h / 3.0))
}
