//! Hermitian and unitary eigendecompositions for small dense matrices.
//!
//! The Hermitian solver is a cyclic complex Jacobi iteration: unitary plane
//! rotations zero the off-diagonal entries in a fixed sweep order, so the
//! same input bits always produce the same output bits. Jacobi also resolves
//! small eigenvalues of near-singular positive matrices to high relative
//! accuracy, which the channel feasibility search depends on.
//!
//! Unitary (normal) matrices are diagonalized by splitting into the commuting
//! Hermitian pair `(U + U^dag)/2`, `(U - U^dag)/2i` and refining degenerate
//! clusters of the first with the second.

use super::matrix::{vec_inner, Complex64, ComplexMatrix};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues ascend; column `k` of `eigenvectors` belongs to
/// `eigenvalues[k]`. Within a degenerate cluster the columns are an
/// arbitrary orthonormal basis of the eigenspace.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// Rebuild `V f(Lambda) V^dagger`.
    pub fn apply_function(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for k in 0..n {
            let fk = f(self.eigenvalues[k]);
            if fk.re == 0.0 && fk.im == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = v.get(r, k) * fk;
                for c in 0..n {
                    let add = vr * v.get(c, k).conj();
                    out.set(r, c, out.get(r, c) + add);
                }
            }
        }
        out
    }

    /// Rebuild the original matrix.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|x| Complex64::new(x, 0.0))
    }
}

/// Full spectral decomposition of a Hermitian matrix.
///
/// Fails with `NotHermitian` if `||A - A^dag|| > tol * ||A||` and with
/// `NoConvergence` if the sweep budget is exhausted (does not happen for
/// the dimensions this crate targets).
pub fn hermitian_eig(a: &ComplexMatrix, tol: f64) -> Result<HermitianEig> {
    let n = a.dim();
    let frob = a.frobenius_norm();
    let residual = a.hermitian_residual();
    if residual > tol * frob {
        return Err(Error::NotHermitian { residual, tol });
    }

    // Work on the Hermitian part so rounding asymmetry cannot drift.
    let mut w: Vec<Complex64> = a.hermitized().entries().to_vec();
    for k in 0..n {
        w[k * n + k] = Complex64::new(w[k * n + k].re, 0.0);
    }
    let mut v: Vec<Complex64> = ComplexMatrix::identity(n).entries().to_vec();

    let conv = 1e-14 * frob.max(f64::MIN_POSITIVE);
    let skip = 1e-18 * frob;
    let mut converged = frob == 0.0;
    for _sweep in 0..MAX_SWEEPS {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += w[p * n + q].norm_sqr();
            }
        }
        if off_sq.sqrt() <= conv {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                let m = apq.norm();
                if m <= skip {
                    continue;
                }
                let phi = apq.arg();
                let phase = Complex64::from_polar(1.0, phi);
                let app = w[p * n + p].re;
                let aqq = w[q * n + q].re;
                let theta = 0.5 * (2.0 * m).atan2(app - aqq);
                let c = theta.cos();
                let s = theta.sin();

                // Left action of R^dagger on rows p and q.
                for i in 0..n {
                    let wp = w[p * n + i];
                    let wq = w[q * n + i];
                    w[p * n + i] = wp * c + wq * s * phase;
                    w[q * n + i] = -wp * s * phase.conj() + wq * c;
                }
                // Right action of R on columns p and q.
                for i in 0..n {
                    let wp = w[i * n + p];
                    let wq = w[i * n + q];
                    w[i * n + p] = wp * c + wq * s * phase.conj();
                    w[i * n + q] = -wp * s * phase + wq * c;
                }
                // Accumulate eigenvectors: V <- V R.
                for i in 0..n {
                    let vp = v[i * n + p];
                    let vq = v[i * n + q];
                    v[i * n + p] = vp * c + vq * s * phase.conj();
                    v[i * n + q] = -vp * s * phase + vq * c;
                }
                w[p * n + q] = Complex64::new(0.0, 0.0);
                w[q * n + p] = Complex64::new(0.0, 0.0);
                w[p * n + p] = Complex64::new(w[p * n + p].re, 0.0);
                w[q * n + q] = Complex64::new(w[q * n + q].re, 0.0);
            }
        }
    }
    if !converged {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += w[p * n + q].norm_sqr();
            }
        }
        if off_sq.sqrt() > conv {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        w[i * n + i]
            .re
            .partial_cmp(&w[j * n + j].re)
            .expect("eigenvalues are finite")
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| w[i * n + i].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, col, v[r * n + src]);
        }
    }
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors: vectors,
    })
}

impl ComplexMatrix {
    /// Positive semidefinite within `tol` (relative to the matrix norm).
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        match hermitian_eig(self, tol) {
            Ok(eig) => {
                let scale = self.frobenius_norm().max(1.0);
                eig.eigenvalues[0] >= -tol * scale
            }
            Err(_) => false,
        }
    }
}

/// Eigendecomposition of a unitary matrix: `U v_k = exp(-i phase_k) v_k`.
///
/// Phases lie in `(-pi, pi]` and ascend.
#[derive(Debug, Clone)]
pub struct UnitaryEig {
    pub phases: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

/// Diagonalize a unitary matrix.
///
/// `(U + U^dag)/2` fixes the eigenvector structure up to degeneracies in
/// `cos(phase)`, which `(U - U^dag)/2i` then resolves inside each cluster.
pub fn unitary_eig(u: &ComplexMatrix, tol: f64) -> Result<UnitaryEig> {
    let n = u.dim();
    let residual = u.unitary_residual();
    if residual > tol * (n as f64).sqrt().max(1.0) {
        return Err(Error::NotUnitary { residual, tol });
    }

    let udag = u.adjoint();
    let h1 = (u + &udag).scale_re(0.5);
    let h2 = (u - &udag).scale(Complex64::new(0.0, -0.5));
    // Both exactly Hermitian by construction; loose tolerance for safety.
    let e1 = hermitian_eig(&h1, 1e-8)?;

    let cluster_eps = 1e-7;
    let mut columns: Vec<Vec<Complex64>> = (0..n).map(|k| e1.eigenvectors.column(k)).collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && e1.eigenvalues[end] - e1.eigenvalues[end - 1] <= cluster_eps {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            // Project the second Hermitian part onto the cluster and
            // rediagonalize there.
            let block_cols: Vec<Vec<Complex64>> =
                (start..end).map(|k| h2.apply_vec(&columns[k])).collect();
            let mut b = ComplexMatrix::zeros(m);
            for r in 0..m {
                for c in 0..m {
                    b.set(r, c, vec_inner(&columns[start + r], &block_cols[c]));
                }
            }
            let eb = hermitian_eig(&b.hermitized(), 1e-6)?;
            let mut rotated: Vec<Vec<Complex64>> = Vec::with_capacity(m);
            for k in 0..m {
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for j in 0..m {
                    let w = eb.eigenvectors.get(j, k);
                    for (i, entry) in col.iter_mut().enumerate() {
                        *entry += columns[start + j][i] * w;
                    }
                }
                rotated.push(col);
            }
            for (k, col) in rotated.into_iter().enumerate() {
                columns[start + k] = col;
            }
        }
        start = end;
    }

    let mut phases = Vec::with_capacity(n);
    let mut max_res = 0.0_f64;
    for col in &columns {
        let uv = u.apply_vec(col);
        let mu = vec_inner(col, &uv);
        let mu_hat = mu / mu.norm().max(f64::MIN_POSITIVE);
        let res: f64 = uv
            .iter()
            .zip(col)
            .map(|(a, b)| (*a - mu_hat * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_res = max_res.max(res);
        // U v = exp(-i theta) v, so theta = -arg(mu); fold -pi to +pi.
        let mut theta = -mu.arg();
        if theta <= -std::f64::consts::PI {
            theta += 2.0 * std::f64::consts::PI;
        }
        phases.push(theta);
    }
    if max_res > 1e-7 * (n as f64).sqrt() {
        return Err(Error::FactorizationFailed { residual: max_res });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        phases[i]
            .partial_cmp(&phases[j])
            .expect("phases are finite")
            .then(i.cmp(&j))
    });
    let sorted_phases: Vec<f64> = order.iter().map(|&i| phases[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, col, columns[src][r]);
        }
    }
    Ok(UnitaryEig {
        phases: sorted_phases,
        eigenvectors: vectors,
    })
}
