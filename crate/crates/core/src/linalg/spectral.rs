//! Eigendecomposition `A = V Λ V⁻¹` and the reference functional calculus
//! `f(A) = V f(Λ) V⁻¹` used to validate the quadrature engines.

use nalgebra::linalg::{Schur, LU};
use nalgebra::Dyn;

use crate::error::{Error, Result};
use crate::{CMat, CVec, C64};

/// Eigenvector condition numbers above this make the oracle unavailable.
pub const EIGEN_CONDITION_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Sorted by (real part, imaginary part).
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors, column `k` paired with `eigenvalues[k]`.
    pub right_vectors: CMat,
    /// `‖V‖₂ ‖V⁻¹‖₂`.
    pub condition_estimate: f64,
    lu: LU<C64, Dyn, Dyn>,
}

fn complex_schur(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let schur = Schur::try_new(a.clone(), f64::EPSILON * 1e-2, 100 * n.max(10))
        .ok_or_else(|| Error::OracleUnavailable("Schur iteration did not converge".into()))?;
    let (q, mut t) = schur.unpack();
    for j in 0..n {
        for i in (j + 1)..n {
            if t[(i, j)].norm() > 1e-10 * scale {
                return Err(Error::OracleUnavailable(
                    "Schur form is not triangular".into(),
                ));
            }
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok((q, t))
}

/// Eigenvalues of `a` from its complex Schur form, sorted by (re, im).
pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    let (_, t) = complex_schur(a)?;
    let mut ev: Vec<C64> = (0..a.nrows()).map(|i| t[(i, i)]).collect();
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ev)
}

/// Largest real part over the spectrum.
pub fn spectral_abscissa(a: &CMat) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Operator 2-norm via singular values.
pub fn norm2(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// 2-norm condition number `σ_max / σ_min`.
pub fn condition2(a: &CMat) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn spectral_decompose(a: &CMat) -> Result<SpectralData> {
    let n = a.nrows();
    let (q, t) = complex_schur(a)?;
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;

    // Eigenvectors of the triangular factor by back substitution.
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut v = q * y;
    for k in 0..n {
        let nrm = v.column(k).norm();
        v.column_mut(k).unscale_mut(nrm);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (x, z) = (t[(i, i)], t[(j, j)]);
        x.re.total_cmp(&z.re).then(x.im.total_cmp(&z.im))
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&k| t[(k, k)]).collect();
    let v = CMat::from_fn(n, n, |i, j| v[(i, order[j])]);

    let condition_estimate = condition2(&v);
    if !condition_estimate.is_finite() || condition_estimate > EIGEN_CONDITION_THRESHOLD {
        return Err(Error::OracleUnavailable(format!(
            "eigenvector condition {condition_estimate:e} above {EIGEN_CONDITION_THRESHOLD:e}"
        )));
    }
    let residual = (a * &v - &v * CMat::from_diagonal(&CVec::from_vec(eigenvalues.clone())))
        .norm();
    let anorm = a.norm().max(f64::MIN_POSITIVE);
    if residual > 1e-10 * anorm * condition_estimate.max(1.0) {
        return Err(Error::OracleUnavailable(format!(
            "eigen residual {residual:e} too large"
        )));
    }
    let lu = v.clone().lu();
    Ok(SpectralData {
        eigenvalues,
        right_vectors: v,
        condition_estimate: condition_estimate.max(1.0),
        lu,
    })
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Λ) V⁻¹ X` for a block `X`.
    pub fn apply_block<F>(&self, f: F, x: &CMat) -> Result<CMat>
    where
        F: Fn(C64) -> Option<C64>,
    {
        if x.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.nrows(),
            });
        }
        let mut coeffs = self
            .lu
            .solve(x)
            .ok_or_else(|| Error::OracleUnavailable("eigenbasis singular".into()))?;
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(lam).ok_or(Error::Domain {
                re: lam.re,
                im: lam.im,
            })?;
            if !fl.re.is_finite() || !fl.im.is_finite() {
                return Err(Error::Domain {
                    re: lam.re,
                    im: lam.im,
                });
            }
            coeffs.row_mut(k).scale_mut(1.0);
            for j in 0..coeffs.ncols() {
                coeffs[(k, j)] *= fl;
            }
        }
        Ok(&self.right_vectors * coeffs)
    }

    pub fn apply<F>(&self, f: F, x: &CVec) -> Result<CVec>
    where
        F: Fn(C64) -> Option<C64>,
    {
        let xm = CMat::from_column_slice(x.len(), 1, x.as_slice());
        let y = self.apply_block(f, &xm)?;
        Ok(CVec::from_column_slice(y.as_slice()))
    }

    /// Materializes `f(A)`.
    pub fn matrix<F>(&self, f: F) -> Result<CMat>
    where
        F: Fn(C64) -> Option<C64>,
    {
        self.apply_block(f, &CMat::identity(self.dim(), self.dim()))
    }
}
