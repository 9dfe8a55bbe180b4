use nalgebra::DMatrix;

use super::expm::{expm_action_block, norm1};
use super::spectral::{norm2, spectral_abscissa, spectral_decompose, SpectralData};
use crate::error::{Error, Result};
use crate::{CMat, CVec, C64};

/// Resolvent solves refuse systems whose 1-norm condition exceeds this.
pub const RESOLVENT_CONDITION_THRESHOLD: f64 = 1e12;

/// Relative margin applied to the spectral abscissa when certifying ω, so that
/// `M e^{ωt}` stays a valid bound beyond the sampled grid.
pub const OMEGA_MARGIN: f64 = 0.01;

/// Sampled growth constants that round to 1 within this are treated as contractions.
pub const CONTRACTION_SNAP: f64 = 1e-10;

/// `‖T(t)‖ ≤ M e^{ωt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthProfile {
    pub m: f64,
    pub omega: f64,
}

/// `‖T(t)‖ ≤ C / t^δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayProfile {
    pub c: f64,
    pub delta: f64,
}

/// A square matrix certified to generate a bounded semigroup `T(t) = e^{tA}`.
#[derive(Debug, Clone)]
pub struct Generator {
    matrix: CMat,
    growth: GrowthProfile,
    decay: Option<DecayProfile>,
    injective: bool,
    abscissa: f64,
}

fn abscissa_tolerance(a: &CMat) -> f64 {
    1e-12 * norm1(a).max(1.0)
}

/// Geometric grid from well below `1/‖A‖` out past the decay scale of the
/// slowest mode.
pub fn default_certification_grid(a: &CMat, abscissa: f64) -> Vec<f64> {
    let start = 1e-3 / norm1(a).max(1.0);
    let end = if abscissa < 0.0 {
        (60.0 / abscissa.abs()).clamp(10.0, 1e4)
    } else {
        1e3
    };
    let n = 120;
    let ratio = (end / start).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| start * ratio.powi(k as i32)).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("certification grid is empty".into()));
    }
    if grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument(
            "certification grid must contain positive finite times".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "certification grid must be increasing".into(),
        ));
    }
    Ok(())
}

/// Certifies `(M, ω)` with `‖e^{tA}‖₂ ≤ M e^{ωt}` on `grid`.
///
/// ω starts from the spectral abscissa, pulled toward zero by [`OMEGA_MARGIN`];
/// `M` is the smallest constant that covers every sampled norm (and at least 1).
pub fn certify_growth(a: &CMat, grid: &[f64]) -> Result<GrowthProfile> {
    check_grid(grid)?;
    let abscissa = spectral_abscissa(a)?;
    let tol = abscissa_tolerance(a);
    if abscissa > tol {
        return Err(Error::NotBoundedGenerator { abscissa });
    }
    let omega = if abscissa < -tol {
        abscissa * (1.0 - OMEGA_MARGIN)
    } else {
        0.0
    };
    let n = a.nrows();
    let ident = CMat::identity(n, n);
    let mut m: f64 = 1.0;
    for &t in grid {
        let nrm = norm2(&expm_action_block(a, t, &ident));
        m = m.max(nrm * (-omega * t).exp());
    }
    if m <= 1.0 + CONTRACTION_SNAP {
        m = 1.0;
    }
    Ok(GrowthProfile { m, omega })
}

impl Generator {
    /// Builds a generator and certifies its growth profile on the default grid.
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "generator must be a nonempty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("generator has non-finite entries".into()));
        }
        let abscissa = spectral_abscissa(&matrix)?;
        let grid = default_certification_grid(&matrix, abscissa);
        let growth = certify_growth(&matrix, &grid)?;
        let injective = {
            let sv = matrix.clone().singular_values();
            let max = sv.iter().cloned().fold(0.0, f64::max);
            let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            min > 1e-12 * max.max(1.0)
        };
        Ok(Generator {
            matrix,
            growth,
            decay: None,
            injective,
            abscissa,
        })
    }

    pub fn from_real(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(|v| C64::new(v, 0.0)))
    }

    pub fn from_real_rows(n: usize, rows: &[f64]) -> Result<Self> {
        Self::from_real(&DMatrix::from_row_slice(n, n, rows))
    }

    /// Attaches an algebraic decay profile after checking it on the
    /// certification grid.
    pub fn with_decay_profile(mut self, c: f64, delta: f64) -> Result<Self> {
        if !(c > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "decay profile needs C > 0 and δ > 0, got C={c}, δ={delta}"
            )));
        }
        let grid = default_certification_grid(&self.matrix, self.abscissa);
        let ident = CMat::identity(self.dim(), self.dim());
        for &t in &grid {
            let nrm = norm2(&expm_action_block(&self.matrix, t, &ident));
            if nrm > c * t.powf(-delta) * (1.0 + 1e-9) {
                return Err(Error::InvalidArgument(format!(
                    "decay profile C={c}, δ={delta} violated at t={t}: ‖T(t)‖={nrm}"
                )));
            }
        }
        self.decay = Some(DecayProfile { c, delta });
        Ok(self)
    }

    /// For an exponentially stable semigroup, `e^{ωt} ≤ (δ/(e|ω|))^δ t^{-δ}`
    /// gives a decay profile for any δ.
    pub fn with_derived_decay(self, delta: f64) -> Result<Self> {
        let GrowthProfile { m, omega } = self.growth;
        if omega >= 0.0 {
            return Err(Error::InvalidArgument(
                "derived decay profile requires ω < 0".into(),
            ));
        }
        let c = m * (delta / (std::f64::consts::E * omega.abs())).powf(delta);
        self.with_decay_profile(c, delta)
    }

    /// Re-runs certification on a caller-supplied grid and stores the result.
    pub fn recertify(&mut self, grid: &[f64]) -> Result<GrowthProfile> {
        let g = certify_growth(&self.matrix, grid)?;
        self.growth = g;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn growth(&self) -> GrowthProfile {
        self.growth
    }

    pub fn growth_m(&self) -> f64 {
        self.growth.m
    }

    pub fn growth_omega(&self) -> f64 {
        self.growth.omega
    }

    pub fn decay(&self) -> Option<DecayProfile> {
        self.decay
    }

    pub fn injective(&self) -> bool {
        self.injective
    }

    pub fn spectral_abscissa(&self) -> f64 {
        self.abscissa
    }

    pub fn is_contraction(&self) -> bool {
        self.growth.m == 1.0
    }

    pub fn spectral(&self) -> Result<SpectralData> {
        spectral_decompose(&self.matrix)
    }

    /// `T(t) = e^{tA}`.
    pub fn semigroup(&self, t: f64) -> Result<CMat> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative time {t}")));
        }
        let n = self.dim();
        Ok(expm_action_block(&self.matrix, t, &CMat::identity(n, n)))
    }

    pub fn check_block(&self, x: &CMat) -> Result<()> {
        if x.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.nrows(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &CVec) -> Result<CVec> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(&self.matrix * x)
    }
}

/// `e^{tA} x`. Exact identity at `t = 0`.
pub fn expm_action(gen: &Generator, t: f64, x: &CVec) -> Result<CVec> {
    if x.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: x.len(),
        });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "semigroup time must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(x.clone());
    }
    let xm = CMat::from_column_slice(x.len(), 1, x.as_slice());
    let y = expm_action_block(gen.matrix(), t, &xm);
    Ok(CVec::from_column_slice(y.as_slice()))
}

/// Solves `(tI - A) Y = X` with one step of iterative refinement.
pub fn resolvent_solve_block(a: &CMat, t: f64, x: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if x.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.nrows(),
        });
    }
    let shifted = CMat::identity(n, n).map(|z| z * t) - a;
    let lu = shifted.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::Singular {
        condition: f64::INFINITY,
        threshold: RESOLVENT_CONDITION_THRESHOLD,
    })?;
    let condition = norm1(&shifted) * norm1(&inv);
    if !condition.is_finite() || condition > RESOLVENT_CONDITION_THRESHOLD {
        return Err(Error::Singular {
            condition,
            threshold: RESOLVENT_CONDITION_THRESHOLD,
        });
    }
    let mut y = &inv * x;
    let r = x - &shifted * &y;
    y += &inv * r;
    Ok(y)
}

pub fn resolvent_solve(gen: &Generator, t: f64, x: &CVec) -> Result<CVec> {
    let xm = CMat::from_column_slice(x.len(), 1, x.as_slice());
    let y = resolvent_solve_block(gen.matrix(), t, &xm)?;
    Ok(CVec::from_column_slice(y.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    fn cv(vals: &[f64]) -> CVec {
        CVec::from_iterator(vals.len(), vals.iter().map(|&v| r(v)))
    }

    #[test]
    fn zero_generator_is_identity_semigroup() {
        let g = Generator::from_real_rows(1, &[0.0]).unwrap();
        let y = expm_action(&g, 5.0, &cv(&[3.0])).unwrap();
        assert_eq!(y[0], r(3.0));
        assert!(!g.injective());
        assert_eq!(g.growth_omega(), 0.0);
        assert!(g.growth_m() >= 1.0);
    }

    #[test]
    fn scalar_decay() {
        let g = Generator::from_real_rows(1, &[-1.0]).unwrap();
        let y = expm_action(&g, 1.0, &cv(&[1.0])).unwrap();
        assert!((y[0].re - (-1.0f64).exp()).abs() < 1e-16);
        let GrowthProfile { m, omega } = g.growth();
        assert!(m >= 1.0);
        assert!(omega <= -1.0 + 0.02);
    }

    #[test]
    fn time_zero_returns_input_exactly() {
        let g = Generator::from_real_rows(2, &[-1.0, 1.0, 0.0, -2.0]).unwrap();
        let x = cv(&[0.1, 0.7]);
        assert_eq!(expm_action(&g, 0.0, &x).unwrap(), x);
    }

    #[test]
    fn two_by_two_against_eigendecomposition() {
        // A = V diag(-1,-2) V^{-1} with V = [[1, 1],[0, -1]]
        let g = Generator::from_real_rows(2, &[-1.0, 1.0, 0.0, -2.0]).unwrap();
        let t: f64 = 0.7;
        let (e1, e2) = ((-t).exp(), (-2.0 * t).exp());
        // V e^{tΛ} V^{-1} (1,1): V^{-1}(1,1) = (2, -1)
        let want = [2.0 * e1 - e2, e2];
        let y = expm_action(&g, t, &cv(&[1.0, 1.0])).unwrap();
        for k in 0..2 {
            assert!((y[k].re - want[k]).abs() <= 1e-12 * want[k].abs());
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Generator::from_real_rows(1, &[-1.0]).unwrap();
        assert!(matches!(
            expm_action(&g, -1.0, &cv(&[1.0])),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            expm_action(&g, 1.0, &cv(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Generator::from_real_rows(1, &[0.5]),
            Err(Error::NotBoundedGenerator { .. })
        ));
    }

    #[test]
    fn resolvent_scalars() {
        let g = Generator::from_real_rows(1, &[-1.0]).unwrap();
        let y = resolvent_solve(&g, 1.0, &cv(&[1.0])).unwrap();
        assert!((y[0].re - 0.5).abs() < 1e-16);
        let g = Generator::from_real_rows(1, &[-2.0]).unwrap();
        let y = resolvent_solve(&g, 0.0, &cv(&[4.0])).unwrap();
        assert!((y[0].re - 2.0).abs() < 1e-16);
    }

    #[test]
    fn resolvent_two_by_two_direct() {
        let g = Generator::from_real_rows(2, &[-1.0, 1.0, 0.0, -2.0]).unwrap();
        // (3I - A) = [[4, -1],[0, 5]]; y2 = 0, y1 = 1/4
        let y = resolvent_solve(&g, 3.0, &cv(&[1.0, 0.0])).unwrap();
        assert!((y[0].re - 0.25).abs() < 1e-16);
        assert!(y[1].norm() < 1e-16);
    }

    #[test]
    fn resolvent_at_eigenvalue_is_singular() {
        let g = Generator::from_real_rows(1, &[-1.0]).unwrap();
        assert!(matches!(
            resolvent_solve(&g, -1.0, &cv(&[1.0])),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn transient_growth_certified() {
        let g = Generator::from_real_rows(2, &[-1.0, 10.0, 0.0, -1.0]).unwrap();
        assert!(g.growth_m() > 1.0);
        // Sampled norms never exceed the certified envelope.
        let GrowthProfile { m, omega } = g.growth();
        for t in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
            let nrm = norm2(&g.semigroup(t).unwrap());
            assert!(nrm <= m * (omega * t).exp() * (1.0 + 1e-12), "t={t}");
        }
    }

    #[test]
    fn certify_rejects_unstable_and_bad_grids() {
        let a = CMat::from_element(1, 1, r(0.1));
        assert!(matches!(
            certify_growth(&a, &[1.0]),
            Err(Error::NotBoundedGenerator { .. })
        ));
        let a = CMat::from_element(1, 1, r(-1.0));
        assert!(certify_growth(&a, &[]).is_err());
        assert!(certify_growth(&a, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn decay_profile_is_validated() {
        let g = Generator::from_real_rows(1, &[-1.0]).unwrap();
        // sup t e^{-t} = 1/e
        assert!(g.clone().with_decay_profile(0.37, 1.0).is_ok());
        assert!(g.with_decay_profile(0.3, 1.0).is_err());
    }
}
