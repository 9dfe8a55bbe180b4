use crate::error::{Error, Result};
use crate::quadrature::{
    choose_truncation, integrate_density, integrate_vector, Density, Origin, Pointwise, Profile,
    QuadratureSpec,
};
use crate::C64;

/// Sign class of a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignInfo {
    Positive,
    Signed,
    Complex,
}

/// A measure on `[0, ∞)`: finitely many atoms plus an optional real density.
#[derive(Debug, Clone)]
pub struct MeasureRepr {
    /// `(location, weight)`.
    pub atoms: Vec<(f64, C64)>,
    pub density: Option<Density>,
    pub sign: SignInfo,
}

/// Sample points used to check the declared behavior at 0.
const ORIGIN_SAMPLES: [f64; 10] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-12];

impl MeasureRepr {
    pub fn new(atoms: Vec<(f64, C64)>, density: Option<Density>, sign: SignInfo) -> Result<Self> {
        let m = MeasureRepr {
            atoms,
            density,
            sign,
        };
        m.validate()?;
        Ok(m)
    }

    /// Density only; the sign class is inferred by sampling.
    pub fn from_density(density: Density) -> Self {
        let mut m = MeasureRepr {
            atoms: Vec::new(),
            density: Some(density),
            sign: SignInfo::Positive,
        };
        m.sign = m.infer_sign();
        m
    }

    pub fn from_atoms(atoms: Vec<(f64, C64)>) -> Self {
        let mut m = MeasureRepr {
            atoms,
            density: None,
            sign: SignInfo::Positive,
        };
        m.sign = m.infer_sign();
        m
    }

    pub fn dirac(loc: f64) -> Self {
        Self::from_atoms(vec![(loc, C64::new(1.0, 0.0))])
    }

    pub fn zero() -> Self {
        Self::from_atoms(Vec::new())
    }

    fn sample_points() -> impl Iterator<Item = f64> {
        ORIGIN_SAMPLES
            .iter()
            .copied()
            .chain((-6..=24).map(|k| 2f64.powf(k as f64 / 2.0)))
    }

    fn infer_sign(&self) -> SignInfo {
        if self.atoms.iter().any(|(_, w)| w.im != 0.0) {
            return SignInfo::Complex;
        }
        let atoms_pos = self.atoms.iter().all(|(_, w)| w.re >= 0.0);
        let dens_pos = self
            .density
            .as_ref()
            .map_or(true, |d| Self::sample_points().all(|t| d.eval(t) >= 0.0));
        if atoms_pos && dens_pos {
            SignInfo::Positive
        } else {
            SignInfo::Signed
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign == SignInfo::Positive
    }

    /// No atoms.
    pub fn is_continuous(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for &(loc, w) in &self.atoms {
            if !(loc >= 0.0 && loc.is_finite()) {
                return Err(Error::InvalidArgument(format!("atom location {loc} must be finite and nonnegative")));
            }
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("atom weight {w} is not finite")));
            }
            match self.sign {
                SignInfo::Positive if w.im != 0.0 || w.re < 0.0 => {
                    return Err(Error::InvalidArgument(format!("negative atom weight {w} in a positive measure")));
                }
                SignInfo::Signed if w.im != 0.0 => {
                    return Err(Error::InvalidArgument(format!("complex atom weight {w} in a real measure")));
                }
                _ => {}
            }
        }
        let Some(d) = &self.density else {
            return Ok(());
        };
        for t in Self::sample_points() {
            let v = d.eval(t);
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("density is not finite at t = {t:e}")));
            }
            if self.sign == SignInfo::Positive && v < 0.0 {
                return Err(Error::InvalidArgument(format!("density of a positive measure is negative at t = {t:e}")));
            }
            if t >= 1.0 && v.abs() > d.tail.at(t) * (1.0 + 1e-9) + 1e-300 {
                return Err(Error::InvalidArgument(format!(
                    "density {v:e} at t = {t} exceeds its declared envelope {:e}",
                    d.tail.at(t)
                )));
            }
        }
        if let Origin::Power(p) = d.origin {
            let ratio = |t: f64| d.eval(t).abs() * t.powf(-p);
            let reference = ratio(ORIGIN_SAMPLES[0]).max(ratio(0.1)).max(1.0);
            for &t in &ORIGIN_SAMPLES {
                if ratio(t) > 1e3 * reference {
                    return Err(Error::InvalidArgument(format!(
                        "density is not O(t^{p}) at 0: |d(t)| t^{} = {:e} at t = {t:e}",
                        -p,
                        ratio(t)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Distribution function `a(t) = μ([0, t])`. Atoms are counted in full.
    pub fn distribution(&self, t: f64) -> Result<C64> {
        if t < 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let mut acc: C64 = self
            .atoms
            .iter()
            .filter(|(loc, _)| *loc <= t)
            .map(|(_, w)| *w)
            .sum();
        if let Some(d) = &self.density {
            if t > 0.0 {
                acc += density_cdf(d, t)?;
            }
        }
        Ok(acc)
    }

    /// `∫ e^{st} dμ(t)`.
    pub fn laplace(&self, s: C64, spec: &QuadratureSpec) -> Result<C64> {
        let profile = [Profile::Exponential {
            m: 1.0,
            omega: s.re.min(0.0),
        }];
        if s.re > 0.0 && self.density.is_some() {
            return Err(Error::DivergentTail(format!("transform at Re s = {} > 0", s.re)));
        }
        let tail = match &self.density {
            Some(d) => Some(choose_truncation(&profile, &d.tail, spec.tail_target())?),
            None => None,
        };
        let mut phi = Pointwise(|t: f64| (s * t).exp());
        let out = integrate_vector(&mut phi, self, spec, tail)?;
        if !out.converged {
            return Err(Error::NonConvergent {
                error_estimate: out.error_estimate,
                target: out.target,
                panels: out.panels,
                t_star: out.t_star,
            });
        }
        Ok(out.value)
    }

    /// Multiplies the measure by a real constant.
    pub fn scaled(&self, c: f64) -> MeasureRepr {
        let mut m = MeasureRepr {
            atoms: self.atoms.iter().map(|&(l, w)| (l, w * c)).collect(),
            density: self.density.as_ref().map(|d| d.scaled(c)),
            sign: self.sign,
        };
        if c < 0.0 && m.sign == SignInfo::Positive {
            m.sign = SignInfo::Signed;
        }
        m
    }
}

/// `∫₀^t density`, closed form when declared.
pub fn density_cdf(d: &Density, t: f64) -> Result<C64> {
    if let Some(cdf) = &d.cdf {
        return Ok(C64::new(cdf(t), 0.0));
    }
    if let Origin::Power(p) = d.origin {
        if !(p > -1.0) {
            return Err(Error::DivergentOrigin(format!("density ~ t^{p} at 0")));
        }
    }
    let spec = QuadratureSpec::default().with_rel_tol(1e-13).with_abs_tol(1e-16);
    let out = integrate_density(&mut Pointwise(|_| 1.0f64), d, 0.0, t, &spec);
    Ok(C64::new(out.value, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::TailEnvelope;

    fn lebesgue() -> Density {
        Density::new(|_| 1.0, Origin::Power(0.0), TailEnvelope::power(1.0, 0.0))
    }

    #[test]
    fn unit_atom_transform_is_one() {
        let m = MeasureRepr::dirac(0.0);
        for s in [-0.1, -3.0, -100.0] {
            let v = m.laplace(C64::new(s, 0.0), &QuadratureSpec::default()).unwrap();
            assert_eq!(v, C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn lebesgue_transform() {
        let m = MeasureRepr::from_density(lebesgue());
        let v = m.laplace(C64::new(-2.0, 0.0), &QuadratureSpec::default()).unwrap();
        assert!((v - 0.5).norm() < 1e-12);
    }

    #[test]
    fn reciprocal_density_diverges() {
        let d = Density::new(|t: f64| 1.0 / t, Origin::Power(-1.0), TailEnvelope::power(1.0, -1.0));
        let m = MeasureRepr::from_density(d);
        let err = m.laplace(C64::new(-1.0, 0.0), &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, Error::DivergentOrigin(_)));
    }

    #[test]
    fn validation_catches_bad_declarations() {
        let d = Density::new(|t: f64| t.powf(-0.5), Origin::Power(0.0), TailEnvelope::power(1.0, -0.5));
        assert!(MeasureRepr::new(vec![], Some(d), SignInfo::Positive).is_err());
        let d = Density::new(|_| 2.0, Origin::Power(0.0), TailEnvelope::power(1.0, 0.0));
        assert!(MeasureRepr::new(vec![], Some(d), SignInfo::Positive).is_err());
        assert!(MeasureRepr::new(vec![(-1.0, C64::new(1.0, 0.0))], None, SignInfo::Positive).is_err());
        let d = Density::new(|_| -1.0, Origin::Power(0.0), TailEnvelope::power(1.0, 0.0));
        assert!(MeasureRepr::new(vec![], Some(d.clone()), SignInfo::Positive).is_err());
        assert!(MeasureRepr::new(vec![], Some(d), SignInfo::Signed).is_ok());
    }

    #[test]
    fn distribution_counts_atoms_and_density() {
        let m = MeasureRepr {
            atoms: vec![(0.5, C64::new(2.0, 0.0))],
            density: Some(lebesgue()),
            sign: SignInfo::Positive,
        };
        assert!((m.distribution(0.25).unwrap() - 0.25).norm() < 1e-13);
        assert!((m.distribution(0.5).unwrap() - 2.5).norm() < 1e-13);
        assert!((m.distribution(3.0).unwrap() - 5.0).norm() < 1e-12);
    }
}
