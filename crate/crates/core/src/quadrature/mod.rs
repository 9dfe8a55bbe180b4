//! Improper integrals `∫₀^∞ Φ(t) dμ(t)` over measures with atoms and a density.

pub mod adaptive;
pub mod density;
pub mod rules;
pub mod tail;

pub use adaptive::{
    integrate_density, integrate_finite, integrate_singular_left, NodeSet, Outcome,
    PanelIntegrand, Pointwise, QuadValue,
};
pub use density::{Density, Origin, RealFn, TailEnvelope};
pub use tail::{choose_truncation, tail_bound_for, Profile, TailBound};

use crate::error::{Error, Result};
use crate::symbols::MeasureRepr;

/// How a power singularity `t^p` of the density at 0 is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointHandling {
    /// `t = h v^{1/(p+1)}` followed by Gauss-Legendre.
    Substitution,
    /// Gauss-Jacobi rule for the weight `t^p`.
    JacobiWeights,
}

/// Which semigroup profiles may be used to bound the tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationMode {
    /// `M e^{ωt}` only.
    ExponentialTail,
    /// `C t^{-δ}` only.
    AlgebraicTail,
    /// Whichever of the two gives the smaller bound.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub panel_order: usize,
    pub endpoint_handling: EndpointHandling,
    pub truncation_mode: TruncationMode,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_panels: 4096,
            panel_order: 32,
            endpoint_handling: EndpointHandling::JacobiWeights,
            truncation_mode: TruncationMode::Auto,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.panel_order < 2 {
            return Err(Error::InvalidArgument("panel_order must be at least 2".into()));
        }
        if self.max_panels < 1 {
            return Err(Error::InvalidArgument("max_panels must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// Target the tail bound of a truncated integral must meet, per unit input.
    pub fn tail_target(&self) -> f64 {
        TAIL_SHARE * self.abs_tol
    }

    /// The spec handed to the panel engine once the tail budget is reserved.
    pub(crate) fn panel_share(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: (1.0 - TAIL_SHARE) * self.rel_tol,
            abs_tol: (1.0 - TAIL_SHARE) * self.abs_tol,
            ..*self
        }
    }
}

/// Fraction of the absolute tolerance reserved for the truncated tail.
const TAIL_SHARE: f64 = 0.1;

/// Result of [`integrate_vector`].
#[derive(Debug, Clone)]
pub struct Integral<V> {
    pub value: V,
    /// Panel refinement estimate plus the tail bound (scaled by the input norm).
    pub error_estimate: f64,
    pub target: f64,
    pub t_star: f64,
    pub panels: usize,
    pub converged: bool,
}

/// `Σ w_k Φ(t_k) + ∫₀^{T*} Φ(t) density(t) dt`, with the tail beyond `T*`
/// accounted for in the error estimate.
///
/// `tail` is required when the measure has a density; it is typically
/// obtained from [`choose_truncation`] with the semigroup's growth profile.
pub fn integrate_vector<V, I>(
    phi: &mut I,
    mu: &MeasureRepr,
    spec: &QuadratureSpec,
    tail: Option<TailBound>,
) -> Result<Integral<V>>
where
    V: QuadValue,
    I: PanelIntegrand<V>,
{
    spec.validate()?;
    let scale = phi.scale();
    let mut value: Option<V> = None;
    for &(loc, w) in &mu.atoms {
        let v = phi.at(loc);
        match value.as_mut() {
            Some(acc) => acc.axpy_complex(w, &v),
            None => {
                let mut acc = v.zeros_like();
                acc.axpy_complex(w, &v);
                value = Some(acc);
            }
        }
    }
    let Some(density) = mu.density.as_ref() else {
        let value = match value {
            Some(v) => v,
            None => phi.at(0.0).zeros_like(),
        };
        return Ok(Integral {
            target: (spec.abs_tol * scale).max(spec.rel_tol * value.norm()),
            value,
            error_estimate: 0.0,
            t_star: 0.0,
            panels: 0,
            converged: true,
        });
    };
    if let Origin::Power(p) = density.origin {
        if !(p > -1.0) {
            return Err(Error::DivergentOrigin(format!(
                "density ~ t^{p} is not integrable at 0"
            )));
        }
    }
    let tail = tail.ok_or_else(|| {
        Error::InvalidArgument("a tail bound is required for measures with a density".into())
    })?;
    let out = integrate_density(phi, density, 0.0, tail.t_star, &spec.panel_share());
    let mut total = out.value;
    if let Some(atoms) = value {
        total.axpy(1.0, &atoms);
    }
    let error_estimate = out.error_estimate + tail.bound * scale;
    let target = (spec.abs_tol * scale).max(spec.rel_tol * total.norm());
    Ok(Integral {
        converged: error_estimate <= target,
        value: total,
        error_estimate,
        target,
        t_star: tail.t_star,
        panels: out.panels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::MeasureRepr;
    use crate::C64;

    fn exp_decay_tail() -> TailBound {
        let profile = [Profile::Exponential { m: 1.0, omega: -1.0 }];
        choose_truncation(&profile, &TailEnvelope::power(1.0, 0.0), 1e-13).unwrap()
    }

    #[test]
    fn lebesgue_against_exponential() {
        let mu = MeasureRepr::from_density(Density::new(|_| 1.0, Origin::Power(0.0), TailEnvelope::power(1.0, 0.0)));
        let mut phi = Pointwise(|t: f64| (-t).exp());
        let r = integrate_vector(&mut phi, &mu, &QuadratureSpec::default(), Some(exp_decay_tail())).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0f64).abs() < 1e-10);
    }

    #[test]
    fn gamma_half_normalizes() {
        let g = crate::special::gamma(0.5);
        for handling in [EndpointHandling::JacobiWeights, EndpointHandling::Substitution] {
            let d = Density::new(move |t: f64| t.powf(-0.5) / g, Origin::Power(-0.5), TailEnvelope::power(1.0 / g, -0.5));
            let mu = MeasureRepr::from_density(d);
            let spec = QuadratureSpec {
                endpoint_handling: handling,
                ..Default::default()
            };
            let mut phi = Pointwise(|t: f64| (-t).exp());
            let r = integrate_vector(&mut phi, &mu, &spec, Some(exp_decay_tail())).unwrap();
            assert!(r.converged, "{handling:?}");
            assert!((r.value - 1.0f64).abs() < 1e-10, "{handling:?}: {}", r.value);
        }
    }

    #[test]
    fn atoms_are_exact() {
        let mu = MeasureRepr::from_atoms(vec![(0.0, C64::new(2.0, 0.0)), (1.5, C64::new(-0.5, 1.0))]);
        let mut phi = Pointwise(|t: f64| C64::new(t.cos(), t.sin()));
        let r = integrate_vector(&mut phi, &mu, &QuadratureSpec::default(), None).unwrap();
        let expect = C64::new(2.0, 0.0) + C64::new(-0.5, 1.0) * C64::new(1.5f64.cos(), 1.5f64.sin());
        assert_eq!(r.value, expect);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn polynomial_times_exponential_is_exact() {
        // ∫₀^∞ t^k e^{-t} dt = k!
        let mu = MeasureRepr::from_density(Density::new(|_| 1.0, Origin::Power(0.0), TailEnvelope::power(1.0, 0.0)));
        for k in [0, 3, 7, 12] {
            let profile = [Profile::Exponential { m: 1.0, omega: -0.5 }];
            let tail = choose_truncation(&profile, &TailEnvelope::power(1.0, 0.0), 1e-30).unwrap();
            let spec = QuadratureSpec::default().with_rel_tol(1e-15).with_abs_tol(1e-20);
            let mut phi = Pointwise(|t: f64| t.powi(k) * (-t).exp());
            let r = integrate_vector(&mut phi, &mu, &spec, Some(tail)).unwrap();
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            assert!((r.value - fact).abs() <= 1e-13 * fact, "k={k}: {}", r.value);
        }
    }

    #[test]
    fn nonintegrable_origin_is_rejected() {
        let mu = MeasureRepr::from_density(Density::new(|t: f64| 1.0 / t, Origin::Power(-1.0), TailEnvelope::power(1.0, -1.0)));
        let mut phi = Pointwise(|t: f64| (-t).exp());
        let err = integrate_vector(&mut phi, &mu, &QuadratureSpec::default(), Some(exp_decay_tail())).unwrap_err();
        assert!(err.is_non_convergent());
    }
}
