use std::fmt;
use std::sync::{Arc, OnceLock};

use super::family::Family;
use super::laplace::{consistency_spec, LaplaceSymbol, ScalarFn, CONSISTENCY_SAMPLES, SYMBOL_TOL};
use super::measure::{density_cdf, MeasureRepr, SignInfo};
use crate::error::{Error, Result};
use crate::quadrature::{
    choose_truncation, integrate_density, integrate_finite, Density, Origin, Pointwise, Profile,
    QuadratureSpec, RealFn, TailEnvelope,
};
use crate::C64;

/// Negative Bernstein function `ψ(s) = c₀ + ∫ (e^{su} - 1) u⁻¹ dρ(u)`.
///
/// An atom of `ρ` at `u = 0` contributes its weight times `s`.
#[derive(Clone)]
pub struct BernsteinSymbol {
    pub name: String,
    pub family: Family,
    pub c0: f64,
    pub levy: MeasureRepr,
    closed_form: Option<ScalarFn>,
    tail_fn: Option<RealFn>,
    tail_cache: Arc<OnceLock<std::result::Result<TailIntegral, Error>>>,
    /// Catalog name of `1/ψ`, when it is a Laplace symbol.
    pub reciprocal: Option<String>,
}

impl fmt::Debug for BernsteinSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BernsteinSymbol")
            .field("name", &self.name)
            .field("family", &self.family)
            .field("c0", &self.c0)
            .field("levy", &self.levy)
            .field("closed_form", &self.closed_form.is_some())
            .field("tail_fn", &self.tail_fn.is_some())
            .finish()
    }
}

/// `(e^{z} - 1)/z`, accurate for small `|z|`.
pub fn exprel(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..8 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Split point between the bounded near-zero integrand and the raw tail.
pub const LEVY_SPLIT: f64 = 1.0;

impl BernsteinSymbol {
    pub fn new(
        name: impl Into<String>,
        family: Family,
        c0: f64,
        levy: MeasureRepr,
        closed_form: Option<ScalarFn>,
        tail_fn: Option<RealFn>,
    ) -> Self {
        BernsteinSymbol {
            name: name.into(),
            family,
            c0,
            levy,
            closed_form,
            tail_fn,
            tail_cache: Arc::new(OnceLock::new()),
            reciprocal: None,
        }
    }

    pub fn with_reciprocal(mut self, name: impl Into<String>) -> Self {
        self.reciprocal = Some(name.into());
        self
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    /// Weight of the atom of `ρ` at 0.
    pub fn drift(&self) -> f64 {
        self.levy
            .atoms
            .iter()
            .filter(|(l, _)| *l == 0.0)
            .map(|(_, w)| w.re)
            .sum()
    }

    pub fn eval(&self, s: C64) -> Option<C64> {
        match &self.closed_form {
            Some(f) => f(s),
            None => self.eval_via_measure(s).ok(),
        }
    }

    pub fn eval_real(&self, s: f64) -> Option<f64> {
        self.eval(C64::new(s, 0.0)).map(|z| z.re)
    }

    /// `f(r) = ∫_r^∞ u⁻¹ dρ(u)`, density part of `ρ` only.
    pub fn tail_function(&self, r: f64) -> Result<f64> {
        if let Some(f) = &self.tail_fn {
            return Ok(f(r));
        }
        let Some(d) = &self.levy.density else {
            return Ok(0.0);
        };
        let cache = self.tail_cache.get_or_init(|| TailIntegral::build(d));
        match cache {
            Ok(ti) => Ok(ti.eval(r)),
            Err(e) => Err(e.clone()),
        }
    }

    /// `ρ((0, r])` for the density part.
    pub fn levy_cdf(&self, r: f64) -> Result<f64> {
        match &self.levy.density {
            Some(d) => Ok(density_cdf(d, r)?.re),
            None => Ok(0.0),
        }
    }

    /// The two integrability conditions on `ρ` at `r`: `∫₀^r dρ` and
    /// `∫_r^∞ u⁻¹ dρ(u)`.
    pub fn integrability(&self, r: f64) -> Result<(f64, f64)> {
        let head = self.levy.distribution(r)?.re;
        let tail = self.tail_function(r)?
            + self
                .levy
                .atoms
                .iter()
                .filter(|(l, _)| *l >= r && *l > 0.0)
                .map(|(l, w)| w.re / l)
                .sum::<f64>();
        if !(head.is_finite() && tail.is_finite()) {
            return Err(Error::DivergentTail(format!(
                "Lévy measure of '{}' fails integrability at r = {r}",
                self.name
            )));
        }
        Ok((head, tail))
    }

    /// Envelope of `u⁻¹ ρ'(u)` beyond 1.
    fn weighted_envelope(&self) -> Option<TailEnvelope> {
        self.levy.density.as_ref().map(|d| TailEnvelope {
            coeff: d.tail.coeff,
            power: d.tail.power - 1.0,
            rate: d.tail.rate,
        })
    }

    /// `c₀ + ∫ (e^{su} - 1) u⁻¹ dρ(u)` by quadrature.
    ///
    /// On `[0, 1]` the integrand `s·exprel(su)` is bounded; beyond 1 the
    /// integral is split as `∫ e^{su} u⁻¹ dρ - f(1)`.
    pub fn eval_via_measure(&self, s: C64) -> Result<C64> {
        self.eval_via_measure_with(s, &consistency_spec())
    }

    pub fn eval_via_measure_with(&self, s: C64, spec: &QuadratureSpec) -> Result<C64> {
        if s.re > 0.0 {
            return Err(Error::Domain { re: s.re, im: s.im });
        }
        let mut acc = C64::new(self.c0, 0.0);
        for &(loc, w) in &self.levy.atoms {
            acc += if loc == 0.0 { w * s } else { w * s * exprel(s * loc) };
        }
        let Some(d) = &self.levy.density else {
            return Ok(acc);
        };
        if s == C64::new(0.0, 0.0) {
            return Ok(acc);
        }
        let head = integrate_density(&mut Pointwise(|u: f64| s * exprel(s * u)), d, 0.0, LEVY_SPLIT, spec);
        let env = self.weighted_envelope().expect("density present");
        let profile = [Profile::Exponential { m: 1.0, omega: s.re }];
        let tb = choose_truncation(&profile, &env, spec.tail_target())?;
        let weighted = {
            let f = d.f.clone();
            Density::new(move |u: f64| f(u) / u, Origin::Power(0.0), env).with_breakpoints(d.breakpoints.clone())
        };
        let raw = if tb.t_star > LEVY_SPLIT {
            integrate_density(&mut Pointwise(|u: f64| (s * u).exp()), &weighted, LEVY_SPLIT, tb.t_star, spec)
        } else {
            crate::quadrature::Outcome {
                value: C64::new(0.0, 0.0),
                error_estimate: 0.0,
                target: 0.0,
                panels: 0,
                converged: true,
            }
        };
        let err = head.error_estimate + raw.error_estimate + tb.bound;
        let value = acc + head.value + raw.value - self.tail_function(LEVY_SPLIT)?;
        let target = 10.0 * (spec.abs_tol).max(spec.rel_tol * value.norm());
        if err > target {
            return Err(Error::NonConvergent {
                error_estimate: err,
                target,
                panels: head.panels + raw.panels,
                t_star: tb.t_star,
            });
        }
        Ok(value)
    }

    pub fn consistency(&self, samples: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &s in samples {
            let z = C64::new(s, 0.0);
            let q = self.eval_via_measure(z)?;
            let g = self.eval(z).ok_or(Error::Domain { re: s, im: 0.0 })?;
            worst = worst.max((q - g).norm() / (1.0 + g.norm()));
        }
        Ok(worst)
    }

    /// Sampled check that `ψ` is nondecreasing on `s < 0`.
    pub fn is_nondecreasing(&self) -> bool {
        let grid: Vec<f64> = (-12..=8).rev().map(|k| -(2f64.powi(k))).collect();
        let vals: Vec<Option<f64>> = grid.iter().map(|&s| self.eval_real(s)).collect();
        vals.windows(2).all(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => a <= b + 1e-12 * (1.0 + a.abs()),
            _ => false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c0 <= 0.0) {
            return Err(Error::ParameterRange(format!("c0 = {} must be nonpositive", self.c0)));
        }
        if self.levy.sign != SignInfo::Positive {
            return Err(Error::InvalidArgument("Lévy measure must be positive".into()));
        }
        self.levy.validate()?;
        if let Some(d) = &self.levy.density {
            if let Origin::Power(p) = d.origin {
                if !(p > -1.0) {
                    return Err(Error::DivergentOrigin(format!("ρ ~ u^{p} has infinite mass near 0")));
                }
            }
        }
        for r in [0.01, 1.0, 100.0] {
            self.integrability(r)?;
        }
        if let Some(v) = self.eval_real(0.0) {
            if (v - self.c0).abs() > 1e-12 * (1.0 + self.c0.abs()) {
                return Err(Error::InvalidArgument(format!("ψ(0) = {v} differs from c0 = {}", self.c0)));
            }
        }
        if !self.is_nondecreasing() {
            return Err(Error::InvalidArgument(format!("'{}' is not nondecreasing on s < 0", self.name)));
        }
        if self.closed_form.is_some() {
            let dev = self.consistency(&CONSISTENCY_SAMPLES)?;
            if dev > SYMBOL_TOL {
                return Err(Error::InvalidArgument(format!(
                    "'{}' does not match its Lévy representation (deviation {dev:e})",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// `ψ̃(s) = ψ(s)/s` as a Laplace symbol with density `f(r) = ∫_r^∞ u⁻¹ dρ(u)`
    /// plus an atom at 0 carrying the drift.
    pub fn psi_tilde(&self) -> Result<LaplaceSymbol> {
        if self.c0 != 0.0 {
            return Err(Error::ParameterRange(format!(
                "ψ̃ needs ψ(0) = 0, '{}' has c0 = {}",
                self.name, self.c0
            )));
        }
        if self.levy.atoms.iter().any(|(l, _)| *l > 0.0) {
            return Err(Error::Unsupported("ψ̃ for Lévy atoms away from 0".into()));
        }
        let drift = self.drift();
        let atoms = if drift != 0.0 {
            vec![(0.0, C64::new(drift, 0.0))]
        } else {
            Vec::new()
        };
        let density = match &self.levy.density {
            None => None,
            Some(d) => Some(self.tail_density(d)?),
        };
        let measure = MeasureRepr::new(atoms, density, SignInfo::Positive)?;
        let closed: Option<ScalarFn> = self.closed_form.clone().map(|psi| {
            let drift = drift;
            Arc::new(move |s: C64| {
                if s == C64::new(0.0, 0.0) {
                    return if drift != 0.0 { Some(C64::new(drift, 0.0)) } else { None };
                }
                psi(s).map(|v| v / s)
            }) as ScalarFn
        });
        Ok(LaplaceSymbol::new(
            format!("{}~", self.name),
            Family::PsiTilde(Box::new(self.family.clone())),
            measure,
            closed,
        ))
    }

    fn tail_density(&self, d: &Density) -> Result<Density> {
        let me = self.clone();
        let f = move |r: f64| me.tail_function(r).unwrap_or(f64::NAN);
        let (k, p, kappa) = (d.tail.coeff, d.tail.power, d.tail.rate);
        let env = if kappa > 0.0 {
            let margin = kappa - (p - 1.0).max(0.0);
            if margin <= 0.0 {
                return Err(Error::Unsupported("Lévy envelope too slow for a ψ̃ tail bound".into()));
            }
            TailEnvelope::exponential(k / margin, p - 1.0, kappa)
        } else if p < 0.0 {
            TailEnvelope::power(k / -p, p)
        } else {
            return Err(Error::DivergentTail("∫_r^∞ u⁻¹ dρ(u) diverges".into()));
        };
        let p0 = d.origin_exponent().unwrap_or(0.0);
        let out = if p0 < 0.0 {
            Density::new(f, Origin::Power(p0), env)
        } else {
            // f has a log-type singularity (p0 = 0) or a kink at 0;
            // ∫₀^h f = h f(h) + ρ((0, h]).
            let me = self.clone();
            let cdf = move |h: f64| h * me.tail_function(h).unwrap_or(f64::NAN) + me.levy_cdf(h).unwrap_or(f64::NAN);
            Density::new(f, Origin::Distribution, env).with_cdf(cdf)
        };
        Ok(out.with_breakpoints(d.breakpoints.clone()))
    }
}

/// `f(r) = ∫_r^∞ u⁻¹ρ'(u) du` from cached dyadic panel sums.
#[derive(Debug, Clone)]
struct TailIntegral {
    density: Density,
    k_min: i32,
    /// `suffix[i] = ∫_{2^{k_min+i}}^∞`.
    suffix: Vec<f64>,
}

const TAIL_K_MIN: i32 = -64;
const TAIL_K_CAP: i32 = 200;
const TAIL_NEGLIGIBLE: f64 = 1e-17;

fn tail_spec() -> QuadratureSpec {
    QuadratureSpec::default().with_rel_tol(1e-14).with_abs_tol(1e-20)
}

impl TailIntegral {
    fn build(d: &Density) -> Result<Self> {
        let env = TailEnvelope {
            coeff: d.tail.coeff,
            power: d.tail.power - 1.0,
            rate: d.tail.rate,
        };
        let unit = [Profile::Exponential { m: 1.0, omega: 0.0 }];
        let mut k_max = 0;
        loop {
            let b = crate::quadrature::tail_bound_for(&unit, &env, 2f64.powi(k_max))?;
            if b.bound <= TAIL_NEGLIGIBLE || k_max >= TAIL_K_CAP {
                break;
            }
            k_max += 1;
        }
        let w = |u: f64| (d.f)(u) / u;
        let mut sums = Vec::new();
        for k in TAIL_K_MIN..k_max {
            let (a, b) = (2f64.powi(k), 2f64.powi(k + 1));
            let out = integrate_finite(&mut Pointwise(|_| 1.0f64), &w, a, b, 1, &tail_spec());
            sums.push(out.value);
        }
        let mut suffix = vec![0.0; sums.len() + 1];
        for i in (0..sums.len()).rev() {
            suffix[i] = suffix[i + 1] + sums[i];
        }
        Ok(TailIntegral {
            density: d.clone(),
            k_min: TAIL_K_MIN,
            suffix,
        })
    }

    fn eval(&self, r: f64) -> f64 {
        let k_max = self.k_min + self.suffix.len() as i32 - 1;
        if r >= 2f64.powi(k_max) {
            return 0.0;
        }
        let w = |u: f64| (self.density.f)(u) / u;
        let k = (r.log2().floor() as i32).max(self.k_min - 1);
        let next = k + 1;
        let upper = 2f64.powi(next);
        let head = if upper > r {
            integrate_finite(&mut Pointwise(|_| 1.0f64), &w, r, upper, 1, &tail_spec()).value
        } else {
            0.0
        };
        head + self.suffix[(next - self.k_min).max(0) as usize]
    }
}
