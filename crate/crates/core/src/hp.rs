//! Hille-Phillips calculus: `g(A)x = ∫₀^∞ T(t)x da(t)` for `g = La`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::expm::{expm, DENSE_EXPM_MAX_DIM};
use crate::linalg::{expm_action_block, Generator};
use crate::quadrature::{
    choose_truncation, integrate_vector, Density, NodeSet, Origin, PanelIntegrand, Profile,
    QuadValue, QuadratureSpec, TailBound, TailEnvelope,
};
use crate::special::gamma;
use crate::symbols::{frac_power, inverse, LaplaceSymbol, MeasureRepr};
use crate::{CMat, CVec, C64};

/// Computable stand-in for membership of `x` in the domain of `g(A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainVerdict {
    Converged,
    NonConvergent,
}

impl DomainVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            DomainVerdict::Converged => "converged",
            DomainVerdict::NonConvergent => "non_convergent",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ApplyResult {
    /// One column per input vector.
    pub value: CMat,
    pub error_estimate: f64,
    pub t_star: f64,
    pub panels_used: usize,
    pub domain_verdict: DomainVerdict,
    /// `‖value − V f(Λ) V⁻¹ x‖` when the spectral oracle was consulted.
    pub oracle_delta: Option<f64>,
}

impl ApplyResult {
    pub fn exact(value: CMat) -> Self {
        ApplyResult {
            value,
            error_estimate: 0.0,
            t_star: 0.0,
            panels_used: 0,
            domain_verdict: DomainVerdict::Converged,
            oracle_delta: None,
        }
    }

    /// First column as a vector.
    pub fn vector(&self) -> CVec {
        self.value.column(0).into_owned()
    }

    pub fn converged(&self) -> bool {
        self.domain_verdict == DomainVerdict::Converged
    }

    /// Combines diagnostics of a computation that used several integrals.
    pub fn merged(value: CMat, parts: &[&ApplyResult]) -> Self {
        ApplyResult {
            value,
            error_estimate: parts.iter().map(|p| p.error_estimate).sum(),
            t_star: parts.iter().map(|p| p.t_star).fold(0.0, f64::max),
            panels_used: parts.iter().map(|p| p.panels_used).sum(),
            domain_verdict: if parts.iter().all(|p| p.converged()) {
                DomainVerdict::Converged
            } else {
                DomainVerdict::NonConvergent
            },
            oracle_delta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApplyOptions {
    /// Return a result with a `NonConvergent` verdict instead of an error.
    pub best_effort: bool,
    /// Attach the distance to the spectral oracle when it is available.
    pub oracle_check: bool,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        ApplyOptions {
            best_effort: false,
            oracle_check: false,
        }
    }
}

/// Truncation point used in best-effort mode when no tail bound exists.
pub const BEST_EFFORT_T_STAR: f64 = 1024.0;

/// `t ↦ e^{tA} X`, evaluated a panel at a time. Node exponentials are cached
/// per (node set, panel width); panels of equal width share them.
pub struct OrbitIntegrand<'a> {
    a: &'a CMat,
    x: CMat,
    scale: f64,
    cache: HashMap<(u32, u64), Vec<CMat>>,
}

impl<'a> OrbitIntegrand<'a> {
    pub fn new(a: &'a CMat, x: CMat) -> Self {
        let scale = x.norm();
        OrbitIntegrand {
            a,
            x,
            scale,
            cache: HashMap::new(),
        }
    }

    fn exp(&self, t: f64) -> CMat {
        expm(&self.a.map(|z| z * t))
    }
}

impl PanelIntegrand<CMat> for OrbitIntegrand<'_> {
    fn eval(&mut self, a: f64, width: f64, nodes: NodeSet<'_>) -> Vec<CMat> {
        if self.a.nrows() > DENSE_EXPM_MAX_DIM {
            return nodes
                .rel
                .iter()
                .map(|r| expm_action_block(self.a, a + width * r, &self.x))
                .collect();
        }
        let base = if a == 0.0 {
            self.x.clone()
        } else {
            self.exp(a) * &self.x
        };
        if width == 0.0 {
            return vec![base; nodes.rel.len()];
        }
        let key = (nodes.id, width.to_bits());
        if !self.cache.contains_key(&key) {
            let mats = nodes.rel.iter().map(|r| self.exp(width * r)).collect();
            self.cache.insert(key, mats);
        }
        self.cache[&key].iter().map(|e| e * &base).collect()
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}

fn as_block(x: &CVec) -> CMat {
    CMat::from_column_slice(x.len(), 1, x.as_slice())
}

/// Tail bound for `∫ ‖T(t)‖ |density|` from the generator's profiles.
pub fn generator_tail(gen: &Generator, env: &TailEnvelope, spec: &QuadratureSpec) -> Result<TailBound> {
    let profiles = Profile::profiles_of(gen, spec.truncation_mode);
    choose_truncation(&profiles, env, spec.tail_target())
}

/// `∫ T(t) X dμ(t)` for an arbitrary measure.
pub fn apply_measure(
    mu: &MeasureRepr,
    gen: &Generator,
    x: &CMat,
    spec: &QuadratureSpec,
    opts: ApplyOptions,
) -> Result<ApplyResult> {
    gen.check_block(x)?;
    let (tail, tail_failed) = match &mu.density {
        None => (None, None),
        Some(d) => match generator_tail(gen, &d.tail, spec) {
            Ok(tb) => (Some(tb), None),
            Err(e @ Error::DivergentTail(_)) if opts.best_effort => (
                Some(TailBound {
                    t_star: BEST_EFFORT_T_STAR,
                    bound: f64::INFINITY,
                }),
                Some(e),
            ),
            Err(e) => return Err(e),
        },
    };
    let mut phi = OrbitIntegrand::new(gen.matrix(), x.clone());
    let out = integrate_vector(&mut phi, mu, spec, tail)?;
    let converged = out.converged && tail_failed.is_none();
    if !converged && !opts.best_effort {
        return Err(Error::NonConvergent {
            error_estimate: out.error_estimate,
            target: out.target,
            panels: out.panels,
            t_star: out.t_star,
        });
    }
    Ok(ApplyResult {
        value: out.value,
        error_estimate: out.error_estimate,
        t_star: out.t_star,
        panels_used: out.panels,
        domain_verdict: if converged {
            DomainVerdict::Converged
        } else {
            DomainVerdict::NonConvergent
        },
        oracle_delta: None,
    })
}

/// Attaches `‖value − f(A)X‖` from the spectral oracle, if it is available.
pub fn attach_oracle<F>(res: &mut ApplyResult, gen: &Generator, f: F, x: &CMat)
where
    F: Fn(C64) -> Option<C64>,
{
    if let Ok(sd) = gen.spectral() {
        if let Ok(o) = sd.apply_block(f, x) {
            res.oracle_delta = Some(QuadValue::dist(&res.value, &o));
        }
    }
}

pub fn hp_apply_block(
    g: &LaplaceSymbol,
    gen: &Generator,
    x: &CMat,
    spec: &QuadratureSpec,
    opts: ApplyOptions,
) -> Result<ApplyResult> {
    let mut res = apply_measure(&g.measure, gen, x, spec, opts)?;
    if opts.oracle_check {
        attach_oracle(&mut res, gen, |s| g.eval(s), x);
    }
    Ok(res)
}

/// `g(A)x`; errors when the integral cannot be certified.
pub fn hp_apply(g: &LaplaceSymbol, gen: &Generator, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
    hp_apply_block(g, gen, &as_block(x), spec, ApplyOptions::default())
}

pub fn hp_apply_with(
    g: &LaplaceSymbol,
    gen: &Generator,
    x: &CVec,
    spec: &QuadratureSpec,
    opts: ApplyOptions,
) -> Result<ApplyResult> {
    hp_apply_block(g, gen, &as_block(x), spec, opts)
}

/// `A⁻¹x = -∫ T(t)x dt`.
pub fn inverse_via_integral(gen: &Generator, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
    if !gen.injective() {
        return Err(Error::NonInjective);
    }
    hp_apply(&inverse(), gen, x, spec)
}

/// The two constructions of `(-A)^{-α}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegPowerRoute {
    /// `Γ(α)⁻¹ ∫ T(t)x t^{α-1} dt`.
    Gamma,
    /// `(-A)^{-(1+α)} (-A) x`.
    ByParts,
}

pub fn neg_frac_power(gen: &Generator, alpha: f64, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
    neg_frac_power_route(gen, alpha, x, spec, NegPowerRoute::Gamma)
}

pub fn neg_frac_power_route(
    gen: &Generator,
    alpha: f64,
    x: &CVec,
    spec: &QuadratureSpec,
    route: NegPowerRoute,
) -> Result<ApplyResult> {
    if !(alpha > 0.0) {
        return Err(Error::ParameterRange(format!("alpha must be positive, got {alpha}")));
    }
    match route {
        NegPowerRoute::Gamma => hp_apply(&frac_power(alpha)?, gen, x, spec),
        NegPowerRoute::ByParts => {
            let minus_ax = -gen.apply(x)?;
            hp_apply(&frac_power(1.0 + alpha)?, gen, &minus_ax, spec)
        }
    }
}

/// Distribution function `a(t)` of a positive continuous measure as a
/// density, for the route `g(A)x = ∫ T(t)(-Ax) a(t) dt`.
pub fn distribution_density(mu: &MeasureRepr) -> Result<Density> {
    if !mu.is_continuous() {
        return Err(Error::InvalidArgument("distribution route needs a measure without atoms".into()));
    }
    let d = mu
        .density
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("measure has no density".into()))?;
    let m = mu.clone();
    let a = move |t: f64| m.distribution(t).map(|z| z.re).unwrap_or(f64::NAN);
    let a1 = a(1.0).abs();
    let (k, p, kappa) = (d.tail.coeff, d.tail.power, d.tail.rate);
    // a(t) ≤ a(1) + ∫₁^t K s^p e^{-κs} ds for t ≥ 1.
    let env = if kappa > 0.0 {
        let margin = kappa - p.max(0.0);
        if margin <= 0.0 {
            return Err(Error::Unsupported("density envelope too slow for a distribution bound".into()));
        }
        TailEnvelope::power(a1 + k * (-kappa).exp() / margin, 0.0)
    } else if p < -1.0 {
        TailEnvelope::power(a1 + k / (-p - 1.0), 0.0)
    } else if p > -1.0 {
        TailEnvelope::power(a1 + k / (p + 1.0), p + 1.0)
    } else {
        // log growth
        TailEnvelope::power(a1 + k, 0.5)
    };
    let origin = match d.origin {
        Origin::Power(p0) => Origin::Power(p0 + 1.0),
        Origin::Distribution => Origin::Power(0.0),
    };
    Ok(Density::new(a, origin, env).with_breakpoints(d.breakpoints.clone()))
}

/// `∫ T(t)(-Ax) a(t) dt`, the integrated-by-parts form of `g(A)x`.
pub fn hp_apply_by_parts(g: &LaplaceSymbol, gen: &Generator, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
    let dens = distribution_density(&g.measure)?;
    let minus_ax = -gen.apply(x)?;
    apply_measure(
        &MeasureRepr::from_density(dens),
        gen,
        &as_block(&minus_ax),
        spec,
        ApplyOptions::default(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaLimitRow {
    pub alpha: f64,
    pub deviation: f64,
    pub bound: f64,
    pub error_estimate: f64,
}

/// `‖(-A)^{-α}x − x‖` along a sequence of `α`, with the a-priori bound
/// `Γ(α)⁻¹ (‖Ax−x‖/(α+1) + C‖x‖/(δ−α) + ‖x‖/e)`, `C, δ` from the decay
/// profile.
pub fn alpha_limit_check(
    gen: &Generator,
    x: &CVec,
    alphas: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<AlphaLimitRow>> {
    if !gen.is_contraction() {
        return Err(Error::ParameterRange(format!(
            "alpha limit needs a contraction semigroup, M = {}",
            gen.growth_m()
        )));
    }
    let decay = gen
        .decay()
        .ok_or_else(|| Error::InvalidArgument("alpha limit needs a decay profile".into()))?;
    let ax_x = (gen.apply(x)? - x).norm();
    let xn = x.norm();
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::ParameterRange(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if !(decay.delta > alpha) {
            return Err(Error::ParameterRange(format!(
                "decay exponent {} must exceed alpha = {alpha}",
                decay.delta
            )));
        }
        let r = neg_frac_power(gen, alpha, x, spec)?;
        let deviation = (r.vector() - x).norm();
        let bound = (ax_x / (alpha + 1.0) + decay.c * xn / (decay.delta - alpha) + xn * (-1f64).exp()) / gamma(alpha);
        rows.push(AlphaLimitRow {
            alpha,
            deviation,
            bound,
            error_estimate: r.error_estimate,
        });
    }
    Ok(rows)
}
