//! Product, reciprocal, log-inverse and composition rules connecting the two
//! calculi.

use std::f64::consts::PI;

use crate::bp::{bp_apply, bp_apply_block, psi_matrix};
use crate::error::{Error, Result};
use crate::hp::{apply_measure, distribution_density, hp_apply, ApplyOptions, ApplyResult, DomainVerdict};
use crate::linalg::{expm_action_block, resolvent_solve_block, Generator};
use crate::quadrature::rules::gauss_legendre_unit;
use crate::quadrature::{
    integrate_density, integrate_finite, integrate_singular_left, Density, NodeSet, Origin,
    PanelIntegrand, Pointwise, QuadratureSpec, TailEnvelope,
};
use crate::special::{gamma, rgamma};
use crate::symbols::{
    catalog_build, frac_power, volterra_density, BernsteinSymbol, Family, LaplaceSymbol,
    MeasureRepr, ScalarFn, Symbol,
};
use crate::{CMat, CVec, C64};

fn as_block(x: &CVec) -> CMat {
    CMat::from_column_slice(x.len(), 1, x.as_slice())
}

fn spec_b() -> QuadratureSpec {
    QuadratureSpec::default().with_rel_tol(1e-13).with_abs_tol(1e-16)
}

/// `h = g·ψ` for a positive continuous `g = La` and a Bernstein `ψ`.
#[derive(Debug, Clone)]
pub struct ProductSymbol {
    pub g: LaplaceSymbol,
    pub psi: BernsteinSymbol,
    /// Closed form of the product measure, for catalog pairs.
    pub closed: Option<LaplaceSymbol>,
}

impl ProductSymbol {
    pub fn new(g: &LaplaceSymbol, psi: &BernsteinSymbol) -> Result<Self> {
        if !g.measure.is_continuous() {
            return Err(Error::InvalidArgument(format!(
                "product rule needs a continuous measure; '{}' has atoms",
                g.name
            )));
        }
        if !g.measure.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "product rule needs a positive measure; '{}' is signed",
                g.name
            )));
        }
        if g.measure.density.is_none() {
            return Err(Error::InvalidArgument(format!("'{}' has no density", g.name)));
        }
        Ok(ProductSymbol {
            g: g.clone(),
            psi: psi.clone(),
            closed: closed_product(g, psi)?,
        })
    }

    pub fn eval(&self, s: C64) -> Option<C64> {
        Some(self.g.eval(s)? * self.psi.eval(s)?)
    }

    fn a(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.g.measure.distribution(t).map(|z| z.re).unwrap_or(f64::NAN)
    }

    /// Distribution of the product measure:
    /// `b(t) = ψ(0)a(t) + ∫ (a(t−u) − a(t)) u⁻¹ dρ(u)`, `a(t−u) = 0` for `u > t`.
    ///
    /// Split at `u = t/2`: the part `u > t/2` becomes
    /// `∫₀^{t/2} a(v) ρ'(t−v)/(t−v) dv − a(t) f(t/2)`.
    pub fn b(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Ok(0.0);
        }
        let psi = &self.psi;
        let at = self.a(t);
        let gd = self.g.measure.density.as_ref().expect("checked in new");
        let mut b = psi.c0 * at;
        for &(loc, w) in &psi.levy.atoms {
            if loc == 0.0 {
                b -= w.re * gd.eval(t);
            } else {
                b += w.re * (self.a(t - loc) - at) / loc;
            }
        }
        if let Some(rho) = &psi.levy.density {
            let h = 0.5 * t;
            // a(t−u) − a(t) = −∫_{t−u}^t a', which avoids cancellation at small u
            let gl = gauss_legendre_unit(32);
            let drop = |u: f64| -> f64 {
                let lo = t - u;
                -u * gl
                    .nodes
                    .iter()
                    .zip(&gl.weights)
                    .map(|(r, w)| w * gd.eval(lo + u * r))
                    .sum::<f64>()
            };
            let near = integrate_density(&mut Pointwise(|u: f64| drop(u) / u), rho, 0.0, h, &spec_b());
            let q = gd.origin_exponent().map_or(0.0, |p| p + 1.0);
            let weight = |v: f64| self.a(v) * rho.eval(t - v) / (t - v);
            let far = integrate_singular_left(&mut Pointwise(|_| 1.0f64), &weight, q, h, &spec_b());
            for part in [&near, &far] {
                if !part.converged {
                    return Err(Error::NonConvergent {
                        error_estimate: part.error_estimate,
                        target: part.target,
                        panels: part.panels,
                        t_star: t,
                    });
                }
            }
            b += near.value + far.value - at * psi.tail_function(h)?;
        }
        Ok(b)
    }

    /// `h(A)x` from the product measure: closed form for catalog pairs,
    /// otherwise Stieltjes sums against `b`.
    pub fn apply(&self, gen: &Generator, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
        match &self.closed {
            Some(h) => hp_apply(h, gen, x, spec),
            None => self.stieltjes_apply(gen, x, spec),
        }
    }

    /// `Σ T(t̄ᵢ)x (b(tᵢ₊₁) − b(tᵢ))` on a geometric grid; the error estimate is
    /// the change from halving the grid.
    pub fn stieltjes_apply(&self, gen: &Generator, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
        let omega = gen.growth_omega();
        if !(omega < 0.0) {
            return Err(Error::DivergentTail("Stieltjes product route needs ω < 0".into()));
        }
        let t_max = 60.0 / omega.abs();
        let t_min = 1e-10f64.min(t_max * 1e-12);
        let n = STIELTJES_POINTS;
        let ratio = (t_max / t_min).powf(1.0 / n as f64);
        let grid: Vec<f64> = std::iter::once(0.0)
            .chain((0..=n).map(|k| t_min * ratio.powi(k as i32)))
            .collect();
        let bs: Vec<f64> = grid.iter().map(|&t| self.b(t)).collect::<Result<_>>()?;
        let xb = as_block(x);
        let sum = |step: usize| -> CMat {
            let mut acc = CMat::zeros(x.len(), 1);
            let idx: Vec<usize> = (0..grid.len()).step_by(step).collect();
            for w in idx.windows(2) {
                let (i, j) = (w[0], w[1]);
                let mid = if grid[i] == 0.0 { 0.0 } else { (grid[i] * grid[j]).sqrt() };
                let db = bs[j] - bs[i];
                acc += expm_action_block(gen.matrix(), mid, &xb).map(|z| z * db);
            }
            acc
        };
        let fine = sum(1);
        let coarse = sum(2);
        let err = (&fine - &coarse).norm();
        let target = (spec.abs_tol * x.norm()).max(spec.rel_tol * fine.norm());
        Ok(ApplyResult {
            value: fine,
            error_estimate: err,
            t_star: t_max,
            panels_used: n,
            domain_verdict: if err <= target {
                DomainVerdict::Converged
            } else {
                DomainVerdict::NonConvergent
            },
            oracle_delta: None,
        })
    }
}

/// Grid size for the generic Stieltjes route.
pub const STIELTJES_POINTS: usize = 2048;

fn neg_atom(name: String, family: Family, eval: ScalarFn) -> LaplaceSymbol {
    LaplaceSymbol::new(name, family, MeasureRepr::from_atoms(vec![(0.0, C64::new(-1.0, 0.0))]), Some(eval))
}

/// `-(-s)^{-γ}` as a Laplace symbol: the frac_power measure negated.
fn neg_frac_power(gamma_: f64, family: Family, name: String) -> Result<LaplaceSymbol> {
    let base = frac_power(gamma_)?;
    let measure = base.measure.scaled(-1.0);
    let eval: ScalarFn = std::sync::Arc::new(move |s: C64| {
        let z = -s;
        if z.im == 0.0 && z.re <= 0.0 {
            return None;
        }
        Some(-z.powf(-gamma_))
    });
    Ok(LaplaceSymbol::new(name, family, measure, Some(eval)))
}

fn closed_product(g: &LaplaceSymbol, psi: &BernsteinSymbol) -> Result<Option<LaplaceSymbol>> {
    let family = Family::Product(Box::new(g.family.clone()), Box::new(psi.family.clone()));
    let name = format!("{}*{}", g.name, psi.name);
    let minus_one: ScalarFn = std::sync::Arc::new(|_| Some(C64::new(-1.0, 0.0)));
    let out = match (&g.family, &psi.family) {
        (Family::FracPower { alpha }, Family::NegFracPowerBernstein { beta }) => {
            if alpha > beta {
                Some(neg_frac_power(alpha - beta, family, name)?)
            } else if alpha == beta {
                Some(neg_atom(name, family, minus_one))
            } else {
                return Err(Error::Unsupported(format!(
                    "-(-s)^({beta}-{alpha}) is not the transform of a measure"
                )));
            }
        }
        (Family::FracPower { alpha }, Family::Identity) => {
            if *alpha > 1.0 {
                Some(neg_frac_power(alpha - 1.0, family, name)?)
            } else if *alpha == 1.0 {
                Some(neg_atom(name, family, minus_one))
            } else {
                None
            }
        }
        _ => None,
    };
    Ok(out)
}

/// `h(A)x = ∫ T(t)(-Ax) b(t) dt` with `b` from [`ProductSymbol::b`]. The
/// envelope comes from the closed-form product, so only catalog pairs qualify.
pub fn product_by_parts(prod: &ProductSymbol, gen: &Generator, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
    let closed = prod
        .closed
        .as_ref()
        .ok_or_else(|| Error::Unsupported("by-parts product route needs a catalog pair".into()))?;
    let shape = distribution_density(&closed.measure.scaled(-1.0))?;
    let me = prod.clone();
    let dens = Density::new(move |t| me.b(t).unwrap_or(f64::NAN), shape.origin, shape.tail);
    let minus_ax = -gen.apply(x)?;
    apply_measure(
        &MeasureRepr::from_density(dens),
        gen,
        &as_block(&minus_ax),
        spec,
        ApplyOptions::default(),
    )
}

/// The three evaluations of `h(A)x = ψ(A)g(A)x = g(A)ψ(A)x`.
#[derive(Debug, Clone)]
pub struct MultiplyResult {
    pub h_direct: ApplyResult,
    /// `ψ(A)(g(A)x)`.
    pub psi_after_g: ApplyResult,
    /// `g(A)(ψ(A)x)`.
    pub g_after_psi: ApplyResult,
}

impl MultiplyResult {
    /// Largest pairwise distance between the three routes.
    pub fn spread(&self) -> f64 {
        let a = self.h_direct.vector();
        let b = self.psi_after_g.vector();
        let c = self.g_after_psi.vector();
        (&a - &b).norm().max((&b - &c).norm()).max((&a - &c).norm())
    }
}

pub fn multiply_apply(
    g: &LaplaceSymbol,
    psi: &BernsteinSymbol,
    gen: &Generator,
    x: &CVec,
    spec: &QuadratureSpec,
) -> Result<MultiplyResult> {
    let prod = ProductSymbol::new(g, psi)?;
    let h_direct = prod.apply(gen, x, spec)?;
    let gx = hp_apply(g, gen, x, spec)?;
    let psi_after_g = bp_apply(psi, gen, &gx.vector(), spec)?;
    let psi_x = bp_apply(psi, gen, x, spec)?;
    let g_after_psi = hp_apply(g, gen, &psi_x.vector(), spec)?;
    Ok(MultiplyResult {
        h_direct,
        psi_after_g: ApplyResult::merged(psi_after_g.value.clone(), &[&gx, &psi_after_g]),
        g_after_psi: ApplyResult::merged(g_after_psi.value.clone(), &[&psi_x, &g_after_psi]),
    })
}

#[derive(Debug, Clone)]
pub struct ReciprocalResult {
    pub value: ApplyResult,
    /// `‖ψ(A)y − x‖`.
    pub round_trip: f64,
}

/// `ψ(A)⁻¹x = (1/ψ)(A)x` for Bernstein functions with a catalog reciprocal.
pub fn reciprocal_bernstein_inverse(
    psi: &BernsteinSymbol,
    gen: &Generator,
    x: &CVec,
    spec: &QuadratureSpec,
) -> Result<ReciprocalResult> {
    let name = psi
        .reciprocal
        .as_ref()
        .ok_or_else(|| Error::Unsupported(format!("no registered reciprocal for '{}'", psi.name)))?;
    require_uniform_stability(gen)?;
    let recip = match catalog_build(name, &[])? {
        Symbol::Laplace(l) => l,
        Symbol::Bernstein(_) => return Err(Error::Unsupported(format!("'{name}' is not a Laplace symbol"))),
    };
    let value = hp_apply(&recip, gen, x, spec)?;
    let back = bp_apply(psi, gen, &value.vector(), spec)?;
    let round_trip = (back.vector() - x).norm();
    Ok(ReciprocalResult { value, round_trip })
}

fn require_uniform_stability(gen: &Generator) -> Result<()> {
    if !(gen.growth_omega() < 0.0) {
        return Err(Error::ParameterRange(format!(
            "needs a uniformly stable semigroup (ω < 0), got ω = {}",
            gen.growth_omega()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogRoute {
    /// `∫ T(t)x e^{-t} ν(t, -1) dt`.
    Volterra,
    /// `(-A)⁻¹x + ∫₁^∞ R(t, A)x / (π² + log²(t−1)) dt`.
    Resolvent,
}

/// `(log(I − A))⁻¹ x`.
pub fn log_inverse(gen: &Generator, x: &CVec, spec: &QuadratureSpec, route: LogRoute) -> Result<ApplyResult> {
    require_uniform_stability(gen)?;
    match route {
        LogRoute::Volterra => apply_measure(
            &MeasureRepr::from_density(volterra_density()),
            gen,
            &as_block(x),
            spec,
            ApplyOptions::default(),
        ),
        LogRoute::Resolvent => log_inverse_resolvent(gen, x, spec),
    }
}

/// `τ ↦ σ(τ) R(1+e^τ, A) AX / (π² + τ²)` with `σ` the logistic function.
struct ResolventIntegrand<'a> {
    a: &'a CMat,
    ax: CMat,
    scale: f64,
    failure: Option<Error>,
}

impl PanelIntegrand<CMat> for ResolventIntegrand<'_> {
    fn eval(&mut self, a: f64, width: f64, nodes: NodeSet<'_>) -> Vec<CMat> {
        nodes
            .rel
            .iter()
            .map(|r| {
                let tau = a + width * r;
                let t = 1.0 + tau.exp();
                let sigma = 1.0 / (1.0 + (-tau).exp());
                let c = sigma / (PI * PI + tau * tau);
                match resolvent_solve_block(self.a, t, &self.ax) {
                    Ok(y) => y.map(|z| z * c),
                    Err(e) => {
                        self.failure.get_or_insert(e);
                        CMat::zeros(self.ax.nrows(), self.ax.ncols())
                    }
                }
            })
            .collect()
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}

/// Writing `R(t,A)x = x/t + R(t,A)Ax/t` and `t = 1 + e^τ`, the `x/t` part
/// integrates to `x/2` exactly and the rest decays like `e^{-|τ|}`.
fn log_inverse_resolvent(gen: &Generator, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
    let a = gen.matrix();
    let xb = as_block(x);
    let ax = a * &xb;
    let pole = resolvent_solve_block(a, 0.0, &xb)?;
    let m = gen.growth_m();
    let axn = ax.norm();
    // ‖R(t,A)‖ ≤ M/(t − ω) ≤ M for t ≥ 1; both tails are below
    // M‖Ax‖ e^{-L}/(π² + L²).
    let target = spec.tail_target() * x.norm().max(f64::MIN_POSITIVE);
    let mut l: f64 = 8.0;
    let tail = |l: f64| 2.0 * m * axn * (-l).exp() / (PI * PI + l * l);
    while tail(l) > target && l < 800.0 {
        l += 1.0;
    }
    let mut phi = ResolventIntegrand {
        a,
        ax,
        scale: x.norm(),
        failure: None,
    };
    let pieces = (2.0 * l).ceil() as usize;
    let out = integrate_finite(&mut phi, &|_| 1.0, -l, l, pieces, &spec.panel_share());
    if let Some(e) = phi.failure {
        return Err(e);
    }
    let value = pole + xb.map(|z| z * 0.5) + out.value;
    let error_estimate = out.error_estimate + tail(l);
    let target = (spec.abs_tol * x.norm()).max(spec.rel_tol * value.norm());
    let converged = error_estimate <= target;
    if !converged {
        return Err(Error::NonConvergent {
            error_estimate,
            target,
            panels: out.panels,
            t_star: 1.0 + l.exp(),
        });
    }
    Ok(ApplyResult {
        value,
        error_estimate,
        t_star: 1.0 + l.exp(),
        panels_used: out.panels,
        domain_verdict: DomainVerdict::Converged,
        oracle_delta: None,
    })
}

/// How `outer_direct` of a composition was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComposeDirectRoute {
    /// Measure `∫ ν_u da(u)` with the closed-form stable law.
    Subordination,
    /// `ψ = identity`, so `h∘ψ = h`.
    Identity,
    /// Spectral oracle only.
    Oracle,
}

#[derive(Debug, Clone)]
pub struct ComposeResult {
    pub outer_direct: ApplyResult,
    pub nested: ApplyResult,
    pub route: ComposeDirectRoute,
}

/// `(h∘ψ)(A)x` two ways: `h` applied to the generator `ψ(A)` (nested), and
/// the composite symbol applied to `A` (outer_direct).
pub fn compose_apply(
    h: &LaplaceSymbol,
    psi: &BernsteinSymbol,
    gen: &Generator,
    x: &CVec,
    spec: &QuadratureSpec,
) -> Result<ComposeResult> {
    if !h.measure.is_positive() {
        return Err(Error::InvalidArgument(format!("composition needs a positive measure; '{}' is signed", h.name)));
    }
    require_uniform_stability(gen)?;
    let psi_m = psi_matrix(psi, gen, spec)?;
    let sub_gen = Generator::new(psi_m.value.clone())?;
    let inner = hp_apply(h, &sub_gen, x, spec)?;
    let nested = ApplyResult::merged(inner.value.clone(), &[&psi_m, &inner]);

    let (outer_direct, route) = match &psi.family {
        Family::Identity => (hp_apply(h, gen, x, spec)?, ComposeDirectRoute::Identity),
        Family::NegFracPowerBernstein { beta } if *beta == 0.5 => {
            let c = composed_half_stable(h)?;
            (hp_apply(&c, gen, x, spec)?, ComposeDirectRoute::Subordination)
        }
        _ => {
            let sd = gen.spectral()?;
            let value = sd.apply_block(|s| psi.eval(s).and_then(|p| h.eval(p)), &as_block(x))?;
            (ApplyResult::exact(value), ComposeDirectRoute::Oracle)
        }
    };
    Ok(ComposeResult {
        outer_direct,
        nested,
        route,
    })
}

/// `ν_u(v) = u v^{-3/2} e^{-u²/(4v)} / (2√π)`.
fn half_stable(u: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    u * v.powf(-1.5) * (-u * u / (4.0 * v)).exp() / (2.0 * PI.sqrt())
}

/// Density `c(v) = ∫ ν_u(v) a'(u) du` of `h∘ψ` for `ψ(s) = −√(−s)`, by
/// quadrature in `u`. Needs `|a'(u)| ≤ K u^p` on all of `(0, ∞)`.
pub fn composed_half_stable(h: &LaplaceSymbol) -> Result<LaplaceSymbol> {
    if !h.measure.is_continuous() {
        return Err(Error::Unsupported("half-stable composition of a measure with atoms".into()));
    }
    let d = h
        .measure
        .density
        .clone()
        .ok_or_else(|| Error::Unsupported("composition needs a density".into()))?;
    let p = match d.origin {
        Origin::Power(p) if d.tail.rate == 0.0 && d.tail.power == p => p,
        _ => {
            return Err(Error::Unsupported(
                "half-stable composition needs a global power envelope".into(),
            ))
        }
    };
    let k = d.tail.coeff;
    // ∫ u·u^p e^{-u²/(4v)} du = ½ (4v)^{(p+2)/2} Γ((p+2)/2)
    let env_c = k * 2f64.powf(p + 1.0) * gamma(p / 2.0 + 1.0) / (2.0 * PI.sqrt());
    let exponent = p / 2.0 - 0.5;
    let dens = d.clone();
    let c = move |v: f64| {
        let upper = 2.0 * (v * 60.0).sqrt();
        let out = integrate_density(
            &mut Pointwise(|u: f64| half_stable(u, v)),
            &dens,
            0.0,
            upper,
            &QuadratureSpec::default().with_rel_tol(1e-13).with_abs_tol(1e-300),
        );
        out.value
    };
    let density = Density::new(c, Origin::Power(exponent), TailEnvelope::power(env_c, exponent));
    let inner = h.clone();
    let eval: ScalarFn = std::sync::Arc::new(move |s: C64| {
        let z = -s;
        if z.im == 0.0 && z.re <= 0.0 {
            return None;
        }
        inner.eval(-z.sqrt())
    });
    Ok(LaplaceSymbol::new(
        format!("{}∘neg_frac_power_bernstein:0.5", h.name),
        Family::Composition(Box::new(h.family.clone()), Box::new(Family::NegFracPowerBernstein { beta: 0.5 })),
        MeasureRepr::from_density(density),
        Some(eval),
    ))
}

/// `ψ(A)` applied column by column to a block, as a plain matrix.
pub fn bernstein_matrix(psi: &BernsteinSymbol, gen: &Generator, spec: &QuadratureSpec) -> Result<CMat> {
    let n = gen.dim();
    Ok(bp_apply_block(psi, gen, &CMat::identity(n, n), spec, ApplyOptions::default())?.value)
}

/// Closed-form distribution of the product measure for `frac_power(α)` and
/// `neg_frac_power_bernstein(β)`, `α > β`: `−t^{α−β}/Γ(α−β+1)`.
pub fn product_distribution_closed(alpha: f64, beta: f64, t: f64) -> f64 {
    -t.powf(alpha - beta) * rgamma(alpha - beta + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{identity, log_shift, neg_frac_power_bernstein};

    fn cv(v: &[f64]) -> CVec {
        CVec::from_iterator(v.len(), v.iter().map(|&r| C64::new(r, 0.0)))
    }

    fn diag(v: &[f64]) -> Generator {
        let n = v.len();
        let mut rows = vec![0.0; n * n];
        for (i, &d) in v.iter().enumerate() {
            rows[i * n + i] = d;
        }
        Generator::from_real_rows(n, &rows).unwrap()
    }

    fn close(a: &CVec, b: &CVec, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    #[test]
    fn product_distribution_matches_closed_form() {
        for (alpha, beta) in [(0.7, 0.3), (0.9, 0.5)] {
            let p = ProductSymbol::new(&frac_power(alpha).unwrap(), &neg_frac_power_bernstein(beta).unwrap()).unwrap();
            for t in [1e-3, 0.05, 0.3, 1.0, 2.5, 7.0] {
                let got = p.b(t).unwrap();
                let want = product_distribution_closed(alpha, beta, t);
                assert!((got - want).abs() <= 1e-8 * want.abs(), "α={alpha} β={beta} t={t}: {got} vs {want}");
            }
            assert!(p.b(1e-12).unwrap().abs() < 1e-3);
        }
    }

    #[test]
    fn product_with_identity_is_minus_density() {
        let g = frac_power(1.5).unwrap();
        let p = ProductSymbol::new(&g, &identity()).unwrap();
        for t in [0.1f64, 1.0, 3.0] {
            let want = -t.powf(0.5) / gamma(1.5);
            assert!((p.b(t).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn multiply_example() {
        let gen = diag(&[-1.0, -4.0]);
        let x = cv(&[1.0, 1.0]);
        let spec = QuadratureSpec::default();
        let r = multiply_apply(&frac_power(0.7).unwrap(), &neg_frac_power_bernstein(0.3).unwrap(), &gen, &x, &spec).unwrap();
        let want = cv(&[-1.0, -(4f64.powf(-0.4))]);
        close(&r.h_direct.vector(), &want, 1e-9);
        close(&r.psi_after_g.vector(), &want, 1e-9);
        close(&r.g_after_psi.vector(), &want, 1e-9);
    }

    #[test]
    fn product_by_parts_matches() {
        let gen = diag(&[-1.0, -4.0]);
        let x = cv(&[1.0, 1.0]);
        let p = ProductSymbol::new(&frac_power(0.9).unwrap(), &neg_frac_power_bernstein(0.5).unwrap()).unwrap();
        let r = product_by_parts(&p, &gen, &x, &QuadratureSpec::default()).unwrap();
        close(&r.vector(), &cv(&[-1.0, -(4f64.powf(-0.4))]), 1e-8);
    }

    #[test]
    fn multiply_refuses_atoms() {
        let g = crate::symbols::exp_tpsi(1.0, &identity()).unwrap();
        assert!(ProductSymbol::new(&g, &log_shift()).is_err());
    }

    #[test]
    fn generic_product_route() {
        let gen = diag(&[-1.0, -3.0]);
        let x = cv(&[1.0, 1.0]);
        let spec = QuadratureSpec::default();
        let g = frac_power(0.5).unwrap();
        let p = ProductSymbol::new(&g, &log_shift()).unwrap();
        assert!(p.closed.is_none());
        let r = p.apply(&gen, &x, &spec).unwrap();
        let want = cv(&[-(2f64.ln()), -(4f64.ln()) / 3f64.sqrt()]);
        close(&r.vector(), &want, 1e-5);
    }

    #[test]
    fn log_routes_scalar() {
        let gen = diag(&[-1.0]);
        let x = cv(&[1.0]);
        let spec = QuadratureSpec::default();
        let want = cv(&[1.0 / 2f64.ln()]);
        close(&log_inverse(&gen, &x, &spec, LogRoute::Volterra).unwrap().vector(), &want, 1e-8);
        close(&log_inverse(&gen, &x, &spec, LogRoute::Resolvent).unwrap().vector(), &want, 1e-10);
    }

    #[test]
    fn log_routes_agree_nonnormal() {
        let gen = Generator::from_real_rows(2, &[-1.0, 1.0, 0.0, -2.0]).unwrap();
        let x = cv(&[1.0, 1.0]);
        let spec = QuadratureSpec::default();
        let v = log_inverse(&gen, &x, &spec, LogRoute::Volterra).unwrap().vector();
        let r = log_inverse(&gen, &x, &spec, LogRoute::Resolvent).unwrap().vector();
        close(&v, &r, 1e-8);
        assert!(log_inverse(&diag(&[0.0]), &cv(&[1.0]), &spec, LogRoute::Volterra).is_err());
    }

    #[test]
    fn reciprocal_round_trip() {
        let spec = QuadratureSpec::default();
        let r = reciprocal_bernstein_inverse(&log_shift(), &diag(&[-1.0, -3.0]), &cv(&[1.0, 1.0]), &spec).unwrap();
        close(&r.value.vector(), &cv(&[-1.0 / 2f64.ln(), -1.0 / 4f64.ln()]), 1e-8);
        assert!(r.round_trip < 1e-8);
        assert!(reciprocal_bernstein_inverse(&neg_frac_power_bernstein(0.5).unwrap(), &diag(&[-1.0]), &cv(&[1.0]), &spec).is_err());
    }

    #[test]
    fn composed_density_matches_closed_form() {
        for alpha in [0.5, 0.8] {
            let c = composed_half_stable(&frac_power(alpha).unwrap()).unwrap();
            let d = c.measure.density.as_ref().unwrap();
            for v in [1e-3f64, 0.2, 1.0, 30.0] {
                let want = v.powf(alpha / 2.0 - 1.0) / gamma(alpha / 2.0);
                let got = d.eval(v);
                assert!((got - want).abs() < 1e-10 * want, "α={alpha} v={v}: {got} vs {want}");
                assert!(got <= d.tail.at(v.max(1.0)) * (1.0 + 1e-12) || v < 1.0);
            }
        }
    }

    #[test]
    fn compose_example() {
        let gen = diag(&[-1.0, -4.0]);
        let x = cv(&[1.0, 1.0]);
        let spec = QuadratureSpec::default();
        let r = compose_apply(&frac_power(0.5).unwrap(), &neg_frac_power_bernstein(0.5).unwrap(), &gen, &x, &spec).unwrap();
        let want = cv(&[1.0, 4f64.powf(-0.25)]);
        assert_eq!(r.route, ComposeDirectRoute::Subordination);
        close(&r.outer_direct.vector(), &want, 1e-8);
        close(&r.nested.vector(), &want, 1e-8);
        let id = compose_apply(&frac_power(0.5).unwrap(), &identity(), &gen, &x, &spec).unwrap();
        close(&id.nested.vector(), &cv(&[1.0, 0.5]), 1e-8);
    }
}
