//! Bochner-Phillips calculus: `ψ(A)x = c₀x + ∫ (T(u) − I)x u⁻¹ dρ(u)`, the
//! factorization `ψ(A) = A ψ̃(A)` and subordinated semigroups `e^{tψ(A)}`.

use crate::error::{Error, Result};
use crate::hp::{attach_oracle, generator_tail, hp_apply_block, ApplyOptions, ApplyResult, DomainVerdict, OrbitIntegrand};
use crate::linalg::expm::expm;
use crate::linalg::Generator;
use crate::quadrature::{integrate_density, Density, NodeSet, Origin, PanelIntegrand, QuadValue, QuadratureSpec};
use crate::symbols::{exp_tpsi, BernsteinSymbol, LEVY_SPLIT};
use crate::{CMat, CVec, C64};

/// `u ↦ (T(u) − I)X / u`, read off the top-right block of `e^{uB}` with
/// `B = [[A, AX], [0, 0]]`. No cancellation occurs near `u = 0`.
struct TamedIntegrand<'a> {
    orbit: OrbitIntegrand<'a>,
    n: usize,
    ax: CMat,
    scale: f64,
}

impl<'a> TamedIntegrand<'a> {
    fn new(aug: &'a CMat, n: usize, ax: CMat, scale: f64) -> Self {
        let k = ax.ncols();
        let mut sel = CMat::zeros(n + k, k);
        for j in 0..k {
            sel[(n + j, j)] = C64::new(1.0, 0.0);
        }
        TamedIntegrand {
            orbit: OrbitIntegrand::new(aug, sel),
            n,
            ax,
            scale,
        }
    }
}

fn augmented(a: &CMat, ax: &CMat) -> CMat {
    let n = a.nrows();
    let k = ax.ncols();
    let mut b = CMat::zeros(n + k, n + k);
    b.view_mut((0, 0), (n, n)).copy_from(a);
    b.view_mut((0, n), (n, k)).copy_from(ax);
    b
}

impl PanelIntegrand<CMat> for TamedIntegrand<'_> {
    fn eval(&mut self, a: f64, width: f64, nodes: NodeSet<'_>) -> Vec<CMat> {
        let vals = self.orbit.eval(a, width, nodes);
        vals.into_iter()
            .zip(nodes.rel)
            .map(|(v, r)| {
                let u = a + width * r;
                if u == 0.0 {
                    self.ax.clone()
                } else {
                    v.rows(0, self.n).map(|z| z / u)
                }
            })
            .collect()
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}

fn as_block(x: &CVec) -> CMat {
    CMat::from_column_slice(x.len(), 1, x.as_slice())
}

/// `ψ(A)X` for a block of vectors.
pub fn bp_apply_block(
    psi: &BernsteinSymbol,
    gen: &Generator,
    x: &CMat,
    spec: &QuadratureSpec,
    opts: ApplyOptions,
) -> Result<ApplyResult> {
    gen.check_block(x)?;
    spec.validate()?;
    let a = gen.matrix();
    let ax = a * x;
    let scale = x.norm();
    let mut value = x.map(|z| z * psi.c0);
    for &(loc, w) in &psi.levy.atoms {
        if loc == 0.0 {
            value.axpy_complex(w, &ax);
        } else {
            let tx = crate::linalg::expm_action_block(a, loc, x);
            value.axpy_complex(w / loc, &(tx - x));
        }
    }
    let Some(d) = &psi.levy.density else {
        let mut res = ApplyResult::exact(value);
        if opts.oracle_check {
            attach_oracle(&mut res, gen, |s| psi.eval(s), x);
        }
        return Ok(res);
    };
    if let Origin::Power(p) = d.origin {
        if !(p > -1.0) {
            return Err(Error::DivergentOrigin(format!("Lévy density ~ u^{p} at 0")));
        }
    }
    let share = spec.panel_share();
    let half = QuadratureSpec {
        rel_tol: 0.5 * share.rel_tol,
        abs_tol: 0.5 * share.abs_tol,
        ..share
    };

    let aug = augmented(a, &ax);
    let mut tamed = TamedIntegrand::new(&aug, a.nrows(), ax.clone(), scale);
    let head = integrate_density(&mut tamed, d, 0.0, LEVY_SPLIT, &half);

    let env = crate::quadrature::TailEnvelope {
        power: d.tail.power - 1.0,
        ..d.tail
    };
    let (tb, tail_failed) = match generator_tail(gen, &env, spec) {
        Ok(tb) => (tb, false),
        Err(Error::DivergentTail(_)) if opts.best_effort => (
            crate::quadrature::TailBound {
                t_star: crate::hp::BEST_EFFORT_T_STAR,
                bound: f64::INFINITY,
            },
            true,
        ),
        Err(e) => return Err(e),
    };
    let weighted = {
        let f = d.f.clone();
        Density::new(move |u: f64| f(u) / u, Origin::Power(0.0), env).with_breakpoints(d.breakpoints.clone())
    };
    let mut raw_err = 0.0;
    let mut panels = head.panels;
    if tb.t_star > LEVY_SPLIT {
        let mut orbit = OrbitIntegrand::new(a, x.clone());
        let raw = integrate_density(&mut orbit, &weighted, LEVY_SPLIT, tb.t_star, &half);
        value += raw.value;
        raw_err = raw.error_estimate;
        panels += raw.panels;
    }
    let f_split = psi.tail_function(LEVY_SPLIT)?;
    value += head.value;
    value -= x.map(|z| z * f_split);

    let error_estimate = head.error_estimate + raw_err + tb.bound * scale;
    let target = (spec.abs_tol * scale).max(spec.rel_tol * value.norm());
    let converged = error_estimate <= target && !tail_failed;
    if !converged && !opts.best_effort {
        return Err(Error::NonConvergent {
            error_estimate,
            target,
            panels,
            t_star: tb.t_star,
        });
    }
    let mut res = ApplyResult {
        value,
        error_estimate,
        t_star: tb.t_star,
        panels_used: panels,
        domain_verdict: if converged {
            DomainVerdict::Converged
        } else {
            DomainVerdict::NonConvergent
        },
        oracle_delta: None,
    };
    if opts.oracle_check {
        attach_oracle(&mut res, gen, |s| psi.eval(s), x);
    }
    Ok(res)
}

pub fn bp_apply(psi: &BernsteinSymbol, gen: &Generator, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
    bp_apply_block(psi, gen, &as_block(x), spec, ApplyOptions::default())
}

pub fn bp_apply_with(
    psi: &BernsteinSymbol,
    gen: &Generator,
    x: &CVec,
    spec: &QuadratureSpec,
    opts: ApplyOptions,
) -> Result<ApplyResult> {
    bp_apply_block(psi, gen, &as_block(x), spec, opts)
}

/// `ψ̃(A)x = ∫ T(t)x f(t) dt` with `f(r) = ∫_r^∞ u⁻¹ dρ(u)`.
pub fn psi_tilde_apply(psi: &BernsteinSymbol, gen: &Generator, x: &CVec, spec: &QuadratureSpec) -> Result<ApplyResult> {
    let tilde = psi.psi_tilde()?;
    hp_apply_block(&tilde, gen, &as_block(x), spec, ApplyOptions::default())
}

/// The matrix `Ψ = ψ(A)`, all basis columns in one block.
pub fn psi_matrix(psi: &BernsteinSymbol, gen: &Generator, spec: &QuadratureSpec) -> Result<ApplyResult> {
    let n = gen.dim();
    bp_apply_block(psi, gen, &CMat::identity(n, n), spec, ApplyOptions::default())
}

/// Evaluation paths for `e^{tψ(A)}x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubordinationRoute {
    /// `e^{tΨ}x` with `Ψ` materialized.
    Direct,
    /// `∫ T(v)x dν_t(v)` with the closed-form law `ν_t`.
    Subordination,
}

pub fn subordinated_apply(
    psi: &BernsteinSymbol,
    t: f64,
    gen: &Generator,
    x: &CVec,
    spec: &QuadratureSpec,
    route: SubordinationRoute,
) -> Result<ApplyResult> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::ParameterRange(format!("subordination time must be nonnegative, got {t}")));
    }
    if x.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: x.len(),
        });
    }
    if t == 0.0 {
        return Ok(ApplyResult::exact(as_block(x)));
    }
    match route {
        SubordinationRoute::Direct => {
            let psi_m = psi_matrix(psi, gen, spec)?;
            subordinated_from_matrix(&psi_m, t, x)
        }
        SubordinationRoute::Subordination => {
            let g = exp_tpsi(t, psi)?;
            hp_apply_block(&g, gen, &as_block(x), spec, ApplyOptions::default())
        }
    }
}

/// `e^{tΨ}x` for an already materialized `Ψ`.
pub fn subordinated_from_matrix(psi_m: &ApplyResult, t: f64, x: &CVec) -> Result<ApplyResult> {
    let e = expm(&psi_m.value.map(|z| z * t));
    let value = &e * as_block(x);
    let mut res = ApplyResult::merged(value, &[psi_m]);
    // first-order propagation of the error in Ψ
    res.error_estimate = t * psi_m.error_estimate * x.norm();
    Ok(res)
}
