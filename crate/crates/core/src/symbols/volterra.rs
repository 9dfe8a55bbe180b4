//! The Volterra function `ν(t, -1) = ∫₀^∞ t^{ξ-1} / Γ(ξ) dξ`.
//!
//! Its Laplace transform is `1/log p` for `p > 1`, so `e^{-t} ν(t, -1)` is the
//! density whose transform is `1/log(1 - s)`.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_finite, Pointwise, QuadratureSpec};
use crate::special::{gamma_p, ln_gamma};

/// Relative size of the discarded `ξ`-tail.
const XI_TAIL_REL: f64 = 1e-12;

fn xi_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_panels: 512,
        panel_order: 16,
        ..Default::default()
    }
}

/// `∫₀^∞ g(ξ) dξ` for an integrand that decays like `t^ξ/Γ(ξ)`: integrates
/// over `[0, Ξ]` with `Ξ = max(50, 10 t)` and doubles `Ξ` until the tail
/// bound `g(Ξ) / (log Ξ - 1/Ξ - log t)` falls below the relative threshold.
fn xi_integral(t: f64, log_g: impl Fn(f64) -> f64) -> f64 {
    let g = |xi: f64| log_g(xi).exp();
    let mut upper = 50f64.max(10.0 * t);
    loop {
        // ξ-scale of the bulk: ~1/|log t| for small t, ~√t around ξ≈t.
        let pieces = ((upper / 4.0).ceil() as usize).clamp(8, 4096);
        let out = integrate_finite(
            &mut Pointwise(g),
            &|_| 1.0,
            0.0,
            upper,
            pieces,
            &xi_spec(),
        );
        let rate = upper.ln() - 1.0 / upper - t.ln();
        let tail = g(upper) / rate;
        if tail <= XI_TAIL_REL * out.value.abs() || upper > 1e7 {
            return out.value + tail;
        }
        upper *= 2.0;
    }
}

fn check_arg(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::ParameterRange(format!("volterra_nu needs t > 0, got {t}")));
    }
    Ok(())
}

/// `e^{-t} ν(t, -1)`.
pub fn volterra_nu_scaled(t: f64) -> Result<f64> {
    check_arg(t)?;
    let lt = t.ln();
    Ok(xi_integral(t, |xi| (xi - 1.0) * lt - t - ln_gamma_pos(xi)))
}

/// `ν(t, -1)`; overflows past `t ≈ 700`.
pub fn volterra_nu(t: f64) -> Result<f64> {
    check_arg(t)?;
    let lt = t.ln();
    Ok(xi_integral(t, |xi| (xi - 1.0) * lt - ln_gamma_pos(xi)))
}

/// `∫₀^h e^{-t} ν(t, -1) dt = ∫₀^∞ P(ξ, h) dξ` with `P` the regularized lower
/// incomplete gamma function.
pub fn volterra_scaled_cdf(h: f64) -> Result<f64> {
    check_arg(h)?;
    Ok(xi_integral(h, |xi| gamma_p(xi, h).ln()))
}

/// `ln Γ(ξ)` for `ξ > 0`, `+∞` at 0 so that `1/Γ(0) = 0`.
fn ln_gamma_pos(xi: f64) -> f64 {
    if xi <= 0.0 {
        f64::INFINITY
    } else {
        ln_gamma(xi)
    }
}
