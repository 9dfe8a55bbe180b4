use std::f64::consts::PI;
use std::sync::Arc;

use super::bernstein::BernsteinSymbol;
use super::family::Family;
use super::laplace::{LaplaceSymbol, ScalarFn};
use super::measure::MeasureRepr;
use super::volterra::{volterra_nu_scaled, volterra_scaled_cdf};
use super::Symbol;
use crate::error::{Error, Result};
use crate::quadrature::{Density, Origin, RealFn, TailEnvelope};
use crate::special::{exp_int_e1, gamma, rgamma};
use crate::C64;

/// Kind of symbol a catalog entry builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Laplace,
    Bernstein,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: SymbolKind,
    pub params: &'static [(&'static str, &'static str)],
    pub formula: &'static str,
    pub example: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "inverse",
        kind: SymbolKind::Laplace,
        params: &[],
        formula: "g(s) = 1/s, a = -Lebesgue",
        example: "Example 1",
    },
    CatalogEntry {
        name: "frac_power",
        kind: SymbolKind::Laplace,
        params: &[("alpha", "alpha > 0")],
        formula: "g(s) = (-s)^-alpha, da = t^(alpha-1)/Gamma(alpha) dt",
        example: "Example 2",
    },
    CatalogEntry {
        name: "neg_frac_power_bernstein",
        kind: SymbolKind::Bernstein,
        params: &[("beta", "0 < beta < 1")],
        formula: "psi(s) = -(-s)^beta, drho = beta/Gamma(1-beta) u^-beta du",
        example: "Example 3",
    },
    CatalogEntry {
        name: "log_shift",
        kind: SymbolKind::Bernstein,
        params: &[],
        formula: "psi(s) = -log(1-s), drho = e^-u du",
        example: "Example 4",
    },
    CatalogEntry {
        name: "recip_log",
        kind: SymbolKind::Laplace,
        params: &[],
        formula: "g(s) = -1/log(1-s), da = -e^-t nu(t,-1) dt",
        example: "Example 4, Remark 1",
    },
    CatalogEntry {
        name: "identity",
        kind: SymbolKind::Bernstein,
        params: &[],
        formula: "psi(s) = s, rho = unit atom at 0",
        example: "Corollary 8",
    },
    CatalogEntry {
        name: "exp_tpsi",
        kind: SymbolKind::Laplace,
        params: &[("t", "t >= 0"), ("psi", "identity | neg_frac_power_bernstein:0.5 | log_shift")],
        formula: "g_t(s) = exp(t psi(s)), a = subordinator law nu_t",
        example: "Definition 2, Theorem 4, Example 5",
    },
];

fn closed(f: impl Fn(C64) -> Option<C64> + Send + Sync + 'static) -> Option<ScalarFn> {
    Some(Arc::new(f))
}

fn real_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> RealFn {
    Arc::new(f)
}

/// `(-s)^p` on the principal branch; undefined on `s ≥ 0` unless `p ≥ 0`.
fn neg_pow(s: C64, p: f64) -> Option<C64> {
    let z = -s;
    if z.im == 0.0 && z.re <= 0.0 {
        if z.re == 0.0 && p > 0.0 {
            return Some(C64::new(0.0, 0.0));
        }
        return None;
    }
    Some(z.powf(p))
}

fn log_one_minus(s: C64) -> Option<C64> {
    let z = C64::new(1.0, 0.0) - s;
    if z.im == 0.0 && z.re <= 0.0 {
        return None;
    }
    Some(z.ln())
}

pub fn inverse() -> LaplaceSymbol {
    let d = Density::new(|_| -1.0, Origin::Power(0.0), TailEnvelope::power(1.0, 0.0)).with_cdf(|t| -t);
    LaplaceSymbol::new(
        "inverse",
        Family::Inverse,
        MeasureRepr::from_density(d),
        closed(|s| if s == C64::new(0.0, 0.0) { None } else { Some(s.inv()) }),
    )
}

pub fn frac_power(alpha: f64) -> Result<LaplaceSymbol> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::ParameterRange(format!("frac_power needs alpha > 0, got {alpha}")));
    }
    let c = rgamma(alpha);
    let c1 = rgamma(alpha + 1.0);
    let d = Density::new(move |t: f64| c * t.powf(alpha - 1.0), Origin::Power(alpha - 1.0), TailEnvelope::power(c, alpha - 1.0))
        .with_cdf(move |t: f64| c1 * t.powf(alpha));
    Ok(LaplaceSymbol::new(
        format!("frac_power:{alpha}"),
        Family::FracPower { alpha },
        MeasureRepr::from_density(d),
        closed(move |s| neg_pow(s, -alpha)),
    ))
}

pub fn neg_frac_power_bernstein(beta: f64) -> Result<BernsteinSymbol> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::ParameterRange(format!("neg_frac_power_bernstein needs 0 < beta < 1, got {beta}")));
    }
    let c = beta / gamma(1.0 - beta);
    let cdf_c = beta / gamma(2.0 - beta);
    let tail_c = rgamma(1.0 - beta);
    let d = Density::new(move |u: f64| c * u.powf(-beta), Origin::Power(-beta), TailEnvelope::power(c, -beta))
        .with_cdf(move |u: f64| cdf_c * u.powf(1.0 - beta));
    Ok(BernsteinSymbol::new(
        format!("neg_frac_power_bernstein:{beta}"),
        Family::NegFracPowerBernstein { beta },
        0.0,
        MeasureRepr::from_density(d),
        closed(move |s| neg_pow(s, beta).map(|v| -v)),
        Some(real_fn(move |r| tail_c * r.powf(-beta))),
    ))
}

pub fn log_shift() -> BernsteinSymbol {
    let d = Density::new(|u: f64| (-u).exp(), Origin::Power(0.0), TailEnvelope::exponential(1.0, 0.0, 1.0))
        .with_cdf(|u: f64| -(-u).exp_m1());
    BernsteinSymbol::new(
        "log_shift",
        Family::LogShift,
        0.0,
        MeasureRepr::from_density(d),
        closed(|s| log_one_minus(s).map(|v| -v)),
        Some(real_fn(exp_int_e1)),
    )
    .with_reciprocal("recip_log")
}

pub fn identity() -> BernsteinSymbol {
    BernsteinSymbol::new(
        "identity",
        Family::Identity,
        0.0,
        MeasureRepr::dirac(0.0),
        closed(Some),
        Some(real_fn(|_| 0.0)),
    )
}

/// Density `e^{-t} ν(t, -1)`, whose transform is `1/log(1 - s)`.
pub fn volterra_density() -> Density {
    // e^{-t}ν(t,-1) decreases from +∞ to 1; 1.04 bounds it on [1, ∞).
    Density::new(|t: f64| volterra_nu_scaled(t).unwrap_or(f64::NAN), Origin::Distribution, TailEnvelope::power(1.04, 0.0))
        .with_cdf(|h: f64| volterra_scaled_cdf(h).unwrap_or(f64::NAN))
}

pub fn recip_log() -> LaplaceSymbol {
    LaplaceSymbol::new(
        "recip_log",
        Family::RecipLog,
        MeasureRepr::from_density(volterra_density().scaled(-1.0)),
        closed(|s| log_one_minus(s).and_then(|l| if l == C64::new(0.0, 0.0) { None } else { Some(-l.inv()) })),
    )
}

/// `g_t(s) = e^{tψ(s)}` with the law of the subordinator at time `t`.
pub fn exp_tpsi(t: f64, psi: &BernsteinSymbol) -> Result<LaplaceSymbol> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::ParameterRange(format!("exp_tpsi needs t >= 0, got {t}")));
    }
    let measure = if t == 0.0 {
        MeasureRepr::dirac(0.0)
    } else {
        match psi.family {
            Family::Identity => MeasureRepr::dirac(t),
            Family::NegFracPowerBernstein { beta } if beta == 0.5 => {
                MeasureRepr::from_density(stable_half_density(t))
            }
            Family::LogShift => {
                let c = rgamma(t);
                let d = Density::new(
                    move |v: f64| c * v.powf(t - 1.0) * (-v).exp(),
                    Origin::Power(t - 1.0),
                    TailEnvelope::exponential(c, t - 1.0, 1.0),
                )
                .with_cdf(move |v: f64| crate::special::gamma_p(t, v));
                MeasureRepr::from_density(d)
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "no closed-form subordination law for '{}'",
                    psi.name
                )))
            }
        }
    };
    let p = psi.clone();
    Ok(LaplaceSymbol::new(
        format!("exp_tpsi:{t}:{}", psi.name),
        Family::ExpTPsi {
            t,
            psi: Box::new(psi.family.clone()),
        },
        measure,
        closed(move |s| p.eval(s).map(|v| (v * t).exp())),
    ))
}

/// `ν_t(v) = t v^{-3/2} e^{-t²/(4v)} / (2√π)`, the law with transform
/// `e^{-t√(-s)}`.
pub fn stable_half_density(t: f64) -> Density {
    let c = t / (2.0 * PI.sqrt());
    Density::new(
        move |v: f64| {
            if v <= 0.0 {
                0.0
            } else {
                c * v.powf(-1.5) * (-t * t / (4.0 * v)).exp()
            }
        },
        Origin::Power(0.0),
        TailEnvelope::power(c, -1.5),
    )
    .with_cdf(move |v: f64| libm::erfc(t / (2.0 * v.sqrt())))
}

/// Builds a catalog symbol from its name and numeric parameters.
pub fn catalog_build(name: &str, params: &[f64]) -> Result<Symbol> {
    let want = |n: usize| -> Result<()> {
        if params.len() != n {
            return Err(Error::ParameterRange(format!(
                "'{name}' takes {n} parameter(s), got {}",
                params.len()
            )));
        }
        Ok(())
    };
    match name {
        "inverse" => want(0).map(|_| Symbol::Laplace(inverse())),
        "frac_power" => {
            want(1)?;
            frac_power(params[0]).map(Symbol::Laplace)
        }
        "neg_frac_power_bernstein" => {
            want(1)?;
            neg_frac_power_bernstein(params[0]).map(Symbol::Bernstein)
        }
        "log_shift" => want(0).map(|_| Symbol::Bernstein(log_shift())),
        "recip_log" => want(0).map(|_| Symbol::Laplace(recip_log())),
        "identity" => want(0).map(|_| Symbol::Bernstein(identity())),
        "exp_tpsi" => Err(Error::ParameterRange(
            "exp_tpsi takes t and a Bernstein symbol, e.g. exp_tpsi:1:neg_frac_power_bernstein:0.5".into(),
        )),
        _ => Err(Error::UnknownSymbol(name.to_string())),
    }
}

/// Parses `name[:param...]`, e.g. `frac_power:0.5` or
/// `exp_tpsi:1:neg_frac_power_bernstein:0.5`.
pub fn parse_symbol(spec: &str) -> Result<Symbol> {
    let spec = spec.trim();
    let mut parts = spec.splitn(2, ':');
    let name = parts.next().unwrap_or_default();
    let rest = parts.next();
    if name == "exp_tpsi" {
        let rest = rest.ok_or_else(|| Error::Parse("exp_tpsi needs t and psi".into()))?;
        let mut it = rest.splitn(2, ':');
        let t = parse_param(it.next().unwrap_or_default())?;
        let psi_spec = it.next().ok_or_else(|| Error::Parse("exp_tpsi needs a psi".into()))?;
        let psi = match parse_symbol(psi_spec)? {
            Symbol::Bernstein(b) => b,
            Symbol::Laplace(l) => {
                return Err(Error::ParameterRange(format!("'{}' is not a Bernstein function", l.name)))
            }
        };
        return exp_tpsi(t, &psi).map(Symbol::Laplace);
    }
    let params = match rest {
        None => Vec::new(),
        Some(r) => r.split(':').map(parse_param).collect::<Result<Vec<_>>>()?,
    };
    catalog_build(name, &params)
}

fn parse_param(token: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad symbol parameter '{token}'")))
}

/// Human-readable listing of the catalog.
pub fn catalog_listing() -> String {
    let mut out = String::new();
    for e in CATALOG {
        let kind = match e.kind {
            SymbolKind::Laplace => "laplace",
            SymbolKind::Bernstein => "bernstein",
        };
        let params = if e.params.is_empty() {
            "-".to_string()
        } else {
            e.params
                .iter()
                .map(|(n, r)| format!("{n}: {r}"))
                .collect::<Vec<_>>()
                .join("; ")
        };
        out.push_str(&format!(
            "{:<26} {:<9} [{}] {}  ({})\n",
            e.name, kind, params, e.formula, e.example
        ));
    }
    out
}

