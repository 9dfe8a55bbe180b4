//! Laplace symbols `g = La`, negative Bernstein functions `ψ`, and the catalog.

pub mod bernstein;
pub mod catalog;
pub mod family;
pub mod laplace;
pub mod measure;
pub mod volterra;

pub use bernstein::{exprel, BernsteinSymbol, LEVY_SPLIT};
pub use catalog::{
    catalog_build, catalog_listing, exp_tpsi, frac_power, identity, inverse, log_shift,
    neg_frac_power_bernstein, parse_symbol, recip_log, stable_half_density, volterra_density,
    CatalogEntry, SymbolKind, CATALOG,
};
pub use family::Family;
pub use laplace::{LaplaceSymbol, ScalarFn, SYMBOL_TOL};
pub use measure::{MeasureRepr, SignInfo};
pub use volterra::{volterra_nu, volterra_nu_scaled, volterra_scaled_cdf};

use crate::error::Result;
use crate::C64;

#[derive(Debug, Clone)]
pub enum Symbol {
    Laplace(LaplaceSymbol),
    Bernstein(BernsteinSymbol),
}

impl Symbol {
    pub fn name(&self) -> &str {
        match self {
            Symbol::Laplace(g) => &g.name,
            Symbol::Bernstein(p) => &p.name,
        }
    }

    pub fn eval(&self, s: C64) -> Option<C64> {
        match self {
            Symbol::Laplace(g) => g.eval(s),
            Symbol::Bernstein(p) => p.eval(s),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Symbol::Laplace(g) => g.validate(),
            Symbol::Bernstein(p) => p.validate(),
        }
    }
}

/// `ψ̃ = ψ/s` as a Laplace symbol.
pub fn psi_tilde_density(psi: &BernsteinSymbol) -> Result<LaplaceSymbol> {
    psi.psi_tilde()
}

/// `∫ e^{st} da(t)` by quadrature.
pub fn symbol_eval_via_measure(sym: &LaplaceSymbol, s: f64) -> Result<f64> {
    if !(s < 0.0) {
        return Err(crate::Error::Domain { re: s, im: 0.0 });
    }
    sym.eval_via_measure(C64::new(s, 0.0)).map(|z| z.re)
}
