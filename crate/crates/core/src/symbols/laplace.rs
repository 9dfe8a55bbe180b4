use std::fmt;
use std::sync::Arc;

use super::family::Family;
use super::measure::MeasureRepr;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::C64;

/// Scalar symbol `s ↦ g(s)`; `None` where it is undefined.
pub type ScalarFn = Arc<dyn Fn(C64) -> Option<C64> + Send + Sync>;

/// Symbol tolerance for the self-consistency certificate.
pub const SYMBOL_TOL: f64 = 1e-8;

/// Sample points for the self-consistency certificate.
pub const CONSISTENCY_SAMPLES: [f64; 3] = [-0.1, -1.0, -10.0];

pub(crate) fn consistency_spec() -> QuadratureSpec {
    QuadratureSpec::default().with_rel_tol(1e-12).with_abs_tol(1e-14)
}

/// `g = La`: a measure on `[0, ∞)` and, when known, a closed form for `g`.
#[derive(Clone)]
pub struct LaplaceSymbol {
    pub name: String,
    pub family: Family,
    pub measure: MeasureRepr,
    closed_form: Option<ScalarFn>,
}

impl fmt::Debug for LaplaceSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceSymbol")
            .field("name", &self.name)
            .field("family", &self.family)
            .field("measure", &self.measure)
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl LaplaceSymbol {
    pub fn new(name: impl Into<String>, family: Family, measure: MeasureRepr, closed_form: Option<ScalarFn>) -> Self {
        LaplaceSymbol {
            name: name.into(),
            family,
            measure,
            closed_form,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    /// `g(s)`: the closed form, or the transform of the measure.
    pub fn eval(&self, s: C64) -> Option<C64> {
        match &self.closed_form {
            Some(f) => f(s),
            None => self.eval_via_measure(s).ok(),
        }
    }

    pub fn eval_real(&self, s: f64) -> Option<f64> {
        self.eval(C64::new(s, 0.0)).map(|z| z.re)
    }

    /// `∫ e^{st} da(t)` by quadrature, atoms included exactly.
    pub fn eval_via_measure(&self, s: C64) -> Result<C64> {
        self.measure.laplace(s, &consistency_spec())
    }

    /// Largest `|quadrature − closed form| / (1 + |g(s)|)` over the samples.
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

    pub fn validate(&self) -> Result<()> {
        self.measure.validate()?;
        if self.closed_form.is_some() {
            let dev = self.consistency(&CONSISTENCY_SAMPLES)?;
            if dev > SYMBOL_TOL {
                return Err(Error::InvalidArgument(format!(
                    "symbol '{}' is not the transform of its measure (deviation {dev:e})",
                    self.name
                )));
            }
        }
        Ok(())
    }
}
