use std::fmt;
use std::sync::Arc;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Behavior of a density at `t → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    /// `density(t) = t^p · s(t)` with `s` smooth and bounded near 0, `p > -1`.
    Power(f64),
    /// Integrable but not of power type (e.g. `1/(t log²t)`); the density must
    /// carry a closed-form distribution function.
    Distribution,
}

/// `|density(t)| ≤ coeff · t^power · e^{-rate·t}` for `t ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEnvelope {
    pub coeff: f64,
    pub power: f64,
    pub rate: f64,
}

impl TailEnvelope {
    pub fn power(coeff: f64, power: f64) -> Self {
        TailEnvelope {
            coeff,
            power,
            rate: 0.0,
        }
    }

    pub fn exponential(coeff: f64, power: f64, rate: f64) -> Self {
        TailEnvelope { coeff, power, rate }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.coeff * t.powf(self.power) * (-self.rate * t).exp()
    }
}

/// A real density on `(0, ∞)` together with the endpoint information the
/// quadrature relies on.
#[derive(Clone)]
pub struct Density {
    pub f: RealFn,
    pub origin: Origin,
    pub tail: TailEnvelope,
    /// `∫₀^t density`, when known in closed form.
    pub cdf: Option<RealFn>,
    /// Points where the density is not smooth.
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("origin", &self.origin)
            .field("tail", &self.tail)
            .field("cdf", &self.cdf.is_some())
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl Density {
    pub fn new<F>(f: F, origin: Origin, tail: TailEnvelope) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Density {
            f: Arc::new(f),
            origin,
            tail,
            cdf: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_cdf<F>(mut self, cdf: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.cdf = Some(Arc::new(cdf));
        self
    }

    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|p| *p > 0.0 && p.is_finite());
        points.sort_by(f64::total_cmp);
        points.dedup();
        self.breakpoints = points;
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn origin_exponent(&self) -> Option<f64> {
        match self.origin {
            Origin::Power(p) => Some(p),
            Origin::Distribution => None,
        }
    }

    /// Multiplies the density by a constant.
    pub fn scaled(&self, c: f64) -> Density {
        let f = self.f.clone();
        let cdf = self.cdf.clone();
        Density {
            f: Arc::new(move |t| c * f(t)),
            origin: self.origin,
            tail: TailEnvelope {
                coeff: self.tail.coeff * c.abs(),
                ..self.tail
            },
            cdf: cdf.map(|g| Arc::new(move |t: f64| c * g(t)) as RealFn),
            breakpoints: self.breakpoints.clone(),
        }
    }
}
