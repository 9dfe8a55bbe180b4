/// Which closed-form family a symbol belongs to, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Inverse,
    FracPower { alpha: f64 },
    NegFracPowerBernstein { beta: f64 },
    LogShift,
    Identity,
    RecipLog,
    ExpTPsi { t: f64, psi: Box<Family> },
    /// `ψ(s)/s` of a Bernstein family.
    PsiTilde(Box<Family>),
    /// Product `g·ψ`.
    Product(Box<Family>, Box<Family>),
    /// `h∘ψ`.
    Composition(Box<Family>, Box<Family>),
    Custom,
}
