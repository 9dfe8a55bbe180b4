//! Functional calculus for generators of bounded semigroups on `C^n`.
//!
//! Two calculi are implemented over a matrix generator `A`:
//!
//! * the Hille-Phillips calculus, `g(A)x = ∫ T(t)x da(t)` for symbols `g` that are
//!   Laplace transforms of measures ([`hp`]);
//! * the Bochner-Phillips calculus, `ψ(A)x = c₀x + ∫ (T(u) - I)x u⁻¹ dρ(u)` for
//!   negative Bernstein functions `ψ` ([`bp`]).
//!
//! On top of those, [`rules`] implements the product, reciprocal, log-inverse and
//! composition rules that connect the two, and [`verify`] runs them as named suites
//! against the spectral oracle in [`linalg`].

pub mod bp;
pub mod ensemble;
pub mod error;
pub mod hp;
pub mod linalg;
pub mod quadrature;
pub mod rules;
pub mod special;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
pub use hp::{ApplyResult, DomainVerdict};
pub use linalg::{Generator, SpectralData};
pub use quadrature::QuadratureSpec;
pub use symbols::{BernsteinSymbol, LaplaceSymbol, MeasureRepr, Symbol};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;
