//! Dense linear algebra substrate: the semigroup action `e^{tA}x`, resolvent
//! solves, growth certification and the spectral oracle.

pub mod expm;
pub mod generator;
pub mod io;
pub mod spectral;

pub use expm::{expm, expm_action_block};
pub use generator::{
    certify_growth, expm_action, resolvent_solve, resolvent_solve_block, DecayProfile, Generator,
    GrowthProfile,
};
pub use spectral::{norm2, spectral_abscissa, spectral_decompose, SpectralData};
