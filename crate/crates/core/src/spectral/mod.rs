//! Periodic pseudospectral substrate.

pub mod field;
pub mod grid;
pub mod io;
pub mod littlewood_paley;
pub mod multiplier;
pub mod primitive;

pub use field::{relative_distance, Field};
pub use grid::SpectralGrid;
pub use littlewood_paley::{band_projection, lowpass_p0, lp_block, p_tilde, p_tilde_half, Band};
pub use multiplier::{
    apply_multiplier, dispersion, dispersion_sign, fractional_derivative, free_evolve, hilbert,
    inverse_derivative, project_half_line, second_derivative, sign_convention, spectral_derivative,
    HalfLine, MultiplierSymbol,
};
pub use primitive::{antiderivative, Antiderivative};
