//! Generalized Fibonacci ratios, the spectra of their companion matrices, and
//! escape-time classification of the resulting point cloud against the
//! quadratic family `z -> z^2 + c`.
//!
//! Orders are always expressed as `m`, the number of summed predecessor terms
//! (`m = 2` is Fibonacci). The historical index `k = m - 1` is carried
//! alongside as [`paper_k`] wherever values are reported.

pub mod dd;
pub mod decimal;
mod error;
pub mod export;
pub mod fractals;
pub mod sequences;
pub mod spectra;

pub use decimal::FixedDecimal;
pub use error::{Error, Result};
pub use fractals::{
    classify_points, escape_iterate, julia_iteration_count, mandelbrot_member, render_grid,
    EscapeResult, GridMode, GridSpec, MembershipReport, QuadraticParams, SetSpec,
};
pub use sequences::{
    convergence_scan, difference_sequence, generate_sequence, phi, phi_scan, BigSequence,
    DifferenceSequence, PhiValue, RecurrenceSpec,
};
pub use spectra::{
    build_companion, characteristic_polynomial, eigenvalues, phi_points, CharacteristicPolynomial,
    CompanionMatrix, EigenvalueSet, PhiPoint, SpectraConfig,
};

pub use num_complex::Complex64;

/// Converts an order `m` to the index used by the original tables (`m - 1`).
pub const fn paper_k(order: usize) -> usize {
    order - 1
}

/// Inverse of [`paper_k`].
pub const fn order_from_paper_k(k: usize) -> usize {
    k + 1
}
