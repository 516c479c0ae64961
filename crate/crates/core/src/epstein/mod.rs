//! Epstein zeta function for complex symmetric 2×2 forms.

mod form;
mod wigner;
mod zeta;

pub use form::{Admissibility, ComplexQuadraticForm};
pub use wigner::{box_integral, truncated_sum, wigner_limit_oracle};
pub use zeta::{
    epstein_zeta, epstein_zeta_truncated, truncation_radius, zeta_parameter_gradient,
    LatticeSums, ZetaValue, DEFAULT_EPS,
};

/// Evaluates `Q_A(v)`.
pub fn evaluate_form(a: &ComplexQuadraticForm, v: (f64, f64)) -> num_complex::Complex64 {
    a.eval(v.0, v.1)
}

/// Builds a form and its admissibility metadata.
pub fn validate_admissible(
    e: num_complex::Complex64,
    f: num_complex::Complex64,
    g: num_complex::Complex64,
) -> crate::Result<ComplexQuadraticForm> {
    ComplexQuadraticForm::new(e, f, g)
}
