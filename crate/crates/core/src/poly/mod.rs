//! Chebyshev polynomials and the spectral transforms built from them.

pub mod approx;
pub mod chebyshev;
pub mod transform;

pub use approx::{
    bessel_j, exp_decay_degree_bound, exp_decay_poly, jacobi_anger_degree_bound,
    jacobi_anger_poly, step_degree_estimate, JacobiAnger,
};
pub use chebyshev::{ChebyshevPolynomial, Parity};
pub use transform::{
    apply_polynomial, apply_polynomial_target, apply_singular_value_polynomial, negative_power,
    positive_power, SPECTRUM_TOL,
};
