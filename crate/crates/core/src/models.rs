//! Ready-made operator models used by the test corpus and the CLI example
//! runner.

use crate::error::Result;
use crate::linalg::{c64, ComplexMatrix, ToleranceConfig};
use crate::operators::{assemble_shift, direct_sum, FiniteOperator, ShiftSpec};

/// Scalar shift with weights `sqrt(s(n+1)/s(n))` for a polynomial-type
/// positive sequence; `s(n) = n + 1` gives the Dirichlet-type 2-isometry.
pub fn polynomial_shift(n_sites: usize, s: impl Fn(usize) -> f64) -> Result<ShiftSpec> {
    ShiftSpec::scalar_ratios(n_sites, s)
}

/// Truncation of the rotation-mixed analytic operator on little-ell-2: the
/// first three coordinates mix through a fixed rotation of the plane
/// spanned by the leading basis vectors, the tail is a plain weighted
/// shift with weights `s_n = sqrt(s(n+1)/s(n))`.
///
/// For `s` of degree at most 2 and positive on the nonnegative integers
/// this is an analytic 3-isometry whose adjoint kernel is the line
/// `x_0 = i x_1`, so the equivalent shift has one-dimensional fiber.
pub fn rotation_mixed_operator(
    n_sites: usize,
    s: impl Fn(usize) -> f64,
) -> Result<FiniteOperator> {
    let w = |n: usize| (s(n + 1) / s(n)).sqrt();
    let n = n_sites;
    let mut m = ComplexMatrix::zeros(n, n);
    let s0 = w(0);
    let s1 = w(1);
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    m[(0, 0)] = c64(s0 / 2.0, 0.0);
    m[(0, 1)] = c64(0.0, s0 / 2.0);
    m[(1, 0)] = c64(0.0, s0 / 2.0);
    m[(1, 1)] = c64(-s0 / 2.0, 0.0);
    m[(2, 0)] = c64(s1 * inv_sqrt2, 0.0);
    m[(2, 1)] = c64(0.0, -s1 * inv_sqrt2);
    for k in 2..n - 1 {
        m[(k + 1, k)] = c64(w(k), 0.0);
    }
    FiniteOperator::explicit_truncation(m, (0..n).collect())
}

/// Direct sum of two scalar polynomial shifts on `n_sites` sites each; its
/// adjoint kernel is two-dimensional, so the equivalent shift model has
/// fiber dimension 2.
pub fn polynomial_pair_direct_sum(
    n_sites: usize,
    s: impl Fn(usize) -> f64,
    t: impl Fn(usize) -> f64,
    tol: &ToleranceConfig,
) -> Result<FiniteOperator> {
    let a = assemble_shift(&ShiftSpec::scalar_ratios(n_sites, s)?, tol)?;
    let b = assemble_shift(&ShiftSpec::scalar_ratios(n_sites, t)?, tol)?;
    Ok(direct_sum(&a, &b))
}
