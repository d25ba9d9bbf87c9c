//! m-isometry defect operators, per-site identities for weighted shifts,
//! kernel-condition verdicts, kernel-tower inclusions, the Gramian
//! recurrence and expansivity.
//!
//! Reports carry residual norms; booleans are derived only at the tolerance
//! boundary, since strictness checks need the magnitude.

use nalgebra::linalg::SymmetricEigen;
use serde::Serialize;

use crate::error::{MisoError, Result};
use crate::linalg::{self, hermitian_part, spectral_norm, ComplexMatrix, ToleranceConfig};
use crate::operators::{bracket, compress_to_support, mat_pow, FiniteOperator, ShiftSpec};

/// Binomial coefficient as `f64`; exact for the small orders used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Verdict of a defect-norm check restricted to truncation-safe support.
#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    pub m: usize,
    pub residual_norm: f64,
    pub support_bound: Option<usize>,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_site: Option<Vec<(usize, f64)>>,
}

/// Per-level leakage of the power Gramians out of `Ker(T*)`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelConditionReport {
    pub k: usize,
    pub kernel_dim: usize,
    pub per_level: Vec<(usize, f64)>,
    pub verdict: bool,
}

/// The alternating binomial sum of power Gramians,
/// `sum_{p=0}^{m} (-1)^p C(m,p) (T^p)* T^p`; Hermitian, and zero exactly
/// when `T` is an m-isometry.
pub fn defect(t: &FiniteOperator, m: usize) -> ComplexMatrix {
    let n = t.dim();
    let mut acc = ComplexMatrix::zeros(n, n);
    for p in 0..=m {
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        acc += bracket(t, p).scale(sign * binomial(m, p));
    }
    acc
}

/// Defect-norm verdict on sites `0..=support_bound` (defaulting to
/// `max_site - m`, the largest truncation-free bound).
pub fn is_m_isometry(
    t: &FiniteOperator,
    m: usize,
    support_bound: Option<usize>,
    tol: &ToleranceConfig,
) -> Result<DefectReport> {
    if m == 0 {
        return Err(MisoError::InvalidArgument("m must be at least 1".into()));
    }
    let bound = match support_bound {
        Some(b) => {
            t.check_support(b, m)?;
            b
        }
        None => t.default_support_bound(m)?,
    };
    let d = defect(t, m);
    let compressed = compress_to_support(t, &d, bound);
    let residual_norm = spectral_norm(&compressed);
    Ok(DefectReport {
        m,
        residual_norm,
        support_bound: Some(bound),
        verdict: residual_norm <= tol.tol_identity,
        per_site: None,
    })
}

/// Exact per-site defect of a weighted shift at site `s`:
/// `sum_{p=0}^{m} (-1)^p C(m,p) (S_{s+p-1} ... S_s)* (S_{s+p-1} ... S_s)`.
/// Free of truncation error; zero iff the per-site identity holds at `s`.
pub fn shift_site_defect(spec: &ShiftSpec, m: usize, s: usize) -> Result<ComplexMatrix> {
    if s + m > spec.n_sites - 1 {
        return Err(MisoError::SupportOverflow {
            support_bound: s,
            power: m,
            limit: spec.n_sites - 1,
        });
    }
    let d = spec.fiber_dim;
    let mut acc = ComplexMatrix::zeros(d, d);
    let mut product = ComplexMatrix::identity(d, d);
    for p in 0..=m {
        if p > 0 {
            product = &spec.weights[s + p - 1] * &product;
        }
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        acc += (product.adjoint() * &product).scale(sign * binomial(m, p));
    }
    Ok(acc)
}

/// Per-site defect report over every truncation-free site of the spec.
pub fn shift_defect_report(spec: &ShiftSpec, m: usize, tol: &ToleranceConfig) -> Result<DefectReport> {
    if m == 0 {
        return Err(MisoError::InvalidArgument("m must be at least 1".into()));
    }
    if spec.n_sites < m + 1 {
        return Err(MisoError::SupportOverflow {
            support_bound: 0,
            power: m,
            limit: spec.n_sites - 1,
        });
    }
    let bound = spec.n_sites - 1 - m;
    let mut per_site = Vec::with_capacity(bound + 1);
    let mut worst = 0.0f64;
    for s in 0..=bound {
        let r = spectral_norm(&shift_site_defect(spec, m, s)?);
        worst = worst.max(r);
        per_site.push((s, r));
    }
    Ok(DefectReport {
        m,
        residual_norm: worst,
        support_bound: Some(bound),
        verdict: worst <= tol.tol_identity,
        per_site: Some(per_site),
    })
}

/// Leakage `||(I - P) (T^n)* T^n P||` out of `Ker(T*)` for `n = 1..=k`.
///
/// A numerically trivial kernel yields a vacuously true report with empty
/// levels.
pub fn kernel_condition(t: &FiniteOperator, k: usize, tol: &ToleranceConfig) -> KernelConditionReport {
    let ker = linalg::kernel(&t.matrix().adjoint(), tol);
    if ker.dim() == 0 {
        return KernelConditionReport {
            k,
            kernel_dim: 0,
            per_level: Vec::new(),
            verdict: true,
        };
    }
    let frame = ker.frame();
    let mut per_level = Vec::with_capacity(k);
    let mut verdict = true;
    for n in 1..=k {
        let bf = bracket(t, n) * frame;
        let leakage = ker.residual_outside(&bf);
        verdict = verdict && leakage <= tol.tol_identity;
        per_level.push((n, leakage));
    }
    KernelConditionReport {
        k,
        kernel_dim: ker.dim(),
        per_level,
        verdict,
    }
}

/// Inclusion residuals `||(T*)^n T^{n-1} P_{Ker T*}||` for `n = 1..=n_max`;
/// small residuals witness `T^{n-1}(Ker T*) <= Ker(T*^n)`.
pub fn kernel_tower_check(
    t: &FiniteOperator,
    n_max: usize,
    tol: &ToleranceConfig,
) -> Vec<(usize, f64)> {
    let ker = linalg::kernel(&t.matrix().adjoint(), tol);
    let mut out = Vec::with_capacity(n_max);
    if ker.dim() == 0 {
        for n in 1..=n_max {
            out.push((n, 0.0));
        }
        return out;
    }
    for n in 1..=n_max {
        let reached = mat_pow(t.matrix(), n - 1) * ker.frame();
        let residual = spectral_norm(&(mat_pow(t.matrix(), n).adjoint() * reached));
        out.push((n, residual));
    }
    out
}

/// Residual of the Gramian recurrence
/// `(T^k)* T^k = (-1)^{m+1} sum_{p=0}^{m-1} (-1)^p C(m,p) (T^{k-m+p})* T^{k-m+p}`
/// on truncation-safe support; small for m-isometric `T` and `k >= m`.
pub fn gramian_recurrence_check(
    t: &FiniteOperator,
    m: usize,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<f64> {
    if m == 0 || k < m {
        return Err(MisoError::InvalidArgument(format!(
            "need k >= m >= 1, got m = {m}, k = {k}"
        )));
    }
    let bound = t.default_support_bound(k)?;
    let n = t.dim();
    let master_sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let mut rhs = ComplexMatrix::zeros(n, n);
    for p in 0..m {
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        rhs += bracket(t, k - m + p).scale(master_sign * sign * binomial(m, p));
    }
    let residual = bracket(t, k) - rhs;
    let compressed = compress_to_support(t, &residual, bound);
    let _ = tol;
    Ok(spectral_norm(&compressed))
}

/// Expansivity `T*T >= I` on truncation-safe support: smallest eigenvalue of
/// the compressed `T*T - I` must clear `-tol_identity`.
pub fn is_expansive(t: &FiniteOperator, tol: &ToleranceConfig) -> Result<bool> {
    let bound = t.default_support_bound(1)?;
    let n = t.dim();
    let gap = bracket(t, 1) - ComplexMatrix::identity(n, n);
    let compressed = compress_to_support(t, &gap, bound);
    if compressed.nrows() == 0 {
        return Ok(true);
    }
    let eig = SymmetricEigen::new(hermitian_part(&compressed));
    Ok(eig.eigenvalues.min() >= -tol.tol_identity)
}

/// Strict m-isometry verdict with a x100 hysteresis band: the order-m defect
/// must vanish while the order-(m-1) defect stays clearly away from zero.
pub fn is_strict_m_isometry(t: &FiniteOperator, m: usize, tol: &ToleranceConfig) -> Result<bool> {
    if m < 2 {
        return Err(MisoError::InvalidArgument(
            "strictness is defined for m >= 2".into(),
        ));
    }
    let at_m = is_m_isometry(t, m, None, tol)?;
    let below = is_m_isometry(t, m - 1, None, tol)?;
    Ok(at_m.residual_norm <= tol.tol_identity && below.residual_norm >= 100.0 * tol.tol_identity)
}
