//! Finite-truncation operator models: operator-valued weighted shifts,
//! restrictions, unitary conjugation, direct sums and the power Gramian
//! `T*^k T^k`.
//!
//! Truncation semantics: the forward image of the last site is dropped, so
//! every assembled truncation is nilpotent. Identities involving at most `p`
//! forward applications are free of truncation error on sites
//! `0..=max_site - p`; the checking operations take their support bound from
//! the caller and default to exactly that.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MisoError, Result};
use crate::linalg::{c64, spectral_norm, ComplexMatrix, Subspace, ToleranceConfig};

/// Unilateral operator-valued weighted shift on `N` sites with fiber
/// dimension `d`: weights `S_0, ..., S_{N-2}`, each an invertible `d x d`
/// matrix, acting by `e_n(f) -> e_{n+1}(S_n f)`.
#[derive(Debug, Clone)]
pub struct ShiftSpec {
    pub fiber_dim: usize,
    pub n_sites: usize,
    pub weights: Vec<ComplexMatrix>,
    pub uniform_bounds: Option<(f64, f64)>,
}

impl ShiftSpec {
    pub fn new(fiber_dim: usize, n_sites: usize, weights: Vec<ComplexMatrix>) -> Result<Self> {
        let spec = Self {
            fiber_dim,
            n_sites,
            weights,
            uniform_bounds: None,
        };
        spec.validate_shape()?;
        Ok(spec)
    }

    /// Scalar shift (`d = 1`) with weight `w(n)` feeding site `n + 1`.
    pub fn scalar(n_sites: usize, weight: impl Fn(usize) -> f64) -> Result<Self> {
        let weights = (0..n_sites.saturating_sub(1))
            .map(|n| ComplexMatrix::from_element(1, 1, c64(weight(n), 0.0)))
            .collect();
        Self::new(1, n_sites, weights)
    }

    /// Scalar shift with weights `sqrt(s(n+1)/s(n))` for a positive
    /// sequence `s`; the squared weight products telescope to `s(n)/s(0)`.
    pub fn scalar_ratios(n_sites: usize, s: impl Fn(usize) -> f64) -> Result<Self> {
        Self::scalar(n_sites, |n| (s(n + 1) / s(n)).sqrt())
    }

    /// Structural checks that need no tolerance: counts and finiteness.
    pub fn validate_shape(&self) -> Result<()> {
        if self.fiber_dim == 0 || self.n_sites < 2 {
            return Err(MisoError::InvalidArgument(
                "shift needs fiber dimension >= 1 and at least 2 sites".into(),
            ));
        }
        if self.weights.len() != self.n_sites - 1 {
            return Err(MisoError::InvalidArgument(format!(
                "expected {} weights for {} sites, got {}",
                self.n_sites - 1,
                self.n_sites,
                self.weights.len()
            )));
        }
        for (i, w) in self.weights.iter().enumerate() {
            if w.nrows() != self.fiber_dim || w.ncols() != self.fiber_dim {
                return Err(MisoError::DimensionMismatch(format!(
                    "weight {i} is {}x{}, expected {}x{}",
                    w.nrows(),
                    w.ncols(),
                    self.fiber_dim,
                    self.fiber_dim
                )));
            }
            if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(MisoError::InvalidArgument(format!(
                    "weight {i} has non-finite entries"
                )));
            }
        }
        Ok(())
    }

    /// Full validation: shape, invertibility of every weight at the
    /// `tol_rank` cutoff, and the stored uniform bounds when present.
    pub fn validate(&self, tol: &ToleranceConfig) -> Result<()> {
        self.validate_shape()?;
        for (index, w) in self.weights.iter().enumerate() {
            let sv = w.clone().svd(false, false).singular_values;
            let smax = sv.max();
            let smin = sv.min();
            if smax == 0.0 || smin <= tol.tol_rank * smax {
                return Err(MisoError::NonInvertibleWeight {
                    index,
                    ratio: if smax == 0.0 { 0.0 } else { smin / smax },
                });
            }
            if let Some((c, m)) = self.uniform_bounds {
                if smin < c - 1e-12 || smax > m + 1e-12 {
                    return Err(MisoError::InvalidArgument(format!(
                        "weight {index} violates the uniform bounds: sigma range [{smin:.6e}, {smax:.6e}] vs [{c:.6e}, {m:.6e}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Where a finite operator model came from; determines how its truncation
/// boundary is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "shift-truncation")]
    ShiftTruncation,
    #[serde(rename = "composition-truncation")]
    CompositionTruncation,
    #[serde(rename = "explicit")]
    Explicit,
}

/// Square matrix model of an operator on a finite truncation, together with
/// the bookkeeping needed for truncation-safe assertions: each basis index
/// is assigned a site, and `truncated` records whether the top sites lose
/// their forward image.
#[derive(Debug, Clone)]
pub struct FiniteOperator {
    matrix: ComplexMatrix,
    provenance: Provenance,
    sites: Vec<usize>,
    truncated: bool,
}

impl FiniteOperator {
    /// Wraps a plain square matrix with no truncation boundary: every
    /// identity is asserted on the full space.
    pub fn explicit(matrix: ComplexMatrix) -> Result<Self> {
        let n = check_square(&matrix)?;
        Ok(Self {
            matrix,
            provenance: Provenance::Explicit,
            sites: (0..n).collect(),
            truncated: false,
        })
    }

    /// Wraps a hand-built truncation of an infinite model; `sites` assigns a
    /// site index to every basis vector.
    pub fn explicit_truncation(matrix: ComplexMatrix, sites: Vec<usize>) -> Result<Self> {
        let n = check_square(&matrix)?;
        if sites.len() != n {
            return Err(MisoError::DimensionMismatch(format!(
                "sites vector has length {}, matrix dimension is {n}",
                sites.len()
            )));
        }
        Ok(Self {
            matrix,
            provenance: Provenance::Explicit,
            sites,
            truncated: true,
        })
    }

    pub(crate) fn from_parts(
        matrix: ComplexMatrix,
        provenance: Provenance,
        sites: Vec<usize>,
        truncated: bool,
    ) -> Self {
        Self {
            matrix,
            provenance,
            sites,
            truncated,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn max_site(&self) -> usize {
        self.sites.iter().copied().max().unwrap_or(0)
    }

    /// Largest site on which single-application identities are
    /// truncation-free.
    pub fn exact_support(&self) -> usize {
        if self.truncated {
            self.max_site().saturating_sub(1)
        } else {
            self.max_site()
        }
    }

    /// Default support bound for an identity using up to `power` forward
    /// applications.
    pub fn default_support_bound(&self, power: usize) -> Result<usize> {
        if !self.truncated {
            return Ok(self.max_site());
        }
        let limit = self.max_site();
        if power > limit {
            return Err(MisoError::SupportOverflow {
                support_bound: 0,
                power,
                limit,
            });
        }
        Ok(limit - power)
    }

    pub(crate) fn check_support(&self, support_bound: usize, power: usize) -> Result<()> {
        if self.truncated && support_bound + power > self.max_site() {
            return Err(MisoError::SupportOverflow {
                support_bound,
                power,
                limit: self.max_site(),
            });
        }
        Ok(())
    }

    /// Basis indices living on sites `0..=support_bound`.
    pub fn support_indices(&self, support_bound: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.sites[i] <= support_bound)
            .collect()
    }

    /// Selection frame (isometry) onto the sites `0..=support_bound`.
    pub fn support_frame(&self, support_bound: usize) -> ComplexMatrix {
        let idx = self.support_indices(support_bound);
        let mut f = ComplexMatrix::zeros(self.dim(), idx.len());
        for (k, &i) in idx.iter().enumerate() {
            f[(i, k)] = c64(1.0, 0.0);
        }
        f
    }
}

fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(MisoError::DimensionMismatch(format!(
            "operator matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(MisoError::InvalidArgument(
            "operator entries must be finite".into(),
        ));
    }
    Ok(m.nrows())
}

/// Hermitian compression of `x` to the sites `0..=support_bound` of `op`.
pub fn compress_to_support(op: &FiniteOperator, x: &ComplexMatrix, support_bound: usize) -> ComplexMatrix {
    let idx = op.support_indices(support_bound);
    let mut out = ComplexMatrix::zeros(idx.len(), idx.len());
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            out[(a, b)] = x[(i, j)];
        }
    }
    out
}

/// Assembles the `(N d) x (N d)` truncation of the weighted shift: block
/// `(n+1, n)` holds `S_n`, the forward image of the last site is dropped.
pub fn assemble_shift(spec: &ShiftSpec, tol: &ToleranceConfig) -> Result<FiniteOperator> {
    spec.validate(tol)?;
    let d = spec.fiber_dim;
    let n = spec.n_sites;
    let dim = n * d;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (s, w) in spec.weights.iter().enumerate() {
        m.view_mut(((s + 1) * d, s * d), (d, d)).copy_from(w);
    }
    let sites = (0..n).flat_map(|s| std::iter::repeat(s).take(d)).collect();
    Ok(FiniteOperator::from_parts(
        m,
        Provenance::ShiftTruncation,
        sites,
        true,
    ))
}

/// `k`-th matrix power by repeated multiplication; `k = 0` gives the
/// identity.
pub fn mat_pow(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let n = m.nrows();
    let mut acc = ComplexMatrix::identity(n, n);
    for _ in 0..k {
        acc = &acc * m;
    }
    acc
}

/// The power Gramian `(T^k)* T^k`; Hermitian positive semidefinite, identity
/// for `k = 0`.
pub fn bracket(t: &FiniteOperator, k: usize) -> ComplexMatrix {
    let p = mat_pow(t.matrix(), k);
    p.adjoint() * &p
}

/// Compression `F* T F` of `t` to a reducing subspace, which equals the
/// restriction when the subspace is invariant under both `T` and `T*`.
pub fn restrict(t: &FiniteOperator, m: &Subspace, tol: &ToleranceConfig) -> Result<FiniteOperator> {
    if m.ambient_dim() != t.dim() {
        return Err(MisoError::DimensionMismatch(format!(
            "subspace lives in dimension {}, operator in {}",
            m.ambient_dim(),
            t.dim()
        )));
    }
    let f = m.frame();
    let tf = t.matrix() * f;
    let taf = t.matrix().adjoint() * f;
    let leak = m.residual_outside(&tf).max(m.residual_outside(&taf));
    let scale = spectral_norm(t.matrix()).max(1.0);
    if leak > tol.tol_identity * scale {
        return Err(MisoError::NotReducing { residual: leak });
    }
    let compressed = f.adjoint() * &tf;
    let r = compressed.nrows();
    Ok(FiniteOperator::from_parts(
        compressed,
        Provenance::Explicit,
        (0..r).collect(),
        t.truncated,
    ))
}

/// Unitary conjugation `U T U*`.
pub fn conjugate(t: &FiniteOperator, u: &ComplexMatrix, tol: &ToleranceConfig) -> Result<FiniteOperator> {
    if u.nrows() != t.dim() || u.ncols() != t.dim() {
        return Err(MisoError::DimensionMismatch(format!(
            "conjugating matrix is {}x{}, operator dimension is {}",
            u.nrows(),
            u.ncols(),
            t.dim()
        )));
    }
    let residual = spectral_norm(&(u.adjoint() * u - ComplexMatrix::identity(t.dim(), t.dim())));
    if residual > tol.tol_identity {
        return Err(MisoError::NotUnitary { residual });
    }
    // Conjugation scrambles the site structure; keep only the truncation
    // flag and fall back to a linear site labelling.
    let n = t.dim();
    Ok(FiniteOperator::from_parts(
        u * t.matrix() * u.adjoint(),
        Provenance::Explicit,
        (0..n).collect(),
        t.truncated,
    ))
}

/// Block-diagonal direct sum; site labels of both summands are kept so that
/// safe-support bounds trim both blocks consistently.
pub fn direct_sum(a: &FiniteOperator, b: &FiniteOperator) -> FiniteOperator {
    let (na, nb) = (a.dim(), b.dim());
    let mut m = ComplexMatrix::zeros(na + nb, na + nb);
    m.view_mut((0, 0), (na, na)).copy_from(a.matrix());
    m.view_mut((na, na), (nb, nb)).copy_from(b.matrix());
    let mut sites = a.sites.clone();
    sites.extend_from_slice(&b.sites);
    FiniteOperator::from_parts(
        m,
        Provenance::Explicit,
        sites,
        a.truncated || b.truncated,
    )
}

/// Reads a complex entry; test and construction helper.
pub fn entry(m: &ComplexMatrix, i: usize, j: usize) -> Complex64 {
    m[(i, j)]
}
