//! Dense complex linear algebra substrate: adjoints, numerically
//! rank-revealing kernels and ranges, subspace algebra and joint
//! diagonalization of commuting Hermitian matrices.
//!
//! Everything here works on [`ComplexMatrix`] (a dense `f64`-complex matrix)
//! and reports residuals in the spectral norm (largest singular value).
//! The adjoint of a matrix is nalgebra's `.adjoint()`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MisoError, Result};

/// Dense complex matrix, the universal operator representation on finite
/// truncations.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Shorthand complex constructor.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Numerical cutoffs shared by every rank-revealing and residual check.
///
/// `tol_rank` is relative to the largest singular value; `tol_orth` bounds
/// frame orthonormality defects; `tol_identity` bounds operator-identity
/// residuals (spectral norm).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub tol_rank: f64,
    pub tol_orth: f64,
    pub tol_identity: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            tol_rank: 1e-10,
            tol_orth: 1e-8,
            tol_identity: 1e-9,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_rank", self.tol_rank),
            ("tol_orth", self.tol_orth),
            ("tol_identity", self.tol_identity),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(MisoError::InvalidArgument(format!(
                    "{name} must lie strictly between 0 and 1, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Spectral norm (largest singular value); zero for empty matrices.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Hermitian average `(M + M*)/2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Closed subspace of the ambient space, stored as an orthonormal frame
/// (a matrix whose columns form an orthonormal basis of the subspace).
#[derive(Debug, Clone)]
pub struct Subspace {
    frame: ComplexMatrix,
}

impl Subspace {
    /// Zero-dimensional subspace of an `ambient_dim`-dimensional space.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            frame: ComplexMatrix::zeros(ambient_dim, 0),
        }
    }

    /// The whole ambient space.
    pub fn full(ambient_dim: usize) -> Self {
        Self {
            frame: ComplexMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Wraps a caller-supplied frame after checking column orthonormality
    /// against `tol_orth`.
    pub fn from_frame(frame: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        if frame.ncols() > frame.nrows() {
            return Err(MisoError::DimensionMismatch(format!(
                "frame has {} columns but ambient dimension {}",
                frame.ncols(),
                frame.nrows()
            )));
        }
        if frame.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MisoError::InvalidArgument(
                "frame entries must be finite".into(),
            ));
        }
        let gram = frame.adjoint() * &frame;
        let defect = spectral_norm(&(gram - ComplexMatrix::identity(frame.ncols(), frame.ncols())));
        if defect > tol.tol_orth {
            return Err(MisoError::InvalidArgument(format!(
                "frame columns are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Self { frame })
    }

    /// Wraps a frame that is orthonormal by construction.
    pub(crate) fn from_orthonormal(frame: ComplexMatrix) -> Self {
        Self { frame }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    /// Orthogonal projection `frame * frame*` onto the subspace.
    pub fn projection(&self) -> ComplexMatrix {
        &self.frame * self.frame.adjoint()
    }

    /// `||P_self P_other||`, i.e. the cosine of the smallest principal angle.
    pub fn overlap_norm(&self, other: &Subspace) -> f64 {
        if self.dim() == 0 || other.dim() == 0 {
            return 0.0;
        }
        spectral_norm(&(self.frame.adjoint() * other.frame()))
    }

    /// `||P_self - P_other||` in the spectral norm; zero iff the spans agree.
    pub fn projection_distance(&self, other: &Subspace) -> f64 {
        spectral_norm(&(self.projection() - other.projection()))
    }

    /// Spectral norm of `(I - P_self) cols`: how far the given columns stick
    /// out of the subspace.
    pub fn residual_outside(&self, cols: &ComplexMatrix) -> f64 {
        if cols.ncols() == 0 {
            return 0.0;
        }
        let projected = &self.frame * (self.frame.adjoint() * cols);
        spectral_norm(&(cols - projected))
    }
}

/// One-sided Jacobi singular value decomposition `M = U diag(sigma) V*`,
/// singular values descending. Slower than bidiagonalization but computes
/// small singular values and their vectors to high relative accuracy, which
/// the rank-revealing cutoffs here depend on.
#[derive(Debug, Clone)]
pub struct JacobiSvd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn jacobi_svd(m: &ComplexMatrix) -> JacobiSvd {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(cols, cols);
    let eps = 1e-14f64;
    // columns whose mass sits this far below the matrix scale are numerical
    // zeros; rotating among them only spins noise into V
    let floor = 1e-30 * a.iter().map(|z| z.norm_sqr()).sum::<f64>();
    for _sweep in 0..40 {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let mut aa = 0.0f64;
                let mut bb = 0.0f64;
                let mut cc = c64(0.0, 0.0);
                for k in 0..rows {
                    let x = a[(k, i)];
                    let y = a[(k, j)];
                    aa += x.norm_sqr();
                    bb += y.norm_sqr();
                    cc += x.conj() * y;
                }
                if aa.max(bb) <= floor || cc.norm() <= eps * (aa * bb).sqrt() {
                    continue;
                }
                rotated = true;
                // phase-reduce the 2x2 Gram to a real symmetric rotation
                let phase = cc / cc.norm();
                let tau = (bb - aa) / (2.0 * cc.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                for k in 0..rows {
                    let x = a[(k, i)];
                    let y = a[(k, j)];
                    a[(k, i)] = x * c64(cs, 0.0) - y * phase.conj() * c64(sn, 0.0);
                    a[(k, j)] = x * phase * c64(sn, 0.0) + y * c64(cs, 0.0);
                }
                for k in 0..cols {
                    let x = v[(k, i)];
                    let y = v[(k, j)];
                    v[(k, i)] = x * c64(cs, 0.0) - y * phase.conj() * c64(sn, 0.0);
                    v[(k, j)] = x * phase * c64(sn, 0.0) + y * c64(cs, 0.0);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = ComplexMatrix::zeros(rows, cols);
    let mut vs = ComplexMatrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (slot, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            for k in 0..rows {
                u[(k, slot)] = a[(k, src)] / c64(s, 0.0);
            }
        }
        for k in 0..cols {
            vs[(k, slot)] = v[(k, src)];
        }
    }
    JacobiSvd { u, sigma, v: vs }
}

fn null_space_frame(m: &ComplexMatrix, cut_of_smax: impl Fn(f64) -> f64) -> Subspace {
    let cols = m.ncols();
    if cols == 0 {
        return Subspace::zero(0);
    }
    let svd = jacobi_svd(m);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let cut = cut_of_smax(smax);
    let keep: Vec<usize> = (0..cols).filter(|&i| svd.sigma[i] <= cut).collect();
    let mut frame = ComplexMatrix::zeros(cols, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        frame.set_column(k, &svd.v.column(i));
    }
    Subspace::from_orthonormal(frame)
}

/// Numerical null space of `m` at the relative cutoff `tol_rank * sigma_max`.
///
/// Full-rank input yields the zero-dimensional subspace; the zero matrix
/// yields the whole domain.
pub fn kernel(m: &ComplexMatrix, tol: &ToleranceConfig) -> Subspace {
    null_space_frame(m, |smax| tol.tol_rank * smax)
}

/// Numerical column space of `m` at the rank determined by `tol_rank`.
pub fn range(m: &ComplexMatrix, tol: &ToleranceConfig) -> Subspace {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Subspace::zero(rows);
    }
    let svd = jacobi_svd(m);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let cut = tol.tol_rank * smax;
    let keep: Vec<usize> = (0..cols).filter(|&i| svd.sigma[i] > cut).collect();
    let mut frame = ComplexMatrix::zeros(rows, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        frame.set_column(k, &svd.u.column(i));
    }
    Subspace::from_orthonormal(frame)
}

/// Intersection of two subspaces, computed as the null space of the stacked
/// projector complements `[(I - P_A); (I - P_B)]`.
pub fn subspace_intersection(a: &Subspace, b: &Subspace, tol: &ToleranceConfig) -> Result<Subspace> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(MisoError::DimensionMismatch(format!(
            "ambient dimensions differ: {} vs {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    let n = a.ambient_dim();
    let eye = ComplexMatrix::identity(n, n);
    let top = &eye - a.projection();
    let bottom = &eye - b.projection();
    let mut stacked = ComplexMatrix::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(&top);
    stacked.view_mut((n, 0), (n, n)).copy_from(&bottom);
    // The stack has natural scale <= sqrt(2); keep the cutoff anchored at 1
    // so that a near-zero stack (A and B both almost full) still resolves.
    Ok(null_space_frame(&stacked, |smax| {
        tol.tol_rank * smax.max(1.0)
    }))
}

/// `frame * frame*`, the orthogonal projection onto the subspace.
pub fn orthogonal_projection(s: &Subspace) -> ComplexMatrix {
    s.projection()
}

/// Common eigenbasis of a commuting Hermitian family together with the
/// spectrum of every input read in that basis: `spectra[j][x]` is the
/// eigenvalue of matrix `j` at common eigenvector `x`.
#[derive(Debug, Clone)]
pub struct JointDiagonalization {
    pub basis: ComplexMatrix,
    pub spectra: Vec<Vec<f64>>,
}

/// Joint diagonalization with a fixed default seed; see
/// [`joint_diagonalize_seeded`].
pub fn joint_diagonalize(
    mats: &[ComplexMatrix],
    tol: &ToleranceConfig,
) -> Result<JointDiagonalization> {
    joint_diagonalize_seeded(mats, tol, 0x6d69736f)
}

/// Jointly diagonalizes commuting Hermitian matrices.
///
/// Eigendecomposes a random real-coefficient linear combination of the
/// inputs and verifies that every input is diagonal in the resulting basis;
/// retries with a fresh combination up to 3 times (eigenvalue collisions of
/// the combination are measure-zero in the coefficients).
pub fn joint_diagonalize_seeded(
    mats: &[ComplexMatrix],
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<JointDiagonalization> {
    if mats.is_empty() {
        return Err(MisoError::InvalidArgument(
            "joint diagonalization needs at least one matrix".into(),
        ));
    }
    let n = mats[0].nrows();
    for (index, a) in mats.iter().enumerate() {
        if a.nrows() != n || a.ncols() != n {
            return Err(MisoError::DimensionMismatch(format!(
                "matrix {} is {}x{}, expected {}x{}",
                index,
                a.nrows(),
                a.ncols(),
                n,
                n
            )));
        }
        let residual = spectral_norm(&(a - a.adjoint()));
        if residual > tol.tol_identity {
            return Err(MisoError::NonHermitian { index, residual });
        }
    }
    for i in 0..mats.len() {
        for j in (i + 1)..mats.len() {
            let norm = spectral_norm(&(&mats[i] * &mats[j] - &mats[j] * &mats[i]));
            if norm > tol.tol_identity {
                return Err(MisoError::NonCommuting { i, j, norm });
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_residual = f64::INFINITY;
    for _attempt in 0..3 {
        let mut combo = ComplexMatrix::zeros(n, n);
        for a in mats {
            let coeff = rng.gen_range(0.25..1.0);
            combo += hermitian_part(a).scale(coeff);
        }
        let eig = SymmetricEigen::new(combo);
        let basis = eig.eigenvectors;
        let mut max_off = 0.0f64;
        let mut spectra = Vec::with_capacity(mats.len());
        for a in mats {
            let d = basis.adjoint() * a * &basis;
            let mut off = d.clone();
            for x in 0..n {
                off[(x, x)] = c64(0.0, 0.0);
            }
            max_off = max_off.max(spectral_norm(&off));
            spectra.push((0..n).map(|x| d[(x, x)].re).collect());
        }
        if max_off <= tol.tol_identity {
            return Ok(JointDiagonalization { basis, spectra });
        }
        best_residual = best_residual.min(max_off);
    }
    Err(MisoError::JointDiagonalizationFailed {
        attempts: 3,
        residual: best_residual,
    })
}

/// Thin QR with the diagonal of `R` rotated to be real and nonnegative,
/// which makes the factorization deterministic and canonical.
pub fn thin_qr_canonical(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for k in 0..r.nrows().min(r.ncols()) {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let conj = phase.conj();
            for i in 0..q.nrows() {
                q[(i, k)] *= phase;
            }
            for j in 0..r.ncols() {
                r[(k, j)] *= conj;
            }
        }
    }
    (q, r)
}

/// Haar-ish random unitary: QR of a Ginibre sample with the diagonal phase
/// convention of [`thin_qr_canonical`].
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = random_matrix(n, n, rng);
    let (q, _) = thin_qr_canonical(&g);
    q
}

/// Random complex matrix with entries uniform in the unit square around 0.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn basis_vector(n: usize, i: usize) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(n, 1);
        v[(i, 0)] = c64(1.0, 0.0);
        v
    }

    fn span(cols: &[ComplexMatrix]) -> Subspace {
        let n = cols[0].nrows();
        let mut frame = ComplexMatrix::zeros(n, cols.len());
        for (k, c) in cols.iter().enumerate() {
            frame.set_column(k, &c.column(0));
        }
        Subspace::from_frame(frame, &tol()).unwrap()
    }

    #[test]
    fn adjoint_examples() {
        // 1x1 conjugation
        let m = ComplexMatrix::from_row_slice(1, 1, &[c64(0.0, 1.0)]);
        assert_eq!(m.adjoint()[(0, 0)], c64(0.0, -1.0));
        // identity fixed
        let id = ComplexMatrix::identity(4, 4);
        assert_eq!(id.adjoint(), id);
        // transpose of a real nilpotent block
        let n = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        );
        let na = n.adjoint();
        assert_eq!(na[(1, 0)], c64(1.0, 0.0));
        assert_eq!(na[(0, 1)], c64(0.0, 0.0));
    }

    #[test]
    fn kernel_diagonal_and_invertible() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        );
        let k = kernel(&m, &tol());
        assert_eq!(k.dim(), 1);
        assert!(k.residual_outside(&basis_vector(2, 1)) < 1e-12);

        let inv = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                c64(2.0, 0.0),
                c64(1.0, 0.0),
                c64(0.0, 0.5),
                c64(0.0, 0.0),
                c64(1.0, 0.0),
                c64(3.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(1.0, -1.0),
            ],
        );
        assert_eq!(kernel(&inv, &tol()).dim(), 0);
    }

    #[test]
    fn kernel_of_truncated_shift_adjoint() {
        // Unweighted shift on C^5: S e_n = e_{n+1}, last column truncated.
        let n = 5;
        let mut s = ComplexMatrix::zeros(n, n);
        for i in 0..n - 1 {
            s[(i + 1, i)] = c64(1.0, 0.0);
        }
        let k = kernel(&s.adjoint(), &tol());
        assert_eq!(k.dim(), 1);
        // SVD oracle: verify directly that S* annihilates the frame.
        assert!(spectral_norm(&(s.adjoint() * k.frame())) < 1e-12);
        assert!(k.residual_outside(&basis_vector(n, 0)) < 1e-12);
    }

    #[test]
    fn range_examples() {
        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(range(&z, &tol()).dim(), 0);
        let id = ComplexMatrix::identity(4, 4);
        assert_eq!(range(&id, &tol()).dim(), 4);

        // rank-1 outer product u v*
        let u = ComplexMatrix::from_row_slice(3, 1, &[c64(1.0, 0.0), c64(0.0, 2.0), c64(-1.0, 0.0)]);
        let v = ComplexMatrix::from_row_slice(2, 1, &[c64(1.0, 1.0), c64(0.0, -3.0)]);
        let m = &u * v.adjoint();
        let r = range(&m, &tol());
        assert_eq!(r.dim(), 1);
        let un = &u / c64(u.norm(), 0.0);
        assert!(r.residual_outside(&un) < 1e-12);
    }

    #[test]
    fn intersection_examples() {
        let e0 = basis_vector(3, 0);
        let e1 = basis_vector(3, 1);
        let e2 = basis_vector(3, 2);
        let a = span(&[e0.clone(), e1.clone()]);
        let b = span(&[e1.clone(), e2.clone()]);
        let meet = subspace_intersection(&a, &b, &tol()).unwrap();
        assert_eq!(meet.dim(), 1);
        // projector-product eigen oracle: P_A P_B has a unit eigenvalue
        // exactly on the common direction e1.
        assert!(meet.residual_outside(&e1) < 1e-12);

        let self_meet = subspace_intersection(&a, &a, &tol()).unwrap();
        assert!(self_meet.projection_distance(&a) < 1e-12);

        let disjoint = subspace_intersection(&span(&[e0]), &span(&[e1]), &tol()).unwrap();
        assert_eq!(disjoint.dim(), 0);

        let bad = subspace_intersection(&a, &Subspace::full(2), &tol());
        assert!(matches!(bad, Err(MisoError::DimensionMismatch(_))));
    }

    #[test]
    fn projection_examples() {
        let full = Subspace::full(3);
        assert!(spectral_norm(&(full.projection() - ComplexMatrix::identity(3, 3))) < 1e-14);
        let zero = Subspace::zero(3);
        assert!(spectral_norm(&zero.projection()) == 0.0);

        let mut f = ComplexMatrix::zeros(2, 1);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        f[(0, 0)] = c64(inv_sqrt2, 0.0);
        f[(1, 0)] = c64(inv_sqrt2, 0.0);
        let s = Subspace::from_frame(f, &tol()).unwrap();
        let p = s.projection();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - c64(0.5, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn joint_diagonalize_diagonal_inputs() {
        let a = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(1.0, 0.0),
            c64(2.0, 0.0),
        ]));
        let b = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(5.0, 0.0),
            c64(-1.0, 0.0),
        ]));
        let jd = joint_diagonalize(&[a.clone(), b.clone()], &tol()).unwrap();
        for (mat, spectrum) in [a, b].iter().zip(&jd.spectra) {
            let rec = &jd.basis
                * ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(
                    spectrum.iter().map(|&x| c64(x, 0.0)).collect(),
                ))
                * jd.basis.adjoint();
            assert!(spectral_norm(&(rec - mat)) < 1e-10);
        }
    }

    #[test]
    fn joint_diagonalize_single_hermitian() {
        // characteristic-polynomial oracle: eigenvalues of [[2,1],[1,2]]
        // solve x^2 - 4x + 3 = 0, i.e. {1, 3}.
        let a = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(2.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)],
        );
        let jd = joint_diagonalize(&[a], &tol()).unwrap();
        let mut evs = jd.spectra[0].clone();
        evs.sort_by(f64::total_cmp);
        assert!((evs[0] - 1.0).abs() < 1e-12);
        assert!((evs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn joint_diagonalize_matrix_and_square() {
        let a = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(2.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(2.0, 0.0)],
        );
        let a2 = &a * &a;
        let jd = joint_diagonalize(&[a.clone(), a2], &tol()).unwrap();
        for x in 0..2 {
            assert!((jd.spectra[1][x] - jd.spectra[0][x].powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn joint_diagonalize_rejects_bad_inputs() {
        let not_herm = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        );
        assert!(matches!(
            joint_diagonalize(&[not_herm], &tol()),
            Err(MisoError::NonHermitian { index: 0, .. })
        ));

        let a = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0)],
        );
        let b = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        );
        let err = joint_diagonalize(&[a, b], &tol());
        match err {
            Err(MisoError::NonCommuting { i: 0, j: 1, norm }) => assert!(norm > 0.1),
            other => panic!("expected NonCommuting, got {other:?}"),
        }
    }

    #[test]
    fn jacobi_svd_reconstructs_accurately() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for &(rows, cols) in &[(6usize, 6usize), (8, 3), (3, 7), (5, 5)] {
            let mut m = random_matrix(rows, cols, &mut rng);
            if rows == cols {
                // plant an exact rank deficiency
                let last = cols - 1;
                let first = m.column(0).clone_owned();
                m.set_column(last, &first);
            }
            let svd = jacobi_svd(&m);
            let mut s = ComplexMatrix::zeros(cols, cols);
            for (i, sv) in svd.sigma.iter().enumerate() {
                s[(i, i)] = c64(*sv, 0.0);
            }
            let rec = &svd.u * s * svd.v.adjoint();
            assert!(
                spectral_norm(&(rec - &m)) < 1e-13,
                "reconstruction failed for {rows}x{cols}"
            );
            let vtv = svd.v.adjoint() * &svd.v;
            assert!(spectral_norm(&(vtv - ComplexMatrix::identity(cols, cols))) < 1e-13);
            // descending order
            for w in svd.sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn rank_iteration_resolves_exact_zero_directions() {
        // iterated ranges of a nilpotent shift must walk all the way down to
        // dimension zero; an inaccurate frame stalls the descent
        let mut s = ComplexMatrix::zeros(6, 6);
        for i in 0..5 {
            s[(i + 1, i)] = c64(((i + 2) as f64 / (i + 1) as f64).sqrt(), 0.0);
        }
        let tol = tol();
        let mut cur = Subspace::full(6);
        let mut dims = vec![cur.dim()];
        loop {
            let next = range(&(&s * cur.frame()), &tol);
            dims.push(next.dim());
            if next.dim() == cur.dim() || next.dim() == 0 {
                break;
            }
            cur = next;
        }
        assert_eq!(dims, vec![6, 5, 4, 3, 2, 1, 0]);
    }

    #[test]
    fn canonical_qr_is_deterministic_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_matrix(5, 3, &mut rng);
        let (q1, r1) = thin_qr_canonical(&m);
        let (q2, r2) = thin_qr_canonical(&m);
        assert_eq!(q1, q2);
        assert_eq!(r1, r2);
        for k in 0..3 {
            assert!(r1[(k, k)].im.abs() < 1e-14);
            assert!(r1[(k, k)].re >= 0.0);
        }
        assert!(spectral_norm(&(&q1 * &r1 - m)) < 1e-12);
    }
}
