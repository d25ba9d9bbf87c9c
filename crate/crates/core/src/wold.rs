//! Wold-type decomposition machinery: stabilized range intersection and
//! analyticity, the wandering ladder with its orthogonality report, the
//! kernel-sum decomposition, and the unitarily-equivalent shift model with
//! intertwining verification.

use serde::Serialize;

use crate::error::{MisoError, Result};
use crate::linalg::{self, spectral_norm, ComplexMatrix, Subspace, ToleranceConfig};
use crate::miso::{kernel_condition, KernelConditionReport};
use crate::operators::{mat_pow, FiniteOperator};

/// Iterates `Rableft T(R)` from the full space until the dimension
/// stabilizes (guaranteed within `ambient_dim` steps) and returns the
/// stabilized subspace, the finite model of the infinite range
/// intersection.
pub fn range_infinity(t: &FiniteOperator, tol: &ToleranceConfig) -> Subspace {
    let mut current = Subspace::full(t.dim());
    loop {
        if current.dim() == 0 {
            return current;
        }
        let next = linalg::range(&(t.matrix() * current.frame()), tol);
        if next.dim() == current.dim() {
            return next;
        }
        current = next;
    }
}

/// Analytic means the stabilized range intersection is trivial.
pub fn is_analytic(t: &FiniteOperator, tol: &ToleranceConfig) -> bool {
    range_infinity(t, tol).dim() == 0
}

/// The ladder of wandering spaces `M_0 = Ker(T*)`, `M_{n+1} = T(M_n)`, with
/// pairwise orthogonality data and the dimension of the joint span.
#[derive(Debug, Clone)]
pub struct WanderingLadder {
    pub spaces: Vec<Subspace>,
    pub gram_offdiag: f64,
    pub span_dim: usize,
    pub analytic_residual: usize,
}

impl WanderingLadder {
    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(Subspace::dim).collect()
    }

    /// Concatenated frame of all ladder spaces (not orthonormalized).
    fn stacked_frames(&self) -> ComplexMatrix {
        stack_frames(self.spaces.iter().map(|s| s.frame()))
    }
}

fn stack_frames<'a>(frames: impl Iterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    let frames: Vec<_> = frames.collect();
    let rows = frames.first().map_or(0, |f| f.nrows());
    let cols = frames.iter().map(|f| f.ncols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut at = 0;
    for f in frames {
        out.view_mut((0, at), (rows, f.ncols())).copy_from(f);
        at += f.ncols();
    }
    out
}

/// Builds the wandering ladder up to `M_{n_max}` and records the worst
/// pairwise projector-product norm and the dimension of the joint span.
pub fn wandering_ladder(t: &FiniteOperator, n_max: usize, tol: &ToleranceConfig) -> WanderingLadder {
    let mut spaces = Vec::with_capacity(n_max + 1);
    spaces.push(linalg::kernel(&t.matrix().adjoint(), tol));
    for _ in 0..n_max {
        let last = spaces.last().expect("ladder nonempty");
        let next = if last.dim() == 0 {
            Subspace::zero(t.dim())
        } else {
            linalg::range(&(t.matrix() * last.frame()), tol)
        };
        spaces.push(next);
    }
    let mut gram_offdiag = 0.0f64;
    for i in 0..spaces.len() {
        for j in (i + 1)..spaces.len() {
            gram_offdiag = gram_offdiag.max(spaces[i].overlap_norm(&spaces[j]));
        }
    }
    let ladder = WanderingLadder {
        spaces,
        gram_offdiag,
        span_dim: 0,
        analytic_residual: range_infinity(t, tol).dim(),
    };
    let span_dim = linalg::range(&ladder.stacked_frames(), tol).dim();
    WanderingLadder { span_dim, ..ladder }
}

/// One level of the kernel-sum comparison `Ker(T*^n)` versus
/// `M_0 + ... + M_{n-1}`.
#[derive(Debug, Clone, Serialize)]
pub struct OrtSumLevel {
    pub n: usize,
    pub kernel_dim: usize,
    pub ladder_dim_sum: usize,
    pub residual: f64,
}

/// Compares the kernel of each adjoint power with the span of the first
/// ladder spaces: dimension equality and the mutual projection residual
/// `||P_ker - P_span||`.
pub fn ort_sum_check(t: &FiniteOperator, n_max: usize, tol: &ToleranceConfig) -> Vec<OrtSumLevel> {
    let ladder = wandering_ladder(t, n_max.saturating_sub(1), tol);
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let ker = linalg::kernel(&mat_pow(t.matrix(), n).adjoint(), tol);
        let span = linalg::range(
            &stack_frames(ladder.spaces[..n].iter().map(|s| s.frame())),
            tol,
        );
        out.push(OrtSumLevel {
            n,
            kernel_dim: ker.dim(),
            ladder_dim_sum: ladder.spaces[..n].iter().map(Subspace::dim).sum(),
            residual: ker.projection_distance(&span),
        });
    }
    out
}

/// Summary of the ladder used inside [`WoldReport`].
#[derive(Debug, Clone, Serialize)]
pub struct LadderSummary {
    pub dims: Vec<usize>,
    pub gram_offdiag: f64,
    pub span_dim: usize,
    pub span_residual: f64,
}

/// Two-sided evaluation of the decomposition criterion: the kernel-condition
/// side and the geometric side (orthogonal ladder, full span over the safe
/// band, unitary behaviour on the stabilized range).
#[derive(Debug, Clone, Serialize)]
pub struct WoldReport {
    pub m: usize,
    pub n_max: usize,
    pub excluded_band: usize,
    pub kernel_condition: KernelConditionReport,
    pub ladder: LadderSummary,
    pub range_infinity_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary_part_residual: Option<f64>,
    pub side_kernel_condition: bool,
    pub side_wandering: bool,
    pub agree: bool,
}

/// Evaluates both sides of the decomposition criterion independently on the
/// truncation-safe band and reports their agreement. Disagreement beyond
/// tolerance is a diagnostic, not an error: truncation can break one side
/// earlier than the other.
pub fn admits_wold(
    t: &FiniteOperator,
    m: usize,
    n_max: Option<usize>,
    tol: &ToleranceConfig,
) -> Result<WoldReport> {
    if m < 2 {
        return Err(MisoError::InvalidArgument(
            "the decomposition criterion needs m >= 2".into(),
        ));
    }
    let n_max = match n_max {
        Some(n) => n,
        None => t.default_support_bound(m)?,
    };
    let kernel_report = kernel_condition(t, m - 1, tol);
    let side_kernel = kernel_report.verdict;

    let ladder = wandering_ladder(t, n_max, tol);
    let range_inf = range_infinity(t, tol);

    // span fullness is tested against the sites the ladder can reach, with
    // the top band excluded
    let span_bound = if t.is_truncated() {
        n_max.min(t.max_site().saturating_sub(m))
    } else {
        t.max_site()
    };
    let mut all_frames: Vec<&ComplexMatrix> =
        ladder.spaces.iter().map(|s| s.frame()).collect();
    let rf = range_inf.frame().clone();
    if range_inf.dim() > 0 {
        all_frames.push(&rf);
    }
    let union = linalg::range(&stack_frames(all_frames.into_iter()), tol);
    let span_residual = union.residual_outside(&t.support_frame(span_bound));

    let unitary_part_residual = if range_inf.dim() > 0 {
        let f = range_inf.frame();
        let tf = t.matrix() * f;
        let taf = t.matrix().adjoint() * f;
        let reduce = range_inf
            .residual_outside(&tf)
            .max(range_inf.residual_outside(&taf));
        let compressed = f.adjoint() * &tf;
        let eye = ComplexMatrix::identity(compressed.nrows(), compressed.ncols());
        let unitary = spectral_norm(&(compressed.adjoint() * &compressed - &eye))
            .max(spectral_norm(&(&compressed * compressed.adjoint() - &eye)));
        Some(reduce.max(unitary))
    } else {
        None
    };

    let orth_ok = ladder.gram_offdiag <= tol.tol_identity;
    let span_ok = span_residual <= tol.tol_identity;
    let unitary_ok = unitary_part_residual.is_none_or(|r| r <= tol.tol_identity);
    let side_wandering = orth_ok && span_ok && unitary_ok;

    Ok(WoldReport {
        m,
        n_max,
        excluded_band: m + n_max,
        kernel_condition: kernel_report,
        ladder: LadderSummary {
            dims: ladder.dims(),
            gram_offdiag: ladder.gram_offdiag,
            span_dim: ladder.span_dim,
            span_residual,
        },
        range_infinity_dim: range_inf.dim(),
        unitary_part_residual,
        side_kernel_condition: side_kernel,
        side_wandering,
        agree: side_kernel == side_wandering,
    })
}

/// Unitarily equivalent weighted-shift model of an analytic operator with
/// orthogonal wandering ladder: deterministic frames from canonical QR of
/// `T` applied to the previous frame, weights read between consecutive
/// frames, and the intertwining defect of the full diagonal unitary.
#[derive(Debug, Clone)]
pub struct ShiftModel {
    /// Orthonormal frames of the ladder spaces; frame `n` spans `M_n`.
    pub frames: Vec<ComplexMatrix>,
    /// Weights `S_n = F_{n+1}* T F_n` in the coordinates of `M_0`.
    pub weights: Vec<ComplexMatrix>,
    pub intertwine_residual: f64,
}

impl ShiftModel {
    pub fn fiber_dim(&self) -> usize {
        self.frames.first().map_or(0, |f| f.ncols())
    }

    pub fn to_shift_spec(&self) -> Result<crate::operators::ShiftSpec> {
        crate::operators::ShiftSpec::new(
            self.fiber_dim(),
            self.weights.len() + 1,
            self.weights.clone(),
        )
    }
}

/// Builds the shift model of Theorem-4.5 type. Fails with the violated
/// clause when the operator is not analytic, the ladder is not orthogonal,
/// the span is not full on the safe band, or the ladder degenerates.
pub fn shift_model(t: &FiniteOperator, n_max: usize, tol: &ToleranceConfig) -> Result<ShiftModel> {
    if n_max == 0 {
        return Err(MisoError::InvalidArgument("n_max must be at least 1".into()));
    }
    if t.is_truncated() && n_max > t.max_site().saturating_sub(1) {
        return Err(MisoError::SupportOverflow {
            support_bound: n_max,
            power: 1,
            limit: t.max_site(),
        });
    }
    let range_inf_dim = range_infinity(t, tol).dim();
    if range_inf_dim > 0 {
        return Err(MisoError::NotShiftEquivalent {
            clause: format!(
                "operator is not analytic (stabilized range has dimension {range_inf_dim})"
            ),
        });
    }
    let kernel = linalg::kernel(&t.matrix().adjoint(), tol);
    let fiber = kernel.dim();
    if fiber == 0 {
        return Err(MisoError::NotShiftEquivalent {
            clause: "Ker(T*) is trivial".into(),
        });
    }
    let mut frames: Vec<ComplexMatrix> = vec![kernel.frame().clone()];
    let mut weights = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let image = t.matrix() * &frames[n];
        let (q, r) = linalg::thin_qr_canonical(&image);
        let diag_min = (0..fiber).map(|k| r[(k, k)].norm()).fold(f64::INFINITY, f64::min);
        let diag_max = (0..fiber).map(|k| r[(k, k)].norm()).fold(0.0f64, f64::max);
        if diag_max == 0.0 || diag_min <= tol.tol_rank * diag_max {
            return Err(MisoError::NotShiftEquivalent {
                clause: format!("T is not injective on ladder space {n}"),
            });
        }
        weights.push(r);
        frames.push(q);
    }

    // orthogonality clause
    let mut gram_offdiag = 0.0f64;
    for i in 0..frames.len() {
        for j in (i + 1)..frames.len() {
            gram_offdiag = gram_offdiag.max(spectral_norm(&(frames[i].adjoint() * &frames[j])));
        }
    }
    if gram_offdiag > 10.0 * tol.tol_identity {
        return Err(MisoError::NotShiftEquivalent {
            clause: format!("ladder spaces are not pairwise orthogonal (gram_offdiag = {gram_offdiag:.3e})"),
        });
    }
    // span clause over the sites reachable by the ladder
    let span_bound = if t.is_truncated() {
        n_max.min(t.max_site().saturating_sub(1))
    } else {
        t.max_site()
    };
    let union = linalg::range(&stack_frames(frames.iter()), tol);
    let span_residual = union.residual_outside(&t.support_frame(span_bound));
    if span_residual > 10.0 * tol.tol_identity {
        return Err(MisoError::NotShiftEquivalent {
            clause: format!(
                "wandering spaces do not span the safe band (residual = {span_residual:.3e})"
            ),
        });
    }

    // intertwining defect of V T - S V on the ladder interior
    let ambient = t.dim();
    let rows = (n_max + 1) * fiber;
    let mut defect = ComplexMatrix::zeros(rows, ambient);
    defect
        .view_mut((0, 0), (fiber, ambient))
        .copy_from(&(frames[0].adjoint() * t.matrix()));
    for n in 0..n_max {
        let row = frames[n + 1].adjoint() * t.matrix() - &weights[n] * frames[n].adjoint();
        defect
            .view_mut(((n + 1) * fiber, 0), (fiber, ambient))
            .copy_from(&row);
    }
    let interior = stack_frames(frames[..n_max].iter());
    let intertwine_residual = spectral_norm(&(&defect * &interior));

    Ok(ShiftModel {
        frames,
        weights,
        intertwine_residual,
    })
}
