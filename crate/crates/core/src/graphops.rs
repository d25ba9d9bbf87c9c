//! Composition operators on one-circuit directed graphs: the backward graph
//! map, preimage sets, the Radon-Nikodym quotient `h`, kernel-condition and
//! m-isometry verdicts from the measure data, the explicit wandering-space
//! inner products of the one-branch linear model, and matrix truncations
//! for cross-validation.
//!
//! Kernel-condition verdicts are equality tests on `h`, so whenever the
//! measure data is rational they run in exact rational arithmetic; only the
//! matrix truncations use floating point.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;

use crate::error::{MisoError, Result};
use crate::linalg::{c64, ComplexMatrix, Subspace};
use crate::operators::{FiniteOperator, Provenance};

/// Point of the one-circuit graph: a circuit element `x_i` (`1 <= i <=
/// kappa`) or a branch element `x_{i,j}` (`1 <= i <= eta`, depth `j >= 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphPoint {
    Circuit(usize),
    Branch { branch: usize, depth: usize },
}

impl fmt::Display for GraphPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphPoint::Circuit(i) => write!(f, "x_{i}"),
            GraphPoint::Branch { branch, depth } => write!(f, "x_{{{branch},{depth}}}"),
        }
    }
}

/// Measure data along one branch: either polynomial in the depth
/// (coefficients constant-first, evaluated at `j = 1, 2, ...`) or an
/// explicit positive prefix for depths `1..=len`.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchMeasure {
    Polynomial(Vec<BigRational>),
    Values(Vec<BigRational>),
}

impl BranchMeasure {
    pub fn polynomial_f64(coeffs: &[f64]) -> Result<Self> {
        Ok(Self::Polynomial(rationals_from_f64(coeffs)?))
    }

    pub fn values_f64(values: &[f64]) -> Result<Self> {
        Ok(Self::Values(rationals_from_f64(values)?))
    }

    fn value_at(&self, depth: usize) -> Result<BigRational> {
        match self {
            BranchMeasure::Polynomial(coeffs) => Ok(eval_poly(coeffs, depth)),
            BranchMeasure::Values(values) => values.get(depth - 1).cloned().ok_or_else(|| {
                MisoError::InvalidArgument(format!(
                    "branch measure prefix has {} values, needed depth {depth}",
                    values.len()
                ))
            }),
        }
    }

    /// Deepest level with data; `None` means unbounded (polynomial rule).
    fn available_depth(&self) -> Option<usize> {
        match self {
            BranchMeasure::Polynomial(_) => None,
            BranchMeasure::Values(values) => Some(values.len()),
        }
    }
}

fn rationals_from_f64(values: &[f64]) -> Result<Vec<BigRational>> {
    values
        .iter()
        .map(|&v| {
            BigRational::from_f64(v).ok_or_else(|| {
                MisoError::InvalidArgument(format!("value {v} is not a finite number"))
            })
        })
        .collect()
}

fn eval_poly(coeffs: &[BigRational], at: usize) -> BigRational {
    let x = BigRational::from_integer(BigInt::from(at));
    let mut acc = BigRational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * &x + c;
    }
    acc
}

fn big_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact positivity of a rational polynomial on the positive integers:
/// trims exact-zero leading coefficients, requires a positive leading
/// coefficient and scans the integers up to the Cauchy root bound.
fn poly_positive_on_naturals(coeffs: &[BigRational]) -> Result<()> {
    let degree = match coeffs.iter().rposition(|c| !c.is_zero()) {
        None => {
            return Err(MisoError::InvalidArgument(
                "branch measure polynomial is identically zero".into(),
            ))
        }
        Some(d) => d,
    };
    let lead = &coeffs[degree];
    if degree == 0 {
        if lead.is_positive() {
            return Ok(());
        }
        return Err(MisoError::InvalidArgument(
            "constant branch measure must be positive".into(),
        ));
    }
    if !lead.is_positive() {
        return Err(MisoError::InvalidArgument(
            "branch measure polynomial has a nonpositive leading coefficient".into(),
        ));
    }
    let mut cauchy = BigRational::zero();
    for c in &coeffs[..degree] {
        let ratio = (c / lead).abs();
        if ratio > cauchy {
            cauchy = ratio;
        }
    }
    let bound = (cauchy + BigRational::one())
        .ceil()
        .to_integer()
        .to_usize()
        .unwrap_or(usize::MAX)
        .saturating_add(1);
    for j in 1..=bound {
        if !eval_poly(coeffs, j).is_positive() {
            return Err(MisoError::InvalidArgument(format!(
                "branch measure polynomial is nonpositive at depth {j}"
            )));
        }
    }
    Ok(())
}

/// One-circuit directed graph `(X, mu, phi)`: `kappa` circuit points with
/// explicit measures and `eta` branches with measure data per depth.
#[derive(Debug, Clone)]
pub struct OneCircuitGraph {
    circuit_measures: Vec<BigRational>,
    branches: Vec<BranchMeasure>,
}

impl OneCircuitGraph {
    pub fn new(circuit_measures: Vec<BigRational>, branches: Vec<BranchMeasure>) -> Result<Self> {
        if circuit_measures.is_empty() || branches.is_empty() {
            return Err(MisoError::InvalidArgument(
                "graph needs at least one circuit point and one branch".into(),
            ));
        }
        for (i, mu) in circuit_measures.iter().enumerate() {
            if !mu.is_positive() {
                return Err(MisoError::InvalidArgument(format!(
                    "circuit measure {} must be strictly positive",
                    i + 1
                )));
            }
        }
        for (i, b) in branches.iter().enumerate() {
            match b {
                BranchMeasure::Polynomial(coeffs) => poly_positive_on_naturals(coeffs)
                    .map_err(|e| {
                        MisoError::InvalidArgument(format!("branch {}: {e}", i + 1))
                    })?,
                BranchMeasure::Values(values) => {
                    if values.is_empty() {
                        return Err(MisoError::InvalidArgument(format!(
                            "branch {} has an empty measure prefix",
                            i + 1
                        )));
                    }
                    if values.iter().any(|v| !v.is_positive()) {
                        return Err(MisoError::InvalidArgument(format!(
                            "branch {} has a nonpositive measure value",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(Self {
            circuit_measures,
            branches,
        })
    }

    pub fn from_f64(circuit_measures: &[f64], branches: Vec<BranchMeasure>) -> Result<Self> {
        Self::new(rationals_from_f64(circuit_measures)?, branches)
    }

    /// The one-branch model with linear measure `w(j) = a j + b` on the
    /// branch and the kernel-condition-matched circuit measure
    /// `mu(x_1) = (a+b)^2 / a`; requires `a > 0`, `b > 0`.
    pub fn linear_branch(a: BigRational, b: BigRational) -> Result<Self> {
        if !a.is_positive() || !b.is_positive() {
            return Err(MisoError::InvalidArgument(
                "linear branch model needs a > 0 and b > 0".into(),
            ));
        }
        let apb = &a + &b;
        let mu = &apb * &apb / &a;
        Self::new(vec![mu], vec![BranchMeasure::Polynomial(vec![b, a])])
    }

    pub fn linear_branch_f64(a: f64, b: f64) -> Result<Self> {
        let a = BigRational::from_f64(a)
            .ok_or_else(|| MisoError::InvalidArgument("a must be finite".into()))?;
        let b = BigRational::from_f64(b)
            .ok_or_else(|| MisoError::InvalidArgument("b must be finite".into()))?;
        Self::linear_branch(a, b)
    }

    pub fn kappa(&self) -> usize {
        self.circuit_measures.len()
    }

    pub fn eta(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[BranchMeasure] {
        &self.branches
    }

    pub fn circuit_measures(&self) -> &[BigRational] {
        &self.circuit_measures
    }

    /// Deepest branch level with measure data, `None` if every branch is
    /// polynomial (unbounded).
    pub fn available_depth(&self) -> Option<usize> {
        self.branches
            .iter()
            .filter_map(|b| b.available_depth())
            .min()
    }

    fn check_point(&self, p: GraphPoint) -> Result<()> {
        match p {
            GraphPoint::Circuit(i) => {
                if i == 0 || i > self.kappa() {
                    return Err(MisoError::InvalidArgument(format!(
                        "circuit index {i} outside 1..={}",
                        self.kappa()
                    )));
                }
            }
            GraphPoint::Branch { branch, depth } => {
                if branch == 0 || branch > self.eta() || depth == 0 {
                    return Err(MisoError::InvalidArgument(format!(
                        "branch point ({branch},{depth}) outside the graph"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exact measure of a point.
    pub fn measure(&self, p: GraphPoint) -> Result<BigRational> {
        self.check_point(p)?;
        match p {
            GraphPoint::Circuit(i) => Ok(self.circuit_measures[i - 1].clone()),
            GraphPoint::Branch { branch, depth } => self.branches[branch - 1].value_at(depth),
        }
    }

    pub fn measure_f64(&self, p: GraphPoint) -> Result<f64> {
        Ok(big_to_f64(&self.measure(p)?))
    }
}

/// The backward graph map: branch points step one level shallower, the
/// entry points `x_{i,1}` and `x_1` land on `x_kappa`, and circuit points
/// step backwards around the circuit.
pub fn phi(g: &OneCircuitGraph, p: GraphPoint) -> Result<GraphPoint> {
    g.check_point(p)?;
    Ok(match p {
        GraphPoint::Branch { branch, depth } if depth >= 2 => GraphPoint::Branch {
            branch,
            depth: depth - 1,
        },
        GraphPoint::Branch { .. } => GraphPoint::Circuit(g.kappa()),
        GraphPoint::Circuit(1) => GraphPoint::Circuit(g.kappa()),
        GraphPoint::Circuit(i) => GraphPoint::Circuit(i - 1),
    })
}

fn preimage_one(g: &OneCircuitGraph, p: GraphPoint) -> Vec<GraphPoint> {
    match p {
        GraphPoint::Branch { branch, depth } => vec![GraphPoint::Branch {
            branch,
            depth: depth + 1,
        }],
        GraphPoint::Circuit(i) if i == g.kappa() => {
            let mut pre = vec![GraphPoint::Circuit(1)];
            for b in 1..=g.eta() {
                pre.push(GraphPoint::Branch { branch: b, depth: 1 });
            }
            pre
        }
        GraphPoint::Circuit(i) => vec![GraphPoint::Circuit(i + 1)],
    }
}

/// Exact `i`-fold preimage set of a point (finite since `eta` is finite).
pub fn preimage(g: &OneCircuitGraph, p: GraphPoint, i: usize) -> Result<Vec<GraphPoint>> {
    if i == 0 {
        return Err(MisoError::InvalidArgument(
            "preimage order must be at least 1".into(),
        ));
    }
    g.check_point(p)?;
    let mut current = vec![p];
    for _ in 0..i {
        let mut next = Vec::new();
        for q in current {
            next.extend(preimage_one(g, q));
        }
        next.sort();
        next.dedup();
        current = next;
    }
    Ok(current)
}

/// Radon-Nikodym quotient on the discrete space:
/// `h(p) = mu(phi^{-1}({p})) / mu(p)`, exact.
pub fn h_value(g: &OneCircuitGraph, p: GraphPoint) -> Result<BigRational> {
    g.check_point(p)?;
    let mut total = BigRational::zero();
    for q in preimage_one(g, p) {
        total += g.measure(q)?;
    }
    Ok(total / g.measure(p)?)
}

pub fn h_value_f64(g: &OneCircuitGraph, p: GraphPoint) -> Result<f64> {
    Ok(big_to_f64(&h_value(g, p)?))
}

/// A pair of points in one preimage set on which `h` disagrees.
#[derive(Debug, Clone, Serialize)]
pub struct GraphKernelViolation {
    pub level: usize,
    pub point_a: String,
    pub point_b: String,
    pub h_a: f64,
    pub h_b: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphKernelReport {
    pub k: usize,
    pub verdict: bool,
    pub violations: Vec<GraphKernelViolation>,
    /// Smallest h over the probe set (left-invertibility proxy).
    pub inf_h_probe: f64,
}

/// Kernel-condition verdict for the composition operator of the graph:
/// `h` must be constant on every `i`-fold preimage set for `i <= k`,
/// tested exactly.
///
/// Preimage sets of branch points are singletons, so only circuit points
/// can collect more than one element; the probe set is therefore the
/// circuit points iterated to depth `k`.
pub fn kernel_condition_graph(g: &OneCircuitGraph, k: usize) -> Result<GraphKernelReport> {
    if k == 0 {
        return Err(MisoError::InvalidArgument("k must be at least 1".into()));
    }
    // left-invertibility probe: inf h over circuit points and the first
    // k + 1 branch levels must be positive
    let mut inf_h = f64::INFINITY;
    for c in 1..=g.kappa() {
        inf_h = inf_h.min(h_value_f64(g, GraphPoint::Circuit(c))?);
    }
    for b in 1..=g.eta() {
        let deepest = g.available_depth().unwrap_or(k + 1).min(k + 1);
        for depth in 1..=deepest {
            inf_h = inf_h.min(h_value_f64(g, GraphPoint::Branch { branch: b, depth })?);
        }
    }
    if !(inf_h > 0.0) {
        return Err(MisoError::InvalidArgument(format!(
            "h is not bounded below on the probe set (inf {inf_h})"
        )));
    }

    let mut violations = Vec::new();
    for level in 1..=k {
        for c in 1..=g.kappa() {
            let set = preimage(g, GraphPoint::Circuit(c), level)?;
            if set.len() < 2 {
                continue;
            }
            let reference = h_value(g, set[0])?;
            for q in &set[1..] {
                let hq = h_value(g, *q)?;
                if hq != reference {
                    violations.push(GraphKernelViolation {
                        level,
                        point_a: set[0].to_string(),
                        point_b: q.to_string(),
                        h_a: big_to_f64(&reference),
                        h_b: big_to_f64(&hq),
                    });
                }
            }
        }
    }
    Ok(GraphKernelReport {
        k,
        verdict: violations.is_empty(),
        violations,
        inf_h_probe: inf_h,
    })
}

/// Per-branch polynomial fit behind the m-isometry criterion.
#[derive(Debug, Clone, Serialize)]
pub struct BranchFit {
    pub branch: usize,
    pub newton_coeffs: Vec<f64>,
    pub ok: bool,
    pub mismatch_depth: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphIsoReport {
    pub m: usize,
    pub verdict: bool,
    pub fits: Vec<BranchFit>,
}

/// m-isometry criterion for `kappa = 1`: every branch measure must be a
/// polynomial of degree at most `m - 2` in the depth. Fits the degree
/// `m - 2` polynomial through depths `1..=m-1` exactly and verifies the
/// remaining available prefix.
pub fn is_m_isometry_graph(g: &OneCircuitGraph, m: usize) -> Result<GraphIsoReport> {
    if g.kappa() != 1 {
        return Err(MisoError::ModelMismatch(format!(
            "the m-isometry criterion is stated for kappa = 1, graph has kappa = {}",
            g.kappa()
        )));
    }
    if m < 2 {
        return Err(MisoError::InvalidArgument("m must be at least 2".into()));
    }
    let mut fits = Vec::with_capacity(g.eta());
    let mut verdict = true;
    for b in 1..=g.eta() {
        let depth_cap = match g.branches[b - 1].available_depth() {
            Some(len) => {
                if len < m + 1 {
                    return Err(MisoError::InvalidArgument(format!(
                        "branch {b} needs a measure prefix of length >= m + 1 = {}, got {len}",
                        m + 1
                    )));
                }
                len
            }
            // polynomial data: materialize a little past the fit window
            None => m + 3,
        };
        let values: Vec<BigRational> = (1..=depth_cap)
            .map(|j| g.branches[b - 1].value_at(j))
            .collect::<Result<_>>()?;
        // exact Newton forward differences on the nodes j = 1..=m-1
        let mut diffs: Vec<BigRational> = Vec::with_capacity(m - 1);
        let mut row: Vec<BigRational> = values[..m - 1].to_vec();
        while !row.is_empty() {
            diffs.push(row[0].clone());
            row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        let predict = |j: usize| -> BigRational {
            // polynomial through the nodes, expressed in falling factorials
            // of (j - 1)
            let mut acc = BigRational::zero();
            let mut falling = BigRational::one();
            let mut factorial = BigInt::one();
            for (k, d) in diffs.iter().enumerate() {
                if k > 0 {
                    falling *= BigRational::from_integer(BigInt::from(j as i64 - k as i64));
                    factorial *= BigInt::from(k);
                }
                acc += d * &falling / BigRational::from_integer(factorial.clone());
            }
            acc
        };
        let mut mismatch_depth = None;
        for (j, v) in values.iter().enumerate().skip(m - 1) {
            if predict(j + 1) != *v {
                mismatch_depth = Some(j + 1);
                break;
            }
        }
        let ok = mismatch_depth.is_none();
        verdict = verdict && ok;
        let mut factorial = 1.0f64;
        let newton_coeffs = diffs
            .iter()
            .enumerate()
            .map(|(k, d)| {
                if k > 0 {
                    factorial *= k as f64;
                }
                big_to_f64(d) / factorial
            })
            .collect();
        fits.push(BranchFit {
            branch: b,
            newton_coeffs,
            ok,
            mismatch_depth,
        });
    }
    Ok(GraphIsoReport { m, verdict, fits })
}

/// Extracts `(a, b)` from the one-branch linear model and verifies the
/// kernel-condition measure matching `mu(x_1) = (a+b)^2/a`.
fn linear_model_params(g: &OneCircuitGraph) -> Result<(BigRational, BigRational)> {
    if g.kappa() != 1 || g.eta() != 1 {
        return Err(MisoError::ModelMismatch(format!(
            "need kappa = eta = 1, got kappa = {}, eta = {}",
            g.kappa(),
            g.eta()
        )));
    }
    let coeffs = match &g.branches[0] {
        BranchMeasure::Polynomial(coeffs) => coeffs,
        BranchMeasure::Values(_) => {
            return Err(MisoError::ModelMismatch(
                "branch measure must be given as a linear polynomial".into(),
            ))
        }
    };
    let trimmed = coeffs.iter().rposition(|c| !c.is_zero()).map_or(0, |d| d + 1);
    if trimmed > 2 {
        return Err(MisoError::ModelMismatch(
            "branch measure polynomial has degree above 1".into(),
        ));
    }
    let b = coeffs.first().cloned().unwrap_or_else(BigRational::zero);
    let a = coeffs.get(1).cloned().unwrap_or_else(BigRational::zero);
    if !a.is_positive() || !b.is_positive() {
        return Err(MisoError::ModelMismatch(
            "linear branch model needs a > 0 and b > 0".into(),
        ));
    }
    let apb = &a + &b;
    let expected = &apb * &apb / &a;
    if g.circuit_measures[0] != expected {
        return Err(MisoError::ModelMismatch(format!(
            "mu(x_1) = {} does not match (a+b)^2/a = {}",
            g.circuit_measures[0], expected
        )));
    }
    Ok((a, b))
}

/// Exact inner product between the canonical representatives of the
/// wandering spaces `M_k` and `M_l` (unit value at `x_1`) of the one-branch
/// linear model, from their closed-form support description.
pub fn mk_inner_product_exact(g: &OneCircuitGraph, k: usize, l: usize) -> Result<BigRational> {
    let (a, b) = linear_model_params(g)?;
    if k == l {
        return Err(MisoError::InvalidArgument(
            "the two wandering-space indices must differ".into(),
        ));
    }
    let low = k.min(l);
    // <f, g> = mu(x_1) + sum_{n<=low} w(n) - (1 + b/a) w(low+1), the only
    // depths where both representatives are nonzero
    let apb = &a + &b;
    let mut acc = &apb * &apb / &a;
    for n in 1..=low {
        acc += &a * BigRational::from_integer(BigInt::from(n)) + &b;
    }
    let w_next = &a * BigRational::from_integer(BigInt::from(low + 1)) + &b;
    acc -= (BigRational::one() + &b / &a) * w_next;
    Ok(acc)
}

/// Floating-point evaluation of the same closed form, scaled by the given
/// values of the representatives at `x_1`.
pub fn mk_inner_product(
    g: &OneCircuitGraph,
    k: usize,
    l: usize,
    scale_f: Complex64,
    scale_g: Complex64,
) -> Result<Complex64> {
    let (a, b) = linear_model_params(g)?;
    if k == l {
        return Err(MisoError::InvalidArgument(
            "the two wandering-space indices must differ".into(),
        ));
    }
    let (a, b) = (big_to_f64(&a), big_to_f64(&b));
    let low = k.min(l) as f64;
    let mut acc = (a + b) * (a + b) / a;
    acc += a * low * (low + 1.0) / 2.0 + b * low;
    acc -= (1.0 + b / a) * (a * (low + 1.0) + b);
    Ok(scale_f * scale_g.conj() * c64(acc, 0.0))
}

fn point_index(g: &OneCircuitGraph, p: GraphPoint, truncation_depth: usize) -> usize {
    match p {
        GraphPoint::Circuit(i) => i - 1,
        GraphPoint::Branch { branch, depth } => {
            debug_assert!(depth <= truncation_depth);
            g.kappa() + (depth - 1) * g.eta() + (branch - 1)
        }
    }
}

/// Matrix truncation of the composition operator on the points of depth at
/// most `truncation_depth`, in the weighted basis `chi_z / sqrt(mu(z))`:
/// entry `(z, y) = sqrt(mu(z)/mu(y))` whenever `phi(z) = y`. Circuit points
/// sit at site 0 and branch points at their depth, so safe-support bounds
/// trim the deepest levels.
pub fn assemble_composition(g: &OneCircuitGraph, truncation_depth: usize) -> Result<FiniteOperator> {
    if truncation_depth < 2 {
        return Err(MisoError::InvalidArgument(
            "truncation depth must be at least 2".into(),
        ));
    }
    if let Some(available) = g.available_depth() {
        if available < truncation_depth {
            return Err(MisoError::InvalidArgument(format!(
                "branch measure prefixes stop at depth {available}, needed {truncation_depth}"
            )));
        }
    }
    let n = g.kappa() + g.eta() * truncation_depth;
    let mut points = Vec::with_capacity(n);
    for c in 1..=g.kappa() {
        points.push(GraphPoint::Circuit(c));
    }
    for depth in 1..=truncation_depth {
        for branch in 1..=g.eta() {
            points.push(GraphPoint::Branch { branch, depth });
        }
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for &z in &points {
        let y = phi(g, z)?;
        let ratio = (g.measure_f64(z)? / g.measure_f64(y)?).sqrt();
        m[(point_index(g, z, truncation_depth), point_index(g, y, truncation_depth))] =
            c64(ratio, 0.0);
    }
    let sites = points
        .iter()
        .map(|p| match p {
            GraphPoint::Circuit(_) => 0,
            GraphPoint::Branch { depth, .. } => *depth,
        })
        .collect();
    Ok(FiniteOperator::from_parts(
        m,
        Provenance::CompositionTruncation,
        sites,
        true,
    ))
}

/// Closed-form canonical representative of the wandering space `M_k` of the
/// one-branch linear model, expressed in the coordinates of
/// [`assemble_composition`]: value 1 on `x_1` through depth `k`,
/// `-(1 + b/a)` at depth `k + 1`, zero beyond.
pub fn wandering_space_closed_form(
    g: &OneCircuitGraph,
    k: usize,
    truncation_depth: usize,
) -> Result<Subspace> {
    let (a, b) = linear_model_params(g)?;
    if k + 1 > truncation_depth {
        return Err(MisoError::InvalidArgument(format!(
            "need k + 1 <= truncation depth, got k = {k}, depth {truncation_depth}"
        )));
    }
    let n = 1 + truncation_depth;
    let mut v = ComplexMatrix::zeros(n, 1);
    v[(0, 0)] = c64(g.measure_f64(GraphPoint::Circuit(1))?.sqrt(), 0.0);
    for depth in 1..=k {
        let w = g.measure_f64(GraphPoint::Branch { branch: 1, depth })?;
        v[(depth, 0)] = c64(w.sqrt(), 0.0);
    }
    let scale = -(1.0 + big_to_f64(&b) / big_to_f64(&a));
    let w_next = g.measure_f64(GraphPoint::Branch {
        branch: 1,
        depth: k + 1,
    })?;
    v[(k + 1, 0)] = c64(scale * w_next.sqrt(), 0.0);
    let norm = v.norm();
    let frame = v.map(|z| z / c64(norm, 0.0));
    Ok(Subspace::from_orthonormal(frame))
}
