//! JSON interchange formats.
//!
//! Matrices travel as `{"rows": n, "cols": m, "data": [[re, im], ...]}` in
//! row-major order; subspaces serialize as their frame matrix. The structs
//! here define the schemas used by every file the CLI reads or writes.

use num_rational::BigRational;
use num_traits::FromPrimitive;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{MisoError, Result};
use crate::graphops::{BranchMeasure, OneCircuitGraph};
use crate::linalg::{c64, ComplexMatrix, Subspace, ToleranceConfig};
use crate::operators::{FiniteOperator, Provenance, ShiftSpec};

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

pub fn matrix_to_wire(m: &ComplexMatrix) -> impl Serialize {
    MatrixWire {
        rows: m.nrows(),
        cols: m.ncols(),
        data: (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect(),
    }
}

fn matrix_from_wire(w: MatrixWire) -> Result<ComplexMatrix> {
    if w.data.len() != w.rows * w.cols {
        return Err(MisoError::InvalidArgument(format!(
            "matrix data has {} entries, expected {} x {} = {}",
            w.data.len(),
            w.rows,
            w.cols,
            w.rows * w.cols
        )));
    }
    if w.data
        .iter()
        .any(|[re, im]| !re.is_finite() || !im.is_finite())
    {
        return Err(MisoError::InvalidArgument(
            "matrix entries must be finite".into(),
        ));
    }
    let mut m = ComplexMatrix::zeros(w.rows, w.cols);
    for (idx, [re, im]) in w.data.into_iter().enumerate() {
        m[(idx / w.cols, idx % w.cols)] = c64(re, im);
    }
    Ok(m)
}

/// serde adapter for `ComplexMatrix` fields: `#[serde(with = "wire::matrix")]`.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_wire(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<ComplexMatrix, D::Error> {
        matrix_from_wire(MatrixWire::deserialize(d)?).map_err(D::Error::custom)
    }
}

/// serde adapter for `Vec<ComplexMatrix>` fields.
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(
        ms: &[ComplexMatrix],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let wires: Vec<_> = ms.iter().map(matrix_to_wire).collect();
        wires.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<ComplexMatrix>, D::Error> {
        Vec::<MatrixWire>::deserialize(d)?
            .into_iter()
            .map(|w| matrix_from_wire(w).map_err(D::Error::custom))
            .collect()
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_wire(self.frame()).serialize(s)
    }
}

#[derive(Serialize, Deserialize)]
struct ShiftSpecWire {
    d: usize,
    #[serde(rename = "N")]
    n_sites: usize,
    weights: Vec<MatrixWire>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    uniform_bounds: Option<(f64, f64)>,
}

impl Serialize for ShiftSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut state = serde::ser::Serializer::serialize_struct(s, "ShiftSpec", 4)?;
        use serde::ser::SerializeStruct;
        state.serialize_field("d", &self.fiber_dim)?;
        state.serialize_field("N", &self.n_sites)?;
        let weights: Vec<_> = self.weights.iter().map(matrix_to_wire).collect();
        state.serialize_field("weights", &weights)?;
        if let Some(b) = self.uniform_bounds {
            state.serialize_field("uniform_bounds", &b)?;
        } else {
            state.skip_field("uniform_bounds")?;
        }
        state.end()
    }
}

impl<'de> Deserialize<'de> for ShiftSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = ShiftSpecWire::deserialize(d)?;
        let weights = wire
            .weights
            .into_iter()
            .map(|w| matrix_from_wire(w).map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut spec = ShiftSpec::new(wire.d, wire.n_sites, weights).map_err(D::Error::custom)?;
        spec.uniform_bounds = wire.uniform_bounds;
        Ok(spec)
    }
}

#[derive(Serialize, Deserialize)]
struct FiniteOperatorWire {
    matrix: MatrixWire,
    provenance: Provenance,
    exact_support: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    sites: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    truncated: Option<bool>,
}

impl Serialize for FiniteOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FiniteOperatorWire {
            matrix: MatrixWire {
                rows: self.matrix().nrows(),
                cols: self.matrix().ncols(),
                data: (0..self.matrix().nrows())
                    .flat_map(|i| (0..self.matrix().ncols()).map(move |j| (i, j)))
                    .map(|(i, j)| [self.matrix()[(i, j)].re, self.matrix()[(i, j)].im])
                    .collect(),
            },
            provenance: self.provenance(),
            exact_support: self.exact_support(),
            sites: Some(self.sites().to_vec()),
            truncated: Some(self.is_truncated()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = FiniteOperatorWire::deserialize(d)?;
        let matrix = matrix_from_wire(wire.matrix).map_err(D::Error::custom)?;
        if matrix.nrows() != matrix.ncols() {
            return Err(D::Error::custom("operator matrix must be square"));
        }
        let n = matrix.nrows();
        let sites = wire.sites.unwrap_or_else(|| (0..n).collect());
        if sites.len() != n {
            return Err(D::Error::custom(format!(
                "sites vector has length {}, matrix dimension is {n}",
                sites.len()
            )));
        }
        let truncated = wire
            .truncated
            .unwrap_or(wire.provenance != Provenance::Explicit);
        Ok(FiniteOperator::from_parts(
            matrix,
            wire.provenance,
            sites,
            truncated,
        ))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
enum BranchWireInner {
    #[serde(rename = "poly")]
    Poly(Vec<f64>),
    #[serde(rename = "values")]
    Values(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
struct GraphWire {
    kappa: usize,
    eta: usize,
    circuit_measures: Vec<f64>,
    branches: Vec<BranchWireInner>,
}

impl Serialize for OneCircuitGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let to_f64 = |r: &BigRational| num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN);
        GraphWire {
            kappa: self.kappa(),
            eta: self.eta(),
            circuit_measures: self.circuit_measures().iter().map(to_f64).collect(),
            branches: self
                .branches()
                .iter()
                .map(|b| match b {
                    BranchMeasure::Polynomial(c) => {
                        BranchWireInner::Poly(c.iter().map(to_f64).collect())
                    }
                    BranchMeasure::Values(v) => {
                        BranchWireInner::Values(v.iter().map(to_f64).collect())
                    }
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OneCircuitGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = GraphWire::deserialize(d)?;
        if wire.kappa != wire.circuit_measures.len() {
            return Err(D::Error::custom(format!(
                "kappa = {} but {} circuit measures given",
                wire.kappa,
                wire.circuit_measures.len()
            )));
        }
        if wire.eta != wire.branches.len() {
            return Err(D::Error::custom(format!(
                "eta = {} but {} branches given",
                wire.eta,
                wire.branches.len()
            )));
        }
        let rat = |v: f64| {
            BigRational::from_f64(v)
                .ok_or_else(|| D::Error::custom(format!("measure {v} is not finite")))
        };
        let circuit = wire
            .circuit_measures
            .iter()
            .map(|&v| rat(v))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let branches = wire
            .branches
            .iter()
            .map(|b| match b {
                BranchWireInner::Poly(c) => Ok(BranchMeasure::Polynomial(
                    c.iter().map(|&v| rat(v)).collect::<std::result::Result<Vec<_>, _>>()?,
                )),
                BranchWireInner::Values(v) => Ok(BranchMeasure::Values(
                    v.iter().map(|&x| rat(x)).collect::<std::result::Result<Vec<_>, _>>()?,
                )),
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        OneCircuitGraph::new(circuit, branches).map_err(D::Error::custom)
    }
}

/// Validated tolerance overrides as they appear in CLI flags and report
/// headers.
pub fn tolerance_from_overrides(
    tol_rank: Option<f64>,
    tol_orth: Option<f64>,
    tol_identity: Option<f64>,
) -> Result<ToleranceConfig> {
    let mut tol = ToleranceConfig::default();
    if let Some(v) = tol_rank {
        tol.tol_rank = v;
    }
    if let Some(v) = tol_orth {
        tol.tol_orth = v;
    }
    if let Some(v) = tol_identity {
        tol.tol_identity = v;
    }
    tol.validate()?;
    Ok(tol)
}
