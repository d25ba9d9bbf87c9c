//! Numerical laboratory for m-isometric operators on finite truncations:
//! operator-valued weighted shifts, composition operators on one-circuit
//! directed graphs, defect and kernel-condition verdicts, the Newton
//! forward-difference completion problem, and Wold-type decompositions with
//! explicit shift models.

pub mod error;
pub mod graphops;
pub mod linalg;
pub mod completion;
pub mod miso;
pub mod models;
pub mod operators;
pub mod wire;
pub mod wold;

pub use error::{MisoError, Result};
pub use linalg::{c64, ComplexMatrix, Subspace, ToleranceConfig};
pub use operators::{FiniteOperator, Provenance, ShiftSpec};
