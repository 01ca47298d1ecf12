//! Discrete Hodge theory on simplicial complexes: Hodge decomposition, the
//! Green operator and the primitive `d⁻¹ = δG`, with a verification harness
//! for smooth parameter families of exact forms.

// `!(x > 0.0)` is used on purpose so that NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cochain;
pub mod complex;
pub mod corpus;
pub mod error;
pub mod family;
pub mod hodge;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod norms;
pub mod oracle;
pub mod sparse;
pub mod suite;

pub use cochain::{Cochain, CochainRecord};
pub use complex::{build_complex, ComplexBuilder, ComplexId, SimplicialComplex};
pub use error::{HodgeError, Result};
pub use hodge::{Decomposition, ExactnessReport, HodgeSystem, Tolerances};
pub use metric::{build_metric, MetricStructure, Scheme};

/// Schema tag carried by every JSON report.
pub const SCHEMA: &str = "hodgekit/1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
