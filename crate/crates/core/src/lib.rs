//! Structure-preserving model reduction of physical network systems by
//! clustering.
//!
//! The crate models mass–damper (first-order) and mass–spring–damper
//! (second-order) networks on graphs with weighted vertices and weighted
//! edges, reduces them by clustering vertices into cells of a partition, and
//! quantifies the reduction error in the H₂ norm.
//!
//! * [`graph`]: incidence, Laplacian and effective Laplacian matrices.
//! * [`partition`]: partitions, almost equitable partition tests and
//!   enumeration, and a generator of networks with a known AEP.
//! * [`reduction`]: first-order models, the clustered reduced model and its
//!   Petrov–Galerkin factors, and the decoupling transform.
//! * [`h2`]: closed-form H₂ norms and reduction error, plus independent
//!   numerical oracles (modal eigen-sum and adaptive quadrature).
//! * [`second_order`]: port-Hamiltonian mass–spring–damper models.
//! * [`simulate`]: fixed-step RK4 time integration and energy bookkeeping.

pub mod error;
pub mod graph;
pub mod h2;
pub mod linalg;
pub mod partition;
pub mod reduction;
pub mod second_order;
pub mod simulate;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeKind, KindFilter, Matrix, NetworkGraph, Vector};
pub use h2::{build_report, H2Report, ReportOptions};
pub use partition::{check_aep_definition, check_aep_subspace, enumerate_aeps, synthesize_aep_graph, AepWitness, Partition, QuotientSpec};
pub use reduction::{assemble_first_order, reduce_first_order, Coordinates, FirstOrderModel, ReductionResult};
pub use second_order::{assemble_second_order, reduce_second_order, SecondOrderModel};
pub use simulate::{integrate, InputSignal, LinearSystem, Trajectory};
