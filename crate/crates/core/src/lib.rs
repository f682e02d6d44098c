//! Sensor placement on undirected networks through grouped independent support.
//!
//! A generalised identifying code set (GICS) of a graph and a bound `k` is a
//! set of sensor nodes under which every failure set of at most `k` nodes
//! produces a unique pair of immediate and delayed detections. This crate
//! encodes the detection semantics into CNF, partitions the variables into
//! one group per node, and extracts a set-minimal grouped independent
//! support with Padoa-style definability queries against an incremental
//! CDCL engine. The selected groups are the sensor set.
//!
//! Module map:
//!
//! - [`graph`]: simple undirected graphs, readers and synthetic families.
//! - [`satcore`]: literals, CNF, DIMACS, the engine contract and the bundled
//!   CDCL engine, projected model enumeration.
//! - [`encoder`]: detection clauses plus the sequential-counter cardinality
//!   constraint, with the variable map and group partition.
//! - [`definability`]: the doubled formula with indicator variables and
//!   single-variable definability queries.
//! - [`gismo`]: the group elimination loop and result verification.
//! - [`oracle`]: brute-force signatures, GICS checks and exhaustive search.
//! - [`bench`]: benchmark records, PAR-2 scoring and encoding-size tables.

pub mod bench;
pub mod definability;
pub mod encoder;
pub mod gismo;
pub mod graph;
pub mod oracle;
pub mod satcore;

pub use definability::{DefinabilityContext, DefinabilityError, QueryMode};
pub use encoder::{encode_instance, EncodeError, EncodedInstance, GroupPartition, VarMap};
pub use gismo::{run_gismo, verify_result, GisResult, GismoConfig, GroupOrder, InnerOrder};
pub use graph::{Graph, GraphError, GraphFormat, NodeId};
pub use satcore::{CdclSolver, CnfFormula, ConflictBudget, Lit, SatEngine, SolveOutcome, SolveStatus, Var};
