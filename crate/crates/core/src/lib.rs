//! Kemeny's constant of weighted undirected graphs and the derivative-based
//! edge centralities built on it.
//!
//! The heavy lifting is a banded Cholesky of the graph Laplacian
//! ([`SolverContext`]), after which every pair costs two triangular
//! solves. [`oracle`] holds dense reference routes used for testing and as
//! a fallback on small graphs.

pub mod band;
pub mod centrality;
pub mod display;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod linkpred;
pub mod onepath;
pub mod oracle;
pub mod sensitivity;
pub mod solver;
pub mod value;

pub use band::BandFactor;
pub use centrality::{Analyzer, PairAnalysis, PairSet, PerturbationCurve, Regularized};
pub use display::{Histogram, Normalization};
pub use error::{Error, Result};
pub use graph::{GraphBuilder, NodePermutation, WeightedGraph};
pub use io::{load_graph, write_edge_list, GraphFormat};
pub use linkpred::{Measure, ScoreEntry, ScoreTable, SortDirection};
pub use onepath::OnePathSpec;
pub use oracle::DenseSpectralData;
pub use sensitivity::{Family, SensitivityReport};
pub use solver::{BackendChoice, BackendKind, SolverContext, SolverOptions};
pub use value::Extended;
