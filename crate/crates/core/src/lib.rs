//! Probability trees over categorical tables.
//!
//! A [`ProbabilityTree`] stores, level by level, the conditional frequencies
//! of each column's values given the values chosen in the preceding columns.
//! Walking it from the root with a seeded [`Generator`] yields synthetic
//! records with the same joint statistics as the source table.
//!
//! ```
//! use probtree::{CategoricalTable, Generator, ProbabilityTree};
//!
//! let table = CategoricalTable::from_rows(
//!     &["P1.1", "P1.2", "P1.3"],
//!     vec![vec![1, 2, 3], vec![5, 4, 4], vec![2, 2, 2]],
//! )
//! .unwrap();
//! let tree = ProbabilityTree::build(&table).unwrap();
//! assert_eq!(tree.node_count(), 9);
//!
//! let mut generator = Generator::new(tree, 42);
//! let synthetic = generator.get_records(1000).unwrap();
//! assert_eq!(synthetic.n_rows(), 1000);
//! ```
//!
//! See the `examples/` directory for one program per capability.

pub mod cli;
pub mod export;
pub mod ingest;
pub mod sampler;
pub mod stats;
pub mod table;
pub mod tree;

pub use export::{connected_components, from_json, graph_edges, to_dot, to_json, ExportError, GraphEdge};
pub use ingest::{bin_numeric, read_csv, BinError, IngestError, IngestOptions, MissingPolicy};
pub use sampler::{Generator, SampleError, RNG_ALGORITHM};
pub use stats::{
    convergence_study, exact_marginal, frequency_diff, frequency_table, l1_error, ConvergenceReport,
    FrequencyTable, StatsError,
};
pub use table::{CategoricalTable, CategoricalValue, Record, TableError, ValueKind};
pub use tree::{DataNode, Node, ProbabilityTree, TreeError};
