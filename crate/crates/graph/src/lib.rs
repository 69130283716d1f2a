//! Graph structures, graph comparison metrics, model averaging and
//! score-based structure learning over categorical data, plus synthetic
//! datasets generated from the match engine.

pub mod average;
pub mod bic;
pub mod bn;
pub mod compare;
pub mod data;
pub mod datagen;
pub mod error;
pub mod graph;
pub mod search;

pub use compare::{compare_graphs, CompareLevel, GraphComparison};
pub use data::DiscreteDataset;
pub use error::GraphError;
pub use graph::{dag_to_cpdag, Cpdag, Dag, GraphJson};
pub use search::{hill_climb, tabu_search, SearchOptions};
