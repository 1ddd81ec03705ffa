//! Multigraphs, configuration-model samplers, neighborhoods, cores and lazy
//! Galton–Watson trees.

mod algo;
mod config_model;
mod gw_tree;
mod multigraph;

pub use algo::{k_core, k_core_with_order, neighborhood, PeelOrder};
pub(crate) use algo::peel;
pub use config_model::{
    configuration_model, cutoff_line_matching, sample_degree_sequence, uniform_matching, HalfEdgePicker,
    HeightAssignment, LowestIdPicker, UniformPicker, UnmatchedHalfEdges,
};
pub use gw_tree::{LazyGwTree, TreeError, DEFAULT_NODE_BUDGET};
pub use multigraph::{DegreeSequence, MultiGraph};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("matching has {matching} entries but the degrees call for {half_edges} half-edges")]
    MatchingSize { half_edges: usize, matching: usize },
    #[error("matching is not a fixed-point-free involution at half-edge {half_edge}")]
    NotAnInvolution { half_edge: usize },
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("total degree {0} is odd")]
    OddTotalDegree(u64),
    #[error("picker returned half-edge {0}, which is already matched")]
    PickerReturnedMatched(u32),
}
