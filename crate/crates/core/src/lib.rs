//! Tree distances under subtree transfer.

pub mod approx;
pub mod canon;
pub mod deg3;
pub mod error;
pub mod gadget;
pub mod labeling;
pub mod multiset;
pub mod newick;
pub mod oracle;
pub mod rmq;
pub mod script;
pub mod shared;
pub mod stt;
pub mod tree;
pub mod weight;

pub use error::{Error, Result};
pub use multiset::MultiSet;
pub use newick::{parse_newick, parse_newick_with, serialize_newick, NewickOptions};
pub use tree::{edge_bipartition, EdgeBipartition, NodeId, Phylogeny, Tree};
pub use weight::Weight;
