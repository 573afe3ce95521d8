//! Demonstration indices over decomposition and answering examples, plus
//! vertex-cover selection of training examples.

mod cover;
mod embed;
mod index;

pub use cover::{greedy_vertex_cover, is_vertex_cover, knn_graph, select_vertices, vertex_cover_select, Graph};
pub use embed::{terms, EmbedError, Embedder, EmbedderConfig, Precomputed, SparseVector, TfIdf};
pub use index::{
    build_qa_index, build_qa_index_with, build_qd_index, build_qd_index_with, linear_scan, Index, IndexEntry,
    IndexError, IndexKind, Payload, QdResults, RetrievalResult, INDEX_FORMAT, INDEX_VERSION,
};
