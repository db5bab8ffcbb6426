#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heterograph/matrix.hpp"

namespace heterograph {

using NodeId = std::int32_t;
using EdgePair = std::pair<NodeId, NodeId>;

struct BuildStats {
    std::int64_t self_loops_dropped = 0;
    std::int64_t duplicate_pairs_dropped = 0;  // repeated input pairs (either direction)
    std::int64_t mirrored_edges_added = 0;     // undirected edges present in one direction only
};

// Immutable sparse undirected graph: CSR adjacency (stored symmetrically,
// sorted columns, no self-loops), per-node class labels and a dense
// feature matrix. Safe to share across threads once built.
class Graph {
public:
    Graph() = default;

    // Ingests an arbitrary edge list: self-loops dropped, duplicates merged,
    // directed inputs symmetrized. Throws on out-of-range endpoints/labels.
    static Graph from_edge_list(const std::vector<EdgePair>& edges, NodeId n,
                                std::vector<std::int32_t> labels, Matrix features,
                                std::int32_t num_classes, BuildStats* stats = nullptr);

    NodeId num_nodes() const { return n_; }
    std::int64_t num_edges() const { return static_cast<std::int64_t>(col_.size()) / 2; }
    std::int64_t num_directed_edges() const { return static_cast<std::int64_t>(col_.size()); }
    std::int32_t num_classes() const { return num_classes_; }
    std::int64_t feature_dim() const { return static_cast<std::int64_t>(features_.cols()); }

    std::int64_t degree(NodeId u) const { return row_ptr_[u + 1] - row_ptr_[u]; }
    std::span<const NodeId> neighbors(NodeId u) const {
        return {col_.data() + row_ptr_[u], static_cast<std::size_t>(degree(u))};
    }

    const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<NodeId>& col_indices() const { return col_; }
    const std::vector<std::int32_t>& labels() const { return labels_; }
    const Matrix& features() const { return features_; }

    // Value-semantics "mutations" used by the generator pipeline.
    Graph with_features(Matrix features) const;
    Graph with_labels(std::vector<std::int32_t> labels, std::int32_t num_classes) const;

private:
    NodeId n_ = 0;
    std::int32_t num_classes_ = 0;
    std::vector<std::int64_t> row_ptr_{0};
    std::vector<NodeId> col_;
    std::vector<std::int32_t> labels_;
    Matrix features_;
};

// Symmetric sparse operator sharing the CSR shape discipline of Graph.
struct SparseOperator {
    NodeId n = 0;
    std::vector<std::int64_t> row_ptr{0};
    std::vector<NodeId> col;
    std::vector<double> val;

    std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }
};

// Fraction of undirected edges whose endpoints share a class label.
// Throws std::invalid_argument on an empty edge set.
double edge_homophily(const Graph& g);

enum class UndefinedRowPolicy { Throw, NaNRow };

// Empirical class compatibility matrix: row i is the distribution of
// endpoint classes over directed edge copies leaving class-i nodes.
Matrix compatibility_matrix(const Graph& g,
                            UndefinedRowPolicy policy = UndefinedRowPolicy::Throw);

bool is_row_stochastic(const Matrix& m, double tol = 1e-12);

// Unnormalized operator whose (u,v) entry is 1 iff the shortest path
// distance between u and v is exactly k. k=1 is the adjacency itself;
// k=2 is computed by a sparse-sparse product with set-difference masking.
SparseOperator exact_khop_adjacency(const Graph& g, int k);

// Union with the identity: turns the exact 1-hop operator into the
// self-loop-augmented neighborhood used by the merged-embedding variants.
SparseOperator with_self_loops(const SparseOperator& op);

// Entry (u,v) -> d_u^{-1/2} d_v^{-1/2} * entry, with d the row sum of op.
// Rows with zero degree stay all-zero.
SparseOperator sym_normalize(const SparseOperator& op);

// L = D - A as a dense matrix (spectral analysis is capped at small n).
Matrix unnormalized_laplacian(const Graph& g);

// Sparse * dense with per-row ascending-column accumulation, so results are
// bit-reproducible; parallel callers may split by rows.
Matrix spmm(const SparseOperator& op, const Matrix& dense);
MatrixF spmm(const SparseOperator& op, const MatrixF& dense);

}  // namespace heterograph
