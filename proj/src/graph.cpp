#include "heterograph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heterograph {

Graph Graph::from_edge_list(const std::vector<EdgePair>& edges, NodeId n,
                            std::vector<std::int32_t> labels, Matrix features,
                            std::int32_t num_classes, BuildStats* stats) {
    if (n < 0) throw std::invalid_argument("from_edge_list: negative node count");
    if (!labels.empty() && labels.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("from_edge_list: label count != node count");
    if (!features.empty() && features.rows() != static_cast<std::size_t>(n))
        throw std::invalid_argument("from_edge_list: feature rows != node count");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes)
            throw std::invalid_argument("from_edge_list: label out of range at node " +
                                        std::to_string(i));
    }

    BuildStats local;
    std::vector<EdgePair> directed;  // normalized (min,max) per input pair
    directed.reserve(edges.size());
    for (const auto& [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw std::invalid_argument("from_edge_list: endpoint out of range (" +
                                        std::to_string(u) + "," + std::to_string(v) + ")");
        if (u == v) {
            ++local.self_loops_dropped;
            continue;
        }
        directed.emplace_back(u, v);
    }

    // Count exact duplicate input pairs and one-direction-only edges.
    {
        auto sorted = directed;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] == sorted[i - 1]) ++local.duplicate_pairs_dropped;
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (const auto& [u, v] : sorted) {
            if (u < v && !std::binary_search(sorted.begin(), sorted.end(), EdgePair{v, u}))
                ++local.mirrored_edges_added;
            if (u > v && !std::binary_search(sorted.begin(), sorted.end(), EdgePair{v, u}))
                ++local.mirrored_edges_added;
        }
    }

    std::vector<EdgePair> sym;
    sym.reserve(directed.size() * 2);
    for (const auto& [u, v] : directed) {
        sym.emplace_back(u, v);
        sym.emplace_back(v, u);
    }
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());

    Graph g;
    g.n_ = n;
    g.num_classes_ = num_classes;
    g.labels_ = std::move(labels);
    g.features_ = std::move(features);
    g.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    g.col_.resize(sym.size());
    for (const auto& [u, v] : sym) ++g.row_ptr_[static_cast<std::size_t>(u) + 1];
    for (NodeId u = 0; u < n; ++u) g.row_ptr_[u + 1] += g.row_ptr_[u];
    {
        std::vector<std::int64_t> cursor(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
        for (const auto& [u, v] : sym) g.col_[cursor[u]++] = v;
    }
    if (stats) *stats = local;
    return g;
}

Graph Graph::with_features(Matrix features) const {
    if (!features.empty() && features.rows() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("with_features: row count mismatch");
    Graph g = *this;
    g.features_ = std::move(features);
    return g;
}

Graph Graph::with_labels(std::vector<std::int32_t> labels, std::int32_t num_classes) const {
    if (labels.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("with_labels: label count mismatch");
    for (auto y : labels)
        if (y < 0 || y >= num_classes) throw std::invalid_argument("with_labels: label out of range");
    Graph g = *this;
    g.labels_ = std::move(labels);
    g.num_classes_ = num_classes;
    return g;
}

double edge_homophily(const Graph& g) {
    if (g.num_edges() == 0)
        throw std::invalid_argument("edge_homophily: undefined on an empty edge set");
    const auto& labels = g.labels();
    std::int64_t intra = 0;
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v && labels[u] == labels[v]) ++intra;
    return static_cast<double>(intra) / static_cast<double>(g.num_edges());
}

Matrix compatibility_matrix(const Graph& g, UndefinedRowPolicy policy) {
    const std::int32_t k = g.num_classes();
    Matrix counts(k, k);
    std::vector<std::int64_t> outgoing(k, 0);
    const auto& labels = g.labels();
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            counts(labels[u], labels[v]) += 1.0;
            ++outgoing[labels[u]];
        }
    }
    for (std::int32_t i = 0; i < k; ++i) {
        if (outgoing[i] == 0) {
            if (policy == UndefinedRowPolicy::Throw)
                throw std::runtime_error("compatibility_matrix: class " + std::to_string(i) +
                                         " has no outgoing edges");
            for (std::int32_t j = 0; j < k; ++j)
                counts(i, j) = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        for (std::int32_t j = 0; j < k; ++j) counts(i, j) /= static_cast<double>(outgoing[i]);
    }
    return counts;
}

bool is_row_stochastic(const Matrix& m, double tol) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double v = m(i, j);
            if (!(v >= 0.0 && v <= 1.0)) return false;
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

SparseOperator exact_khop_adjacency(const Graph& g, int k) {
    if (k != 1 && k != 2) throw std::invalid_argument("exact_khop_adjacency: k must be 1 or 2");
    SparseOperator op;
    op.n = g.num_nodes();
    if (k == 1) {
        op.row_ptr = g.row_ptr();
        op.col = g.col_indices();
        op.val.assign(op.col.size(), 1.0);
        return op;
    }
    // k == 2: indicator of (A^2 - A - I > 0), built row by row. A marker
    // array keeps the pass over neighbors-of-neighbors linear in the walk
    // count, never materializing a dense row.
    const NodeId n = g.num_nodes();
    std::vector<NodeId> stamp(n, -1);
    op.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    std::vector<NodeId> scratch;
    std::vector<std::vector<NodeId>> rows(n);
    for (NodeId u = 0; u < n; ++u) {
        stamp[u] = u;
        for (NodeId v : g.neighbors(u)) stamp[v] = u;  // distance <= 1 is masked out
        scratch.clear();
        for (NodeId v : g.neighbors(u)) {
            for (NodeId w : g.neighbors(v)) {
                if (stamp[w] != u) {
                    stamp[w] = u;
                    scratch.push_back(w);
                }
            }
        }
        std::sort(scratch.begin(), scratch.end());
        rows[u] = scratch;
        op.row_ptr[u + 1] = op.row_ptr[u] + static_cast<std::int64_t>(scratch.size());
    }
    op.col.reserve(static_cast<std::size_t>(op.row_ptr[n]));
    for (NodeId u = 0; u < n; ++u)
        op.col.insert(op.col.end(), rows[u].begin(), rows[u].end());
    op.val.assign(op.col.size(), 1.0);
    return op;
}

SparseOperator with_self_loops(const SparseOperator& op) {
    SparseOperator out;
    out.n = op.n;
    out.row_ptr.assign(static_cast<std::size_t>(op.n) + 1, 0);
    out.col.reserve(op.col.size() + static_cast<std::size_t>(op.n));
    for (NodeId u = 0; u < op.n; ++u) {
        bool inserted = false;
        for (std::int64_t idx = op.row_ptr[u]; idx < op.row_ptr[u + 1]; ++idx) {
            NodeId v = op.col[idx];
            if (!inserted && v > u) {
                out.col.push_back(u);
                inserted = true;
            }
            if (v == u) inserted = true;
            out.col.push_back(v);
        }
        if (!inserted) out.col.push_back(u);
        out.row_ptr[u + 1] = static_cast<std::int64_t>(out.col.size());
    }
    out.val.assign(out.col.size(), 1.0);
    return out;
}

SparseOperator sym_normalize(const SparseOperator& op) {
    std::vector<double> inv_sqrt_deg(op.n, 0.0);
    for (NodeId u = 0; u < op.n; ++u) {
        double d = 0;
        for (std::int64_t idx = op.row_ptr[u]; idx < op.row_ptr[u + 1]; ++idx) d += op.val[idx];
        inv_sqrt_deg[u] = d > 0 ? 1.0 / std::sqrt(d) : 0.0;  // 0^{-1/2} treated as 0
    }
    SparseOperator out = op;
    for (NodeId u = 0; u < op.n; ++u)
        for (std::int64_t idx = op.row_ptr[u]; idx < op.row_ptr[u + 1]; ++idx)
            out.val[idx] = op.val[idx] * inv_sqrt_deg[u] * inv_sqrt_deg[op.col[idx]];
    return out;
}

Matrix unnormalized_laplacian(const Graph& g) {
    const NodeId n = g.num_nodes();
    Matrix l(n, n);
    for (NodeId u = 0; u < n; ++u) {
        l(u, u) = static_cast<double>(g.degree(u));
        for (NodeId v : g.neighbors(u)) l(u, v) = -1.0;
    }
    return l;
}

namespace {

template <typename T>
MatrixT<T> spmm_impl(const SparseOperator& op, const MatrixT<T>& dense) {
    if (dense.rows() != static_cast<std::size_t>(op.n))
        throw std::invalid_argument("spmm: shape mismatch");
    MatrixT<T> out(static_cast<std::size_t>(op.n), dense.cols());
    const std::size_t m = dense.cols();
    for (NodeId u = 0; u < op.n; ++u) {
        T* ou = out.row(u);
        for (std::int64_t idx = op.row_ptr[u]; idx < op.row_ptr[u + 1]; ++idx) {
            const T w = static_cast<T>(op.val[idx]);
            const T* dv = dense.row(op.col[idx]);
            for (std::size_t j = 0; j < m; ++j) ou[j] += w * dv[j];
        }
    }
    return out;
}

}  // namespace

Matrix spmm(const SparseOperator& op, const Matrix& dense) { return spmm_impl(op, dense); }
MatrixF spmm(const SparseOperator& op, const MatrixF& dense) { return spmm_impl(op, dense); }

}  // namespace heterograph
