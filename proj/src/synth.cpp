#include "heterograph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "heterograph/dataio.hpp"
#include "heterograph/rng.hpp"

namespace heterograph {

namespace {
// Synthetic bag-of-words emission probabilities: signal dimensions of a
// node's class fire at kOnProb, all other dimensions at kOffProb.
constexpr double kOnProb = 0.5;
constexpr double kOffProb = 0.05;
}  // namespace

std::vector<NodeId> SplitAssignment::indices_of(SplitTag tag) const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < tags.size(); ++i)
        if (tags[i] == tag) out.push_back(static_cast<NodeId>(i));
    return out;
}

std::size_t SplitAssignment::count(SplitTag tag) const {
    return static_cast<std::size_t>(std::count(tags.begin(), tags.end(), tag));
}

void GenConfig::validate() const {
    if (num_classes < 1) throw std::invalid_argument("GenConfig: num_classes must be >= 1");
    if (n < num_classes) throw std::invalid_argument("GenConfig: n must be >= num_classes");
    if (edges_per_node < 1) throw std::invalid_argument("GenConfig: edges_per_node must be >= 1");
    if (compatibility) {
        if (compatibility->rows() != static_cast<std::size_t>(num_classes) ||
            compatibility->cols() != static_cast<std::size_t>(num_classes))
            throw std::invalid_argument("GenConfig: compatibility matrix shape mismatch");
        if (!is_row_stochastic(*compatibility, 1e-9))
            throw std::invalid_argument("GenConfig: compatibility matrix is not row-stochastic");
    } else if (!(target_h >= 0.0 && target_h <= 1.0)) {
        throw std::invalid_argument("GenConfig: target_h outside [0,1]");
    }
    if (features.synthetic && features.corpus)
        throw std::invalid_argument("GenConfig: choose one feature mode");
}

Matrix compatibility_from_h(double h, std::int32_t num_classes) {
    if (num_classes < 1) throw std::invalid_argument("compatibility_from_h: num_classes < 1");
    if (num_classes == 1) {
        Matrix m(1, 1);
        m(0, 0) = 1.0;
        return m;
    }
    if (!(h >= 0.0 && h <= 1.0))
        throw std::invalid_argument("compatibility_from_h: h outside [0,1]");
    const double off = (1.0 - h) / static_cast<double>(num_classes - 1);
    Matrix m(num_classes, num_classes, off);
    for (std::int32_t i = 0; i < num_classes; ++i) m(i, i) = h;
    return m;
}

Graph generate_graph(const GenConfig& config) {
    config.validate();
    const NodeId n = config.n;
    const std::int32_t k = config.num_classes;
    const Matrix h = config.compatibility ? *config.compatibility
                                          : compatibility_from_h(config.target_h, k);
    Rng rng(config.seed);

    std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < k; ++i) labels[i] = i;  // seed ring, one node per class
    if (config.balanced_classes) {
        // shuffled balanced multiset for the remaining nodes
        std::vector<std::int32_t> pool;
        pool.reserve(static_cast<std::size_t>(n - k));
        for (std::int32_t c = 0; c < k; ++c) {
            std::int64_t total = n / k + (c < n % k ? 1 : 0);
            for (std::int64_t i = 1; i < total; ++i) pool.push_back(c);
        }
        rng.shuffle(pool);
        std::copy(pool.begin(), pool.end(), labels.begin() + k);
    } else {
        for (NodeId t = k; t < n; ++t)
            labels[t] = static_cast<std::int32_t>(rng.uniform_u64(static_cast<std::uint64_t>(k)));
    }

    std::vector<EdgePair> edges;
    edges.reserve(static_cast<std::size_t>(config.edges_per_node) * static_cast<std::size_t>(n));
    std::vector<std::int64_t> degree(static_cast<std::size_t>(n), 0);
    auto add_edge = [&](NodeId u, NodeId v) {
        edges.emplace_back(u, v);
        ++degree[u];
        ++degree[v];
    };
    if (k >= 3) {
        for (std::int32_t i = 0; i < k; ++i) add_edge(i, (i + 1) % k);
    } else if (k == 2 && n >= 2) {
        add_edge(0, 1);
    }

    std::vector<double> weight(static_cast<std::size_t>(n));
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    for (NodeId t = k; t < n; ++t) {
        const std::int32_t c = labels[t];
        const NodeId existing = t;
        const std::int64_t m_eff = std::min<std::int64_t>(config.edges_per_node, existing);
        for (NodeId v = 0; v < existing; ++v) {
            chosen[v] = 0;
            // +1 degree smoothing keeps degree-0 seed nodes reachable
            weight[v] = h(c, labels[v]) * static_cast<double>(degree[v] + 1);
        }
        for (std::int64_t draw = 0; draw < m_eff; ++draw) {
            double total = 0;
            for (NodeId v = 0; v < existing; ++v)
                if (!chosen[v]) total += weight[v];
            NodeId target = -1;
            if (total > 0) {
                const double r = rng.uniform() * total;
                double cum = 0;
                for (NodeId v = 0; v < existing; ++v) {
                    if (chosen[v]) continue;
                    cum += weight[v];
                    if (r < cum && weight[v] > 0) {
                        target = v;
                        break;
                    }
                }
                if (target < 0) {  // numerical edge of the cumulative scan
                    for (NodeId v = existing - 1; v >= 0; --v)
                        if (!chosen[v] && weight[v] > 0) {
                            target = v;
                            break;
                        }
                }
            } else {
                // compatibility support exhausted (only possible at h = 0 or 1):
                // fall back to a uniform draw so the node still gets m edges
                std::int64_t remaining = 0;
                for (NodeId v = 0; v < existing; ++v)
                    if (!chosen[v]) ++remaining;
                std::int64_t pick = static_cast<std::int64_t>(
                    rng.uniform_u64(static_cast<std::uint64_t>(remaining)));
                for (NodeId v = 0; v < existing; ++v) {
                    if (chosen[v]) continue;
                    if (pick-- == 0) {
                        target = v;
                        break;
                    }
                }
            }
            chosen[target] = 1;
            add_edge(t, target);
        }
    }

    return Graph::from_edge_list(edges, n, std::move(labels), Matrix(), k);
}

namespace {

Graph attach_synthetic_features(const Graph& g, const SyntheticFeatureConfig& cfg,
                                std::uint64_t seed) {
    if (cfg.dim < 1) throw std::invalid_argument("attach_features: dim must be >= 1");
    if (!(cfg.signal_strength >= 0.0 && cfg.signal_strength <= 1.0))
        throw std::invalid_argument("attach_features: signal_strength outside [0,1]");
    const std::int64_t dim = cfg.dim;
    const std::int32_t k = g.num_classes();
    const std::int64_t signal_dims = std::llround(cfg.signal_strength * static_cast<double>(dim));
    Rng rng(seed);

    std::vector<std::vector<char>> in_signal(k, std::vector<char>(dim, 0));
    std::vector<std::int64_t> idx(dim);
    for (std::int32_t c = 0; c < k; ++c) {
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        for (std::int64_t i = 0; i < signal_dims; ++i) in_signal[c][idx[i]] = 1;
    }

    Matrix x(static_cast<std::size_t>(g.num_nodes()), static_cast<std::size_t>(dim));
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto& sig = in_signal[g.labels()[v]];
        double* xv = x.row(v);
        for (std::int64_t j = 0; j < dim; ++j)
            xv[j] = rng.bernoulli(sig[j] ? kOnProb : kOffProb) ? 1.0 : 0.0;
    }
    return g.with_features(std::move(x));
}

Graph attach_corpus_features(const Graph& g, const CorpusFeatureConfig& cfg,
                             std::uint64_t seed) {
    NodeTable table = read_node_table(cfg.node_table_path);
    const std::int32_t k = g.num_classes();
    std::int32_t corpus_classes = 0;
    for (auto y : table.labels) corpus_classes = std::max(corpus_classes, y + 1);

    std::vector<std::vector<std::int64_t>> corpus_by_class(corpus_classes);
    for (std::size_t i = 0; i < table.labels.size(); ++i)
        corpus_by_class[table.labels[i]].push_back(static_cast<std::int64_t>(i));
    std::vector<std::vector<NodeId>> synth_by_class(k);
    for (NodeId v = 0; v < g.num_nodes(); ++v) synth_by_class[g.labels()[v]].push_back(v);

    // Class mapping psi: match by size, largest first; ties keep class order
    // so a corpus built from the graph itself maps onto identity.
    auto by_size_desc = [](const auto& groups) {
        std::vector<std::int32_t> order(groups.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
            return groups[a].size() > groups[b].size();
        });
        return order;
    };
    const auto synth_order = by_size_desc(synth_by_class);
    const auto corpus_order = by_size_desc(corpus_by_class);
    if (corpus_classes < k)
        throw std::runtime_error("attach_features: corpus has fewer classes than the graph");
    std::vector<std::int32_t> psi(k, -1);
    for (std::int32_t r = 0; r < k; ++r) {
        const std::int32_t sc = synth_order[r];
        const std::int32_t cc = corpus_order[r];
        if (corpus_by_class[cc].size() < synth_by_class[sc].size())
            throw std::runtime_error("attach_features: corpus class " + std::to_string(cc) +
                                     " too small for graph class " + std::to_string(sc) +
                                     " (" + std::to_string(corpus_by_class[cc].size()) + " < " +
                                     std::to_string(synth_by_class[sc].size()) + ")");
        psi[sc] = cc;
    }

    Rng rng(seed);
    Matrix x(static_cast<std::size_t>(g.num_nodes()), table.features.cols());
    for (std::int32_t c = 0; c < k; ++c) {
        std::vector<std::int64_t> rows = corpus_by_class[psi[c]];
        rng.shuffle(rows);
        for (std::size_t i = 0; i < synth_by_class[c].size(); ++i) {
            const NodeId v = synth_by_class[c][i];
            const double* src = table.features.row(static_cast<std::size_t>(rows[i]));
            std::copy(src, src + table.features.cols(), x.row(v));
        }
    }
    return g.with_features(std::move(x));
}

}  // namespace

Graph attach_features(const Graph& g, const FeatureConfig& mode, std::uint64_t seed) {
    if (mode.synthetic) return attach_synthetic_features(g, *mode.synthetic, seed);
    if (mode.corpus) return attach_corpus_features(g, *mode.corpus, seed);
    throw std::invalid_argument("attach_features: no feature mode configured");
}

SplitAssignment make_splits(const Graph& g, const std::array<double, 3>& fractions,
                            std::uint64_t seed) {
    double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("make_splits: fractions must sum to 1");
    for (double f : fractions)
        if (f < 0) throw std::invalid_argument("make_splits: negative fraction");
    int needed = 0;
    for (double f : fractions)
        if (f > 0) ++needed;

    std::vector<std::vector<NodeId>> by_class(g.num_classes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) by_class[g.labels()[v]].push_back(v);

    Rng rng(seed);
    SplitAssignment split;
    split.tags.assign(static_cast<std::size_t>(g.num_nodes()), SplitTag::Test);
    for (std::int32_t c = 0; c < g.num_classes(); ++c) {
        auto& members = by_class[c];
        if (static_cast<int>(members.size()) < needed)
            throw std::runtime_error("make_splits: class " + std::to_string(c) + " has " +
                                     std::to_string(members.size()) +
                                     " nodes, fewer than the " + std::to_string(needed) +
                                     " nonempty splits");
        rng.shuffle(members);

        const std::size_t size = members.size();
        std::array<std::size_t, 3> counts{};
        std::array<double, 3> remainder{};
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            double exact = fractions[s] * static_cast<double>(size);
            counts[s] = static_cast<std::size_t>(exact);
            remainder[s] = exact - static_cast<double>(counts[s]);
            assigned += counts[s];
        }
        std::array<int, 3> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return remainder[a] > remainder[b]; });
        for (int r = 0; assigned < size; ++assigned, ++r) ++counts[order[r % 3]];
        // every nonzero-fraction split gets at least one node
        for (int s = 0; s < 3; ++s) {
            while (fractions[s] > 0 && counts[s] == 0) {
                int donor = static_cast<int>(
                    std::max_element(counts.begin(), counts.end()) - counts.begin());
                --counts[donor];
                ++counts[s];
            }
        }
        std::size_t pos = 0;
        for (int s = 0; s < 3; ++s)
            for (std::size_t i = 0; i < counts[s]; ++i)
                split.tags[members[pos++]] = static_cast<SplitTag>(s);
    }
    return split;
}

}  // namespace heterograph
