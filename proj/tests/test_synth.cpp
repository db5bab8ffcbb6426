#include <filesystem>

#include "doctest.h"

#include "heterograph/dataio.hpp"
#include "heterograph/rng.hpp"
#include "heterograph/synth.hpp"
#include "test_util.hpp"

using namespace heterograph;

namespace {

GenConfig base_config(NodeId n, std::int32_t k, double h, std::int64_t m, std::uint64_t seed) {
    GenConfig cfg;
    cfg.n = n;
    cfg.num_classes = k;
    cfg.target_h = h;
    cfg.edges_per_node = m;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("compatibility_from_h closed forms") {
    Matrix id3 = compatibility_from_h(1.0, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(id3(i, j) == (i == j ? 1.0 : 0.0));

    Matrix flip = compatibility_from_h(0.0, 2);
    CHECK(flip(0, 0) == 0.0);
    CHECK(flip(0, 1) == 1.0);
    CHECK(flip(1, 0) == 1.0);

    Matrix m = compatibility_from_h(0.1, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(m(i, j) == doctest::Approx(i == j ? 0.1 : 0.225).epsilon(1e-12));
    CHECK(is_row_stochastic(m, 1e-12));

    CHECK(compatibility_from_h(0.3, 1)(0, 0) == 1.0);
    CHECK_THROWS(compatibility_from_h(1.5, 3));
}

TEST_CASE("generator structure and edge-count law") {
    GenConfig cfg = base_config(300, 5, 0.4, 2, 17);
    Graph g = generate_graph(cfg);
    CHECK(g.num_nodes() == 300);
    // |E| = m(n - |Y|) + |Y| for the ring seed
    CHECK(g.num_edges() == 2 * (300 - 5) + 5);
    // every attached node is born with degree >= m
    for (NodeId v = 5; v < g.num_nodes(); ++v) CHECK(g.degree(v) >= 2);
    // balanced classes
    std::vector<int> counts(5, 0);
    for (auto y : g.labels()) ++counts[y];
    for (int c : counts) CHECK(c == 60);
}

TEST_CASE("generator determinism") {
    GenConfig cfg = base_config(200, 4, 0.3, 2, 99);
    Graph a = generate_graph(cfg);
    Graph b = generate_graph(cfg);
    CHECK(a.col_indices() == b.col_indices());
    CHECK(a.row_ptr() == b.row_ptr());
    CHECK(a.labels() == b.labels());

    cfg.seed = 100;
    Graph c = generate_graph(cfg);
    CHECK(a.col_indices() != c.col_indices());
}

TEST_CASE("generator hits the target homophily at syn-cora scale") {
    GenConfig cfg = base_config(1490, 5, 0.9, 2, 7);
    Graph g = generate_graph(cfg);
    CHECK(g.num_edges() == 2 * (1490 - 5) + 5);
    const double avg_degree =
        2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes());
    CHECK(avg_degree == doctest::Approx(3.98).epsilon(0.01));
    const double h = edge_homophily(g);
    CHECK(h > 0.85);
    CHECK(h < 0.95);
}

TEST_CASE("target_h = 1 attaches only intra-class edges") {
    // The ring seed contributes |Y| inter-class edges and the first attached
    // node of each class one uniform-fallback edge (m=2); everything else is
    // intra-class, deterministically.
    GenConfig cfg = base_config(200, 5, 1.0, 2, 3);
    Graph g = generate_graph(cfg);
    std::int64_t inter = 0;
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v && g.labels()[u] != g.labels()[v]) ++inter;
    CHECK(inter == 10);
    CHECK(edge_homophily(g) ==
          doctest::Approx(1.0 - 10.0 / static_cast<double>(g.num_edges())).epsilon(1e-12));
}

TEST_CASE("power-law-ish degree skew") {
    GenConfig cfg = base_config(2000, 5, 0.5, 2, 21);
    Graph g = generate_graph(cfg);
    std::int64_t max_deg = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) max_deg = std::max(max_deg, g.degree(v));
    const double avg = 2.0 * static_cast<double>(g.num_edges()) / g.num_nodes();
    CHECK(max_deg > 5 * static_cast<std::int64_t>(avg));  // heavy tail
}

TEST_CASE("synthetic features separate classes") {
    GenConfig cfg = base_config(400, 5, 0.5, 2, 5);
    cfg.features.synthetic = SyntheticFeatureConfig{100, 0.2};
    Graph g = generate_graph(cfg);
    g = attach_features(g, cfg.features, 91);
    CHECK(g.feature_dim() == 100);

    Rng rng(13);
    double same_sum = 0, cross_sum = 0;
    std::int64_t same_n = 0, cross_n = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        NodeId a = static_cast<NodeId>(rng.uniform_u64(400));
        NodeId b = static_cast<NodeId>(rng.uniform_u64(400));
        if (a == b) continue;
        double overlap = 0;
        for (std::int64_t j = 0; j < 100; ++j)
            overlap += g.features()(a, j) * g.features()(b, j);
        if (g.labels()[a] == g.labels()[b]) {
            same_sum += overlap;
            ++same_n;
        } else {
            cross_sum += overlap;
            ++cross_n;
        }
    }
    REQUIRE(same_n > 50);
    REQUIRE(cross_n > 50);
    CHECK(same_sum / same_n > cross_sum / cross_n);
}

TEST_CASE("signal_strength 0 removes class information") {
    GenConfig cfg = base_config(500, 5, 0.5, 2, 5);
    FeatureConfig mode;
    mode.synthetic = SyntheticFeatureConfig{100, 0.0};
    Graph g = attach_features(generate_graph(cfg), mode, 8);
    double global = 0;
    std::vector<double> per_class(5, 0.0);
    std::vector<std::int64_t> class_cells(5, 0);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        for (std::int64_t j = 0; j < 100; ++j) {
            global += g.features()(v, j);
            per_class[g.labels()[v]] += g.features()(v, j);
        }
        class_cells[g.labels()[v]] += 100;
    }
    global /= 500.0 * 100.0;
    for (int c = 0; c < 5; ++c)
        CHECK(std::abs(per_class[c] / class_cells[c] - global) < 0.01);
}

TEST_CASE("corpus features from the graph's own table are a class permutation") {
    namespace fs = std::filesystem;
    GenConfig cfg = base_config(120, 4, 0.6, 2, 44);
    cfg.features.synthetic = SyntheticFeatureConfig{24, 0.25};
    Graph g = attach_features(generate_graph(cfg), cfg.features, 3);

    const fs::path dir = fs::temp_directory_path() / "hg_corpus_test";
    fs::remove_all(dir);
    GraphBundle bundle;
    bundle.graph = g;
    bundle.splits.push_back(make_splits(g, {0.25, 0.25, 0.5}, 0));
    bundle.name = "corpus";
    bundle.measured_h = edge_homophily(g);
    write_bundle(dir.string(), bundle);

    FeatureConfig corpus;
    corpus.corpus = CorpusFeatureConfig{(dir / "nodes.csv").string()};
    Graph resampled = attach_features(g, corpus, 77);

    auto rows_of_class = [](const Graph& graph, std::int32_t c) {
        std::vector<std::vector<double>> rows;
        for (NodeId v = 0; v < graph.num_nodes(); ++v) {
            if (graph.labels()[v] != c) continue;
            rows.emplace_back(graph.features().row(v),
                              graph.features().row(v) + graph.feature_dim());
        }
        std::sort(rows.begin(), rows.end());
        return rows;
    };
    for (std::int32_t c = 0; c < 4; ++c) CHECK(rows_of_class(g, c) == rows_of_class(resampled, c));
    fs::remove_all(dir);
}

TEST_CASE("corpus class too small names the class") {
    namespace fs = std::filesystem;
    GenConfig small_cfg = base_config(20, 2, 0.5, 1, 1);
    small_cfg.features.synthetic = SyntheticFeatureConfig{8, 0.5};
    Graph small = attach_features(generate_graph(small_cfg), small_cfg.features, 2);
    const fs::path dir = fs::temp_directory_path() / "hg_corpus_small";
    fs::remove_all(dir);
    GraphBundle bundle;
    bundle.graph = small;
    bundle.splits.push_back(make_splits(small, {0.34, 0.33, 0.33}, 0));
    bundle.name = "small";
    bundle.measured_h = edge_homophily(small);
    write_bundle(dir.string(), bundle);

    GenConfig big_cfg = base_config(200, 2, 0.5, 1, 9);
    Graph big = generate_graph(big_cfg);
    FeatureConfig corpus;
    corpus.corpus = CorpusFeatureConfig{(dir / "nodes.csv").string()};
    CHECK_THROWS_WITH_AS(attach_features(big, corpus, 0),
                         doctest::Contains("too small for graph class"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("make_splits is stratified and deterministic") {
    Graph g = generate_graph(base_config(100, 5, 0.5, 2, 12));
    SplitAssignment s = make_splits(g, {0.25, 0.25, 0.5}, 4);
    CHECK(s.count(SplitTag::Train) == 25);
    CHECK(s.count(SplitTag::Val) == 25);
    CHECK(s.count(SplitTag::Test) == 50);
    std::vector<int> train_per_class(5, 0);
    for (NodeId v : s.indices_of(SplitTag::Train)) ++train_per_class[g.labels()[v]];
    for (int c : train_per_class) CHECK(c == 5);

    SplitAssignment all_train = make_splits(g, {1.0, 0.0, 0.0}, 4);
    CHECK(all_train.count(SplitTag::Train) == 100);

    SplitAssignment s2 = make_splits(g, {0.25, 0.25, 0.5}, 5);
    CHECK(s2.tags != s.tags);
    CHECK(s2.count(SplitTag::Train) == s.count(SplitTag::Train));
    std::vector<int> train_per_class2(5, 0);
    for (NodeId v : s2.indices_of(SplitTag::Train)) ++train_per_class2[g.labels()[v]];
    CHECK(train_per_class2 == train_per_class);

    CHECK_THROWS(make_splits(g, {0.5, 0.25, 0.5}, 0));  // fractions must sum to 1
}

TEST_CASE("make_splits rejects classes too small to cover every split") {
    Graph g = Graph::from_edge_list({{0, 1}}, 3, {0, 0, 1}, Matrix(), 2);
    CHECK_THROWS_WITH_AS(make_splits(g, {0.34, 0.33, 0.33}, 0), doctest::Contains("class 0"),
                         std::runtime_error);
    CHECK_NOTHROW(make_splits(g, {1.0, 0.0, 0.0}, 0));
}
