#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "heterograph/dataio.hpp"
#include "heterograph/rng.hpp"
#include "heterograph/synth.hpp"
#include "test_util.hpp"

using namespace heterograph;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

GraphBundle random_bundle(std::uint64_t seed, NodeId n = 60) {
    GenConfig cfg;
    cfg.n = n;
    cfg.num_classes = 4;
    cfg.target_h = 0.4;
    cfg.edges_per_node = 2;
    cfg.seed = seed;
    cfg.features.synthetic = SyntheticFeatureConfig{10, 0.3};
    Graph g = attach_features(generate_graph(cfg), cfg.features, seed + 1);
    GraphBundle bundle;
    bundle.graph = g;
    bundle.splits.push_back(make_splits(g, {0.25, 0.25, 0.5}, seed + 2));
    bundle.splits.push_back(make_splits(g, {0.25, 0.25, 0.5}, seed + 3));
    bundle.name = "bundle" + std::to_string(seed);
    bundle.measured_h = edge_homophily(g);
    return bundle;
}

}  // namespace

TEST_CASE("bundle write/load round-trips byte-identically") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        const fs::path d1 = temp_dir("hg_bundle_a");
        const fs::path d2 = temp_dir("hg_bundle_b");
        GraphBundle bundle = random_bundle(seed);
        write_bundle(d1.string(), bundle);
        GraphBundle loaded = load_bundle(d1.string());
        loaded.name = bundle.name;  // directory name otherwise
        write_bundle(d2.string(), loaded);
        for (const char* file : {"edges.tsv", "nodes.csv", "splits.json", "splits_1.json"})
            CHECK(slurp(d1 / file) == slurp(d2 / file));
        CHECK(loaded.measured_h == bundle.measured_h);
        CHECK(loaded.graph.col_indices() == bundle.graph.col_indices());
        CHECK(loaded.graph.labels() == bundle.graph.labels());
        CHECK(max_abs_diff(loaded.graph.features(), bundle.graph.features()) == 0.0);
        fs::remove_all(d1);
        fs::remove_all(d2);
    }
}

TEST_CASE("loader errors carry file names and line numbers") {
    const fs::path dir = temp_dir("hg_bundle_bad");
    GraphBundle bundle = random_bundle(9, 30);
    write_bundle(dir.string(), bundle);

    SUBCASE("missing nodes.csv") {
        fs::remove(dir / "nodes.csv");
        CHECK_THROWS_WITH_AS(load_bundle(dir.string()), doctest::Contains("nodes.csv"),
                             std::runtime_error);
    }
    SUBCASE("malformed edge line") {
        std::ofstream out(dir / "edges.tsv", std::ios::app);
        out << "7\n";
        out.close();
        CHECK_THROWS_WITH_AS(load_bundle(dir.string()), doctest::Contains("edges.tsv:"),
                             std::runtime_error);
    }
    SUBCASE("split references unknown node") {
        std::ofstream out(dir / "splits.json");
        out << R"({"train": [0, 999], "val": [], "test": []})";
        out.close();
        CHECK_THROWS_WITH_AS(load_bundle(dir.string()), doctest::Contains("unknown node"),
                             std::runtime_error);
    }
    SUBCASE("missing split file") {
        fs::remove(dir / "splits.json");
        fs::remove(dir / "splits_1.json");
        CHECK_THROWS_WITH_AS(load_bundle(dir.string()), doctest::Contains("splits.json"),
                             std::runtime_error);
    }
    fs::remove_all(dir);
}

TEST_CASE("loader symmetrizes one-directional edge files") {
    const fs::path dir = temp_dir("hg_bundle_asym");
    GraphBundle bundle = random_bundle(11, 30);
    write_bundle(dir.string(), bundle);  // writer emits u < v only, already one-directional
    GraphBundle loaded = load_bundle(dir.string());
    // symmetric adjacency regardless
    const Graph& g = loaded.graph;
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        for (NodeId v : g.neighbors(u)) {
            auto nb = g.neighbors(v);
            CHECK(std::binary_search(nb.begin(), nb.end(), u));
        }
    CHECK(g.num_edges() == bundle.graph.num_edges());
    fs::remove_all(dir);
}

TEST_CASE("edge list comments and ingest stats") {
    const fs::path dir = temp_dir("hg_edges");
    {
        std::ofstream out(dir / "edges.tsv");
        out << "# comment line\n0\t1\n\n1\t0\n2\t2\n";
    }
    auto edges = read_edge_list((dir / "edges.tsv").string());
    CHECK(edges.size() == 3);
    BuildStats stats;
    Graph g = Graph::from_edge_list(edges, 3, {0, 0, 0}, Matrix(), 1, &stats);
    CHECK(g.num_edges() == 1);
    CHECK(stats.self_loops_dropped == 1);
    CHECK(stats.mirrored_edges_added == 0);  // both directions present
    fs::remove_all(dir);
}

TEST_CASE("results summary statistics") {
    const fs::path dir = temp_dir("hg_results");
    std::vector<RunRecord> records;
    for (double acc : {0.5, 0.6, 0.7}) {
        RunRecord r;
        r.dataset = "d";
        r.h = 0.3;
        r.variant = "S0";
        r.split = 0;
        r.seed = static_cast<std::uint64_t>(acc * 100);
        r.train_acc = r.val_acc = r.test_acc = acc;
        r.epochs = 10;
        records.push_back(r);
    }
    write_results(records, dir.string());

    nlohmann::json summary;
    std::ifstream(dir / "summary.json") >> summary;
    REQUIRE(summary["summaries"].size() == 1);
    CHECK(summary["summaries"][0]["test_acc_mean"].get<double>() ==
          doctest::Approx(0.6).epsilon(1e-12));
    CHECK(summary["summaries"][0]["test_acc_stdev"].get<double>() ==
          doctest::Approx(0.1).epsilon(1e-9));

    auto loaded = read_results((dir / "results.csv").string());
    REQUIRE(loaded.size() == 3);
    CHECK(loaded[1].test_acc == 0.6);
    CHECK(loaded[1].variant == "S0");

    // single record: stdev reported as 0 by convention
    write_results({records[0]}, dir.string());
    std::ifstream(dir / "summary.json") >> summary;
    CHECK(summary["summaries"][0]["test_acc_stdev"].get<double>() == 0.0);

    CHECK_THROWS_AS(write_results({}, dir.string()), std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("mean_stdev hand arithmetic") {
    auto ms = mean_stdev({0.5, 0.6, 0.7});
    CHECK(ms.mean == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(ms.stdev == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(mean_stdev({0.42}).stdev == 0.0);
    CHECK(mean_stdev({}).count == 0);
}

TEST_CASE("user-supplied real dataset reproduces its homophily ratio") {
    // only runs when a bundle-format copy of the Texas web graph is provided
    const char* dir = std::getenv("HG_TEXAS_BUNDLE");
    if (!dir) return;
    GraphBundle texas = load_bundle(dir);
    CHECK(texas.measured_h == doctest::Approx(0.11).epsilon(0.05));
}

TEST_CASE("node table parsing rejects bad ids") {
    const fs::path dir = temp_dir("hg_nodes");
    {
        std::ofstream out(dir / "nodes.csv");
        out << "id,label,f0\n0,0,1.5\n0,1,2.5\n";
    }
    CHECK_THROWS_WITH_AS(read_node_table((dir / "nodes.csv").string()),
                         doctest::Contains("permutation"), std::runtime_error);
    fs::remove_all(dir);
}
