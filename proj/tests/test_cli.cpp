#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "heterograph/cli.hpp"
#include "heterograph/dataio.hpp"

using namespace heterograph;
namespace fs = std::filesystem;
using nlohmann::json;

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

json tiny_generate_config(const std::string& out, std::vector<double> h_grid,
                          int replicates) {
    return json{{"base_seed", 7},
                {"generate",
                 json{{"out", out},
                      {"n", 80},
                      {"num_classes", 4},
                      {"edges_per_node", 2},
                      {"h_grid", h_grid},
                      {"replicates", replicates},
                      {"features", json{{"mode", "synthetic"}, {"dim", 12},
                                        {"signal_strength", 0.3}}}}}};
}

cli::Options opts_with(bool force = false, bool dry = false) {
    cli::Options opts;
    opts.force = force;
    opts.dry_run = dry;
    opts.jobs = 2;
    return opts;
}

}  // namespace

TEST_CASE("generate: grid x replicates bundles, deterministic bytes") {
    const fs::path out = temp_dir("hg_cli_gen");
    json config = tiny_generate_config(out.string(), {0.2, 0.8}, 2);
    CHECK(cli::cmd_generate(config, opts_with()) == 0);

    std::vector<std::string> dirs;
    for (const auto& e : fs::directory_iterator(out)) dirs.push_back(e.path().filename());
    CHECK(dirs.size() == 4);

    GraphBundle bundle = load_bundle((out / "syn-h0.2-0").string());
    CHECK(bundle.graph.num_nodes() == 80);
    CHECK(bundle.meta.at("target_h").get<double>() == 0.2);

    // byte-identical on rerun with the same seed
    const std::string before = slurp(out / "syn-h0.8-1" / "edges.tsv") +
                               slurp(out / "syn-h0.8-1" / "nodes.csv") +
                               slurp(out / "syn-h0.8-1" / "meta.json");
    CHECK(cli::cmd_generate(config, opts_with(/*force=*/true)) == 0);
    const std::string after = slurp(out / "syn-h0.8-1" / "edges.tsv") +
                              slurp(out / "syn-h0.8-1" / "nodes.csv") +
                              slurp(out / "syn-h0.8-1" / "meta.json");
    CHECK(before == after);

    // non-empty output dir without --force is refused
    CHECK_THROWS_WITH_AS(cli::cmd_generate(config, opts_with()), doctest::Contains("--force"),
                         std::runtime_error);
    fs::remove_all(out);
}

TEST_CASE("generate: the syn sweep grid yields 33 bundles") {
    const fs::path out = temp_dir("hg_cli_grid33");
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
    json config = tiny_generate_config(out.string(), grid, 3);
    CHECK(cli::cmd_generate(config, opts_with()) == 0);
    std::size_t count = 0;
    for (const auto& e : fs::directory_iterator(out)) {
        (void)e;
        ++count;
    }
    CHECK(count == 33);
    fs::remove_all(out);
}

TEST_CASE("config schema: unknown keys and missing fields carry paths") {
    json bad = tiny_generate_config("/tmp/x", {0.5}, 1);
    bad["generate"]["typo_key"] = 1;
    CHECK_THROWS_WITH_AS(cli::cmd_generate(bad, opts_with()),
                         doctest::Contains("generate.typo_key"), cli::ConfigError);

    json missing = json{{"generate", json{{"out", "/tmp/x"}}}};
    CHECK_THROWS_WITH_AS(cli::cmd_generate(missing, opts_with()),
                         doctest::Contains("generate.n"), cli::ConfigError);

    json bad_variant = json{{"train", json{{"out", "/tmp/x"},
                                           {"bundles", json::array({"/tmp/b"})},
                                           {"variants", json::array({"NOPE"})}}}};
    CHECK_THROWS_AS(cli::cmd_train(bad_variant, opts_with()), cli::ConfigError);

    json bad_precision = json{{"train", json{{"out", "/tmp/x"},
                                             {"bundles", json::array({"/tmp/b"})},
                                             {"variants", json::array({"MLP"})},
                                             {"train", json{{"precision", "float16"}}}}}};
    CHECK_THROWS_WITH_AS(cli::cmd_train(bad_precision, opts_with()),
                         doctest::Contains("precision"), cli::ConfigError);
}

TEST_CASE("train: run grid, dry-run, seed stability under variant addition") {
    const fs::path bundles = temp_dir("hg_cli_train_bundles");
    json gen = tiny_generate_config(bundles.string(), {0.5, 0.9}, 1);
    REQUIRE(cli::cmd_generate(gen, opts_with()) == 0);
    const std::string b0 = (bundles / "syn-h0.5-0").string();
    const std::string b1 = (bundles / "syn-h0.9-0").string();

    const fs::path out = temp_dir("hg_cli_train_out");
    json config = json{
        {"base_seed", 11},
        {"train", json{{"out", out.string()},
                       {"bundles", json::array({b0, b1})},
                       {"variants", json::array({"MLP", "S0", "NS1"})},
                       {"dropout", 0.0},
                       {"train", json{{"max_epochs", 15}, {"patience", 15},
                                      {"embed_dim", 8}}}}}};

    SUBCASE("dry run writes nothing") {
        fs::remove_all(out);
        CHECK(cli::cmd_train(config, opts_with(false, /*dry=*/true)) == 0);
        CHECK(!fs::exists(out / "results.csv"));
    }

    SUBCASE("2 bundles x 3 variants x 1 split = 6 rows") {
        CHECK(cli::cmd_train(config, opts_with(true)) == 0);
        auto records = read_results((out / "results.csv").string());
        CHECK(records.size() == 6);
        for (const auto& r : records) {
            CHECK(!r.failed);
            CHECK(r.test_acc >= 0.0);
            CHECK(r.test_acc <= 1.0);
        }

        // adding a variant must not perturb existing run seeds
        std::map<std::pair<std::string, std::string>, std::uint64_t> seeds;
        for (const auto& r : records) seeds[{r.dataset, r.variant}] = r.seed;
        json wider = config;
        wider["train"]["variants"] = json::array({"MLP", "S0", "NS1", "N0"});
        const fs::path out2 = temp_dir("hg_cli_train_out2");
        wider["train"]["out"] = out2.string();
        CHECK(cli::cmd_train(wider, opts_with(true)) == 0);
        for (const auto& r : read_results((out2 / "results.csv").string())) {
            if (r.variant == "N0") continue;
            CHECK(r.seed == seeds.at({r.dataset, r.variant}));
        }
        fs::remove_all(out2);
    }
    fs::remove_all(bundles);
    fs::remove_all(out);
}

TEST_CASE("report: merge, duplicate detection, pivot output") {
    const fs::path dir = temp_dir("hg_cli_report");
    auto make_records = [](const std::string& dataset, double h, double acc) {
        RunRecord r;
        r.dataset = dataset;
        r.h = h;
        r.variant = "S0";
        r.split = 0;
        r.seed = 1;
        r.train_acc = r.val_acc = r.test_acc = acc;
        r.epochs = 5;
        return std::vector<RunRecord>{r};
    };
    write_results(make_records("a", 0.1, 0.5), (dir / "r1").string());
    write_results(make_records("b", 0.9, 0.9), (dir / "r2").string());

    json config = json{{"report",
                        json{{"out", (dir / "merged").string()},
                             {"inputs", json::array({(dir / "r1" / "results.csv").string(),
                                                     (dir / "r2" / "results.csv").string()})}}}};
    CHECK(cli::cmd_report(config, opts_with()) == 0);
    auto merged = read_results((dir / "merged" / "results.csv").string());
    CHECK(merged.size() == 2);
    CHECK(fs::exists(dir / "merged" / "accuracy_vs_h.csv"));
    CHECK(fs::exists(dir / "merged" / "report.md"));

    // duplicated input -> error listing the colliding key
    json dup = config;
    dup["report"]["inputs"] = json::array({(dir / "r1" / "results.csv").string(),
                                           (dir / "r1" / "results.csv").string()});
    dup["report"]["out"] = (dir / "merged2").string();
    CHECK_THROWS_WITH_AS(cli::cmd_report(dup, opts_with()), doctest::Contains("duplicate"),
                         std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("analyze: thresholds and two-hop tables") {
    const fs::path out = temp_dir("hg_cli_analyze");
    json config = json{
        {"analyze",
         json{{"out", out.string()},
              {"thresholds", json{{"h_grid", json::array({0.1, 0.5})},
                                  {"degrees", json::array({5, 20})},
                                  {"num_classes", json::array({3, 5})},
                                  {"verify_weights", true}}},
              {"two_hop",
               json{{"h_grid", json::array({0.0, 0.3})}, {"num_classes", json::array({5})}}}}}};
    CHECK(cli::cmd_analyze(config, opts_with()) == 0);
    CHECK(fs::exists(out / "thresholds.csv"));
    CHECK(fs::exists(out / "thresholds.json"));
    CHECK(fs::exists(out / "twohop.csv"));
    const std::string csv = slurp(out / "thresholds.csv");
    CHECK(csv.find("1.5") != std::string::npos);  // h=0.1, d=20, |Y|=5

    json nothing = json{{"analyze", json{{"out", out.string()}}}};
    CHECK_THROWS_AS(cli::cmd_analyze(nothing, opts_with(true)), cli::ConfigError);
    fs::remove_all(out);
}

TEST_CASE("analyze: spectral report on a generated bundle") {
    const fs::path bundles = temp_dir("hg_cli_spec_bundles");
    json gen = tiny_generate_config(bundles.string(), {0.3}, 1);
    REQUIRE(cli::cmd_generate(gen, opts_with()) == 0);

    const fs::path out = temp_dir("hg_cli_spec_out");
    json config = json{{"analyze",
                        json{{"out", out.string()},
                             {"spectral", json{{"bundle", (bundles / "syn-h0.3-0").string()},
                                               {"signals", "labels"}}}}}};
    CHECK(cli::cmd_analyze(config, opts_with(true)) == 0);
    json spectral;
    std::ifstream(out / "spectral.json") >> spectral;
    CHECK(spectral["parseval_residual"].get<double>() < 1e-9);
    CHECK(std::abs(spectral["lambda0"].get<double>()) < 1e-9);
    CHECK(fs::exists(out / "tail_energy.csv"));
    fs::remove_all(bundles);
    fs::remove_all(out);
}
