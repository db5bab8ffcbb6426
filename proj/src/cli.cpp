#include "heterograph/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "heterograph/analysis.hpp"
#include "heterograph/dataio.hpp"
#include "heterograph/logging.hpp"
#include "heterograph/model.hpp"
#include "heterograph/rng.hpp"
#include "heterograph/synth.hpp"
#include "heterograph/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace heterograph::cli {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// ---- schema helpers -------------------------------------------------------

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError(path + "." + it.key() + ": unknown key");
    }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(path + "." + key + ": missing");
    return obj.at(key);
}

template <typename T>
T get_as(const json& v, const std::string& path) {
    try {
        return v.get<T>();
    } catch (const std::exception&) {
        throw ConfigError(path + ": wrong type");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return get_as<T>(obj.at(key), path + "." + key);
}

std::vector<double> get_double_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected nonempty array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(get_as<double>(e, path));
    return out;
}

std::vector<std::string> get_string_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected nonempty array");
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(get_as<std::string>(e, path));
    return out;
}

std::uint64_t base_seed_of(const json& config, const Options& opts) {
    if (opts.seed_override) return *opts.seed_override;
    return get_or<std::uint64_t>(config, "", "base_seed", 0);
}

void ensure_out_dir(const std::string& out, bool force) {
    const fs::path dir(out);
    if (fs::exists(dir) && !fs::is_directory(dir))
        throw std::runtime_error(out + " exists and is not a directory");
    if (fs::is_directory(dir) && !fs::is_empty(dir) && !force)
        throw std::runtime_error(out + " is not empty (pass --force to reuse)");
    fs::create_directories(dir);
}

// ---- run execution --------------------------------------------------------

struct RunSpec {
    std::size_t bundle_index = 0;
    std::string variant;
    std::int32_t split = 0;
    std::int32_t seed_index = 0;
    std::uint64_t seed = 0;
};

struct TrainSection {
    TrainConfig config;
    std::optional<double> dropout;
    std::optional<Nonlinearity> nonlinearity;
    bool write_history = false;
    bool save_checkpoints = false;
    std::vector<std::int64_t> degree_buckets;  // empty = no bucket report
};

TrainSection parse_train_section(const json& section, const std::string& path) {
    TrainSection out;
    if (section.contains("train")) {
        const json& t = section.at("train");
        const std::string tp = path + ".train";
        reject_unknown(t, tp, {"learning_rate", "l2", "max_epochs", "patience", "embed_dim",
                               "precision"});
        out.config.learning_rate = get_or<double>(t, tp, "learning_rate", 0.01);
        out.config.l2 = get_or<double>(t, tp, "l2", 5e-4);
        out.config.max_epochs = get_or<std::int64_t>(t, tp, "max_epochs", 2000);
        out.config.patience = get_or<std::int64_t>(t, tp, "patience", 100);
        out.config.embed_dim = get_or<std::int64_t>(t, tp, "embed_dim", 64);
        const std::string precision = get_or<std::string>(t, tp, "precision", "float64");
        if (precision == "float32")
            out.config.precision = Precision::Float32;
        else if (precision != "float64")
            throw ConfigError(tp + ".precision: expected float64 or float32");
    }
    if (section.contains("dropout"))
        out.dropout = get_as<double>(section.at("dropout"), path + ".dropout");
    if (section.contains("nonlinearity")) {
        const std::string s =
            get_as<std::string>(section.at("nonlinearity"), path + ".nonlinearity");
        if (s == "relu")
            out.nonlinearity = Nonlinearity::ReLU;
        else if (s == "identity")
            out.nonlinearity = Nonlinearity::Identity;
        else
            throw ConfigError(path + ".nonlinearity: expected relu or identity");
    }
    out.write_history = get_or<bool>(section, path, "write_history", false);
    out.save_checkpoints = get_or<bool>(section, path, "save_checkpoints", false);
    if (section.contains("degree_buckets")) {
        for (const auto& b : section.at("degree_buckets"))
            out.degree_buckets.push_back(get_as<std::int64_t>(b, path + ".degree_buckets"));
        if (out.degree_buckets.empty())
            throw ConfigError(path + ".degree_buckets: expected nonempty array");
    }
    out.config.validate();
    return out;
}

VariantConfig variant_for_run(const std::string& code, const TrainSection& section) {
    VariantConfig v = variant_from_code(code);
    if (section.dropout) v.dropout_rate = *section.dropout;
    if (section.nonlinearity) v.embed_nonlinearity = *section.nonlinearity;
    v.validate();
    return v;
}

double bundle_h(const GraphBundle& bundle) {
    if (bundle.meta.contains("target_h")) return bundle.meta.at("target_h").get<double>();
    return bundle.measured_h;
}

std::vector<RunRecord> execute_runs(const std::vector<GraphBundle>& bundles,
                                    const std::vector<RunSpec>& specs,
                                    const TrainSection& section, const std::string& out_dir,
                                    int jobs) {
    std::vector<RunRecord> records(specs.size());
    std::vector<std::string> bucket_rows(specs.size());
    if (section.write_history) fs::create_directories(fs::path(out_dir) / "history");
    if (section.save_checkpoints) fs::create_directories(fs::path(out_dir) / "checkpoints");
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) return;
            const RunSpec& spec = specs[i];
            const GraphBundle& bundle = bundles[spec.bundle_index];
            RunRecord rec;
            rec.dataset = bundle.name;
            rec.h = bundle_h(bundle);
            rec.variant = spec.variant;
            rec.split = spec.split;
            rec.seed = spec.seed;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                VariantConfig variant = variant_for_run(spec.variant, section);
                TrainConfig cfg = section.config;
                cfg.seed = spec.seed;
                TrainResult result = train(bundle.graph, bundle.splits[spec.split], variant, cfg);
                const auto ops = build_operators(bundle.graph, variant);
                const auto& split = bundle.splits[spec.split];
                rec.train_acc = evaluate(result.best_params, bundle.graph, ops, variant,
                                         split.indices_of(SplitTag::Train));
                rec.val_acc = result.best_val_acc;
                rec.test_acc = evaluate(result.best_params, bundle.graph, ops, variant,
                                        split.indices_of(SplitTag::Test));
                rec.epochs = result.epochs_run;
                const std::string run_name = bundle.name + "-" + spec.variant + "-s" +
                                             std::to_string(spec.split) + "-r" +
                                             std::to_string(spec.seed_index);
                if (section.write_history)
                    write_history((fs::path(out_dir) / "history" / (run_name + ".csv")).string(),
                                  result.history);
                if (section.save_checkpoints)
                    save_params(
                        (fs::path(out_dir) / "checkpoints" / (run_name + ".bin")).string(),
                        result.best_params);
                if (!section.degree_buckets.empty()) {
                    Matrix logits = forward(result.best_params, bundle.graph, ops, variant,
                                            Mode::Eval, 0);
                    auto buckets = degree_bucket_accuracy(
                        predict(logits), bundle.graph.labels(), bundle.graph,
                        section.degree_buckets, split.indices_of(SplitTag::Test));
                    std::string rows;
                    for (const auto& b : buckets) {
                        rows += bundle.name + "," + spec.variant + "," +
                                std::to_string(spec.split) + "," + std::to_string(spec.seed) +
                                "," + std::to_string(b.lo) + "," + std::to_string(b.hi) + "," +
                                std::to_string(b.count) + "," +
                                (b.accuracy ? fmt_double(*b.accuracy) : "") + "\n";
                    }
                    bucket_rows[i] = std::move(rows);
                }
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
                rec.train_acc = rec.val_acc = rec.test_acc =
                    std::numeric_limits<double>::quiet_NaN();
                log::error("run failed (", rec.dataset, ", ", rec.variant, ", split ",
                           rec.split, "): ", e.what());
            }
            rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            records[i] = std::move(rec);
            log::info("run ", i + 1, "/", specs.size(), " done: ", records[i].dataset, " ",
                      records[i].variant);
        }
    };
    const int n_threads = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (!section.degree_buckets.empty()) {
        std::ofstream out(fs::path(out_dir) / "degree_buckets.csv", std::ios::binary);
        out << "dataset,variant,split,seed,degree_lo,degree_hi,count,accuracy\n";
        for (const auto& rows : bucket_rows) out << rows;
    }
    return records;
}

std::vector<RunSpec> plan_runs(const std::vector<GraphBundle>& bundles,
                               const std::vector<std::string>& variants,
                               std::int32_t num_seeds, std::uint64_t base_seed) {
    std::vector<RunSpec> specs;
    for (std::size_t b = 0; b < bundles.size(); ++b) {
        for (const auto& variant : variants) {
            for (std::size_t s = 0; s < bundles[b].splits.size(); ++s) {
                for (std::int32_t r = 0; r < num_seeds; ++r) {
                    RunSpec spec;
                    spec.bundle_index = b;
                    spec.variant = variant;
                    spec.split = static_cast<std::int32_t>(s);
                    spec.seed_index = r;
                    spec.seed = base_seed ^ fnv1a64("run|" + bundles[b].name + "|" + variant +
                                                    "|" + std::to_string(s) + "|" +
                                                    std::to_string(r));
                    specs.push_back(std::move(spec));
                }
            }
        }
    }
    return specs;
}

int run_training_command(const json& section, const std::string& section_name,
                         const std::vector<std::string>& variants, const Options& opts,
                         std::uint64_t base_seed, std::vector<RunRecord>* records_out) {
    const std::string out =
        opts.out_override ? *opts.out_override : get_as<std::string>(require(section, section_name, "out"), section_name + ".out");
    const auto bundle_dirs =
        get_string_list(require(section, section_name, "bundles"), section_name + ".bundles");
    const std::int32_t num_seeds = get_or<std::int32_t>(section, section_name, "num_seeds", 1);
    if (num_seeds < 1) throw ConfigError(section_name + ".num_seeds: must be >= 1");
    TrainSection train_section = parse_train_section(section, section_name);

    std::vector<GraphBundle> bundles;
    for (const auto& dir : bundle_dirs) bundles.push_back(load_bundle(dir));
    const auto specs = plan_runs(bundles, variants, num_seeds, base_seed);

    if (opts.dry_run) {
        for (const auto& spec : specs)
            std::printf("plan: bundle=%s variant=%s split=%d seed=%llu\n",
                        bundles[spec.bundle_index].name.c_str(), spec.variant.c_str(),
                        spec.split, static_cast<unsigned long long>(spec.seed));
        std::printf("dry run: %zu runs planned, nothing written\n", specs.size());
        return 0;
    }
    ensure_out_dir(out, opts.force);
    auto records = execute_runs(bundles, specs, train_section, out, opts.jobs);
    write_results(records, out);
    if (records_out) *records_out = records;
    int failed = 0;
    for (const auto& r : records)
        if (r.failed) ++failed;
    if (failed > 0) log::error(failed, " of ", records.size(), " runs failed");
    return failed;
}

void write_group_table(const std::string& path, const std::vector<RunRecord>& records,
                       const std::set<std::string>& variants) {
    std::map<std::pair<double, std::string>, std::vector<double>> groups;
    for (const auto& r : records) {
        if (r.failed || !variants.count(r.variant)) continue;
        groups[{r.h, r.variant}].push_back(r.test_acc);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "h,variant,test_acc_mean,test_acc_stdev,runs\n";
    for (const auto& [key, accs] : groups) {
        auto ms = mean_stdev(accs);
        out << fmt_double(key.first) << ',' << key.second << ',' << fmt_double(ms.mean) << ','
            << fmt_double(ms.stdev) << ',' << accs.size() << '\n';
    }
}

}  // namespace

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json config;
    try {
        in >> config;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!config.is_object()) throw ConfigError(path + ": top level must be an object");
    return config;
}

// ---- generate ---------------------------------------------------------------

int cmd_generate(const json& config, const Options& opts) {
    reject_unknown(config, "", {"generate", "train", "ablate", "analyze", "report", "base_seed"});
    const json& section = require(config, "", "generate");
    reject_unknown(section, "generate",
                   {"out", "name_prefix", "n", "num_classes", "edges_per_node", "h_grid", "h",
                    "replicates", "balanced_classes", "features", "splits"});
    const std::string out = opts.out_override
                                ? *opts.out_override
                                : get_as<std::string>(require(section, "generate", "out"),
                                                      "generate.out");
    const std::string prefix = get_or<std::string>(section, "generate", "name_prefix", "syn");
    GenConfig base;
    base.n = get_as<NodeId>(require(section, "generate", "n"), "generate.n");
    base.num_classes = get_as<std::int32_t>(require(section, "generate", "num_classes"),
                                            "generate.num_classes");
    base.edges_per_node = get_or<std::int64_t>(section, "generate", "edges_per_node", 2);
    base.balanced_classes = get_or<bool>(section, "generate", "balanced_classes", true);

    std::vector<double> h_grid;
    if (section.contains("h_grid"))
        h_grid = get_double_list(section.at("h_grid"), "generate.h_grid");
    else if (section.contains("h"))
        h_grid.push_back(get_as<double>(section.at("h"), "generate.h"));
    else
        throw ConfigError("generate.h_grid: missing (or provide generate.h)");
    const std::int32_t replicates = get_or<std::int32_t>(section, "generate", "replicates", 1);
    if (replicates < 1) throw ConfigError("generate.replicates: must be >= 1");

    const json& features = require(section, "generate", "features");
    reject_unknown(features, "generate.features", {"mode", "dim", "signal_strength", "path"});
    const std::string mode =
        get_as<std::string>(require(features, "generate.features", "mode"),
                            "generate.features.mode");
    if (mode == "synthetic") {
        SyntheticFeatureConfig fc;
        fc.dim = get_or<std::int64_t>(features, "generate.features", "dim", 100);
        fc.signal_strength =
            get_or<double>(features, "generate.features", "signal_strength", 0.2);
        base.features.synthetic = fc;
    } else if (mode == "corpus") {
        CorpusFeatureConfig fc;
        fc.node_table_path = get_as<std::string>(
            require(features, "generate.features", "path"), "generate.features.path");
        base.features.corpus = fc;
    } else if (mode != "none") {
        throw ConfigError("generate.features.mode: expected synthetic, corpus or none");
    }

    std::array<double, 3> fractions = {0.25, 0.25, 0.5};
    std::int32_t split_count = 1;
    if (section.contains("splits")) {
        const json& splits = section.at("splits");
        reject_unknown(splits, "generate.splits", {"fractions", "count"});
        if (splits.contains("fractions")) {
            auto f = get_double_list(splits.at("fractions"), "generate.splits.fractions");
            if (f.size() != 3)
                throw ConfigError("generate.splits.fractions: expected 3 values");
            fractions = {f[0], f[1], f[2]};
        }
        split_count = get_or<std::int32_t>(splits, "generate.splits", "count", 1);
        if (split_count < 1) throw ConfigError("generate.splits.count: must be >= 1");
    }

    const std::uint64_t base_seed = base_seed_of(config, opts);
    if (opts.dry_run) {
        std::printf("dry run: %zu bundles planned, nothing written\n",
                    h_grid.size() * static_cast<std::size_t>(replicates));
        return 0;
    }
    ensure_out_dir(out, opts.force);

    std::printf("%-24s %8s %10s %10s %10s\n", "bundle", "target_h", "measured_h", "edges",
                "avg_deg");
    for (double h : h_grid) {
        for (std::int32_t rep = 0; rep < replicates; ++rep) {
            GenConfig gen = base;
            gen.target_h = h;
            gen.seed = base_seed ^
                       fnv1a64("generate|h=" + fmt_double(h) + "|rep=" + std::to_string(rep));
            Graph graph = generate_graph(gen);
            if (gen.features.synthetic || gen.features.corpus)
                graph = attach_features(graph, gen.features, gen.seed ^ fnv1a64("features"));

            GraphBundle bundle;
            bundle.graph = std::move(graph);
            for (std::int32_t s = 0; s < split_count; ++s)
                bundle.splits.push_back(make_splits(
                    bundle.graph, fractions,
                    gen.seed ^ fnv1a64("split|" + std::to_string(s))));
            bundle.name = prefix + "-h" + fmt_double(h) + "-" + std::to_string(rep);
            bundle.measured_h = edge_homophily(bundle.graph);

            std::int64_t min_deg = bundle.graph.num_nodes() ? bundle.graph.degree(0) : 0;
            std::int64_t max_deg = min_deg;
            for (NodeId v = 0; v < bundle.graph.num_nodes(); ++v) {
                min_deg = std::min(min_deg, bundle.graph.degree(v));
                max_deg = std::max(max_deg, bundle.graph.degree(v));
            }
            const double avg_deg =
                2.0 * static_cast<double>(bundle.graph.num_edges()) /
                static_cast<double>(bundle.graph.num_nodes());
            bundle.meta = json{{"target_h", h},
                               {"replicate", rep},
                               {"seed", gen.seed},
                               {"config",
                                json{{"n", gen.n},
                                     {"num_classes", gen.num_classes},
                                     {"edges_per_node", gen.edges_per_node},
                                     {"balanced_classes", gen.balanced_classes}}},
                               {"num_edges", bundle.graph.num_edges()},
                               {"degree_min", min_deg},
                               {"degree_max", max_deg},
                               {"degree_avg", avg_deg}};
            write_bundle((fs::path(out) / bundle.name).string(), bundle);
            std::printf("%-24s %8s %10.4f %10lld %10.2f\n", bundle.name.c_str(),
                        fmt_double(h).c_str(), bundle.measured_h,
                        static_cast<long long>(bundle.graph.num_edges()), avg_deg);
        }
    }
    return 0;
}

// ---- train / ablate ---------------------------------------------------------

int cmd_train(const json& config, const Options& opts) {
    reject_unknown(config, "", {"generate", "train", "ablate", "analyze", "report", "base_seed"});
    const json& section = require(config, "", "train");
    reject_unknown(section, "train",
                   {"out", "bundles", "variants", "num_seeds", "train", "dropout",
                    "nonlinearity", "write_history", "save_checkpoints", "degree_buckets"});
    const auto variants =
        get_string_list(require(section, "train", "variants"), "train.variants");
    for (const auto& code : variants) {
        try {
            variant_from_code(code);
        } catch (const std::exception& e) {
            throw ConfigError("train.variants: " + std::string(e.what()));
        }
    }
    return run_training_command(section, "train", variants, opts, base_seed_of(config, opts),
                                nullptr);
}

int cmd_ablate(const json& config, const Options& opts) {
    reject_unknown(config, "", {"generate", "train", "ablate", "analyze", "report", "base_seed"});
    const json& section = require(config, "", "ablate");
    reject_unknown(section, "ablate",
                   {"out", "bundles", "num_seeds", "train", "dropout", "nonlinearity",
                    "write_history", "save_checkpoints", "degree_buckets"});

    // one variant set per design axis
    const std::set<std::string> d1 = {"S0", "S1", "NS0", "NS1"};
    const std::set<std::string> d2 = {"N0", "N1", "N2", "S0"};
    const std::set<std::string> d3 = {"K0", "K1", "R2", "H2GCN2"};
    std::set<std::string> all;
    for (const auto* axis : {&d1, &d2, &d3}) all.insert(axis->begin(), axis->end());
    std::vector<std::string> variants(all.begin(), all.end());

    std::vector<RunRecord> records;
    const int failed = run_training_command(section, "ablate", variants, opts,
                                            base_seed_of(config, opts), &records);
    if (opts.dry_run) return failed;
    const std::string out = opts.out_override
                                ? *opts.out_override
                                : get_as<std::string>(section.at("out"), "ablate.out");
    write_group_table((fs::path(out) / "ablation_D1.csv").string(), records, d1);
    write_group_table((fs::path(out) / "ablation_D2.csv").string(), records, d2);
    write_group_table((fs::path(out) / "ablation_D3.csv").string(), records, d3);
    return failed;
}

// ---- analyze ----------------------------------------------------------------

namespace {

void analyze_thresholds(const json& section, const fs::path& out) {
    reject_unknown(section, "analyze.thresholds",
                   {"h_grid", "degrees", "num_classes", "verify_weights"});
    const auto h_grid =
        get_double_list(require(section, "analyze.thresholds", "h_grid"),
                        "analyze.thresholds.h_grid");
    const auto degrees = get_double_list(require(section, "analyze.thresholds", "degrees"),
                                         "analyze.thresholds.degrees");
    const auto classes =
        get_double_list(require(section, "analyze.thresholds", "num_classes"),
                        "analyze.thresholds.num_classes");
    const bool verify = get_or<bool>(section, "analyze.thresholds", "verify_weights", false);

    std::ofstream csv(out / "thresholds.csv", std::ios::binary);
    csv << "h,d,num_classes,delta1_abs,delta2_abs,crossover_h,less_robust";
    if (verify) csv << ",weight_residual";
    csv << '\n';
    json entries = json::array();
    for (double k : classes) {
        for (double d : degrees) {
            for (double h : h_grid) {
                auto report = gcn_perturbation_thresholds(h, static_cast<std::int64_t>(d),
                                                          static_cast<std::int32_t>(k));
                csv << fmt_double(h) << ',' << static_cast<std::int64_t>(d) << ','
                    << static_cast<std::int32_t>(k) << ',' << fmt_double(report.delta1_abs)
                    << ',' << fmt_double(report.delta2_abs) << ','
                    << fmt_double(report.crossover_h) << ',' << report.less_robust;
                json e{{"h", h},
                       {"d", static_cast<std::int64_t>(d)},
                       {"num_classes", static_cast<std::int32_t>(k)},
                       {"delta1_abs", report.delta1_abs},
                       {"delta2_abs", report.delta2_abs},
                       {"crossover_h", report.crossover_h},
                       {"less_robust", report.less_robust}};
                if (verify) {
                    if (report.less_robust == "singular") {
                        csv << ",nan";
                        e["weight_residual"] = nullptr;
                    } else {
                        const double resid = verify_optimal_weight(
                            h, static_cast<std::int64_t>(d), static_cast<std::int32_t>(k));
                        csv << ',' << fmt_double(resid);
                        e["weight_residual"] = resid;
                    }
                }
                csv << '\n';
                entries.push_back(std::move(e));
            }
        }
    }
    std::ofstream js(out / "thresholds.json", std::ios::binary);
    js << json{{"thresholds", entries}}.dump(2) << '\n';
}

void analyze_two_hop(const json& section, const fs::path& out) {
    reject_unknown(section, "analyze.two_hop", {"h_grid", "num_classes"});
    const auto h_grid = get_double_list(require(section, "analyze.two_hop", "h_grid"),
                                        "analyze.two_hop.h_grid");
    const auto classes = get_double_list(require(section, "analyze.two_hop", "num_classes"),
                                         "analyze.two_hop.num_classes");
    std::ofstream csv(out / "twohop.csv", std::ios::binary);
    csv << "h,num_classes,min_margin,expected_margin\n";
    for (double k : classes)
        for (double h : h_grid) {
            auto report = two_hop_compatibility(h, static_cast<std::int32_t>(k));
            csv << fmt_double(h) << ',' << static_cast<std::int32_t>(k) << ','
                << fmt_double(report.min_margin) << ',' << fmt_double(report.expected_margin)
                << '\n';
        }
}

void analyze_spectral(const json& section, const fs::path& out) {
    reject_unknown(section, "analyze.spectral", {"bundle", "signals", "num_random"});
    const std::string bundle_dir = get_as<std::string>(
        require(section, "analyze.spectral", "bundle"), "analyze.spectral.bundle");
    const std::string signal_kind =
        get_or<std::string>(section, "analyze.spectral", "signals", "labels");
    const std::int32_t num_random =
        get_or<std::int32_t>(section, "analyze.spectral", "num_random", 8);

    GraphBundle bundle = load_bundle(bundle_dir);
    const NodeId n = bundle.graph.num_nodes();
    std::vector<std::vector<double>> signals;
    std::vector<std::string> names;
    if (signal_kind == "labels") {
        // one-hot label channels; the multi-channel energy is their sum
        for (std::int32_t c = 0; c < bundle.graph.num_classes(); ++c) {
            std::vector<double> s(n, 0.0);
            for (NodeId v = 0; v < n; ++v)
                if (bundle.graph.labels()[v] == c) s[v] = 1.0;
            signals.push_back(std::move(s));
            names.push_back("class_" + std::to_string(c));
        }
    } else if (signal_kind == "random") {
        Rng rng(fnv1a64("spectral|" + bundle.name));
        for (std::int32_t i = 0; i < num_random; ++i) {
            std::vector<double> s(n);
            for (NodeId v = 0; v < n; ++v) s[v] = rng.bernoulli(0.5) ? 1.0 : 0.0;
            signals.push_back(std::move(s));
            names.push_back("random_" + std::to_string(i));
        }
    } else {
        throw ConfigError("analyze.spectral.signals: expected labels or random");
    }

    SpectralReport report = spectral_energy(unnormalized_laplacian(bundle.graph), signals);

    std::ofstream csv(out / "tail_energy.csv", std::ios::binary);
    csv << "M,eigenvalue";
    for (const auto& name : names) csv << ',' << name;
    csv << '\n';
    for (NodeId m = 0; m < n; ++m) {
        csv << m << ',' << fmt_double(report.eig.eigenvalues[m]);
        for (const auto& spec : report.signals) csv << ',' << fmt_double(spec.tail_energy[m]);
        csv << '\n';
    }

    json sig = json::array();
    for (std::size_t i = 0; i < report.signals.size(); ++i) {
        sig.push_back(json{{"name", names[i]},
                           {"smoothness", report.signals[i].smoothness},
                           {"homophily", report.signals[i].homophily},
                           {"norm_sq", report.signals[i].norm_sq}});
    }
    std::ofstream js(out / "spectral.json", std::ios::binary);
    js << json{{"bundle", bundle.name},
               {"n", n},
               {"lambda0", report.eig.eigenvalues.front()},
               {"lambda_max", report.eig.eigenvalues.back()},
               {"offdiag_residual", report.eig.offdiag_residual},
               {"sweeps", report.eig.sweeps},
               {"parseval_residual", report.parseval_residual},
               {"signals", sig}}
              .dump(2)
       << '\n';
}

}  // namespace

int cmd_analyze(const json& config, const Options& opts) {
    reject_unknown(config, "", {"generate", "train", "ablate", "analyze", "report", "base_seed"});
    const json& section = require(config, "", "analyze");
    reject_unknown(section, "analyze", {"out", "thresholds", "two_hop", "spectral"});
    const std::string out = opts.out_override
                                ? *opts.out_override
                                : get_as<std::string>(require(section, "analyze", "out"),
                                                      "analyze.out");
    if (!section.contains("thresholds") && !section.contains("two_hop") &&
        !section.contains("spectral"))
        throw ConfigError("analyze: nothing to do (add thresholds, two_hop or spectral)");
    if (opts.dry_run) {
        std::printf("dry run: analysis planned, nothing written\n");
        return 0;
    }
    ensure_out_dir(out, opts.force);
    const fs::path dir(out);
    if (section.contains("thresholds")) analyze_thresholds(section.at("thresholds"), dir);
    if (section.contains("two_hop")) analyze_two_hop(section.at("two_hop"), dir);
    if (section.contains("spectral")) analyze_spectral(section.at("spectral"), dir);
    return 0;
}

// ---- report -----------------------------------------------------------------

int cmd_report(const json& config, const Options& opts) {
    reject_unknown(config, "", {"generate", "train", "ablate", "analyze", "report", "base_seed"});
    const json& section = require(config, "", "report");
    reject_unknown(section, "report", {"out", "inputs"});
    const std::string out = opts.out_override
                                ? *opts.out_override
                                : get_as<std::string>(require(section, "report", "out"),
                                                      "report.out");
    const auto inputs =
        get_string_list(require(section, "report", "inputs"), "report.inputs");

    std::vector<RunRecord> merged;
    std::map<std::tuple<std::string, std::string, std::int32_t, std::uint64_t>, int> seen;
    std::vector<std::string> collisions;
    for (const auto& path : inputs) {
        for (auto& r : read_results(path)) {
            auto key = std::make_tuple(r.dataset, r.variant, r.split, r.seed);
            if (++seen[key] == 2)
                collisions.push_back(r.dataset + "/" + r.variant + "/split" +
                                     std::to_string(r.split) + "/seed" +
                                     std::to_string(r.seed));
            merged.push_back(std::move(r));
        }
    }
    if (!collisions.empty()) {
        std::string msg = "report: duplicate run records:";
        for (const auto& c : collisions) msg += " " + c;
        throw std::runtime_error(msg);
    }
    if (opts.dry_run) {
        std::printf("dry run: %zu records merged, nothing written\n", merged.size());
        return 0;
    }
    ensure_out_dir(out, opts.force);
    write_results(merged, out);

    std::map<std::pair<double, std::string>, std::vector<double>> groups;
    std::set<double> h_values;
    std::set<std::string> variant_names;
    for (const auto& r : merged) {
        if (r.failed) continue;
        groups[{r.h, r.variant}].push_back(r.test_acc);
        h_values.insert(r.h);
        variant_names.insert(r.variant);
    }

    std::ofstream csv(fs::path(out) / "accuracy_vs_h.csv", std::ios::binary);
    csv << "h,variant,test_acc_mean,test_acc_stdev,runs\n";
    for (const auto& [key, accs] : groups) {
        auto ms = mean_stdev(accs);
        csv << fmt_double(key.first) << ',' << key.second << ',' << fmt_double(ms.mean) << ','
            << fmt_double(ms.stdev) << ',' << accs.size() << '\n';
    }

    std::ofstream md(fs::path(out) / "report.md", std::ios::binary);
    md << "# Results (mean ± stdev test accuracy)\n\n| variant |";
    for (double h : h_values) md << " h=" << fmt_double(h) << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < h_values.size(); ++i) md << "---|";
    md << '\n';
    char cell[64];
    for (const auto& variant : variant_names) {
        md << "| " << variant << " |";
        for (double h : h_values) {
            auto it = groups.find({h, variant});
            if (it == groups.end()) {
                md << " - |";
            } else {
                auto ms = mean_stdev(it->second);
                std::snprintf(cell, sizeof(cell), " %.2f ±%.2f |", 100.0 * ms.mean,
                              100.0 * ms.stdev);
                md << cell;
            }
        }
        md << '\n';
    }
    return 0;
}

}  // namespace heterograph::cli
