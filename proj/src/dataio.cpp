#include "heterograph/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "heterograph/logging.hpp"

namespace fs = std::filesystem;

namespace heterograph {

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_double(std::string_view s, const std::string& context) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error(context + ": bad number '" + std::string(s) + "'");
    return v;
}

std::int64_t parse_int(std::string_view s, const std::string& context) {
    std::int64_t v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error(context + ": bad integer '" + std::string(s) + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view s, const std::string& context) {
    std::uint64_t v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error(context + ": bad integer '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split_sv(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

nlohmann::json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace

std::vector<EdgePair> read_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing file: " + path);
    std::vector<EdgePair> edges;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_sv(line, '\t');
        if (fields.size() != 2)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'u<TAB>v'");
        const std::string ctx = path + ":" + std::to_string(lineno);
        edges.emplace_back(static_cast<NodeId>(parse_int(fields[0], ctx)),
                           static_cast<NodeId>(parse_int(fields[1], ctx)));
    }
    return edges;
}

NodeTable read_node_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    strip_cr(line);
    auto header = split_sv(line, ',');
    if (header.size() < 2 || header[0] != "id" || header[1] != "label")
        throw std::runtime_error(path + ":1: header must start with 'id,label'");
    const std::size_t feat_dim = header.size() - 2;

    std::vector<std::int64_t> ids;
    std::vector<std::int32_t> labels;
    std::vector<std::vector<double>> feats;
    std::int64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_sv(line, ',');
        const std::string ctx = path + ":" + std::to_string(lineno);
        if (fields.size() != header.size())
            throw std::runtime_error(ctx + ": expected " + std::to_string(header.size()) +
                                     " fields, got " + std::to_string(fields.size()));
        ids.push_back(parse_int(fields[0], ctx));
        labels.push_back(static_cast<std::int32_t>(parse_int(fields[1], ctx)));
        std::vector<double> row(feat_dim);
        for (std::size_t j = 0; j < feat_dim; ++j) row[j] = parse_double(fields[2 + j], ctx);
        feats.push_back(std::move(row));
    }

    const std::size_t n = ids.size();
    NodeTable table;
    table.labels.assign(n, 0);
    table.features = Matrix(n, feat_dim);
    std::vector<char> seen(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (ids[i] < 0 || ids[i] >= static_cast<std::int64_t>(n) || seen[ids[i]])
            throw std::runtime_error(path + ": node ids must be a permutation of 0.." +
                                     std::to_string(n - 1));
        seen[ids[i]] = 1;
        table.labels[ids[i]] = labels[i];
        std::copy(feats[i].begin(), feats[i].end(), table.features.row(ids[i]));
    }
    return table;
}

namespace {

void write_edge_list(const fs::path& path, const Graph& g) {
    auto out = open_out(path);
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v) out << u << '\t' << v << '\n';
}

void write_node_table(const fs::path& path, const Graph& g) {
    auto out = open_out(path);
    out << "id,label";
    for (std::int64_t j = 0; j < g.feature_dim(); ++j) out << ",f" << j;
    out << '\n';
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        out << v << ',' << g.labels()[v];
        const double* row = g.features().empty() ? nullptr : g.features().row(v);
        for (std::int64_t j = 0; j < g.feature_dim(); ++j) out << ',' << fmt_double(row[j]);
        out << '\n';
    }
}

fs::path split_path(const fs::path& dir, std::size_t index) {
    return index == 0 ? dir / "splits.json"
                      : dir / ("splits_" + std::to_string(index) + ".json");
}

void write_split(const fs::path& path, const SplitAssignment& split) {
    nlohmann::json j;
    j["train"] = split.indices_of(SplitTag::Train);
    j["val"] = split.indices_of(SplitTag::Val);
    j["test"] = split.indices_of(SplitTag::Test);
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

SplitAssignment read_split(const fs::path& path, NodeId n) {
    nlohmann::json j = load_json(path);
    SplitAssignment split;
    split.tags.assign(static_cast<std::size_t>(n), SplitTag::Train);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    const std::pair<const char*, SplitTag> parts[] = {
        {"train", SplitTag::Train}, {"val", SplitTag::Val}, {"test", SplitTag::Test}};
    for (auto [key, tag] : parts) {
        if (!j.contains(key))
            throw std::runtime_error(path.string() + ": missing '" + key + "' array");
        for (const auto& v : j[key]) {
            std::int64_t id = v.get<std::int64_t>();
            if (id < 0 || id >= n)
                throw std::runtime_error(path.string() + ": split references unknown node " +
                                         std::to_string(id));
            if (seen[id])
                throw std::runtime_error(path.string() + ": node " + std::to_string(id) +
                                         " assigned to multiple splits");
            seen[id] = 1;
            split.tags[id] = tag;
        }
    }
    for (NodeId v = 0; v < n; ++v)
        if (!seen[v])
            throw std::runtime_error(path.string() + ": node " + std::to_string(v) +
                                     " missing from the split");
    return split;
}

}  // namespace

GraphBundle load_bundle(const std::string& directory) {
    const fs::path dir(directory);
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + directory);

    BuildStats stats;
    auto edges = read_edge_list((dir / "edges.tsv").string());
    NodeTable table = read_node_table((dir / "nodes.csv").string());
    const NodeId n = static_cast<NodeId>(table.labels.size());
    std::int32_t num_classes = 0;
    for (auto y : table.labels) num_classes = std::max(num_classes, y + 1);
    if (num_classes == 0) num_classes = 1;

    GraphBundle bundle;
    bundle.graph = Graph::from_edge_list(edges, n, table.labels, std::move(table.features),
                                         num_classes, &stats);
    if (stats.mirrored_edges_added > 0)
        log::info("load_bundle: symmetrized ", stats.mirrored_edges_added,
                  " one-directional edges in ", directory);
    if (stats.self_loops_dropped > 0)
        log::info("load_bundle: dropped ", stats.self_loops_dropped, " self-loops in ",
                  directory);

    for (std::size_t i = 0;; ++i) {
        const fs::path p = split_path(dir, i);
        if (!fs::exists(p)) {
            if (i == 0)
                throw std::runtime_error("missing file: " + p.string());
            break;
        }
        bundle.splits.push_back(read_split(p, n));
    }

    bundle.name = dir.filename().string();
    if (bundle.name.empty()) bundle.name = dir.parent_path().filename().string();
    bundle.measured_h = edge_homophily(bundle.graph);
    const fs::path meta = dir / "meta.json";
    if (fs::exists(meta)) bundle.meta = load_json(meta);
    return bundle;
}

void write_bundle(const std::string& directory, const GraphBundle& bundle) {
    const fs::path dir(directory);
    fs::create_directories(dir);
    write_edge_list(dir / "edges.tsv", bundle.graph);
    write_node_table(dir / "nodes.csv", bundle.graph);
    for (std::size_t i = 0; i < bundle.splits.size(); ++i)
        write_split(split_path(dir, i), bundle.splits[i]);
    nlohmann::json meta = bundle.meta.is_null() ? nlohmann::json::object() : bundle.meta;
    meta["name"] = bundle.name;
    meta["measured_h"] = bundle.measured_h;
    auto out = open_out(dir / "meta.json");
    out << meta.dump(2) << '\n';
}

MeanStdev mean_stdev(const std::vector<double>& values) {
    MeanStdev ms;
    ms.count = values.size();
    if (values.empty()) return ms;
    double sum = 0;
    for (double v : values) sum += v;
    ms.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return ms;  // n=1 reports 0 by convention
    double sq = 0;
    for (double v : values) sq += (v - ms.mean) * (v - ms.mean);
    ms.stdev = std::sqrt(sq / static_cast<double>(values.size() - 1));
    return ms;
}

void write_results(const std::vector<RunRecord>& records, const std::string& out_dir) {
    if (records.empty()) throw std::invalid_argument("write_results: no records");
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    auto csv = open_out(dir / "results.csv");
    csv << "dataset,h,variant,split,seed,train_acc,val_acc,test_acc,epochs,wall_ms\n";
    for (const auto& r : records) {
        csv << r.dataset << ',' << fmt_double(r.h) << ',' << r.variant << ',' << r.split << ','
            << r.seed << ',' << fmt_double(r.train_acc) << ',' << fmt_double(r.val_acc) << ','
            << fmt_double(r.test_acc) << ',' << r.epochs << ',' << r.wall_ms << '\n';
    }

    std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) groups[{r.dataset, r.variant}].push_back(&r);

    nlohmann::json summary;
    summary["summaries"] = nlohmann::json::array();
    for (const auto& [key, group] : groups) {
        std::vector<double> test, val, train;
        for (const auto* r : group) {
            if (r->failed) continue;
            test.push_back(r->test_acc);
            val.push_back(r->val_acc);
            train.push_back(r->train_acc);
        }
        auto t = mean_stdev(test);
        nlohmann::json entry;
        entry["dataset"] = key.first;
        entry["variant"] = key.second;
        entry["runs"] = group.size();
        entry["failed"] = group.size() - test.size();
        entry["test_acc_mean"] = t.mean;
        entry["test_acc_stdev"] = t.stdev;
        entry["val_acc_mean"] = mean_stdev(val).mean;
        entry["train_acc_mean"] = mean_stdev(train).mean;
        summary["summaries"].push_back(entry);
    }
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json entry;
        entry["dataset"] = r.dataset;
        entry["variant"] = r.variant;
        entry["split"] = r.split;
        entry["seed"] = r.seed;
        entry["status"] = r.failed ? "failed" : "ok";
        if (r.failed) entry["error"] = r.error;
        runs.push_back(entry);
    }
    summary["runs"] = runs;
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << '\n';
}

std::vector<RunRecord> read_results(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("missing file: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(csv_path + ": empty file");
    strip_cr(line);
    if (line != "dataset,h,variant,split,seed,train_acc,val_acc,test_acc,epochs,wall_ms")
        throw std::runtime_error(csv_path + ": unexpected header");
    std::vector<RunRecord> records;
    std::int64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        auto f = split_sv(line, ',');
        const std::string ctx = csv_path + ":" + std::to_string(lineno);
        if (f.size() != 10) throw std::runtime_error(ctx + ": expected 10 fields");
        RunRecord r;
        r.dataset = std::string(f[0]);
        r.h = parse_double(f[1], ctx);
        r.variant = std::string(f[2]);
        r.split = static_cast<std::int32_t>(parse_int(f[3], ctx));
        r.seed = parse_u64(f[4], ctx);
        r.train_acc = parse_double(f[5], ctx);
        r.val_acc = parse_double(f[6], ctx);
        r.test_acc = parse_double(f[7], ctx);
        r.epochs = parse_int(f[8], ctx);
        r.wall_ms = parse_int(f[9], ctx);
        r.failed = std::isnan(r.test_acc);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace heterograph
