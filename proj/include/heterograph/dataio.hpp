#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heterograph/graph.hpp"
#include "heterograph/synth.hpp"

#include "json.hpp"

namespace heterograph {

// Parsed nodes.csv: header `id,label,f0,...,f{F-1}`, ids 0..n-1.
struct NodeTable {
    std::vector<std::int32_t> labels;
    Matrix features;
};

NodeTable read_node_table(const std::string& path);

// On-disk graph bundle:
//   edges.tsv    one `u<TAB>v` pair per undirected edge, `#` comments ignored
//   nodes.csv    node table as above
//   splits.json  {"train": [...], "val": [...], "test": [...]}; extra random
//                splits live in splits_1.json, splits_2.json, ...
//   meta.json    config echo plus measured statistics
struct GraphBundle {
    Graph graph;
    std::vector<SplitAssignment> splits;
    std::string name;
    double measured_h = 0.0;
    nlohmann::json meta;  // may be empty for hand-made bundles
};

GraphBundle load_bundle(const std::string& directory);
void write_bundle(const std::string& directory, const GraphBundle& bundle);

std::vector<EdgePair> read_edge_list(const std::string& path);

struct RunRecord {
    std::string dataset;
    double h = 0.0;  // bundle's nominal homophily level (grouping key)
    std::string variant;
    std::int32_t split = 0;
    std::uint64_t seed = 0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    std::int64_t epochs = 0;
    std::int64_t wall_ms = 0;
    bool failed = false;
    std::string error;
};

// results.csv (fixed column order) plus summary.json with sample-stdev
// aggregates per (dataset, variant); a single run reports stdev 0.
void write_results(const std::vector<RunRecord>& records, const std::string& out_dir);
std::vector<RunRecord> read_results(const std::string& csv_path);

struct MeanStdev {
    double mean = 0.0;
    double stdev = 0.0;
    std::size_t count = 0;
};

MeanStdev mean_stdev(const std::vector<double>& values);

}  // namespace heterograph
