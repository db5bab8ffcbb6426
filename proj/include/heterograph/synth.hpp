#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heterograph/graph.hpp"

namespace heterograph {

enum class SplitTag : std::uint8_t { Train = 0, Val = 1, Test = 2 };

struct SplitAssignment {
    std::vector<SplitTag> tags;  // one per node; exhaustive, disjoint

    std::vector<NodeId> indices_of(SplitTag tag) const;
    std::size_t count(SplitTag tag) const;
};

struct SyntheticFeatureConfig {
    std::int64_t dim = 100;
    double signal_strength = 0.2;  // fraction of dimensions that carry class signal
};

struct CorpusFeatureConfig {
    std::string node_table_path;  // CSV in the bundle node-table format
};

struct FeatureConfig {
    // exactly one of the two modes is active
    std::optional<SyntheticFeatureConfig> synthetic;
    std::optional<CorpusFeatureConfig> corpus;
};

struct GenConfig {
    NodeId n = 0;
    std::int32_t num_classes = 2;
    double target_h = 0.5;                 // ignored when compatibility is set
    std::optional<Matrix> compatibility;   // explicit H overrides target_h
    std::int64_t edges_per_node = 1;       // m
    std::uint64_t seed = 0;
    bool balanced_classes = true;  // exact balance by shuffled multiset; else uniform draws
    FeatureConfig features;

    void validate() const;
};

// Diagonal h, off-diagonal (1-h)/(num_classes-1); num_classes == 1 forces h=1.
Matrix compatibility_from_h(double h, std::int32_t num_classes);

// Modified preferential attachment: a |Y|-node ring seed (one node per
// class), then each new node of class i draws m targets without
// replacement with weight H[i][class(v)] * (deg(v)+1). Labels assigned,
// features empty. Deterministic given the config seed.
Graph generate_graph(const GenConfig& config);

// Class-conditional features. Synthetic mode: each class owns a random
// subset of signal_strength*dim indicator dimensions with an elevated
// on-probability. Corpus mode: maps classes onto a node table and samples
// rows without replacement.
Graph attach_features(const Graph& g, const FeatureConfig& mode, std::uint64_t seed);

// Stratified per-class split; fractions must sum to 1. Each split with a
// nonzero fraction receives at least one node per class.
SplitAssignment make_splits(const Graph& g, const std::array<double, 3>& fractions,
                            std::uint64_t seed);

}  // namespace heterograph
