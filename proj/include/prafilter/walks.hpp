#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prafilter/kg.hpp"
#include "prafilter/path.hpp"

namespace prafilter {

// Suppresses a single stored edge (and its inverse traversal). Used to
// keep a training pair's own target edge out of its feature computation.
struct EdgeMask {
    uint32_t subject;
    uint32_t relation;
    uint32_t object;
};

// Exact random-walk terminal distribution for a path, by dynamic
// programming: mass starts at 1.0 on the source and splits uniformly over
// the matching neighbors at each step; nodes without a matching neighbor
// lose their mass. Total returned mass is <= 1.
std::map<uint32_t, double> rw_probability(const KnowledgeGraph& g, const RelationPath& path,
                                          uint32_t source, const EdgeMask* mask = nullptr);
std::map<std::string, double> rw_probability(const KnowledgeGraph& g, const RelationPath& path,
                                             const std::string& source);

// Reachability along the path (frontier propagation, no probabilities).
// True iff at least one walk instantiates the path from source to target.
bool path_exists(const KnowledgeGraph& g, const RelationPath& path, uint32_t source,
                 uint32_t target, const EdgeMask* mask = nullptr);
bool path_exists(const KnowledgeGraph& g, const RelationPath& path, const std::string& source,
                 const std::string& target);

struct PathEnumOptions {
    int max_len = 3;
    int min_support = 2;
    // Branches whose frontier would exceed this many nodes are dropped
    // and counted, guarding pathological hubs.
    size_t fanout_cap = 10000;
    // When set, each pair's own (source, relation, target) edge is
    // suppressed while counting support for that pair.
    std::optional<std::string> mask_relation;
};

struct PathEnumResult {
    std::vector<RelationPath> paths;  // sorted by length, then step texts
    uint64_t truncated_branches = 0;
};

// Every relation path of length <= max_len that connects at least
// min_support of the given pairs, by exhaustive frontier search.
PathEnumResult enumerate_paths(const KnowledgeGraph& g,
                               const std::vector<std::pair<uint32_t, uint32_t>>& pairs,
                               const PathEnumOptions& options);
PathEnumResult enumerate_paths(const KnowledgeGraph& g,
                               const std::vector<std::pair<std::string, std::string>>& pairs,
                               const PathEnumOptions& options);

struct FeatureMatrix {
    std::vector<std::pair<uint32_t, uint32_t>> pairs;  // row labels
    std::vector<RelationPath> paths;                   // surviving columns
    std::vector<std::vector<double>> values;           // rows x columns, in [0,1]
};

// Cell (i,j) = rw_probability(g, paths[j], pairs[i].first) evaluated at
// pairs[i].second. Columns that are all zero are dropped together with
// their paths. When mask_relation is set, row i is computed with the edge
// (pairs[i].first, mask_relation, pairs[i].second) suppressed.
FeatureMatrix build_feature_matrix(const KnowledgeGraph& g,
                                   const std::vector<std::pair<uint32_t, uint32_t>>& pairs,
                                   const std::vector<RelationPath>& paths,
                                   const std::optional<std::string>& mask_relation = std::nullopt,
                                   unsigned threads = 1);

}  // namespace prafilter
