#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prafilter/kg.hpp"
#include "prafilter/logreg.hpp"
#include "prafilter/path.hpp"
#include "prafilter/walks.hpp"

namespace prafilter {

struct PathModelEntry {
    RelationPath path;
    double weight;
};

struct PathModelMeta {
    int max_len = 3;
    int min_support = 2;
    double l2 = 0.1;
    uint64_t seed = 0;
};

// The trained logistic path ranker for one target relation: weighted
// relation paths plus an unregularized bias, entries sorted by
// descending weight.
struct PathModel {
    std::string relation;
    std::vector<PathModelEntry> entries;
    double bias = 0.0;
    PathModelMeta meta;

    // Text format: "relation:", "bias:", "meta:" header lines, then one
    // "<weight>\t<machine path>" line per entry, floats at 17 significant
    // digits so the file round-trips exactly.
    std::string serialize() const;
    static PathModel parse(const std::string& text);
    void save(const std::string& path) const;
    static PathModel load(const std::string& path);
};

// Exactly the entries with weight > 0, order preserved.
std::vector<PathModelEntry> select_positive_paths(const PathModel& model);

struct PraTrainingSet {
    std::vector<std::pair<uint32_t, uint32_t>> positives;  // all edges of the target
    std::vector<std::pair<uint32_t, uint32_t>> negatives;  // sampled non-edges
    uint64_t seed = 0;
    double neg_ratio = 0.0;
    size_t shortfall = 0;  // requested negatives that could not be produced
};

// Positives are every (s, o) edge of the target relation; negatives are
// ceil(neg_ratio * |positives|) pairs drawn seeded-uniform, without
// replacement, from (positive sources) x (positive objects) minus the
// positives themselves. Too small a candidate pool returns all available
// pairs and records the shortfall.
PraTrainingSet build_pra_training_set(const KnowledgeGraph& g, const std::string& target,
                                      double neg_ratio, uint64_t seed);

struct TrainInfo {
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
};

// Fits the L2-regularized logistic model over a random-walk feature
// matrix. Entries come back sorted by descending weight (ties by path
// order); relation and meta are left for the caller to fill.
PathModel train_logistic(const FeatureMatrix& features, const std::vector<uint8_t>& labels,
                         double l2, int max_iters, double tolerance, TrainInfo* info = nullptr);

struct PraConfig {
    int max_len = 3;
    int min_support = 2;
    size_t fanout_cap = 10000;
    double neg_ratio = 4.0;
    double l2 = 0.1;
    int max_iters = 500;
    double tolerance = 1e-6;
    uint64_t seed = 13;
    unsigned threads = 1;
};

struct PraRunStats {
    size_t positives = 0;
    size_t negatives = 0;
    size_t shortfall = 0;
    size_t enumerated_paths = 0;
    size_t surviving_paths = 0;
    uint64_t truncated_branches = 0;
    TrainInfo train;
};

// Full path-learning pipeline for one target relation: build the
// training set, enumerate candidate paths from the positive pairs (each
// pair's own target edge masked, and the bare single-step target path
// dropped — it restates the label), compute features and fit the model.
PathModel learn_path_model(const KnowledgeGraph& g, const std::string& target,
                           const PraConfig& config, PraRunStats* stats = nullptr);

}  // namespace prafilter
