#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "prafilter/corpus.hpp"
#include "prafilter/extractor.hpp"
#include "prafilter/kg.hpp"
#include "prafilter/labeler.hpp"

namespace prafilter {

// Seeded balanced partition of entity pairs; all of a pair's sentences
// follow its fold.
struct FoldPlan {
    std::map<EntityPair, int> assignment;
    int k = 4;
    uint64_t seed = 0;

    std::vector<EntityPair> fold_pairs(int fold) const;
};

FoldPlan make_folds(const std::vector<EntityPair>& pairs, int k, uint64_t seed);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false;  // nothing predicted positive, or empty gold
    size_t predicted_positive = 0;
    size_t true_positive = 0;
    size_t gold_size = 0;
};

// Entity-level precision/recall over distinct pairs. Precision is 0 when
// nothing is predicted positive; recall is 0 when the gold set is empty;
// both cases are flagged degenerate.
Prf entity_prf(const std::vector<PairPrediction>& predictions, const std::set<EntityPair>& gold);

struct PrPoint {
    double threshold;
    double recall;
    double precision;
};

// One point per distinct predicted probability, swept descending;
// predictions tied at a threshold enter together.
std::vector<PrPoint> pr_curve(const std::vector<PairPrediction>& predictions,
                              const std::set<EntityPair>& gold);

std::string pr_curve_csv(const std::vector<PrPoint>& curve);

struct EvalConfig {
    int folds = 4;
    // PRA path learning
    int max_len = 3;
    int min_support = 2;
    size_t fanout_cap = 10000;
    double pra_l2 = 0.1;
    double pra_neg_ratio = 4.0;
    int pra_max_iters = 500;
    double pra_tolerance = 1e-6;
    // labeling
    double neg_pair_ratio = 5.0;  // negative instance pairs per positive pair
    std::optional<size_t> neg_pair_count;  // absolute override of the ratio
    size_t common_pair_max = 1000;
    // dataset construction
    double bias_ratio = 2.0;
    // baseline extractor
    double extractor_l2 = 1.0;
    int extractor_max_iters = 500;
    double extractor_tolerance = 1e-6;
    // seeds
    uint64_t fold_seed = 101;
    uint64_t neg_pair_seed = 102;
    uint64_t pra_seed = 103;
    uint64_t adjust_seed = 104;
    uint64_t random_reduce_seed = 105;
    // plumbing
    unsigned threads = 1;
    size_t min_pairs_per_class = 8;  // relations below this are skipped, not failed
    bool force_empty_paths = false;  // testing hook: makes the PRA filter a no-op
};

// The three training configurations compared per relation.
inline const std::vector<std::string>& config_names() {
    static const std::vector<std::string> names = {"unfiltered", "random_reduced", "pra_reduced"};
    return names;
}

struct FoldRecord {
    int fold = 0;
    size_t test_pairs = 0;
    size_t gold_pairs = 0;
    size_t flagged_pairs = 0;
    // per config name: train sentence counts and fold-level metrics
    std::map<std::string, size_t> train_positives;
    std::map<std::string, size_t> train_negatives;
    std::map<std::string, Prf> metrics;
    std::map<std::string, size_t> false_negative_predictions;
};

struct ConfigMetrics {
    Prf prf;  // pooled over folds
    size_t false_negative_predictions = 0;
    std::vector<PrPoint> curve;  // pooled over folds
};

struct RelationEval {
    std::string relation;
    bool skipped = false;
    std::string skip_reason;
    size_t positive_pairs = 0;
    size_t negative_pairs = 0;
    std::vector<FoldRecord> folds;
    std::map<std::string, ConfigMetrics> configs;
};

struct EvalReport {
    std::vector<RelationEval> relations;
    // macro-averaged P/R/F1 across evaluated relations, summed
    // false-negative prediction counts
    std::map<std::string, ConfigMetrics> overall;

    std::string to_json() const;
    // Plain-text table: one row per relation plus the overall row, a
    // Prec./Rec./F1 column block per configuration.
    std::string table_text() const;
};

// Runs the 4-fold held-out protocol for every target relation and
// evaluates the Unfiltered / Random-reduced / PRA-reduced classifiers at
// entity level. Any stage failure is rethrown with the stage name.
EvalReport run_comparison(const KnowledgeGraph& kb, const std::vector<Sentence>& corpus,
                          const std::vector<std::string>& relations, const EvalConfig& config);

}  // namespace prafilter
