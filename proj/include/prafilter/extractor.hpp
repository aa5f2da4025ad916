#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prafilter/labeler.hpp"

namespace prafilter {

// Sparse named feature vector, sorted by feature name.
using FeatureVec = std::vector<std::pair<std::string, double>>;

// Deterministic lexical features for one labeled sentence: bag of tokens
// and bigrams between the two mentions, the mention surface order, a gap
// length bucket, and the tokens flanking each mention.
FeatureVec featurize(const LabeledExample& example);

struct PairPrediction {
    EntityPair pair;
    double probability;  // max over the pair's sentence probabilities
    bool label;          // probability >= 0.5
};

// Logistic regression over featurize() outputs. Pair-level prediction
// takes the max over a pair's sentence probabilities (at-least-one
// aggregation).
struct ExtractorModel {
    std::string relation;
    std::vector<std::pair<std::string, double>> weights;  // sorted by descending weight
    double bias = 0.0;
    double l2 = 1.0;
    uint64_t seed = 0;

    double sentence_probability(const LabeledExample& example) const;

    std::string serialize() const;
    static ExtractorModel parse(const std::string& text);
    void save(const std::string& path) const;
    static ExtractorModel load(const std::string& path);

private:
    mutable std::unordered_map<std::string, double> lookup_;
    void ensure_lookup() const;
};

struct ExtractorTrainInfo {
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    size_t features = 0;
};

ExtractorModel train_extractor(const LabeledDataset& ds, double l2, uint64_t seed,
                               int max_iters = 500, double tolerance = 1e-6,
                               ExtractorTrainInfo* info = nullptr);

// One prediction per distinct pair in the dataset, sorted by pair.
std::vector<PairPrediction> predict_pairs(const ExtractorModel& model, const LabeledDataset& ds);

// CSV: pair_first,pair_second,probability,label
std::string predictions_csv(const std::vector<PairPrediction>& predictions);

}  // namespace prafilter
