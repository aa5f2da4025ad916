#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prafilter/kg.hpp"
#include "prafilter/labeler.hpp"
#include "prafilter/path.hpp"

namespace prafilter {

struct FlaggedPair {
    EntityPair pair;
    std::vector<RelationPath> witnesses;  // every path that connects the pair
};

// Outcome of false-negative detection plus, once applied, the effect the
// reduction had on a dataset.
struct ReductionReport {
    std::string relation;
    std::vector<FlaggedPair> flagged;  // sorted by pair
    bool empty_path_warning = false;

    // Filled by pra_reduce.
    size_t examples_removed = 0;
    size_t positives_before = 0, negatives_before = 0;
    size_t positives_after = 0, negatives_after = 0;
    std::string bias_before, bias_after;

    bool is_flagged(const EntityPair& pair) const;

    std::string to_json() const;
    static ReductionReport from_json(const std::string& text);
    void save(const std::string& path) const;
    static ReductionReport load(const std::string& path);
};

// Flags every negative pair connected by at least one of the paths
// (boolean path existence, not a probability threshold) and records all
// witnessing paths. An empty path list flags nothing and sets the
// warning: the filter is a no-op.
ReductionReport detect_false_negatives(const KnowledgeGraph& g,
                                       const std::vector<RelationPath>& paths,
                                       const std::vector<EntityPair>& negatives,
                                       unsigned threads = 1);

// Removes every negative example whose pair is flagged; positives are
// untouched. Fills the report's removal counts and before/after bias.
LabeledDataset pra_reduce(const LabeledDataset& ds, ReductionReport& report);

// Seeded-uniform subsample of the negatives down to floor(ratio *
// positives). Throws if the current negative:positive ratio is below the
// target (no oversampling).
LabeledDataset adjust_bias(const LabeledDataset& ds, double ratio, uint64_t seed);

// Seeded-uniform removal of negatives so the output has exactly the
// reference's negative count; positives must already match. Throws if
// the dataset has fewer negatives than the reference.
LabeledDataset random_reduce(const LabeledDataset& ds, const LabeledDataset& reference,
                             uint64_t seed);

}  // namespace prafilter
