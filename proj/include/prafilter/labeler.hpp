#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "prafilter/corpus.hpp"
#include "prafilter/kg.hpp"

namespace prafilter {

using EntityPair = std::pair<std::string, std::string>;

// All (s, o) edges of the target relation, minus any pair that is also an
// edge (in the stored direction) of some other relation, minus self
// pairs. Sorted. Throws if the relation has no edges.
std::vector<EntityPair> extract_positive_pairs(const KnowledgeGraph& kb,
                                               const std::string& target);

// min(count, available) pairs drawn seeded-uniform without replacement
// from {positive firsts} x {positive seconds}, excluding the positives
// and self pairs. Sorted.
std::vector<EntityPair> generate_negative_pairs(const std::vector<EntityPair>& positives,
                                                size_t count, uint64_t seed);

// One labeled sentence/pair co-occurrence. The recorded spans are the
// closest mention pair of the two entities (ties broken by position).
struct LabeledExample {
    size_t sentence_id = 0;  // ordinal of the sentence at labeling time
    Sentence sentence;
    EntityPair pair;
    Span first_span;
    Span second_span;
    bool positive = false;
};

// Tokens strictly between the two spans: (later start) - (earlier end) - 1.
// Negative when the spans overlap.
int mention_gap(const Span& a, const Span& b);

enum class FilterCriterion {
    DuplicatePositivePair,  // sentence holds a positive pair's mentions more than once
    MixedPolarity,          // sentence holds both a positive and a negative pair
    GapExceeded,            // more than 5 tokens between the two mentions
    CommonPair,             // pair occurs in more than the allowed number of sentences
};

const char* criterion_name(FilterCriterion c);
FilterCriterion criterion_from_name(const std::string& name);

struct RemovedExample {
    LabeledExample example;
    std::vector<FilterCriterion> criteria;  // every criterion that fired
};

struct LabeledDataset {
    std::string relation;
    std::vector<LabeledExample> examples;  // active examples
    std::vector<RemovedExample> removed;   // audit trail of filtered examples

    size_t positive_count() const;
    size_t negative_count() const;
    // "1:<negatives per positive>" with one decimal, e.g. "1:5.1".
    std::string bias_text() const;

    std::string serialize_jsonl() const;
    static LabeledDataset parse_jsonl(const std::string& text,
                                      const std::string& source_name = "<memory>");
    void save(const std::string& path) const;
    static LabeledDataset load(const std::string& path);
};

// One example per (sentence, pair) whose two entities are both mentioned
// in the sentence, in corpus order. The pair matches regardless of the
// surface order of the mentions.
LabeledDataset label_corpus(const std::vector<Sentence>& corpus,
                            const std::vector<EntityPair>& positives,
                            const std::vector<EntityPair>& negatives,
                            const std::string& relation);

// Applies the four removal criteria as a union and tags each removed
// example with everything that fired. Idempotent.
LabeledDataset filter_examples(const LabeledDataset& ds, size_t common_pair_max);

}  // namespace prafilter
