#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prafilter/corpus.hpp"
#include "prafilter/kg.hpp"
#include "prafilter/labeler.hpp"
#include "prafilter/path.hpp"

namespace prafilter {

struct EntityTypeSpec {
    std::string name;
    int count = 0;
};

struct RelationSpec {
    std::string name;
    std::string domain;
    std::string range;
};

// Seeded generator spec. The schema is three entity types and six
// relations wired the same way as the standard preset: relations[0] is
// the target (type0 -> type1), then type2->type0, type2->type1,
// type0->type0, type1->type1 support relations and a type0->type1
// distractor. Names and counts are free; validate() rejects any other
// wiring, naming the violated constraint.
//
// Negative instance pairs are drawn with generate_negative_pairs under
// mix_seed(label_seed, target), exactly as the labeling stage does, so a
// pipeline run over the generated corpus sees sentences for precisely
// the pairs it samples. Planted false negatives are a seeded subset of
// those negatives and receive support-path structure with intermediates
// private to each pair; every other negative pair is provably
// unreachable by any path up to length 3.
struct SynthSpec {
    std::vector<EntityTypeSpec> types;
    std::vector<RelationSpec> relations;
    std::string target;
    int support_paths = 3;  // how many of the built-in templates to materialize
    int target_edges = 300;
    int planted = 50;            // truly related pairs with no target edge
    int decoys = 150;            // negatives guaranteed path-free
    int filler_negatives = 400;  // additional path-free negatives
    int sentences_per_pair = 2;
    int planted_sentences = 5;
    double tail_cue_fraction = 0.25;  // share of positives written in the rare cue style
    double noise_rate = 0.0;         // per-support-edge deletion probability
    int distractor_edges = 0;        // background edges; breaks the decoy guarantee if > 0
    uint64_t seed = 1;
    uint64_t label_seed = 102;  // base seed of the negative-pair draw (see above)

    void validate() const;
    std::string to_json() const;
    static SynthSpec from_json(const std::string& text);
    static SynthSpec standard(uint64_t seed);
};

struct GroundTruth {
    std::string target;
    std::vector<EntityPair> positive_pairs;
    std::vector<EntityPair> planted;
    std::vector<EntityPair> decoys;
    std::vector<EntityPair> filler_negatives;
    std::vector<std::string> support_templates;    // machine form
    std::vector<EntityPair> planted_with_witness;  // planted whose witness survived noise
    size_t corrupted_support_edges = 0;

    std::string to_json() const;
    static GroundTruth from_json(const std::string& text);
};

struct SynthOutput {
    std::string kb_tsv;
    std::string corpus_jsonl;
    GroundTruth truth;

    KnowledgeGraph graph() const { return KnowledgeGraph::load_triples(kb_tsv, "<synth>"); }
    std::vector<Sentence> corpus() const { return parse_corpus_jsonl(corpus_jsonl, "<synth>"); }
};

// Deterministic under the spec's seed: regenerating produces byte-equal
// kb/corpus/truth text. Checked at generation time by exhaustive path
// search: every planted pair has a support-path witness (noise may
// intentionally break some; the truth records survivors) and no decoy or
// filler pair is connected by any support path.
SynthOutput generate(const SynthSpec& spec);

// Grid-pattern triple file with exactly `lines` distinct triples, for
// load-scale checks.
std::string generate_triple_scale_fixture(size_t lines, uint64_t seed);

// Support templates for a schema, in machine-form order T1, T2, T3.
std::vector<RelationPath> support_templates(const SynthSpec& spec);

}  // namespace prafilter
