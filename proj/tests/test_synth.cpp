#include <doctest.h>

#include <stdexcept>
#include <set>

#include "prafilter/fn_filter.hpp"
#include "prafilter/path_model.hpp"
#include "prafilter/synth.hpp"
#include "prafilter/walks.hpp"

using namespace prafilter;

namespace {

SynthSpec small_spec(uint64_t seed) {
    auto spec = SynthSpec::standard(seed);
    spec.types = {{"proc", 200}, {"prod", 200}, {"gene", 100}};
    spec.target_edges = 60;
    spec.planted = 10;
    spec.decoys = 20;
    spec.filler_negatives = 90;
    return spec;
}

}  // namespace

TEST_SUITE("synth") {
    TEST_CASE("regeneration is byte-identical") {
        auto spec = SynthSpec::standard(7);
        auto a = generate(spec);
        auto b = generate(spec);
        CHECK(a.kb_tsv == b.kb_tsv);
        CHECK(a.corpus_jsonl == b.corpus_jsonl);
        CHECK(a.truth.to_json() == b.truth.to_json());
        auto c = generate(SynthSpec::standard(8));
        CHECK(a.kb_tsv != c.kb_tsv);
    }

    TEST_CASE("the ground truth lists exactly the planted pairs") {
        auto spec = small_spec(3);
        spec.planted = 30;
        spec.decoys = 170;
        spec.filler_negatives = 0;
        auto out = generate(spec);
        CHECK(out.truth.planted.size() == 30);
        CHECK(out.truth.decoys.size() == 170);
        CHECK(out.truth.positive_pairs.size() == 60);
        CHECK(out.truth.planted_with_witness.size() == 30);  // no noise
    }

    TEST_CASE("of 200 negatives, exactly the 30 planted ones are flagged") {
        auto spec = small_spec(15);
        spec.planted = 30;
        spec.decoys = 170;
        spec.filler_negatives = 0;
        auto out = generate(spec);
        auto g = out.graph();
        PraConfig pra;
        pra.seed = 21;
        auto model = learn_path_model(g, spec.target, pra);
        std::vector<RelationPath> paths;
        for (const auto& e : select_positive_paths(model)) paths.push_back(e.path);
        std::vector<EntityPair> negatives = out.truth.planted;
        negatives.insert(negatives.end(), out.truth.decoys.begin(), out.truth.decoys.end());
        auto report = detect_false_negatives(g, paths, negatives);
        std::set<EntityPair> flagged;
        for (const auto& f : report.flagged) flagged.insert(f.pair);
        CHECK(flagged == std::set<EntityPair>(out.truth.planted.begin(), out.truth.planted.end()));
    }

    TEST_CASE("counts match the spec") {
        auto spec = small_spec(4);
        auto out = generate(spec);
        CHECK(out.truth.positive_pairs.size() == size_t(spec.target_edges));
        CHECK(out.truth.planted.size() == size_t(spec.planted));
        CHECK(out.truth.decoys.size() == size_t(spec.decoys));
        CHECK(out.truth.filler_negatives.size() == size_t(spec.filler_negatives));
        CHECK(out.truth.support_templates.size() == 3);
        auto g = out.graph();
        CHECK(g.relation_edge_count(spec.target) >= size_t(spec.target_edges));
    }

    TEST_CASE("every planted pair has a witness and no decoy has any") {
        auto spec = small_spec(5);
        auto out = generate(spec);
        auto g = out.graph();
        auto templates = support_templates(spec);
        for (const auto& pair : out.truth.planted) {
            bool witness = false;
            for (const auto& t : templates)
                witness = witness || path_exists(g, t, pair.first, pair.second);
            CHECK(witness);
            CHECK_FALSE(g.has_triple(pair.first, spec.target, pair.second));
        }
        for (const auto* group : {&out.truth.decoys, &out.truth.filler_negatives})
            for (const auto& pair : *group)
                for (const auto& t : templates)
                    CHECK_FALSE(path_exists(g, t, pair.first, pair.second));
    }

    TEST_CASE("zero planted and zero decoys flag nothing downstream") {
        auto spec = small_spec(6);
        spec.planted = 0;
        spec.decoys = 0;
        spec.filler_negatives = 120;
        auto out = generate(spec);
        auto g = out.graph();
        PraConfig pra;
        pra.neg_ratio = 2.0;
        pra.seed = 1;
        auto model = learn_path_model(g, spec.target, pra);
        std::vector<RelationPath> paths;
        for (const auto& e : select_positive_paths(model)) paths.push_back(e.path);
        std::vector<EntityPair> negatives = out.truth.filler_negatives;
        auto report = detect_false_negatives(g, paths, negatives);
        CHECK(report.flagged.empty());
    }

    TEST_CASE("noise corrupts support edges and the truth records survivors") {
        auto spec = small_spec(7);
        spec.noise_rate = 0.2;
        auto out = generate(spec);
        CHECK(out.truth.corrupted_support_edges > 0);
        CHECK(out.truth.planted_with_witness.size() <= out.truth.planted.size());
        std::set<EntityPair> planted(out.truth.planted.begin(), out.truth.planted.end());
        for (const auto& pair : out.truth.planted_with_witness) CHECK(planted.count(pair));
    }

    TEST_CASE("positive pairs never carry a second relation") {
        // keeps them eligible for labeling
        auto out = generate(small_spec(8));
        auto g = out.graph();
        auto eligible = extract_positive_pairs(g, "involves");
        CHECK(eligible.size() == out.truth.positive_pairs.size());
    }

    TEST_CASE("infeasible specs fail naming the constraint") {
        auto spec = small_spec(9);
        spec.types[2].count = 10;  // fewer genes than true pairs
        CHECK_THROWS_WITH_AS(generate(spec), doctest::Contains("private genes"),
                             std::runtime_error);
        auto bad_schema = small_spec(10);
        bad_schema.relations[1].domain = bad_schema.types[0].name;
        CHECK_THROWS_WITH_AS(generate(bad_schema), doctest::Contains("must map"),
                             std::runtime_error);
        auto bad_noise = small_spec(11);
        bad_noise.noise_rate = 1.0;
        CHECK_THROWS_WITH_AS(generate(bad_noise), doctest::Contains("noise_rate"),
                             std::runtime_error);
    }

    TEST_CASE("spec JSON round-trips") {
        auto spec = small_spec(12);
        spec.noise_rate = 0.05;
        spec.tail_cue_fraction = 0.4;
        auto parsed = SynthSpec::from_json(spec.to_json());
        CHECK(parsed.to_json() == spec.to_json());
        CHECK(parsed.seed == 12);
        CHECK(parsed.noise_rate == 0.05);
    }

    TEST_CASE("truth JSON round-trips") {
        auto out = generate(small_spec(13));
        auto parsed = GroundTruth::from_json(out.truth.to_json());
        CHECK(parsed.to_json() == out.truth.to_json());
    }

    TEST_CASE("the scale fixture emits distinct triples") {
        auto g = KnowledgeGraph::load_triples(generate_triple_scale_fixture(1000, 0));
        CHECK(g.triple_count() == 1000);
    }

    TEST_CASE("generated corpus parses and realizes every instance pair") {
        auto spec = small_spec(14);
        auto out = generate(spec);
        auto corpus = out.corpus();
        std::set<EntityPair> realized;
        for (const auto& s : corpus) {
            REQUIRE(s.mentions.size() == 2);
            realized.insert({s.mentions[0].cui, s.mentions[1].cui});
        }
        for (const auto& p : out.truth.positive_pairs) CHECK(realized.count(p));
        for (const auto& p : out.truth.planted) CHECK(realized.count(p));
        for (const auto& p : out.truth.decoys) CHECK(realized.count(p));
        for (const auto& p : out.truth.filler_negatives) CHECK(realized.count(p));
    }
}
