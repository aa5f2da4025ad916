#include <doctest.h>

#include <set>
#include <stdexcept>

#include "prafilter/fn_filter.hpp"
#include "prafilter/kg.hpp"
#include "prafilter/labeler.hpp"

using namespace prafilter;

namespace {

Sentence pair_sentence(const std::string& a, const std::string& b) {
    Sentence s;
    s.doc = "d";
    s.tokens = {a, "w", b};
    s.mentions = {{a, {0, 0}}, {b, {2, 2}}};
    return s;
}

// n_pos positive pairs and n_neg negative pairs, one sentence each.
LabeledDataset make_dataset(size_t n_pos, size_t n_neg) {
    std::vector<Sentence> corpus;
    std::vector<EntityPair> positives, negatives;
    for (size_t i = 0; i < n_pos; ++i) {
        EntityPair p{"p" + std::to_string(i), "q" + std::to_string(i)};
        positives.push_back(p);
        corpus.push_back(pair_sentence(p.first, p.second));
    }
    for (size_t i = 0; i < n_neg; ++i) {
        EntityPair p{"n" + std::to_string(i), "m" + std::to_string(i)};
        negatives.push_back(p);
        corpus.push_back(pair_sentence(p.first, p.second));
    }
    return label_corpus(corpus, positives, negatives, "r");
}

}  // namespace

TEST_SUITE("fn_filter") {
    TEST_CASE("disconnected negatives are never flagged") {
        auto g = KnowledgeGraph::load_triples("a\tr\tb\n");
        auto report = detect_false_negatives(g, {RelationPath::parse_machine("r")},
                                             {{"u", "v"}, {"w", "z"}});
        CHECK(report.flagged.empty());
        CHECK_FALSE(report.empty_path_warning);
    }

    TEST_CASE("a pair connected through the top-weighted path shape is flagged") {
        auto g = KnowledgeGraph::load_triples(
            "x\tgene-encodes-gene-product\ta\n"
            "y\tgene-plays-role-in-process\ta\n");
        auto path =
            RelationPath::parse_machine("gene-encodes-gene-product,_gene-plays-role-in-process");
        auto report = detect_false_negatives(g, {path}, {{"x", "y"}});
        REQUIRE(report.flagged.size() == 1);
        CHECK(report.flagged[0].pair == EntityPair{"x", "y"});
        REQUIRE(report.flagged[0].witnesses.size() == 1);
        CHECK(report.flagged[0].witnesses[0] == path);
    }

    TEST_CASE("every witnessing path is recorded") {
        auto g = KnowledgeGraph::load_triples(
            "x\tenc\ta\ny\trole\ta\n"
            "x\tisa\tp\np\ttreats\ty\n");
        std::vector<RelationPath> paths = {RelationPath::parse_machine("enc,_role"),
                                           RelationPath::parse_machine("isa,treats"),
                                           RelationPath::parse_machine("treats")};
        auto report = detect_false_negatives(g, paths, {{"x", "y"}});
        REQUIRE(report.flagged.size() == 1);
        CHECK(report.flagged[0].witnesses.size() == 2);
    }

    TEST_CASE("an empty path list is a warned no-op") {
        auto g = KnowledgeGraph::load_triples("a\tr\tb\n");
        auto report = detect_false_negatives(g, {}, {{"a", "b"}});
        CHECK(report.empty_path_warning);
        CHECK(report.flagged.empty());
    }

    TEST_CASE("flagging is monotone in the path set") {
        auto g = KnowledgeGraph::load_triples(
            "x\tenc\ta\ny\trole\ta\n"
            "u\tisa\tp\np\ttreats\tv\n");
        std::vector<EntityPair> negatives = {{"x", "y"}, {"u", "v"}, {"x", "v"}};
        std::vector<RelationPath> small = {RelationPath::parse_machine("enc,_role")};
        std::vector<RelationPath> large = small;
        large.push_back(RelationPath::parse_machine("isa,treats"));
        auto a = detect_false_negatives(g, small, negatives);
        auto b = detect_false_negatives(g, large, negatives);
        for (const auto& f : a.flagged) CHECK(b.is_flagged(f.pair));
        CHECK(b.flagged.size() >= a.flagged.size());
    }

    TEST_CASE("pra_reduce with an empty flag set is the identity") {
        auto ds = make_dataset(3, 5);
        ReductionReport report;
        auto out = pra_reduce(ds, report);
        CHECK(out.examples.size() == ds.examples.size());
        CHECK(report.examples_removed == 0);
        CHECK(report.bias_before == report.bias_after);
    }

    TEST_CASE("pra_reduce with everything flagged keeps only positives") {
        auto ds = make_dataset(3, 5);
        ReductionReport report;
        for (size_t i = 0; i < 5; ++i)
            report.flagged.push_back({{"n" + std::to_string(i), "m" + std::to_string(i)}, {}});
        std::sort(report.flagged.begin(), report.flagged.end(),
                  [](const FlaggedPair& a, const FlaggedPair& b) { return a.pair < b.pair; });
        auto out = pra_reduce(ds, report);
        CHECK(out.negative_count() == 0);
        CHECK(out.positive_count() == 3);
        CHECK(report.examples_removed == 5);
    }

    TEST_CASE("a 1:5.1 dataset lands on 1:2.3 when the flags are built that way") {
        // 100 positive pairs, 510 negative pairs; flag 280 of the
        // negatives so 230 remain.
        auto ds = make_dataset(100, 510);
        CHECK(ds.bias_text() == "1:5.1");
        ReductionReport report;
        for (size_t i = 0; i < 280; ++i)
            report.flagged.push_back({{"n" + std::to_string(i), "m" + std::to_string(i)}, {}});
        std::sort(report.flagged.begin(), report.flagged.end(),
                  [](const FlaggedPair& a, const FlaggedPair& b) { return a.pair < b.pair; });
        auto out = pra_reduce(ds, report);
        CHECK(report.bias_before == "1:5.1");
        CHECK(report.bias_after == "1:2.3");
        CHECK(out.negative_count() == 230);
        CHECK(out.positive_count() == 100);
    }

    TEST_CASE("pra_reduce removes a negative example iff its pair is flagged") {
        auto ds = make_dataset(4, 8);
        ReductionReport report;
        report.flagged.push_back({{"n1", "m1"}, {}});
        report.flagged.push_back({{"n5", "m5"}, {}});
        auto out = pra_reduce(ds, report);
        std::set<EntityPair> surviving;
        for (const auto& e : out.examples) surviving.insert(e.pair);
        for (const auto& e : ds.examples) {
            bool flagged = !e.positive && report.is_flagged(e.pair);
            CHECK(surviving.count(e.pair) == (flagged ? 0u : 1u));
        }
        CHECK(report.examples_removed == 2);
    }

    TEST_CASE("adjust_bias at the target ratio keeps everything") {
        auto ds = make_dataset(5, 10);
        auto out = adjust_bias(ds, 2.0, 1);
        CHECK(out.examples.size() == ds.examples.size());
    }

    TEST_CASE("adjust_bias from 1:5.1 to 1:2 keeps exactly 200 negatives") {
        auto ds = make_dataset(100, 510);
        auto out = adjust_bias(ds, 2.0, 9);
        CHECK(out.positive_count() == 100);
        CHECK(out.negative_count() == 200);
        CHECK(out.bias_text() == "1:2.0");
    }

    TEST_CASE("adjust_bias is deterministic under the seed") {
        auto ds = make_dataset(20, 100);
        auto a = adjust_bias(ds, 2.0, 33);
        auto b = adjust_bias(ds, 2.0, 33);
        CHECK(a.serialize_jsonl() == b.serialize_jsonl());
        auto c = adjust_bias(ds, 2.0, 34);
        CHECK(a.serialize_jsonl() != c.serialize_jsonl());
    }

    TEST_CASE("adjust_bias refuses to oversample") {
        auto ds = make_dataset(10, 15);  // ratio 1.5 < 2
        CHECK_THROWS_WITH_AS(adjust_bias(ds, 2.0, 1), doctest::Contains("no oversampling"),
                             std::runtime_error);
    }

    TEST_CASE("random_reduce against itself preserves the content") {
        auto ds = make_dataset(4, 9);
        auto out = random_reduce(ds, ds, 5);
        CHECK(out.serialize_jsonl() == ds.serialize_jsonl());
    }

    TEST_CASE("random_reduce matches the reference counts exactly") {
        auto ds = make_dataset(6, 20);
        auto reference = adjust_bias(ds, 2.0, 3);  // 12 negatives
        auto out = random_reduce(ds, reference, 7);
        CHECK(out.positive_count() == reference.positive_count());
        CHECK(out.negative_count() == reference.negative_count());
    }

    TEST_CASE("seed variation changes membership but never counts") {
        auto ds = make_dataset(5, 40);
        auto reference = adjust_bias(ds, 2.0, 1);  // keeps 10 negatives
        std::set<std::string> variants;
        for (uint64_t seed = 0; seed < 20; ++seed) {
            auto out = random_reduce(ds, reference, seed);
            CHECK(out.negative_count() == reference.negative_count());
            CHECK(out.positive_count() == reference.positive_count());
            variants.insert(out.serialize_jsonl());
        }
        CHECK(variants.size() > 1);
    }

    TEST_CASE("random_reduce validates its preconditions") {
        auto ds = make_dataset(4, 5);
        auto bigger = make_dataset(4, 8);
        CHECK_THROWS_WITH_AS(random_reduce(ds, bigger, 1), doctest::Contains("fewer negatives"),
                             std::runtime_error);
        auto other_pos = make_dataset(5, 5);
        CHECK_THROWS_WITH_AS(random_reduce(ds, other_pos, 1),
                             doctest::Contains("positive counts differ"), std::runtime_error);
    }

    TEST_CASE("reduction reports round-trip through JSON") {
        auto g = KnowledgeGraph::load_triples("x\tenc\ta\ny\trole\ta\n");
        auto report = detect_false_negatives(g, {RelationPath::parse_machine("enc,_role")},
                                             {{"x", "y"}, {"u", "v"}});
        report.relation = "treats";
        auto ds = make_dataset(2, 2);
        pra_reduce(ds, report);
        auto parsed = ReductionReport::from_json(report.to_json());
        CHECK(parsed.relation == "treats");
        REQUIRE(parsed.flagged.size() == 1);
        CHECK(parsed.flagged[0].pair == EntityPair{"x", "y"});
        CHECK(parsed.flagged[0].witnesses == report.flagged[0].witnesses);
        CHECK(parsed.to_json() == report.to_json());
        // the textual witness form is present for auditors
        CHECK(report.to_json().find("enc(x,a) ∧ _role(a,y)") != std::string::npos);
    }
}
