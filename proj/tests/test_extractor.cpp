#include <doctest.h>

#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "prafilter/extractor.hpp"
#include "prafilter/rng.hpp"

using namespace prafilter;

namespace {

LabeledExample example_from(const std::vector<std::string>& tokens, Span first, Span second,
                            bool positive = true) {
    LabeledExample e;
    e.sentence.doc = "d";
    e.sentence.tokens = tokens;
    e.sentence.mentions = {{"A", first}, {"B", second}};
    e.pair = {"A", "B"};
    e.first_span = first;
    e.second_span = second;
    e.positive = positive;
    return e;
}

std::map<std::string, double> as_map(const FeatureVec& v) { return {v.begin(), v.end()}; }

// Synthetic separable corpus: positives say "binds", negatives say "near".
LabeledDataset toy_dataset(size_t n_pos, size_t n_neg, uint64_t seed) {
    SeededRng rng(seed);
    LabeledDataset ds;
    ds.relation = "r";
    for (size_t i = 0; i < n_pos + n_neg; ++i) {
        bool positive = i < n_pos;
        LabeledExample e;
        e.sentence_id = i;
        e.sentence.doc = "d" + std::to_string(i);
        std::string cue = positive ? "binds" : "near";
        std::string filler = "f" + std::to_string(rng.uniform_below(4));
        e.sentence.tokens = {filler, "E" + std::to_string(i), cue, "X" + std::to_string(i), filler};
        e.sentence.mentions = {{"E" + std::to_string(i), {1, 1}}, {"X" + std::to_string(i), {3, 3}}};
        e.pair = {"E" + std::to_string(i), "X" + std::to_string(i)};
        e.first_span = {1, 1};
        e.second_span = {3, 3};
        e.positive = positive;
        ds.examples.push_back(std::move(e));
    }
    return ds;
}

double auc(const std::vector<std::pair<double, bool>>& scored) {
    // rank-sum AUC with tie handling via average ranks
    auto sorted = scored;
    std::sort(sorted.begin(), sorted.end());
    double rank_sum = 0;
    size_t positives = 0, negatives = 0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) ++j;
        double avg_rank = (double(i) + double(j - 1)) / 2.0 + 1.0;
        for (size_t k = i; k < j; ++k)
            if (sorted[k].second) rank_sum += avg_rank;
        i = j;
    }
    for (const auto& [s, y] : scored) (y ? positives : negatives)++;
    if (!positives || !negatives) return 0.5;
    return (rank_sum - double(positives) * (positives + 1) / 2.0) /
           (double(positives) * negatives);
}

}  // namespace

TEST_SUITE("extractor") {
    TEST_CASE("adjacent mentions produce no between features and gap bucket 0") {
        auto e = example_from({"w", "A", "B", "w"}, {1, 1}, {2, 2});
        auto f = as_map(featurize(e));
        for (const auto& [name, v] : f) CHECK(name.rfind("between", 0) != 0);
        CHECK(f.count("gap_bucket=0") == 1);
        CHECK(f.count("order=first_first") == 1);
    }

    TEST_CASE("identical sentences produce identical vectors") {
        auto a = example_from({"w", "A", "binds", "to", "B", "w"}, {1, 1}, {4, 4});
        auto b = example_from({"w", "A", "binds", "to", "B", "w"}, {1, 1}, {4, 4});
        CHECK(featurize(a) == featurize(b));
    }

    TEST_CASE("documented sentence yields the hand-enumerated feature set") {
        // tokens: the A strongly binds B today; spans at 1 and 4
        auto e = example_from({"the", "A", "strongly", "binds", "B", "today"}, {1, 1}, {4, 4});
        auto got = as_map(featurize(e));
        std::map<std::string, double> want = {
            {"between=strongly", 1.0},
            {"between=binds", 1.0},
            {"between_bigram=strongly|binds", 1.0},
            {"order=first_first", 1.0},
            {"gap_bucket=2", 1.0},
            {"before_first=the", 1.0},
            {"after_first=strongly", 1.0},
            {"before_second=binds", 1.0},
            {"after_second=today", 1.0},
        };
        CHECK(got == want);
    }

    TEST_CASE("sentence-boundary mentions use the boundary sentinels") {
        auto e = example_from({"A", "near", "B"}, {0, 0}, {2, 2});
        auto f = as_map(featurize(e));
        CHECK(f.count("before_first=<BOS>") == 1);
        CHECK(f.count("after_second=<EOS>") == 1);
    }

    TEST_CASE("between-token counts accumulate") {
        auto e = example_from({"A", "very", "very", "B"}, {0, 0}, {3, 3});
        auto f = as_map(featurize(e));
        CHECK(f.at("between=very") == 2.0);
        CHECK(f.at("between_bigram=very|very") == 1.0);
    }

    TEST_CASE("single-class datasets are rejected") {
        auto ds = toy_dataset(5, 0, 1);
        CHECK_THROWS_WITH_AS(train_extractor(ds, 1.0, 1), doctest::Contains("both labels"),
                             std::runtime_error);
    }

    TEST_CASE("a linearly separable toy dataset trains to accuracy 1.0") {
        auto ds = toy_dataset(20, 20, 3);
        auto model = train_extractor(ds, 0.1, 1);
        size_t correct = 0;
        for (const auto& e : ds.examples)
            if ((model.sentence_probability(e) >= 0.5) == e.positive) ++correct;
        CHECK(correct == ds.examples.size());
    }

    TEST_CASE("label shuffling drives held-out AUC to chance") {
        // permutation-null oracle, 10 shuffles
        SeededRng rng(17);
        double total_auc = 0;
        for (int shuffle = 0; shuffle < 10; ++shuffle) {
            auto ds = toy_dataset(40, 40, 100 + shuffle);
            std::vector<uint8_t> labels;
            for (const auto& e : ds.examples) labels.push_back(e.positive);
            rng.shuffle(labels);
            for (size_t i = 0; i < labels.size(); ++i) ds.examples[i].positive = labels[i];

            LabeledDataset train, test;
            train.relation = test.relation = "r";
            for (size_t i = 0; i < ds.examples.size(); ++i)
                ((i % 2 == 0) ? train : test).examples.push_back(ds.examples[i]);
            if (train.positive_count() == 0 || train.negative_count() == 0) continue;
            auto model = train_extractor(train, 1.0, 1);
            std::vector<std::pair<double, bool>> scored;
            for (const auto& e : test.examples)
                scored.emplace_back(model.sentence_probability(e), e.positive);
            total_auc += auc(scored);
        }
        double mean_auc = total_auc / 10.0;
        CHECK(mean_auc > 0.4);
        CHECK(mean_auc < 0.6);
    }

    TEST_CASE("a pair with one sentence predicts that sentence's probability") {
        auto ds = toy_dataset(10, 10, 5);
        auto model = train_extractor(ds, 0.5, 1);
        auto preds = predict_pairs(model, ds);
        std::map<EntityPair, double> by_pair;
        for (const auto& p : preds) by_pair[p.pair] = p.probability;
        for (const auto& e : ds.examples)
            CHECK(by_pair.at(e.pair) == model.sentence_probability(e));
    }

    TEST_CASE("absent pairs get no prediction") {
        auto ds = toy_dataset(5, 5, 6);
        auto model = train_extractor(ds, 0.5, 1);
        LabeledDataset subset;
        subset.relation = "r";
        subset.examples.assign(ds.examples.begin(), ds.examples.begin() + 3);
        auto preds = predict_pairs(model, subset);
        CHECK(preds.size() == 3);
        std::set<EntityPair> seen;
        for (const auto& p : preds) seen.insert(p.pair);
        CHECK_FALSE(seen.count(ds.examples.back().pair));
    }

    TEST_CASE("pair probability is the max over its sentence probabilities") {
        SeededRng rng(8);
        auto ds = toy_dataset(30, 30, 7);
        // collapse onto 10 pairs so pairs collect several sentences, with
        // mixed cue tokens so the probabilities differ
        for (size_t i = 0; i < ds.examples.size(); ++i) {
            auto& e = ds.examples[i];
            std::string a = "P" + std::to_string(i % 10);
            std::string b = "Q" + std::to_string(i % 10);
            e.sentence.mentions[0].cui = a;
            e.sentence.mentions[1].cui = b;
            e.sentence.tokens[1] = a;
            e.sentence.tokens[3] = b;
            e.pair = {a, b};
        }
        auto model = train_extractor(ds, 1.0, 1);
        auto preds = predict_pairs(model, ds);
        CHECK(preds.size() == 10);
        for (const auto& p : preds) {
            double best = 0;
            for (const auto& e : ds.examples)
                if (e.pair == p.pair) best = std::max(best, model.sentence_probability(e));
            CHECK(p.probability == best);
            CHECK(p.label == (p.probability >= 0.5));
        }
    }

    TEST_CASE("shuffling sentence order changes no pair probability") {
        SeededRng rng(11);
        auto ds = toy_dataset(20, 20, 9);
        for (size_t i = 0; i < ds.examples.size(); ++i) ds.examples[i].pair = {"P" + std::to_string(i % 7), "Q"};
        auto model = train_extractor(ds, 1.0, 1);
        auto before = predict_pairs(model, ds);
        rng.shuffle(ds.examples);
        auto after = predict_pairs(model, ds);
        REQUIRE(before.size() == after.size());
        for (size_t i = 0; i < before.size(); ++i) {
            CHECK(before[i].pair == after[i].pair);
            CHECK(before[i].probability == after[i].probability);
        }
    }

    TEST_CASE("model files round-trip") {
        auto ds = toy_dataset(10, 10, 12);
        auto model = train_extractor(ds, 0.7, 99);
        auto parsed = ExtractorModel::parse(model.serialize());
        CHECK(parsed.relation == model.relation);
        CHECK(parsed.bias == model.bias);
        CHECK(parsed.l2 == 0.7);
        CHECK(parsed.seed == 99);
        CHECK(parsed.weights == model.weights);
        CHECK(parsed.serialize() == model.serialize());
    }

    TEST_CASE("predictions export as CSV") {
        std::vector<PairPrediction> preds = {{{"a", "b"}, 0.75, true}, {{"c", "d"}, 0.25, false}};
        auto csv = predictions_csv(preds);
        CHECK(csv.rfind("pair_first,pair_second,probability,label\n", 0) == 0);
        CHECK(csv.find("a,b,0.75,positive\n") != std::string::npos);
        CHECK(csv.find("c,d,0.25,negative\n") != std::string::npos);
    }
}
