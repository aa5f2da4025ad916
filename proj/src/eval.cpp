#include "prafilter/eval.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "prafilter/fn_filter.hpp"
#include "prafilter/path_model.hpp"
#include "prafilter/rng.hpp"
#include "prafilter/util.hpp"
#include "prafilter/walks.hpp"

namespace prafilter {

using ordered_json = nlohmann::ordered_json;

std::vector<EntityPair> FoldPlan::fold_pairs(int fold) const {
    std::vector<EntityPair> out;
    for (const auto& [pair, f] : assignment)
        if (f == fold) out.push_back(pair);
    return out;
}

FoldPlan make_folds(const std::vector<EntityPair>& pairs, int k, uint64_t seed) {
    if (k < 1) throw std::invalid_argument("make_folds: k must be >= 1");
    std::vector<EntityPair> unique(pairs.begin(), pairs.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (unique.size() < static_cast<size_t>(k))
        throw std::runtime_error("make_folds: need at least " + std::to_string(k) + " pairs, got " +
                                 std::to_string(unique.size()));

    SeededRng rng(seed);
    rng.shuffle(unique);
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    for (size_t i = 0; i < unique.size(); ++i)
        plan.assignment[unique[i]] = static_cast<int>(i % k);
    return plan;
}

Prf entity_prf(const std::vector<PairPrediction>& predictions, const std::set<EntityPair>& gold) {
    Prf out;
    out.gold_size = gold.size();
    for (const auto& p : predictions) {
        if (!p.label) continue;
        ++out.predicted_positive;
        if (gold.count(p.pair)) ++out.true_positive;
    }
    if (out.predicted_positive == 0 || gold.empty()) out.degenerate = true;
    out.precision = out.predicted_positive
                        ? double(out.true_positive) / double(out.predicted_positive)
                        : 0.0;
    out.recall = gold.empty() ? 0.0 : double(out.true_positive) / double(gold.size());
    out.f1 = (out.precision + out.recall > 0.0)
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

std::vector<PrPoint> pr_curve(const std::vector<PairPrediction>& predictions,
                              const std::set<EntityPair>& gold) {
    std::vector<const PairPrediction*> by_prob;
    by_prob.reserve(predictions.size());
    for (const auto& p : predictions) by_prob.push_back(&p);
    std::sort(by_prob.begin(), by_prob.end(), [](const PairPrediction* a, const PairPrediction* b) {
        if (a->probability != b->probability) return a->probability > b->probability;
        return a->pair < b->pair;
    });

    std::vector<PrPoint> curve;
    size_t predicted = 0, correct = 0;
    size_t i = 0;
    while (i < by_prob.size()) {
        double threshold = by_prob[i]->probability;
        // All predictions tied at this probability enter together.
        while (i < by_prob.size() && by_prob[i]->probability == threshold) {
            ++predicted;
            if (gold.count(by_prob[i]->pair)) ++correct;
            ++i;
        }
        PrPoint pt;
        pt.threshold = threshold;
        pt.precision = double(correct) / double(predicted);
        pt.recall = gold.empty() ? 0.0 : double(correct) / double(gold.size());
        curve.push_back(pt);
    }
    return curve;
}

std::string pr_curve_csv(const std::vector<PrPoint>& curve) {
    std::string out = "threshold,recall,precision\n";
    for (const auto& p : curve) {
        out += format_double(p.threshold);
        out += ',';
        out += format_double(p.recall);
        out += ',';
        out += format_double(p.precision);
        out += '\n';
    }
    return out;
}

namespace {

// Distinct pairs of the dataset's active examples, by polarity.
void collect_pairs(const LabeledDataset& ds, std::set<EntityPair>* positives,
                   std::set<EntityPair>* negatives) {
    for (const auto& e : ds.examples) (e.positive ? positives : negatives)->insert(e.pair);
}

LabeledDataset restrict_to_pairs(const LabeledDataset& ds, const std::set<EntityPair>& keep) {
    LabeledDataset out;
    out.relation = ds.relation;
    for (const auto& e : ds.examples)
        if (keep.count(e.pair)) out.examples.push_back(e);
    return out;
}

struct StageGuard {
    std::string stage;

    template <typename F>
    auto run(F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const std::exception& e) {
            throw std::runtime_error(stage + ": " + e.what());
        }
    }
};

Prf pooled_prf(const std::vector<PairPrediction>& preds, const std::set<EntityPair>& gold) {
    return entity_prf(preds, gold);
}

}  // namespace

EvalReport run_comparison(const KnowledgeGraph& kb, const std::vector<Sentence>& corpus,
                          const std::vector<std::string>& relations, const EvalConfig& config) {
    EvalReport report;

    // Relation-qualified pools for the overall PR curve.
    std::map<std::string, std::vector<PairPrediction>> overall_preds;
    std::set<EntityPair> overall_gold;

    for (const auto& relation : relations) {
        RelationEval rel_eval;
        rel_eval.relation = relation;

        // Pooled (across folds) predictions and gold, per configuration.
        std::map<std::string, std::vector<PairPrediction>> pooled_preds;
        std::map<std::string, size_t> pooled_fn;
        std::set<EntityPair> pooled_gold;

        auto positives = StageGuard{"extract_positive_pairs(" + relation + ")"}.run(
            [&] { return extract_positive_pairs(kb, relation); });
        size_t neg_count =
            config.neg_pair_count
                ? *config.neg_pair_count
                : static_cast<size_t>(std::ceil(config.neg_pair_ratio * double(positives.size())));
        auto negatives = generate_negative_pairs(positives, neg_count,
                                                 mix_seed(config.neg_pair_seed, relation));

        auto base = StageGuard{"label_corpus(" + relation + ")"}.run([&] {
            return filter_examples(label_corpus(corpus, positives, negatives, relation),
                                   config.common_pair_max);
        });

        std::set<EntityPair> pos_pairs, neg_pairs;
        collect_pairs(base, &pos_pairs, &neg_pairs);
        rel_eval.positive_pairs = pos_pairs.size();
        rel_eval.negative_pairs = neg_pairs.size();

        size_t need = std::max<size_t>(config.min_pairs_per_class, config.folds);
        if (pos_pairs.size() < need || neg_pairs.size() < need) {
            rel_eval.skipped = true;
            rel_eval.skip_reason = "fewer than " + std::to_string(need) +
                                   " labeled pairs in a class (" +
                                   std::to_string(pos_pairs.size()) + " positive, " +
                                   std::to_string(neg_pairs.size()) + " negative)";
            report.relations.push_back(std::move(rel_eval));
            continue;
        }

        auto pos_plan = make_folds({pos_pairs.begin(), pos_pairs.end()}, config.folds,
                                   mix_seed(config.fold_seed, relation, 1));
        auto neg_plan = make_folds({neg_pairs.begin(), neg_pairs.end()}, config.folds,
                                   mix_seed(config.fold_seed, relation, 2));

        for (int fold = 0; fold < config.folds; ++fold) {
            FoldRecord record;
            record.fold = fold;

            std::set<EntityPair> test_pairs;
            auto test_pos = pos_plan.fold_pairs(fold);
            for (const auto& p : neg_plan.fold_pairs(fold)) test_pairs.insert(p);
            for (const auto& p : test_pos) test_pairs.insert(p);
            record.test_pairs = test_pairs.size();

            std::set<EntityPair> train_pairs;
            for (const auto& [pair, f] : pos_plan.assignment)
                if (f != fold) train_pairs.insert(pair);
            for (const auto& [pair, f] : neg_plan.assignment)
                if (f != fold) train_pairs.insert(pair);

            auto train_ds = restrict_to_pairs(base, train_pairs);
            auto test_ds = restrict_to_pairs(base, test_pairs);

            // The held-out pairs' own target edges stay out of the graph
            // used for path learning and detection.
            auto g_fold = kb.remove_relation_edges(relation, test_pos);

            std::vector<RelationPath> positive_paths;
            ReductionReport detection;
            if (!config.force_empty_paths) {
                PraConfig pra;
                pra.max_len = config.max_len;
                pra.min_support = config.min_support;
                pra.fanout_cap = config.fanout_cap;
                pra.neg_ratio = config.pra_neg_ratio;
                pra.l2 = config.pra_l2;
                pra.max_iters = config.pra_max_iters;
                pra.tolerance = config.pra_tolerance;
                pra.seed = mix_seed(config.pra_seed, relation, fold);
                pra.threads = config.threads;
                auto model = StageGuard{"learn_path_model(" + relation + ", fold " +
                                        std::to_string(fold) + ")"}
                                 .run([&] { return learn_path_model(g_fold, relation, pra); });
                for (const auto& e : select_positive_paths(model)) positive_paths.push_back(e.path);
            }

            std::set<EntityPair> train_neg_pairs;
            for (const auto& e : train_ds.examples)
                if (!e.positive) train_neg_pairs.insert(e.pair);
            detection = StageGuard{"detect_false_negatives(" + relation + ", fold " +
                                   std::to_string(fold) + ")"}
                            .run([&] {
                                return detect_false_negatives(
                                    g_fold, positive_paths,
                                    {train_neg_pairs.begin(), train_neg_pairs.end()},
                                    config.threads);
                            });
            record.flagged_pairs = detection.flagged.size();

            StageGuard build_guard{"build_datasets(" + relation + ", fold " +
                                   std::to_string(fold) + ")"};
            std::map<std::string, LabeledDataset> datasets;
            auto unfiltered = build_guard.run([&] {
                return adjust_bias(train_ds, config.bias_ratio,
                                   mix_seed(config.adjust_seed, relation, fold));
            });
            auto pra_reduced = build_guard.run([&] { return pra_reduce(unfiltered, detection); });
            auto random_reduced = build_guard.run([&] {
                return random_reduce(unfiltered, pra_reduced,
                                     mix_seed(config.random_reduce_seed, relation, fold));
            });
            datasets.emplace("unfiltered", std::move(unfiltered));
            datasets.emplace("random_reduced", std::move(random_reduced));
            datasets.emplace("pra_reduced", std::move(pra_reduced));

            std::set<EntityPair> gold;
            for (const auto& e : test_ds.examples)
                if (e.positive) gold.insert(e.pair);
            record.gold_pairs = gold.size();
            for (const auto& g : gold) pooled_gold.insert(g);

            for (const auto& name : config_names()) {
                const auto& ds = datasets.at(name);
                record.train_positives[name] = ds.positive_count();
                record.train_negatives[name] = ds.negative_count();

                auto model = StageGuard{"train_extractor(" + relation + ", fold " +
                                        std::to_string(fold) + ", " + name + ")"}
                                 .run([&] {
                                     return train_extractor(
                                         ds, config.extractor_l2,
                                         mix_seed(config.pra_seed, relation + "/" + name, fold),
                                         config.extractor_max_iters, config.extractor_tolerance);
                                 });
                auto preds = predict_pairs(model, test_ds);
                record.metrics[name] = entity_prf(preds, gold);

                size_t fn = 0;
                for (const auto& p : preds)
                    if (!p.label && gold.count(p.pair)) ++fn;
                record.false_negative_predictions[name] = fn;
                pooled_fn[name] += fn;
                auto& sink = pooled_preds[name];
                sink.insert(sink.end(), preds.begin(), preds.end());
            }
            rel_eval.folds.push_back(std::move(record));
        }

        for (const auto& name : config_names()) {
            ConfigMetrics m;
            m.prf = pooled_prf(pooled_preds[name], pooled_gold);
            m.false_negative_predictions = pooled_fn[name];
            m.curve = pr_curve(pooled_preds[name], pooled_gold);
            rel_eval.configs.emplace(name, std::move(m));

            for (const auto& p : pooled_preds[name]) {
                PairPrediction q = p;
                q.pair.first = relation + "|" + q.pair.first;
                overall_preds[name].push_back(std::move(q));
            }
        }
        for (const auto& gp : pooled_gold) overall_gold.insert({relation + "|" + gp.first, gp.second});
        report.relations.push_back(std::move(rel_eval));
    }

    // Overall: macro-average across evaluated relations; FN counts summed.
    // The overall curve pools predictions across relations with
    // relation-qualified pair keys.
    for (const auto& name : config_names()) {
        ConfigMetrics overall;
        size_t evaluated = 0;
        for (const auto& rel_eval : report.relations) {
            if (rel_eval.skipped) continue;
            ++evaluated;
            const auto& m = rel_eval.configs.at(name);
            overall.prf.precision += m.prf.precision;
            overall.prf.recall += m.prf.recall;
            overall.prf.f1 += m.prf.f1;
            overall.false_negative_predictions += m.false_negative_predictions;
        }
        if (evaluated > 0) {
            overall.prf.precision /= double(evaluated);
            overall.prf.recall /= double(evaluated);
            overall.prf.f1 /= double(evaluated);
        } else {
            overall.prf.degenerate = true;
        }
        overall.curve = pr_curve(overall_preds[name], overall_gold);
        report.overall.emplace(name, std::move(overall));
    }

    return report;
}

namespace {

ordered_json prf_to_json(const Prf& p) {
    ordered_json j;
    j["precision"] = p.precision;
    j["recall"] = p.recall;
    j["f1"] = p.f1;
    j["degenerate"] = p.degenerate;
    j["predicted_positive"] = p.predicted_positive;
    j["true_positive"] = p.true_positive;
    j["gold"] = p.gold_size;
    return j;
}

ordered_json curve_to_json(const std::vector<PrPoint>& curve) {
    auto arr = ordered_json::array();
    for (const auto& p : curve) arr.push_back({p.threshold, p.recall, p.precision});
    return arr;
}

}  // namespace

std::string EvalReport::to_json() const {
    ordered_json j;
    auto rels = ordered_json::array();
    for (const auto& rel_eval : relations) {
        ordered_json rj;
        rj["relation"] = rel_eval.relation;
        rj["skipped"] = rel_eval.skipped;
        if (rel_eval.skipped) {
            rj["skip_reason"] = rel_eval.skip_reason;
            rj["positive_pairs"] = rel_eval.positive_pairs;
            rj["negative_pairs"] = rel_eval.negative_pairs;
            rels.push_back(rj);
            continue;
        }
        rj["positive_pairs"] = rel_eval.positive_pairs;
        rj["negative_pairs"] = rel_eval.negative_pairs;
        ordered_json configs;
        for (const auto& name : config_names()) {
            const auto& m = rel_eval.configs.at(name);
            ordered_json mj;
            mj["metrics"] = prf_to_json(m.prf);
            mj["false_negative_predictions"] = m.false_negative_predictions;
            mj["pr_curve"] = curve_to_json(m.curve);
            configs[name] = mj;
        }
        rj["configs"] = configs;
        auto folds = ordered_json::array();
        for (const auto& f : rel_eval.folds) {
            ordered_json fj;
            fj["fold"] = f.fold;
            fj["test_pairs"] = f.test_pairs;
            fj["gold_pairs"] = f.gold_pairs;
            fj["flagged_pairs"] = f.flagged_pairs;
            for (const auto& name : config_names()) {
                ordered_json cj;
                cj["train_positives"] = f.train_positives.at(name);
                cj["train_negatives"] = f.train_negatives.at(name);
                cj["metrics"] = prf_to_json(f.metrics.at(name));
                cj["false_negative_predictions"] = f.false_negative_predictions.at(name);
                fj[name] = cj;
            }
            folds.push_back(fj);
        }
        rj["folds"] = folds;
        rels.push_back(rj);
    }
    j["relations"] = rels;
    ordered_json overall_json;
    for (const auto& name : config_names()) {
        const auto& m = overall.at(name);
        ordered_json mj;
        mj["precision"] = m.prf.precision;
        mj["recall"] = m.prf.recall;
        mj["f1"] = m.prf.f1;
        mj["false_negative_predictions"] = m.false_negative_predictions;
        mj["pr_curve"] = curve_to_json(m.curve);
        overall_json[name] = mj;
    }
    j["overall"] = overall_json;
    return j.dump(2) + "\n";
}

namespace {

std::string pct(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%6.2f", 100.0 * v);
    return buf;
}

}  // namespace

std::string EvalReport::table_text() const {
    std::ostringstream ss;
    size_t name_width = 7;  // "Overall"
    for (const auto& r : relations) name_width = std::max(name_width, r.relation.size());

    ss << std::string(name_width, ' ') << " |";
    for (const auto& name : config_names()) {
        std::string label = name;
        ss << " " << label << std::string(label.size() < 22 ? 22 - label.size() : 1, ' ') << "|";
    }
    ss << "\n";
    ss << std::string(name_width, ' ') << " |";
    for (size_t i = 0; i < config_names().size(); ++i) ss << "  Prec.   Rec.    F1   |";
    ss << "\n";

    auto row = [&](const std::string& label, const std::map<std::string, Prf>& vals) {
        ss << label << std::string(name_width - label.size(), ' ') << " |";
        for (const auto& name : config_names()) {
            const auto& p = vals.at(name);
            ss << " " << pct(p.precision) << " " << pct(p.recall) << " " << pct(p.f1) << " |";
        }
        ss << "\n";
    };

    std::map<std::string, Prf> overall_prf;
    for (const auto& name : config_names()) overall_prf[name] = overall.at(name).prf;
    row("Overall", overall_prf);
    for (const auto& r : relations) {
        if (r.skipped) {
            ss << r.relation << std::string(name_width - r.relation.size(), ' ')
               << " | skipped: " << r.skip_reason << "\n";
            continue;
        }
        std::map<std::string, Prf> vals;
        for (const auto& name : config_names()) vals[name] = r.configs.at(name).prf;
        row(r.relation, vals);
    }
    return ss.str();
}

}  // namespace prafilter
