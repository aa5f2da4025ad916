#include "prafilter/fn_filter.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "prafilter/rng.hpp"
#include "prafilter/util.hpp"
#include "prafilter/walks.hpp"

namespace prafilter {

using ordered_json = nlohmann::ordered_json;

bool ReductionReport::is_flagged(const EntityPair& pair) const {
    auto it = std::lower_bound(flagged.begin(), flagged.end(), pair,
                               [](const FlaggedPair& f, const EntityPair& p) { return f.pair < p; });
    return it != flagged.end() && it->pair == pair;
}

ReductionReport detect_false_negatives(const KnowledgeGraph& g,
                                       const std::vector<RelationPath>& paths,
                                       const std::vector<EntityPair>& negatives,
                                       unsigned threads) {
    ReductionReport report;
    if (paths.empty()) {
        report.empty_path_warning = true;
        return report;
    }

    std::vector<EntityPair> sorted_negatives(negatives.begin(), negatives.end());
    std::sort(sorted_negatives.begin(), sorted_negatives.end());
    sorted_negatives.erase(std::unique(sorted_negatives.begin(), sorted_negatives.end()),
                           sorted_negatives.end());

    std::vector<std::vector<RelationPath>> witness_slots(sorted_negatives.size());
    parallel_for(sorted_negatives.size(), threads, [&](size_t i) {
        const auto& [first, second] = sorted_negatives[i];
        auto s = g.entity_id(first), t = g.entity_id(second);
        if (!s || !t) return;
        for (const auto& path : paths)
            if (path_exists(g, path, *s, *t)) witness_slots[i].push_back(path);
    });

    for (size_t i = 0; i < sorted_negatives.size(); ++i)
        if (!witness_slots[i].empty())
            report.flagged.push_back({sorted_negatives[i], std::move(witness_slots[i])});
    return report;
}

LabeledDataset pra_reduce(const LabeledDataset& ds, ReductionReport& report) {
    LabeledDataset out;
    out.relation = ds.relation;
    out.removed = ds.removed;

    report.positives_before = ds.positive_count();
    report.negatives_before = ds.negative_count();
    report.bias_before = ds.bias_text();
    report.examples_removed = 0;
    for (const auto& e : ds.examples) {
        if (!e.positive && report.is_flagged(e.pair)) {
            ++report.examples_removed;
            continue;
        }
        out.examples.push_back(e);
    }
    report.positives_after = out.positive_count();
    report.negatives_after = out.negative_count();
    report.bias_after = out.bias_text();
    return out;
}

LabeledDataset adjust_bias(const LabeledDataset& ds, double ratio, uint64_t seed) {
    if (ratio <= 0.0) throw std::invalid_argument("adjust_bias: ratio must be positive");
    size_t positives = ds.positive_count();
    size_t negatives = ds.negative_count();
    size_t keep = static_cast<size_t>(std::floor(ratio * double(positives)));
    if (negatives < keep)
        throw std::runtime_error("adjust_bias: current ratio " + ds.bias_text() +
                                 " is already below the target (no oversampling)");

    std::vector<size_t> negative_idx;
    for (size_t i = 0; i < ds.examples.size(); ++i)
        if (!ds.examples[i].positive) negative_idx.push_back(i);

    SeededRng rng(seed);
    auto picked = rng.sample_indices(negative_idx.size(), keep);
    std::vector<bool> retain(ds.examples.size(), false);
    for (size_t k : picked) retain[negative_idx[k]] = true;

    LabeledDataset out;
    out.relation = ds.relation;
    out.removed = ds.removed;
    for (size_t i = 0; i < ds.examples.size(); ++i)
        if (ds.examples[i].positive || retain[i]) out.examples.push_back(ds.examples[i]);
    return out;
}

LabeledDataset random_reduce(const LabeledDataset& ds, const LabeledDataset& reference,
                             uint64_t seed) {
    if (ds.positive_count() != reference.positive_count())
        throw std::runtime_error("random_reduce: positive counts differ (" +
                                 std::to_string(ds.positive_count()) + " vs " +
                                 std::to_string(reference.positive_count()) + ")");
    size_t keep = reference.negative_count();
    if (ds.negative_count() < keep)
        throw std::runtime_error("random_reduce: dataset has fewer negatives than the reference");

    std::vector<size_t> negative_idx;
    for (size_t i = 0; i < ds.examples.size(); ++i)
        if (!ds.examples[i].positive) negative_idx.push_back(i);

    SeededRng rng(seed);
    auto picked = rng.sample_indices(negative_idx.size(), keep);
    std::vector<bool> retain(ds.examples.size(), false);
    for (size_t k : picked) retain[negative_idx[k]] = true;

    LabeledDataset out;
    out.relation = ds.relation;
    out.removed = ds.removed;
    for (size_t i = 0; i < ds.examples.size(); ++i)
        if (ds.examples[i].positive || retain[i]) out.examples.push_back(ds.examples[i]);
    return out;
}

std::string ReductionReport::to_json() const {
    ordered_json j;
    j["relation"] = relation;
    j["empty_path_warning"] = empty_path_warning;
    auto flagged_json = ordered_json::array();
    for (const auto& f : flagged) {
        ordered_json fj;
        fj["pair"] = {f.pair.first, f.pair.second};
        auto witnesses = ordered_json::array();
        auto machine = ordered_json::array();
        for (const auto& w : f.witnesses) {
            witnesses.push_back(w.display_text());
            machine.push_back(w.machine_text());
        }
        fj["witnesses"] = witnesses;
        fj["witnesses_machine"] = machine;
        flagged_json.push_back(fj);
    }
    j["flagged"] = flagged_json;
    j["examples_removed"] = examples_removed;
    j["counts_before"] = {{"positives", positives_before}, {"negatives", negatives_before}};
    j["counts_after"] = {{"positives", positives_after}, {"negatives", negatives_after}};
    j["bias_before"] = bias_before;
    j["bias_after"] = bias_after;
    return j.dump(2) + "\n";
}

ReductionReport ReductionReport::from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    ReductionReport r;
    r.relation = j.value("relation", "");
    r.empty_path_warning = j.value("empty_path_warning", false);
    for (const auto& fj : j.at("flagged")) {
        FlaggedPair f;
        f.pair = {fj.at("pair")[0].get<std::string>(), fj.at("pair")[1].get<std::string>()};
        for (const auto& w : fj.at("witnesses_machine"))
            f.witnesses.push_back(RelationPath::parse_machine(w.get<std::string>()));
        r.flagged.push_back(std::move(f));
    }
    std::sort(r.flagged.begin(), r.flagged.end(),
              [](const FlaggedPair& a, const FlaggedPair& b) { return a.pair < b.pair; });
    r.examples_removed = j.value("examples_removed", size_t{0});
    if (j.contains("counts_before")) {
        r.positives_before = j["counts_before"].value("positives", size_t{0});
        r.negatives_before = j["counts_before"].value("negatives", size_t{0});
    }
    if (j.contains("counts_after")) {
        r.positives_after = j["counts_after"].value("positives", size_t{0});
        r.negatives_after = j["counts_after"].value("negatives", size_t{0});
    }
    r.bias_before = j.value("bias_before", "");
    r.bias_after = j.value("bias_after", "");
    return r;
}

void ReductionReport::save(const std::string& path) const { write_file(path, to_json()); }

ReductionReport ReductionReport::load(const std::string& path) {
    return from_json(read_file(path));
}

}  // namespace prafilter
