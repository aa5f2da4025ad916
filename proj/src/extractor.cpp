#include "prafilter/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "prafilter/logreg.hpp"
#include "prafilter/util.hpp"

namespace prafilter {

namespace {

std::string gap_bucket(int gap) {
    if (gap < 0) return "overlap";
    if (gap <= 5) return std::to_string(gap);
    if (gap <= 10) return "6-10";
    return "11+";
}

void flanking_features(const Sentence& s, const Span& span, const std::string& side,
                       std::map<std::string, double>& acc) {
    std::string before = span.start > 0 ? s.tokens[span.start - 1] : "<BOS>";
    std::string after =
        span.end + 1 < static_cast<int>(s.tokens.size()) ? s.tokens[span.end + 1] : "<EOS>";
    acc["before_" + side + "=" + before] += 1.0;
    acc["after_" + side + "=" + after] += 1.0;
}

}  // namespace

FeatureVec featurize(const LabeledExample& e) {
    std::map<std::string, double> acc;

    const Span& earlier = (e.first_span <= e.second_span) ? e.first_span : e.second_span;
    const Span& later = (e.first_span <= e.second_span) ? e.second_span : e.first_span;

    for (int i = earlier.end + 1; i < later.start; ++i)
        acc["between=" + e.sentence.tokens[i]] += 1.0;
    for (int i = earlier.end + 1; i + 1 < later.start; ++i)
        acc["between_bigram=" + e.sentence.tokens[i] + "|" + e.sentence.tokens[i + 1]] += 1.0;

    if (e.first_span.start < e.second_span.start)
        acc["order=first_first"] += 1.0;
    else if (e.second_span.start < e.first_span.start)
        acc["order=second_first"] += 1.0;
    else
        acc["order=same_start"] += 1.0;

    acc["gap_bucket=" + gap_bucket(mention_gap(e.first_span, e.second_span))] += 1.0;

    flanking_features(e.sentence, e.first_span, "first", acc);
    flanking_features(e.sentence, e.second_span, "second", acc);

    return {acc.begin(), acc.end()};
}

ExtractorModel train_extractor(const LabeledDataset& ds, double l2, uint64_t seed, int max_iters,
                               double tolerance, ExtractorTrainInfo* info) {
    size_t positives = ds.positive_count();
    if (positives == 0 || positives == ds.examples.size())
        throw std::runtime_error("train_extractor: dataset must contain both labels");

    std::vector<FeatureVec> rows;
    rows.reserve(ds.examples.size());
    std::map<std::string, uint32_t> vocabulary;
    for (const auto& e : ds.examples) {
        rows.push_back(featurize(e));
        for (const auto& [name, value] : rows.back()) vocabulary.emplace(name, 0);
    }
    uint32_t next = 0;
    for (auto& [name, idx] : vocabulary) idx = next++;

    DesignMatrix x;
    x.cols = vocabulary.size();
    std::vector<uint8_t> y;
    for (size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::pair<uint32_t, double>> entries;
        entries.reserve(rows[i].size());
        for (const auto& [name, value] : rows[i]) entries.emplace_back(vocabulary[name], value);
        x.add_row(entries);
        y.push_back(ds.examples[i].positive ? 1 : 0);
    }

    LogRegOptions opts;
    opts.l2 = l2;
    opts.max_iters = max_iters;
    opts.tolerance = tolerance;
    auto fit = fit_logistic(x, y, opts);

    ExtractorModel model;
    model.relation = ds.relation;
    model.bias = fit.bias;
    model.l2 = l2;
    model.seed = seed;
    for (const auto& [name, idx] : vocabulary) model.weights.emplace_back(name, fit.weights[idx]);
    std::stable_sort(model.weights.begin(), model.weights.end(),
                     [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return a.first < b.first;
                     });
    if (info) {
        info->iterations = fit.iterations;
        info->converged = fit.converged;
        info->objective = fit.objective;
        info->features = vocabulary.size();
    }
    return model;
}

void ExtractorModel::ensure_lookup() const {
    if (lookup_.size() == weights.size()) return;
    lookup_.clear();
    for (const auto& [name, w] : weights) lookup_.emplace(name, w);
}

double ExtractorModel::sentence_probability(const LabeledExample& example) const {
    ensure_lookup();
    double z = bias;
    for (const auto& [name, value] : featurize(example)) {
        auto it = lookup_.find(name);
        if (it != lookup_.end()) z += it->second * value;
    }
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<PairPrediction> predict_pairs(const ExtractorModel& model, const LabeledDataset& ds) {
    std::map<EntityPair, double> best;
    for (const auto& e : ds.examples) {
        double p = model.sentence_probability(e);
        auto [it, inserted] = best.emplace(e.pair, p);
        if (!inserted && p > it->second) it->second = p;
    }
    std::vector<PairPrediction> out;
    out.reserve(best.size());
    for (const auto& [pair, p] : best) out.push_back({pair, p, p >= 0.5});
    return out;
}

std::string predictions_csv(const std::vector<PairPrediction>& predictions) {
    std::string out = "pair_first,pair_second,probability,label\n";
    for (const auto& p : predictions) {
        out += p.pair.first;
        out += ',';
        out += p.pair.second;
        out += ',';
        out += format_double(p.probability);
        out += ',';
        out += p.label ? "positive" : "negative";
        out += '\n';
    }
    return out;
}

std::string ExtractorModel::serialize() const {
    std::ostringstream ss;
    ss << "relation: " << relation << "\n";
    ss << "bias: " << format_double(bias) << "\n";
    ss << "meta: l2=" << format_double(l2) << " seed=" << seed << "\n";
    for (const auto& [name, w] : weights) ss << format_double(w) << "\t" << name << "\n";
    return ss.str();
}

ExtractorModel ExtractorModel::parse(const std::string& text) {
    ExtractorModel m;
    auto lines = split(text, '\n');
    size_t i = 0;
    auto expect_header = [&](const std::string& key) -> std::string {
        if (i >= lines.size() || lines[i].rfind(key + ": ", 0) != 0)
            throw std::runtime_error("extractor model: missing '" + key + ":' header");
        return lines[i++].substr(key.size() + 2);
    };
    m.relation = expect_header("relation");
    m.bias = std::stod(expect_header("bias"));
    for (const auto& kv : split(expect_header("meta"), ' ')) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "l2") m.l2 = std::stod(v);
        else if (k == "seed") m.seed = std::stoull(v);
    }
    for (; i < lines.size(); ++i) {
        if (strip(lines[i]).empty()) continue;
        auto fields = split(lines[i], '\t');
        if (fields.size() != 2)
            throw std::runtime_error("extractor model: bad entry line " + std::to_string(i + 1));
        m.weights.emplace_back(fields[1], std::stod(fields[0]));
    }
    return m;
}

void ExtractorModel::save(const std::string& path) const { write_file(path, serialize()); }

ExtractorModel ExtractorModel::load(const std::string& path) { return parse(read_file(path)); }

}  // namespace prafilter
