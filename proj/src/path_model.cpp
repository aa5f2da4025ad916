#include "prafilter/path_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "prafilter/rng.hpp"
#include "prafilter/util.hpp"

namespace prafilter {

std::string PathModel::serialize() const {
    std::ostringstream ss;
    ss << "relation: " << relation << "\n";
    ss << "bias: " << format_double(bias) << "\n";
    ss << "meta: max_len=" << meta.max_len << " min_support=" << meta.min_support
       << " l2=" << format_double(meta.l2) << " seed=" << meta.seed << "\n";
    for (const auto& e : entries) ss << format_double(e.weight) << "\t" << e.path.machine_text() << "\n";
    return ss.str();
}

PathModel PathModel::parse(const std::string& text) {
    PathModel m;
    auto lines = split(text, '\n');
    size_t i = 0;
    auto expect_header = [&](const std::string& key) -> std::string {
        if (i >= lines.size() || lines[i].rfind(key + ": ", 0) != 0)
            throw std::runtime_error("path model: missing '" + key + ":' header");
        return lines[i++].substr(key.size() + 2);
    };
    m.relation = expect_header("relation");
    m.bias = std::stod(expect_header("bias"));
    std::string meta = expect_header("meta");
    for (const auto& kv : split(meta, ' ')) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "max_len") m.meta.max_len = std::stoi(v);
        else if (k == "min_support") m.meta.min_support = std::stoi(v);
        else if (k == "l2") m.meta.l2 = std::stod(v);
        else if (k == "seed") m.meta.seed = std::stoull(v);
    }
    for (; i < lines.size(); ++i) {
        if (strip(lines[i]).empty()) continue;
        auto fields = split(lines[i], '\t');
        if (fields.size() != 2)
            throw std::runtime_error("path model: bad entry line " + std::to_string(i + 1));
        m.entries.push_back({RelationPath::parse_machine(fields[1]), std::stod(fields[0])});
    }
    return m;
}

void PathModel::save(const std::string& path) const { write_file(path, serialize()); }

PathModel PathModel::load(const std::string& path) { return parse(read_file(path)); }

std::vector<PathModelEntry> select_positive_paths(const PathModel& model) {
    std::vector<PathModelEntry> out;
    for (const auto& e : model.entries)
        if (e.weight > 0.0) out.push_back(e);
    return out;
}

PraTrainingSet build_pra_training_set(const KnowledgeGraph& g, const std::string& target,
                                      double neg_ratio, uint64_t seed) {
    if (neg_ratio <= 0.0) throw std::invalid_argument("neg_ratio must be positive");
    if (!g.has_relation(target))
        throw std::runtime_error("relation '" + target + "' has no edges in the graph");

    PraTrainingSet ts;
    ts.seed = seed;
    ts.neg_ratio = neg_ratio;
    ts.positives = g.relation_pairs(*g.relation_id(target));

    std::set<std::pair<uint32_t, uint32_t>> positive_set(ts.positives.begin(), ts.positives.end());
    std::set<uint32_t> source_set, object_set;
    for (auto [s, o] : ts.positives) {
        source_set.insert(s);
        object_set.insert(o);
    }
    std::vector<uint32_t> sources(source_set.begin(), source_set.end());
    std::vector<uint32_t> objects(object_set.begin(), object_set.end());

    size_t requested = static_cast<size_t>(std::ceil(neg_ratio * double(ts.positives.size())));
    size_t available = sources.size() * objects.size() - positive_set.size();

    std::set<std::pair<uint32_t, uint32_t>> chosen;
    SeededRng rng(seed);
    if (available <= requested) {
        // Candidate pool is small; enumerate it all.
        for (uint32_t s : sources)
            for (uint32_t o : objects)
                if (!positive_set.count({s, o})) chosen.insert({s, o});
        ts.shortfall = requested - chosen.size();
    } else {
        while (chosen.size() < requested) {
            uint32_t s = sources[rng.uniform_below(sources.size())];
            uint32_t o = objects[rng.uniform_below(objects.size())];
            if (positive_set.count({s, o})) continue;
            chosen.insert({s, o});
        }
    }
    ts.negatives.assign(chosen.begin(), chosen.end());
    return ts;
}

PathModel train_logistic(const FeatureMatrix& features, const std::vector<uint8_t>& labels,
                         double l2, int max_iters, double tolerance, TrainInfo* info) {
    if (features.values.size() != labels.size())
        throw std::invalid_argument("train_logistic: row/label count mismatch");

    LogRegOptions opts;
    opts.l2 = l2;
    opts.max_iters = max_iters;
    opts.tolerance = tolerance;
    auto fit = fit_logistic(DesignMatrix::from_dense(features.values), labels, opts);

    PathModel model;
    model.bias = fit.bias;
    model.meta.l2 = l2;
    for (size_t j = 0; j < features.paths.size(); ++j)
        model.entries.push_back({features.paths[j], fit.weights[j]});
    std::stable_sort(model.entries.begin(), model.entries.end(),
                     [](const PathModelEntry& a, const PathModelEntry& b) {
                         if (a.weight != b.weight) return a.weight > b.weight;
                         return a.path < b.path;
                     });
    if (info) {
        info->iterations = fit.iterations;
        info->converged = fit.converged;
        info->objective = fit.objective;
    }
    return model;
}

PathModel learn_path_model(const KnowledgeGraph& g, const std::string& target,
                           const PraConfig& config, PraRunStats* stats) {
    auto ts = build_pra_training_set(g, target, config.neg_ratio, config.seed);

    PathEnumOptions enum_opts;
    enum_opts.max_len = config.max_len;
    enum_opts.min_support = config.min_support;
    enum_opts.fanout_cap = config.fanout_cap;
    enum_opts.mask_relation = target;
    auto enumerated = enumerate_paths(g, ts.positives, enum_opts);

    // The bare target path restates the label; drop it.
    RelationPath bare{{RelationRef{target, false}}};
    std::vector<RelationPath> candidates;
    for (auto& p : enumerated.paths)
        if (!(p == bare)) candidates.push_back(std::move(p));

    PathModel model;
    model.relation = target;
    model.meta.max_len = config.max_len;
    model.meta.min_support = config.min_support;
    model.meta.l2 = config.l2;
    model.meta.seed = config.seed;

    TrainInfo info;
    if (!candidates.empty()) {
        std::vector<std::pair<uint32_t, uint32_t>> rows = ts.positives;
        rows.insert(rows.end(), ts.negatives.begin(), ts.negatives.end());
        std::vector<uint8_t> labels(rows.size(), 0);
        std::fill(labels.begin(), labels.begin() + ts.positives.size(), 1);

        auto features = build_feature_matrix(g, rows, candidates, target, config.threads);
        if (!features.paths.empty()) {
            auto trained =
                train_logistic(features, labels, config.l2, config.max_iters, config.tolerance, &info);
            model.entries = std::move(trained.entries);
            model.bias = trained.bias;
        }
    }

    if (stats) {
        stats->positives = ts.positives.size();
        stats->negatives = ts.negatives.size();
        stats->shortfall = ts.shortfall;
        stats->enumerated_paths = candidates.size();
        stats->surviving_paths = model.entries.size();
        stats->truncated_branches = enumerated.truncated_branches;
        stats->train = info;
    }
    return model;
}

}  // namespace prafilter
