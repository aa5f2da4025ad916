#include "prafilter/walks.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "prafilter/util.hpp"

namespace prafilter {

namespace {

struct ResolvedStep {
    uint32_t relation;
    bool inverted;
};

// Relation name -> id for every step, or nullopt if any step names a
// relation the graph has never seen (no walk can then instantiate it).
std::optional<std::vector<ResolvedStep>> resolve_steps(const KnowledgeGraph& g,
                                                       const RelationPath& path) {
    std::vector<ResolvedStep> out;
    out.reserve(path.steps.size());
    for (const auto& step : path.steps) {
        auto id = g.relation_id(step.name);
        if (!id) return std::nullopt;
        out.push_back({*id, step.inverted});
    }
    return out;
}

// Applies the edge mask to one expansion: returns the id to exclude from
// the neighbor list of `node` under (relation, inverted), if any.
std::optional<uint32_t> masked_neighbor(const EdgeMask* mask, uint32_t node, uint32_t relation,
                                        bool inverted) {
    if (!mask || relation != mask->relation) return std::nullopt;
    if (!inverted && node == mask->subject) return mask->object;
    if (inverted && node == mask->object) return mask->subject;
    return std::nullopt;
}

}  // namespace

std::map<uint32_t, double> rw_probability(const KnowledgeGraph& g, const RelationPath& path,
                                          uint32_t source, const EdgeMask* mask) {
    if (path.steps.empty()) throw std::invalid_argument("relation path must have >= 1 step");
    if (source >= g.entity_count()) return {};
    auto steps = resolve_steps(g, path);
    if (!steps) return {};

    std::map<uint32_t, double> current;
    current[source] = 1.0;
    for (const auto& step : *steps) {
        std::map<uint32_t, double> next;
        for (const auto& [node, mass] : current) {
            const auto& ns = g.neighbors(node, step.relation, step.inverted);
            auto excluded = masked_neighbor(mask, node, step.relation, step.inverted);
            size_t k = ns.size();
            if (excluded && std::binary_search(ns.begin(), ns.end(), *excluded)) --k;
            if (k == 0) continue;  // walk dies here
            double share = mass / static_cast<double>(k);
            for (uint32_t n : ns) {
                if (excluded && n == *excluded) continue;
                next[n] += share;
            }
        }
        current = std::move(next);
        if (current.empty()) break;
    }
    return current;
}

std::map<std::string, double> rw_probability(const KnowledgeGraph& g, const RelationPath& path,
                                             const std::string& source) {
    std::map<std::string, double> out;
    auto sid = g.entity_id(source);
    if (!sid) return out;
    for (const auto& [id, p] : rw_probability(g, path, *sid)) out[g.entity_name(id)] = p;
    return out;
}

bool path_exists(const KnowledgeGraph& g, const RelationPath& path, uint32_t source,
                 uint32_t target, const EdgeMask* mask) {
    if (path.steps.empty()) throw std::invalid_argument("relation path must have >= 1 step");
    if (source >= g.entity_count() || target >= g.entity_count()) return false;
    auto steps = resolve_steps(g, path);
    if (!steps) return false;

    std::vector<uint32_t> frontier{source};
    for (size_t si = 0; si < steps->size(); ++si) {
        const auto& step = (*steps)[si];
        std::set<uint32_t> next;
        for (uint32_t node : frontier) {
            const auto& ns = g.neighbors(node, step.relation, step.inverted);
            auto excluded = masked_neighbor(mask, node, step.relation, step.inverted);
            for (uint32_t n : ns) {
                if (excluded && n == *excluded) continue;
                next.insert(n);
            }
        }
        if (next.empty()) return false;
        frontier.assign(next.begin(), next.end());
    }
    return std::binary_search(frontier.begin(), frontier.end(), target);
}

bool path_exists(const KnowledgeGraph& g, const RelationPath& path, const std::string& source,
                 const std::string& target) {
    auto s = g.entity_id(source), t = g.entity_id(target);
    return s && t && path_exists(g, path, *s, *t);
}

namespace {

struct SignedRelation {
    std::string text;
    uint32_t relation;
    bool inverted;
};

// All traversable relation labels of the graph in lexicographic text
// order, so path discovery visits candidates deterministically.
std::vector<SignedRelation> signed_relations(const KnowledgeGraph& g) {
    std::vector<SignedRelation> out;
    for (const auto& name : g.relation_catalog()) {
        uint32_t id = *g.relation_id(name);
        out.push_back({name, id, false});
        out.push_back({"_" + name, id, true});
    }
    std::sort(out.begin(), out.end(),
              [](const SignedRelation& a, const SignedRelation& b) { return a.text < b.text; });
    return out;
}

struct EnumContext {
    const KnowledgeGraph& g;
    const std::vector<SignedRelation>& alphabet;
    const PathEnumOptions& options;
    const EdgeMask* mask;
    uint32_t target;
    size_t pair_index;
    std::map<RelationPath, std::set<size_t>>* support;
    uint64_t* truncated;
};

void extend(EnumContext& ctx, const std::vector<uint32_t>& frontier,
            std::vector<RelationRef>& prefix) {
    for (const auto& sr : ctx.alphabet) {
        std::set<uint32_t> next_set;
        bool truncated = false;
        for (uint32_t node : frontier) {
            const auto& ns = ctx.g.neighbors(node, sr.relation, sr.inverted);
            auto excluded = masked_neighbor(ctx.mask, node, sr.relation, sr.inverted);
            for (uint32_t n : ns) {
                if (excluded && n == *excluded) continue;
                next_set.insert(n);
                if (next_set.size() > ctx.options.fanout_cap) {
                    truncated = true;
                    break;
                }
            }
            if (truncated) break;
        }
        if (truncated) {
            ++*ctx.truncated;
            continue;
        }
        if (next_set.empty()) continue;

        prefix.push_back({sr.text.substr(sr.inverted ? 1 : 0), sr.inverted});
        if (next_set.count(ctx.target)) {
            RelationPath p;
            p.steps = prefix;
            (*ctx.support)[p].insert(ctx.pair_index);
        }
        if (prefix.size() < static_cast<size_t>(ctx.options.max_len)) {
            std::vector<uint32_t> next(next_set.begin(), next_set.end());
            extend(ctx, next, prefix);
        }
        prefix.pop_back();
    }
}

}  // namespace

PathEnumResult enumerate_paths(const KnowledgeGraph& g,
                               const std::vector<std::pair<uint32_t, uint32_t>>& pairs,
                               const PathEnumOptions& options) {
    if (options.max_len < 1) throw std::invalid_argument("max_len must be >= 1");
    if (options.min_support < 1) throw std::invalid_argument("min_support must be >= 1");

    PathEnumResult result;
    if (pairs.empty()) return result;

    auto alphabet = signed_relations(g);
    std::optional<uint32_t> mask_rel;
    if (options.mask_relation) mask_rel = g.relation_id(*options.mask_relation);

    std::map<RelationPath, std::set<size_t>> support;
    uint64_t truncated = 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        auto [s, o] = pairs[i];
        if (s >= g.entity_count() || o >= g.entity_count()) continue;
        EdgeMask mask{};
        const EdgeMask* mask_ptr = nullptr;
        if (mask_rel && g.has_triple(s, *mask_rel, o)) {
            mask = {s, *mask_rel, o};
            mask_ptr = &mask;
        }
        EnumContext ctx{g, alphabet, options, mask_ptr, o, i, &support, &truncated};
        std::vector<RelationRef> prefix;
        std::vector<uint32_t> frontier{s};
        extend(ctx, frontier, prefix);
    }

    for (const auto& [path, supporters] : support)
        if (supporters.size() >= static_cast<size_t>(options.min_support))
            result.paths.push_back(path);
    std::sort(result.paths.begin(), result.paths.end());
    result.truncated_branches = truncated;
    return result;
}

PathEnumResult enumerate_paths(const KnowledgeGraph& g,
                               const std::vector<std::pair<std::string, std::string>>& pairs,
                               const PathEnumOptions& options) {
    std::vector<std::pair<uint32_t, uint32_t>> id_pairs;
    for (const auto& [s, o] : pairs) {
        auto si = g.entity_id(s), oi = g.entity_id(o);
        if (si && oi) id_pairs.emplace_back(*si, *oi);
    }
    return enumerate_paths(g, id_pairs, options);
}

FeatureMatrix build_feature_matrix(const KnowledgeGraph& g,
                                   const std::vector<std::pair<uint32_t, uint32_t>>& pairs,
                                   const std::vector<RelationPath>& paths,
                                   const std::optional<std::string>& mask_relation,
                                   unsigned threads) {
    if (paths.empty()) throw std::invalid_argument("build_feature_matrix: paths must be non-empty");

    std::optional<uint32_t> mask_rel;
    if (mask_relation) mask_rel = g.relation_id(*mask_relation);

    std::vector<std::vector<double>> values(pairs.size(), std::vector<double>(paths.size(), 0.0));
    parallel_for(pairs.size(), threads, [&](size_t i) {
        auto [s, o] = pairs[i];
        EdgeMask mask{};
        const EdgeMask* mask_ptr = nullptr;
        if (mask_rel && g.has_triple(s, *mask_rel, o)) {
            mask = {s, *mask_rel, o};
            mask_ptr = &mask;
        }
        for (size_t j = 0; j < paths.size(); ++j) {
            auto dist = rw_probability(g, paths[j], s, mask_ptr);
            auto it = dist.find(o);
            if (it != dist.end()) values[i][j] = it->second;
        }
    });

    // Drop all-zero columns together with their paths.
    std::vector<size_t> keep;
    for (size_t j = 0; j < paths.size(); ++j) {
        bool nonzero = false;
        for (size_t i = 0; i < pairs.size() && !nonzero; ++i) nonzero = values[i][j] != 0.0;
        if (nonzero) keep.push_back(j);
    }

    FeatureMatrix m;
    m.pairs = pairs;
    for (size_t j : keep) m.paths.push_back(paths[j]);
    m.values.resize(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        m.values[i].reserve(keep.size());
        for (size_t j : keep) m.values[i].push_back(values[i][j]);
    }
    return m;
}

}  // namespace prafilter
