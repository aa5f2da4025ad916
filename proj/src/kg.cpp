#include "prafilter/kg.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <tuple>
#include <set>
#include <sstream>
#include <stdexcept>

#include "prafilter/util.hpp"

namespace prafilter {

namespace {

inline uint64_t adj_key(uint32_t node, uint32_t relation) {
    return (uint64_t(node) << 32) | relation;
}

const std::vector<uint32_t> kEmptyNeighbors;

}  // namespace

RelationRef RelationRef::parse(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("relation text must be non-empty");
    if (text[0] == '_') {
        if (text.size() == 1) throw std::invalid_argument("relation text '_' has no name");
        return {text.substr(1), true};
    }
    return {text, false};
}

uint32_t KnowledgeGraph::intern_entity(const std::string& name) {
    auto it = entity_ids_.find(name);
    if (it != entity_ids_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(entity_names_.size());
    entity_names_.push_back(name);
    entity_ids_.emplace(name, id);
    return id;
}

uint32_t KnowledgeGraph::intern_relation(const std::string& name) {
    auto it = relation_ids_.find(name);
    if (it != relation_ids_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(relation_names_.size());
    relation_names_.push_back(name);
    relation_ids_.emplace(name, id);
    relation_counts_.push_back(0);
    return id;
}

std::optional<uint32_t> KnowledgeGraph::entity_id(const std::string& name) const {
    auto it = entity_ids_.find(name);
    if (it == entity_ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<uint32_t> KnowledgeGraph::relation_id(const std::string& name) const {
    auto it = relation_ids_.find(name);
    if (it == relation_ids_.end()) return std::nullopt;
    return it->second;
}

void KnowledgeGraph::add_indexed(const Triple& t) {
    forward_[adj_key(t.subject, t.relation)].push_back(t.object);
    backward_[adj_key(t.object, t.relation)].push_back(t.subject);
    relation_counts_[t.relation]++;
    if (t.subject == t.object) ++self_loops_;
}

void KnowledgeGraph::finalize() {
    std::sort(triples_.begin(), triples_.end());
    for (auto& [k, v] : forward_) std::sort(v.begin(), v.end());
    for (auto& [k, v] : backward_) std::sort(v.begin(), v.end());
}

KnowledgeGraph KnowledgeGraph::load_triples(const std::string& content,
                                            const std::string& source_name) {
    KnowledgeGraph g;
    std::set<Triple> seen;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= content.size()) {
        size_t eol = content.find('\n', pos);
        std::string line = content.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = (eol == std::string::npos) ? content.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || strip(line).empty()) continue;
        if (line[0] == '#') continue;

        auto fields = split(line, '\t');
        if (fields.size() != 3)
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": expected 3 tab-separated fields, got " +
                                     std::to_string(fields.size()));
        if (fields[0].empty() || fields[1].empty() || fields[2].empty())
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": empty field in triple");
        if (fields[1][0] == '_')
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": relation name '" + fields[1] +
                                     "' may not start with '_' (reserved for inversion)");

        Triple t;
        t.subject = g.intern_entity(fields[0]);
        t.relation = g.intern_relation(fields[1]);
        t.object = g.intern_entity(fields[2]);
        if (!seen.insert(t).second) continue;  // duplicates stored once
        g.triples_.push_back(t);
        g.add_indexed(t);
    }
    g.finalize();
    return g;
}

KnowledgeGraph KnowledgeGraph::load_triples_file(const std::string& path) {
    return load_triples(read_file(path), path);
}

std::vector<std::string> KnowledgeGraph::relation_catalog() const {
    std::vector<std::string> out;
    for (size_t r = 0; r < relation_names_.size(); ++r)
        if (relation_counts_[r] > 0) out.push_back(relation_names_[r]);
    std::sort(out.begin(), out.end());
    return out;
}

size_t KnowledgeGraph::relation_count() const {
    size_t n = 0;
    for (uint64_t c : relation_counts_)
        if (c > 0) ++n;
    return n;
}

uint64_t KnowledgeGraph::relation_edge_count(const std::string& name) const {
    auto id = relation_id(name);
    return id ? relation_counts_[*id] : 0;
}

const std::vector<uint32_t>& KnowledgeGraph::neighbors(uint32_t node, uint32_t relation,
                                                       bool inverted) const {
    const auto& index = inverted ? backward_ : forward_;
    auto it = index.find(adj_key(node, relation));
    return it == index.end() ? kEmptyNeighbors : it->second;
}

std::vector<std::string> KnowledgeGraph::neighbors(const std::string& node,
                                                   const std::string& relation_text) const {
    auto ref = RelationRef::parse(relation_text);
    auto n = entity_id(node);
    auto r = relation_id(ref.name);
    if (!n || !r) return {};
    std::vector<std::string> out;
    for (uint32_t id : neighbors(*n, *r, ref.inverted)) out.push_back(entity_name(id));
    return out;
}

bool KnowledgeGraph::has_triple(uint32_t s, uint32_t r, uint32_t o) const {
    const auto& ns = neighbors(s, r, false);
    return std::binary_search(ns.begin(), ns.end(), o);
}

bool KnowledgeGraph::has_triple(const std::string& s, const std::string& r,
                                const std::string& o) const {
    auto si = entity_id(s), oi = entity_id(o);
    auto ri = relation_id(r);
    return si && ri && oi && has_triple(*si, *ri, *oi);
}

std::vector<std::pair<uint32_t, uint32_t>> KnowledgeGraph::relation_pairs(uint32_t relation) const {
    std::vector<std::pair<uint32_t, uint32_t>> out;
    for (const auto& t : triples_)
        if (t.relation == relation) out.emplace_back(t.subject, t.object);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<std::string, std::string>> KnowledgeGraph::relation_pairs(
    const std::string& name) const {
    auto id = relation_id(name);
    std::vector<std::pair<std::string, std::string>> out;
    if (!id) return out;
    for (auto [s, o] : relation_pairs(*id)) out.emplace_back(entity_name(s), entity_name(o));
    return out;
}

KnowledgeGraph KnowledgeGraph::remove_relation_edges(
    uint32_t relation, const std::vector<std::pair<uint32_t, uint32_t>>& pairs) const {
    std::set<std::pair<uint32_t, uint32_t>> drop(pairs.begin(), pairs.end());
    KnowledgeGraph g;
    g.entity_names_ = entity_names_;
    g.entity_ids_ = entity_ids_;
    g.relation_names_ = relation_names_;
    g.relation_ids_ = relation_ids_;
    g.relation_counts_.assign(relation_names_.size(), 0);
    for (const auto& t : triples_) {
        if (t.relation == relation && drop.count({t.subject, t.object})) continue;
        g.triples_.push_back(t);
        g.add_indexed(t);
    }
    g.finalize();
    return g;
}

KnowledgeGraph KnowledgeGraph::remove_relation_edges(
    const std::string& name, const std::vector<std::pair<std::string, std::string>>& pairs) const {
    auto rel = relation_id(name);
    if (!rel) return *this;
    std::vector<std::pair<uint32_t, uint32_t>> id_pairs;
    for (const auto& [s, o] : pairs) {
        auto si = entity_id(s), oi = entity_id(o);
        if (si && oi) id_pairs.emplace_back(*si, *oi);
    }
    return remove_relation_edges(*rel, id_pairs);
}

std::string KnowledgeGraph::serialize() const {
    // Sorted by names, not interned ids, so the text is independent of
    // the interning history and load(serialize()) serializes identically.
    std::vector<std::array<const std::string*, 3>> rows;
    rows.reserve(triples_.size());
    for (const auto& t : triples_)
        rows.push_back({&entity_name(t.subject), &relation_name(t.relation), &entity_name(t.object)});
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) {
                  return std::tie(*a[0], *a[1], *a[2]) < std::tie(*b[0], *b[1], *b[2]);
              });
    std::string out;
    for (const auto& row : rows) {
        out += *row[0];
        out += '\t';
        out += *row[1];
        out += '\t';
        out += *row[2];
        out += '\n';
    }
    return out;
}

std::string KnowledgeGraph::stats_text() const {
    std::ostringstream ss;
    ss << "entities: " << entity_count() << "\n";
    ss << "relations: " << relation_count() << "\n";
    ss << "triples: " << triple_count() << "\n";
    ss << "self_loops: " << self_loop_count() << "\n";
    for (const auto& name : relation_catalog())
        ss << "relation." << name << ": " << relation_edge_count(name) << "\n";
    return ss.str();
}

}  // namespace prafilter
