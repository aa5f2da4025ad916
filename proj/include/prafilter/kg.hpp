#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace prafilter {

// One step of graph traversal: a relation label plus an inversion flag.
// "_isa" is the textual form of isa traversed against edge direction.
struct RelationRef {
    std::string name;
    bool inverted = false;

    std::string text() const { return inverted ? "_" + name : name; }
    RelationRef inverse() const { return {name, !inverted}; }
    static RelationRef parse(const std::string& text);

    bool operator==(const RelationRef& o) const = default;
};

struct Triple {
    uint32_t subject;
    uint32_t relation;  // never inverted in storage
    uint32_t object;

    auto operator<=>(const Triple&) const = default;
};

// Immutable typed multigraph over interned entity and relation symbols.
// Construction happens once (load_triples / remove_relation_edges); after
// that all queries are const and the graph can be shared across threads.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    // Parses the triple file format: subject<TAB>relation<TAB>object per
    // line, '#' comment lines and blank lines skipped. Throws on a
    // malformed line, naming the line number. Relation names starting
    // with '_' are rejected: the underscore prefix is reserved for
    // inverse traversal.
    static KnowledgeGraph load_triples(const std::string& content,
                                       const std::string& source_name = "<memory>");
    static KnowledgeGraph load_triples_file(const std::string& path);

    // Entity / relation interning. Ids are assigned in first-appearance
    // order of the input, which fixes all downstream traversal order.
    std::optional<uint32_t> entity_id(const std::string& name) const;
    const std::string& entity_name(uint32_t id) const { return entity_names_.at(id); }
    std::optional<uint32_t> relation_id(const std::string& name) const;
    const std::string& relation_name(uint32_t id) const { return relation_names_.at(id); }

    size_t entity_count() const { return entity_names_.size(); }
    size_t triple_count() const { return triples_.size(); }
    size_t self_loop_count() const { return self_loops_; }

    // Relations present with at least one edge, sorted by name.
    std::vector<std::string> relation_catalog() const;
    size_t relation_count() const;
    uint64_t relation_edge_count(const std::string& name) const;
    bool has_relation(const std::string& name) const { return relation_edge_count(name) > 0; }

    // Sorted, duplicate-free neighbor list. Unknown node or relation
    // yields the empty list. An inverted reference walks the backward
    // index of its base relation.
    const std::vector<uint32_t>& neighbors(uint32_t node, uint32_t relation, bool inverted) const;
    std::vector<std::string> neighbors(const std::string& node, const std::string& relation_text) const;

    bool has_triple(uint32_t s, uint32_t r, uint32_t o) const;
    bool has_triple(const std::string& s, const std::string& r, const std::string& o) const;

    const std::vector<Triple>& triples() const { return triples_; }

    // All (subject, object) edges of a relation, sorted by id pair.
    std::vector<std::pair<uint32_t, uint32_t>> relation_pairs(uint32_t relation) const;
    std::vector<std::pair<std::string, std::string>> relation_pairs(const std::string& name) const;

    // Copy of the graph without the listed (subject, name, object)
    // triples. Pairs not present are ignored. Interned ids are preserved.
    KnowledgeGraph remove_relation_edges(
        const std::string& name,
        const std::vector<std::pair<std::string, std::string>>& pairs) const;
    KnowledgeGraph remove_relation_edges(
        uint32_t relation, const std::vector<std::pair<uint32_t, uint32_t>>& pairs) const;

    // Triple file text, sorted by interned ids; load_triples(serialize())
    // reproduces the same triple set.
    std::string serialize() const;

    // key: value stats block (entities, relations, triples, self_loops,
    // then per-relation edge counts).
    std::string stats_text() const;

private:
    uint32_t intern_entity(const std::string& name);
    uint32_t intern_relation(const std::string& name);
    void add_indexed(const Triple& t);
    void finalize();

    std::vector<std::string> entity_names_;
    std::unordered_map<std::string, uint32_t> entity_ids_;
    std::vector<std::string> relation_names_;
    std::unordered_map<std::string, uint32_t> relation_ids_;

    std::vector<Triple> triples_;  // sorted, unique
    std::vector<uint64_t> relation_counts_;
    size_t self_loops_ = 0;

    // (node, relation) -> sorted neighbor ids
    std::unordered_map<uint64_t, std::vector<uint32_t>> forward_;
    std::unordered_map<uint64_t, std::vector<uint32_t>> backward_;
};

}  // namespace prafilter
