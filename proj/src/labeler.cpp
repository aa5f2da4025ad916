#include "prafilter/labeler.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <set>
#include <stdexcept>

#include "prafilter/rng.hpp"
#include "prafilter/util.hpp"

namespace prafilter {

using ordered_json = nlohmann::ordered_json;

std::vector<EntityPair> extract_positive_pairs(const KnowledgeGraph& kb,
                                               const std::string& target) {
    if (!kb.has_relation(target))
        throw std::runtime_error("relation '" + target + "' has no edges in the knowledge base");
    uint32_t target_id = *kb.relation_id(target);

    std::vector<EntityPair> out;
    for (auto [s, o] : kb.relation_pairs(target_id)) {
        if (s == o) continue;  // instance pairs are ordered pairs of distinct entities
        bool other_relation = false;
        for (const auto& name : kb.relation_catalog()) {
            uint32_t r = *kb.relation_id(name);
            if (r == target_id) continue;
            if (kb.has_triple(s, r, o)) {
                other_relation = true;
                break;
            }
        }
        if (!other_relation) out.emplace_back(kb.entity_name(s), kb.entity_name(o));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<EntityPair> generate_negative_pairs(const std::vector<EntityPair>& positives,
                                                size_t count, uint64_t seed) {
    std::set<EntityPair> positive_set(positives.begin(), positives.end());
    std::set<std::string> first_set, second_set;
    for (const auto& [f, s] : positives) {
        first_set.insert(f);
        second_set.insert(s);
    }
    std::vector<std::string> firsts(first_set.begin(), first_set.end());
    std::vector<std::string> seconds(second_set.begin(), second_set.end());

    size_t self_pairs = 0;
    for (const auto& f : firsts)
        if (second_set.count(f)) ++self_pairs;
    size_t available = firsts.size() * seconds.size() - self_pairs - positive_set.size();

    std::set<EntityPair> chosen;
    SeededRng rng(seed);
    if (available <= count) {
        for (const auto& f : firsts)
            for (const auto& s : seconds)
                if (f != s && !positive_set.count({f, s})) chosen.insert({f, s});
    } else {
        while (chosen.size() < count) {
            const auto& f = firsts[rng.uniform_below(firsts.size())];
            const auto& s = seconds[rng.uniform_below(seconds.size())];
            if (f == s || positive_set.count({f, s})) continue;
            chosen.insert({f, s});
        }
    }
    return {chosen.begin(), chosen.end()};
}

int mention_gap(const Span& a, const Span& b) {
    const Span& earlier = (a <= b) ? a : b;
    const Span& later = (a <= b) ? b : a;
    return later.start - earlier.end - 1;
}

const char* criterion_name(FilterCriterion c) {
    switch (c) {
        case FilterCriterion::DuplicatePositivePair: return "duplicate_positive_pair";
        case FilterCriterion::MixedPolarity: return "mixed_polarity";
        case FilterCriterion::GapExceeded: return "gap_exceeded";
        case FilterCriterion::CommonPair: return "common_pair";
    }
    return "unknown";
}

FilterCriterion criterion_from_name(const std::string& name) {
    if (name == "duplicate_positive_pair") return FilterCriterion::DuplicatePositivePair;
    if (name == "mixed_polarity") return FilterCriterion::MixedPolarity;
    if (name == "gap_exceeded") return FilterCriterion::GapExceeded;
    if (name == "common_pair") return FilterCriterion::CommonPair;
    throw std::runtime_error("unknown filter criterion: " + name);
}

size_t LabeledDataset::positive_count() const {
    size_t n = 0;
    for (const auto& e : examples) n += e.positive ? 1 : 0;
    return n;
}

size_t LabeledDataset::negative_count() const { return examples.size() - positive_count(); }

std::string LabeledDataset::bias_text() const {
    size_t pos = positive_count();
    if (pos == 0) return "n/a";
    double r = double(negative_count()) / double(pos);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "1:%.1f", r);
    return buf;
}

namespace {

// Closest pair of mention spans for (first, second) in a sentence, or
// nothing if either entity is unmentioned.
struct SpanMatch {
    Span first;
    Span second;
};

std::map<std::string, std::vector<Span>> mention_spans(const Sentence& s) {
    std::map<std::string, std::vector<Span>> by_cui;
    for (const auto& m : s.mentions) by_cui[m.cui].push_back(m.span);
    for (auto& [cui, spans] : by_cui) std::sort(spans.begin(), spans.end());
    return by_cui;
}

std::vector<SpanMatch> pair_matches(const std::map<std::string, std::vector<Span>>& by_cui,
                                    const EntityPair& pair) {
    auto fi = by_cui.find(pair.first);
    auto si = by_cui.find(pair.second);
    if (fi == by_cui.end() || si == by_cui.end()) return {};
    std::vector<SpanMatch> out;
    for (const auto& a : fi->second)
        for (const auto& b : si->second) out.push_back({a, b});
    return out;
}

SpanMatch closest_match(const std::vector<SpanMatch>& matches) {
    const SpanMatch* best = &matches.front();
    int best_gap = mention_gap(best->first, best->second);
    for (const auto& m : matches) {
        int gap = mention_gap(m.first, m.second);
        if (gap < best_gap ||
            (gap == best_gap && std::tie(m.first, m.second) < std::tie(best->first, best->second))) {
            best = &m;
            best_gap = gap;
        }
    }
    return *best;
}

}  // namespace

LabeledDataset label_corpus(const std::vector<Sentence>& corpus,
                            const std::vector<EntityPair>& positives,
                            const std::vector<EntityPair>& negatives,
                            const std::string& relation) {
    LabeledDataset ds;
    ds.relation = relation;

    // Pairs indexed by first entity, positives before negatives.
    std::map<std::string, std::vector<std::pair<EntityPair, bool>>> by_first;
    for (const auto& p : positives) by_first[p.first].emplace_back(p, true);
    for (const auto& p : negatives) by_first[p.first].emplace_back(p, false);

    for (size_t si = 0; si < corpus.size(); ++si) {
        const auto& sentence = corpus[si];
        auto by_cui = mention_spans(sentence);
        std::vector<std::pair<EntityPair, bool>> hits;
        for (const auto& [cui, spans] : by_cui) {
            auto it = by_first.find(cui);
            if (it == by_first.end()) continue;
            for (const auto& entry : it->second)
                if (by_cui.count(entry.first.second)) hits.push_back(entry);
        }
        // Positives first, then negatives, each in pair order.
        std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (const auto& [pair, positive] : hits) {
            auto matches = pair_matches(by_cui, pair);
            auto chosen = closest_match(matches);
            LabeledExample e;
            e.sentence_id = si;
            e.sentence = sentence;
            e.pair = pair;
            e.first_span = chosen.first;
            e.second_span = chosen.second;
            e.positive = positive;
            ds.examples.push_back(std::move(e));
        }
    }
    return ds;
}

LabeledDataset filter_examples(const LabeledDataset& ds, size_t common_pair_max) {
    if (common_pair_max < 1) throw std::invalid_argument("common_pair_max must be >= 1");

    // Group active examples by sentence for the two sentence-level criteria.
    std::map<size_t, std::vector<size_t>> by_sentence;
    for (size_t i = 0; i < ds.examples.size(); ++i)
        by_sentence[ds.examples[i].sentence_id].push_back(i);

    std::map<EntityPair, size_t> pair_sentences;
    for (const auto& e : ds.examples) pair_sentences[e.pair]++;

    std::set<size_t> duplicate_sentences;  // a positive pair occurs more than once
    std::set<size_t> mixed_sentences;      // positive and negative pair together
    for (const auto& [sid, idxs] : by_sentence) {
        bool any_pos = false, any_neg = false, dup = false;
        auto by_cui = mention_spans(ds.examples[idxs.front()].sentence);
        for (size_t i : idxs) {
            const auto& e = ds.examples[i];
            (e.positive ? any_pos : any_neg) = true;
            if (e.positive && pair_matches(by_cui, e.pair).size() > 1) dup = true;
        }
        if (dup) duplicate_sentences.insert(sid);
        if (any_pos && any_neg) mixed_sentences.insert(sid);
    }

    LabeledDataset out;
    out.relation = ds.relation;
    out.removed = ds.removed;
    for (const auto& e : ds.examples) {
        std::vector<FilterCriterion> fired;
        if (duplicate_sentences.count(e.sentence_id))
            fired.push_back(FilterCriterion::DuplicatePositivePair);
        if (mixed_sentences.count(e.sentence_id)) fired.push_back(FilterCriterion::MixedPolarity);
        if (mention_gap(e.first_span, e.second_span) > 5)
            fired.push_back(FilterCriterion::GapExceeded);
        if (pair_sentences[e.pair] > common_pair_max)
            fired.push_back(FilterCriterion::CommonPair);

        if (fired.empty())
            out.examples.push_back(e);
        else
            out.removed.push_back({e, fired});
    }
    return out;
}

namespace {

ordered_json example_to_json(const LabeledExample& e) {
    ordered_json j;
    j["doc"] = e.sentence.doc;
    j["sentence_id"] = e.sentence_id;
    j["tokens"] = e.sentence.tokens;
    auto mentions = ordered_json::array();
    for (const auto& m : e.sentence.mentions)
        mentions.push_back({{"cui", m.cui}, {"start", m.span.start}, {"end", m.span.end}});
    j["mentions"] = mentions;
    if (!e.sentence.stems.empty()) j["stems"] = e.sentence.stems;
    if (!e.sentence.pos.empty()) j["pos"] = e.sentence.pos;
    j["pair"] = {e.pair.first, e.pair.second};
    j["spans"] = {{e.first_span.start, e.first_span.end}, {e.second_span.start, e.second_span.end}};
    j["label"] = e.positive ? "positive" : "negative";
    return j;
}

LabeledExample example_from_json(const ordered_json& j, const std::string& where) {
    LabeledExample e;
    e.sentence.doc = j.value("doc", "");
    e.sentence_id = j.at("sentence_id").get<size_t>();
    for (const auto& t : j.at("tokens")) e.sentence.tokens.push_back(t.get<std::string>());
    for (const auto& m : j.at("mentions")) {
        Mention mention;
        mention.cui = m.at("cui").get<std::string>();
        mention.span.start = m.at("start").get<int>();
        mention.span.end = m.at("end").get<int>();
        e.sentence.mentions.push_back(mention);
    }
    if (j.contains("stems"))
        for (const auto& t : j["stems"]) e.sentence.stems.push_back(t.get<std::string>());
    if (j.contains("pos"))
        for (const auto& t : j["pos"]) e.sentence.pos.push_back(t.get<std::string>());
    e.pair = {j.at("pair")[0].get<std::string>(), j.at("pair")[1].get<std::string>()};
    e.first_span = {j.at("spans")[0][0].get<int>(), j.at("spans")[0][1].get<int>()};
    e.second_span = {j.at("spans")[1][0].get<int>(), j.at("spans")[1][1].get<int>()};
    std::string label = j.at("label").get<std::string>();
    if (label != "positive" && label != "negative")
        throw std::runtime_error(where + ": label must be positive or negative");
    e.positive = label == "positive";
    return e;
}

}  // namespace

std::string LabeledDataset::serialize_jsonl() const {
    ordered_json header;
    header["kind"] = "labeled_dataset";
    header["relation"] = relation;
    header["positives"] = positive_count();
    header["negatives"] = negative_count();
    header["bias"] = bias_text();
    header["removed"] = removed.size();
    std::string out = header.dump();
    out += '\n';
    for (const auto& e : examples) {
        out += example_to_json(e).dump();
        out += '\n';
    }
    for (const auto& r : removed) {
        auto j = example_to_json(r.example);
        auto tags = ordered_json::array();
        for (auto c : r.criteria) tags.push_back(criterion_name(c));
        j["removed"] = tags;
        out += j.dump();
        out += '\n';
    }
    return out;
}

LabeledDataset LabeledDataset::parse_jsonl(const std::string& text,
                                           const std::string& source_name) {
    LabeledDataset ds;
    size_t line_no = 0;
    bool saw_header = false;
    for (const auto& line : split(text, '\n')) {
        ++line_no;
        if (strip(line).empty()) continue;
        std::string where = source_name + ":" + std::to_string(line_no);
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": invalid JSON: " + e.what());
        }
        if (!saw_header) {
            if (j.value("kind", "") != "labeled_dataset")
                throw std::runtime_error(where + ": expected labeled_dataset header line");
            ds.relation = j.at("relation").get<std::string>();
            saw_header = true;
            continue;
        }
        if (j.contains("removed")) {
            RemovedExample r;
            r.example = example_from_json(j, where);
            for (const auto& name : j["removed"])
                r.criteria.push_back(criterion_from_name(name.get<std::string>()));
            ds.removed.push_back(std::move(r));
        } else {
            ds.examples.push_back(example_from_json(j, where));
        }
    }
    if (!saw_header) throw std::runtime_error(source_name + ": missing dataset header line");
    return ds;
}

void LabeledDataset::save(const std::string& path) const { write_file(path, serialize_jsonl()); }

LabeledDataset LabeledDataset::load(const std::string& path) {
    return parse_jsonl(read_file(path), path);
}

}  // namespace prafilter
