#include "prafilter/corpus.hpp"

#include <json.hpp>
#include <stdexcept>

#include "prafilter/util.hpp"

namespace prafilter {

using ordered_json = nlohmann::ordered_json;

namespace {

Sentence sentence_from_json(const ordered_json& j, const std::string& where) {
    Sentence s;
    if (!j.is_object()) throw std::runtime_error(where + ": sentence must be a JSON object");
    s.doc = j.value("doc", "");
    if (!j.contains("tokens") || !j["tokens"].is_array())
        throw std::runtime_error(where + ": missing 'tokens' array");
    for (const auto& t : j["tokens"]) s.tokens.push_back(t.get<std::string>());
    if (j.contains("mentions")) {
        for (const auto& m : j["mentions"]) {
            Mention mention;
            mention.cui = m.at("cui").get<std::string>();
            mention.span.start = m.at("start").get<int>();
            mention.span.end = m.at("end").get<int>();
            if (mention.cui.empty()) throw std::runtime_error(where + ": empty mention cui");
            if (mention.span.start < 0 || mention.span.end < mention.span.start ||
                mention.span.end >= static_cast<int>(s.tokens.size()))
                throw std::runtime_error(where + ": mention span out of token range");
            s.mentions.push_back(mention);
        }
    }
    if (j.contains("stems"))
        for (const auto& t : j["stems"]) s.stems.push_back(t.get<std::string>());
    if (j.contains("pos"))
        for (const auto& t : j["pos"]) s.pos.push_back(t.get<std::string>());
    return s;
}

}  // namespace

std::vector<Sentence> parse_corpus_jsonl(const std::string& text, const std::string& source_name) {
    std::vector<Sentence> out;
    size_t line_no = 0;
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
        out.push_back(sentence_from_json(j, where));
    }
    return out;
}

std::vector<Sentence> load_corpus_jsonl(const std::string& path) {
    return parse_corpus_jsonl(read_file(path), path);
}

std::string serialize_corpus_jsonl(const std::vector<Sentence>& corpus) {
    std::string out;
    for (const auto& s : corpus) {
        ordered_json j;
        j["doc"] = s.doc;
        j["tokens"] = s.tokens;
        auto mentions = ordered_json::array();
        for (const auto& m : s.mentions)
            mentions.push_back({{"cui", m.cui}, {"start", m.span.start}, {"end", m.span.end}});
        j["mentions"] = mentions;
        if (!s.stems.empty()) j["stems"] = s.stems;
        if (!s.pos.empty()) j["pos"] = s.pos;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace prafilter
