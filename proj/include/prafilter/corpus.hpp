#pragma once

#include <string>
#include <vector>

namespace prafilter {

// Inclusive token span.
struct Span {
    int start = 0;
    int end = 0;

    auto operator<=>(const Span&) const = default;
};

struct Mention {
    std::string cui;
    Span span;
};

// One pre-tokenized, concept-annotated sentence. Stems and PoS tags are
// pass-through annotations produced upstream; they may be empty.
struct Sentence {
    std::string doc;
    std::vector<std::string> tokens;
    std::vector<Mention> mentions;
    std::vector<std::string> stems;
    std::vector<std::string> pos;
};

// JSON-lines corpus: one sentence object per line with keys "doc",
// "tokens", "mentions" ([{"cui","start","end"}]) and optional "stems",
// "pos". Throws on malformed lines or out-of-range spans, naming the
// line number.
std::vector<Sentence> parse_corpus_jsonl(const std::string& text,
                                         const std::string& source_name = "<memory>");
std::vector<Sentence> load_corpus_jsonl(const std::string& path);
std::string serialize_corpus_jsonl(const std::vector<Sentence>& corpus);

}  // namespace prafilter
