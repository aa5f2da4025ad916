#include "prafilter/synth.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>
#include <stdexcept>
#include <tuple>

#include "prafilter/rng.hpp"
#include "prafilter/util.hpp"
#include "prafilter/walks.hpp"

namespace prafilter {

using ordered_json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kHeadCues = {"modulates", "regulates", "activates",
                                            "controls",  "drives",    "induces"};
const std::vector<std::string> kTailCues = {"potentiates", "amplifies", "sustains", "elicits"};
const std::vector<std::string> kNeutralCues = {"near", "alongside", "with", "amid", "beside"};
const std::vector<std::string> kFillers = {"the",      "study",  "reports", "cohort", "analysis",
                                           "observed", "series", "data",    "review", "notes"};

std::string entity_name(const std::string& type, int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "_%05d", index);
    return type + buf;
}

}  // namespace

void SynthSpec::validate() const {
    auto fail = [](const std::string& what) {
        throw std::runtime_error("infeasible synth spec: " + what);
    };
    if (types.size() != 3) fail("exactly 3 entity types required");
    if (relations.size() != 6) fail("exactly 6 relations required");
    for (const auto& t : types)
        if (t.name.empty() || t.count <= 0) fail("entity type needs a name and a positive count");
    const std::string &t0 = types[0].name, &t1 = types[1].name, &t2 = types[2].name;
    auto want = [&](size_t i, const std::string& domain, const std::string& range,
                    const std::string& role) {
        if (relations[i].name.empty()) fail("relation " + std::to_string(i) + " needs a name");
        if (relations[i].domain != domain || relations[i].range != range)
            fail("relation '" + relations[i].name + "' (" + role + ") must map " + domain +
                 " -> " + range);
    };
    want(0, t0, t1, "target");
    want(1, t2, t0, "participation");
    want(2, t2, t1, "encoding");
    want(3, t0, t0, "hierarchy");
    want(4, t1, t1, "variant");
    want(5, t0, t1, "distractor");
    if (relations[0].name != target) fail("target must name relations[0]");
    std::set<std::string> names;
    for (const auto& r : relations)
        if (!names.insert(r.name).second) fail("duplicate relation name '" + r.name + "'");
    if (support_paths < 1 || support_paths > 3) fail("support_paths must be in 1..3");
    if (target_edges < 1) fail("target_edges must be positive");
    if (planted < 0 || decoys < 0 || filler_negatives < 0)
        fail("negative pool counts must be >= 0");
    long total_neg = long(planted) + decoys + filler_negatives;
    if (long(planted) + decoys > total_neg) fail("planted + decoys exceed the negative total");
    if (sentences_per_pair < 1 || planted_sentences < 1) fail("sentence counts must be >= 1");
    if (noise_rate < 0.0 || noise_rate >= 1.0) fail("noise_rate must be in [0, 1)");
    if (tail_cue_fraction < 0.0 || tail_cue_fraction > 1.0)
        fail("tail_cue_fraction must be in [0, 1]");
    if (distractor_edges < 0) fail("distractor_edges must be >= 0");

    // Pool feasibility for the partitions generate() carves out: each
    // true pair owns a private hierarchy parent, gene and variant.
    long need_true = long(target_edges) + planted;
    if (long(types[2].count) < need_true)
        fail("type '" + t2 + "' pool smaller than the " + std::to_string(need_true) +
             " private genes needed");
    long src0 = long(types[0].count) - need_true;
    long obj1 = long(types[1].count) - need_true;
    if (src0 < 30) fail("type '" + t0 + "' pool leaves too few sources after private parents");
    if (obj1 < 30) fail("type '" + t1 + "' pool leaves too few objects after private variants");
    if (obj1 * 9 < target_edges * 10)
        fail("type '" + t1 + "' pool too small for " + std::to_string(target_edges) +
             " distinct positive objects");
    if (src0 * obj1 < 2 * (need_true + total_neg))
        fail("source x object pool cannot host " + std::to_string(need_true + total_neg) +
             " instance pairs");
}

SynthSpec SynthSpec::standard(uint64_t seed) {
    SynthSpec spec;
    spec.types = {{"proc", 700}, {"prod", 700}, {"gene", 600}};
    spec.relations = {{"involves", "proc", "prod"},   {"participates", "gene", "proc"},
                      {"encodes", "gene", "prod"},    {"isa", "proc", "proc"},
                      {"variant_of", "prod", "prod"}, {"cooccurs", "proc", "prod"}};
    spec.target = "involves";
    spec.seed = seed;
    return spec;
}

std::vector<RelationPath> support_templates(const SynthSpec& spec) {
    const std::string& participates = spec.relations[1].name;
    const std::string& encodes = spec.relations[2].name;
    const std::string& isa = spec.relations[3].name;
    const std::string& variant = spec.relations[4].name;
    std::vector<RelationPath> all = {
        RelationPath{{{participates, true}, {encodes, false}}},
        RelationPath{{{isa, false}, {spec.target, false}}},
        RelationPath{{{participates, true}, {encodes, false}, {variant, false}}},
    };
    all.resize(static_cast<size_t>(spec.support_paths));
    return all;
}

SynthOutput generate(const SynthSpec& spec) {
    spec.validate();
    SeededRng rng(spec.seed);

    const std::string& type0 = spec.types[0].name;
    const std::string& type1 = spec.types[1].name;
    const std::string& type2 = spec.types[2].name;
    int need_true = spec.target_edges + spec.planted;
    int src0_n = spec.types[0].count - need_true;
    int obj1_n = spec.types[1].count - need_true;

    // Sources and objects share their type pool with the private
    // intermediates carved off the top of the index range.
    auto src_name = [&](int i) { return entity_name(type0, i); };
    auto aux_name = [&](int i) { return entity_name(type0, src0_n + i); };
    auto obj_name = [&](int i) { return entity_name(type1, i); };
    auto variant_name = [&](int i) { return entity_name(type1, obj1_n + i); };
    auto gene_name = [&](int i) { return entity_name(type2, i); };

    const std::string& r_target = spec.relations[0].name;
    const std::string& r_part = spec.relations[1].name;
    const std::string& r_enc = spec.relations[2].name;
    const std::string& r_isa = spec.relations[3].name;
    const std::string& r_var = spec.relations[4].name;
    const std::string& r_dis = spec.relations[5].name;

    // Positive instance pairs: the knowledge-base target edges. Objects
    // are distinct across pairs, so no <= 3-step path can cross from one
    // source's neighborhood into another source's objects and the
    // decoy/filler pairs stay provably unreachable.
    std::set<EntityPair> positive_set;
    std::set<std::string> used_objects;
    std::vector<EntityPair> positive_pairs;
    while (positive_pairs.size() < size_t(spec.target_edges)) {
        EntityPair p{src_name(int(rng.uniform_below(src0_n))),
                     obj_name(int(rng.uniform_below(obj1_n)))};
        if (used_objects.count(p.second)) continue;
        used_objects.insert(p.second);
        positive_set.insert(p);
        positive_pairs.push_back(p);
    }

    // Negative instance pairs, drawn exactly as the labeling stage draws
    // them so the corpus realizes the right pairs.
    size_t total_neg = size_t(spec.planted) + spec.decoys + spec.filler_negatives;
    std::vector<EntityPair> sorted_positives(positive_pairs.begin(), positive_pairs.end());
    std::sort(sorted_positives.begin(), sorted_positives.end());
    auto negatives = generate_negative_pairs(sorted_positives, total_neg,
                                             mix_seed(spec.label_seed, spec.target));
    if (negatives.size() < total_neg)
        throw std::runtime_error(
            "infeasible synth spec: only " + std::to_string(negatives.size()) +
            " negative candidates available for " + std::to_string(total_neg) + " requested");

    // Planted false negatives: a seeded subset of the negatives. The
    // remaining negatives split into the decoy and filler books.
    auto planted_picks = rng.sample_indices(negatives.size(), size_t(spec.planted));
    std::set<size_t> planted_idx(planted_picks.begin(), planted_picks.end());
    std::vector<EntityPair> planted, decoys, fillers;
    for (size_t i = 0; i < negatives.size(); ++i) {
        if (planted_idx.count(i))
            planted.push_back(negatives[i]);
        else if (decoys.size() < size_t(spec.decoys))
            decoys.push_back(negatives[i]);
        else
            fillers.push_back(negatives[i]);
    }

    std::set<std::tuple<std::string, std::string, std::string>> edges;
    auto add_edge = [&](const std::string& s, const std::string& r, const std::string& o) {
        edges.insert({s, r, o});
    };
    size_t corrupted = 0;
    auto add_support_edge = [&](const std::string& s, const std::string& r, const std::string& o) {
        // The noise draw is consumed either way to keep the stream stable.
        bool keep = rng.uniform01() >= spec.noise_rate;
        if (keep)
            add_edge(s, r, o);
        else
            ++corrupted;
        return keep;
    };

    for (const auto& [x, y] : positive_pairs) add_edge(x, r_target, y);

    // Support structure for every true instance (positives and planted),
    // with intermediates owned by the pair: no path can cross from one
    // source's structure to another source's objects.
    std::vector<EntityPair> trues = positive_pairs;
    trues.insert(trues.end(), planted.begin(), planted.end());
    for (size_t i = 0; i < trues.size(); ++i) {
        const auto& [x, y] = trues[i];
        if (spec.support_paths >= 1) {  // _participates . encodes
            add_support_edge(gene_name(int(i)), r_part, x);
            add_support_edge(gene_name(int(i)), r_enc, y);
        }
        if (spec.support_paths >= 2) {  // isa . target
            std::string p = aux_name(int(i));
            add_support_edge(x, r_isa, p);
            if (add_support_edge(p, r_target, y)) {
                // A second relation on the auxiliary (p, y) pair keeps it
                // out of the labeled positives.
                add_edge(p, r_dis, y);
            }
        }
        if (spec.support_paths >= 3) {  // _participates . encodes . variant_of
            std::string v = variant_name(int(i));
            add_support_edge(gene_name(int(i)), r_enc, v);
            add_support_edge(v, r_var, y);
        }
    }

    // Optional background edges. These may create incidental paths, so
    // the standard instance keeps them at zero.
    int placed = 0, attempts = 0;
    while (placed < spec.distractor_edges && attempts < spec.distractor_edges * 20 + 100) {
        ++attempts;
        std::string s = src_name(int(rng.uniform_below(src0_n)));
        std::string o = obj_name(int(rng.uniform_below(obj1_n)));
        if (positive_set.count({s, o})) continue;
        if (edges.insert({s, r_dis, o}).second) ++placed;
    }

    // Corpus. True instances (labeled positives and planted negatives)
    // read as relational statements; planted pairs always use the rare
    // cue style, so mislabeling them poisons that style's evidence.
    std::string corpus;
    size_t doc_counter = 0;
    auto emit_sentences = [&](const EntityPair& pair, int count,
                              const std::vector<std::string>& cues) {
        for (int i = 0; i < count; ++i) {
            Sentence s;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "doc_%06zu", doc_counter++);
            s.doc = buf;
            int n_cues = 1 + int(rng.uniform_below(2));
            s.tokens.push_back(kFillers[rng.uniform_below(kFillers.size())]);
            s.tokens.push_back(pair.first);
            for (int c = 0; c < n_cues; ++c)
                s.tokens.push_back(cues[rng.uniform_below(cues.size())]);
            s.tokens.push_back(pair.second);
            int second_pos = 2 + n_cues;
            s.tokens.push_back(kFillers[rng.uniform_below(kFillers.size())]);
            s.tokens.push_back(kFillers[rng.uniform_below(kFillers.size())]);
            s.mentions.push_back({pair.first, {1, 1}});
            s.mentions.push_back({pair.second, {second_pos, second_pos}});
            corpus += serialize_corpus_jsonl({s});
        }
    };

    std::set<EntityPair> planted_set(planted.begin(), planted.end());
    std::set<EntityPair> decoy_set(decoys.begin(), decoys.end());
    for (const auto& p : sorted_positives) {
        bool tail = rng.uniform01() < spec.tail_cue_fraction;
        emit_sentences(p, spec.sentences_per_pair, tail ? kTailCues : kHeadCues);
    }
    for (const auto& p : negatives) {
        if (planted_set.count(p))
            emit_sentences(p, spec.planted_sentences, kTailCues);
        else
            emit_sentences(p, spec.sentences_per_pair, kNeutralCues);
    }

    SynthOutput out;
    for (const auto& [s, r, o] : edges) {
        out.kb_tsv += s;
        out.kb_tsv += '\t';
        out.kb_tsv += r;
        out.kb_tsv += '\t';
        out.kb_tsv += o;
        out.kb_tsv += '\n';
    }
    out.corpus_jsonl = std::move(corpus);

    GroundTruth truth;
    truth.target = spec.target;
    truth.positive_pairs = sorted_positives;
    truth.planted = planted;
    truth.decoys = decoys;
    truth.filler_negatives = fillers;
    auto templates = support_templates(spec);
    for (const auto& t : templates) truth.support_templates.push_back(t.machine_text());
    truth.corrupted_support_edges = corrupted;
    std::sort(truth.planted.begin(), truth.planted.end());
    std::sort(truth.decoys.begin(), truth.decoys.end());
    std::sort(truth.filler_negatives.begin(), truth.filler_negatives.end());

    // Generation-time exhaustive check of the planted/decoy guarantees.
    auto g = out.graph();
    for (const auto& pair : truth.planted) {
        bool witness = false;
        for (const auto& t : templates)
            if (path_exists(g, t, pair.first, pair.second)) {
                witness = true;
                break;
            }
        if (witness) truth.planted_with_witness.push_back(pair);
        if (!witness && spec.noise_rate == 0.0)
            throw std::runtime_error("synth internal check failed: planted pair without witness");
    }
    for (const auto* group : {&truth.decoys, &truth.filler_negatives})
        for (const auto& pair : *group)
            for (const auto& t : templates)
                if (path_exists(g, t, pair.first, pair.second))
                    throw std::runtime_error(
                        "synth internal check failed: decoy pair reachable by a support path");

    out.truth = std::move(truth);
    return out;
}

std::string generate_triple_scale_fixture(size_t lines, uint64_t seed) {
    // (k mod 631, k mod 7, k mod 1009) is injective for k < 631*7*1009,
    // so every line is a distinct triple.
    if (lines >= 631ull * 7 * 1009)
        throw std::invalid_argument("scale fixture supports < 4.4M lines");
    std::string out;
    out.reserve(lines * 24);
    for (size_t i = 0; i < lines; ++i) {
        size_t k = i + (seed % 1000);
        out += "s" + std::to_string(k % 631);
        out += "\trel" + std::to_string(k % 7);
        out += "\to" + std::to_string(k % 1009);
        out += '\n';
    }
    return out;
}

std::string SynthSpec::to_json() const {
    ordered_json j;
    auto types_json = ordered_json::array();
    for (const auto& t : types) types_json.push_back({{"name", t.name}, {"count", t.count}});
    j["types"] = types_json;
    auto rel_json = ordered_json::array();
    for (const auto& r : relations)
        rel_json.push_back({{"name", r.name}, {"domain", r.domain}, {"range", r.range}});
    j["relations"] = rel_json;
    j["target"] = target;
    j["support_paths"] = support_paths;
    j["target_edges"] = target_edges;
    j["planted"] = planted;
    j["decoys"] = decoys;
    j["filler_negatives"] = filler_negatives;
    j["sentences_per_pair"] = sentences_per_pair;
    j["planted_sentences"] = planted_sentences;
    j["tail_cue_fraction"] = tail_cue_fraction;
    j["noise_rate"] = noise_rate;
    j["distractor_edges"] = distractor_edges;
    j["seed"] = seed;
    j["label_seed"] = label_seed;
    return j.dump(2) + "\n";
}

SynthSpec SynthSpec::from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    SynthSpec spec = SynthSpec::standard(1);
    if (j.contains("types")) {
        spec.types.clear();
        for (const auto& t : j["types"])
            spec.types.push_back({t.at("name").get<std::string>(), t.at("count").get<int>()});
    }
    if (j.contains("relations")) {
        spec.relations.clear();
        for (const auto& r : j["relations"])
            spec.relations.push_back({r.at("name").get<std::string>(),
                                      r.at("domain").get<std::string>(),
                                      r.at("range").get<std::string>()});
    }
    if (j.contains("target")) spec.target = j["target"].get<std::string>();
    spec.support_paths = j.value("support_paths", spec.support_paths);
    spec.target_edges = j.value("target_edges", spec.target_edges);
    spec.planted = j.value("planted", spec.planted);
    spec.decoys = j.value("decoys", spec.decoys);
    spec.filler_negatives = j.value("filler_negatives", spec.filler_negatives);
    spec.sentences_per_pair = j.value("sentences_per_pair", spec.sentences_per_pair);
    spec.planted_sentences = j.value("planted_sentences", spec.planted_sentences);
    spec.tail_cue_fraction = j.value("tail_cue_fraction", spec.tail_cue_fraction);
    spec.noise_rate = j.value("noise_rate", spec.noise_rate);
    spec.distractor_edges = j.value("distractor_edges", spec.distractor_edges);
    spec.seed = j.value("seed", spec.seed);
    spec.label_seed = j.value("label_seed", spec.label_seed);
    return spec;
}

namespace {

ordered_json pairs_to_json(const std::vector<EntityPair>& pairs) {
    auto arr = ordered_json::array();
    for (const auto& [a, b] : pairs) arr.push_back({a, b});
    return arr;
}

std::vector<EntityPair> pairs_from_json(const ordered_json& arr) {
    std::vector<EntityPair> out;
    for (const auto& p : arr) out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    return out;
}

}  // namespace

std::string GroundTruth::to_json() const {
    ordered_json j;
    j["target"] = target;
    j["positive_pairs"] = pairs_to_json(positive_pairs);
    j["planted"] = pairs_to_json(planted);
    j["decoys"] = pairs_to_json(decoys);
    j["filler_negatives"] = pairs_to_json(filler_negatives);
    j["support_templates"] = support_templates;
    j["planted_with_witness"] = pairs_to_json(planted_with_witness);
    j["corrupted_support_edges"] = corrupted_support_edges;
    return j.dump(2) + "\n";
}

GroundTruth GroundTruth::from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    GroundTruth t;
    t.target = j.at("target").get<std::string>();
    t.positive_pairs = pairs_from_json(j.at("positive_pairs"));
    t.planted = pairs_from_json(j.at("planted"));
    t.decoys = pairs_from_json(j.at("decoys"));
    t.filler_negatives = pairs_from_json(j.at("filler_negatives"));
    for (const auto& s : j.at("support_templates"))
        t.support_templates.push_back(s.get<std::string>());
    if (j.contains("planted_with_witness"))
        t.planted_with_witness = pairs_from_json(j["planted_with_witness"]);
    t.corrupted_support_edges = j.value("corrupted_support_edges", size_t{0});
    return t;
}

}  // namespace prafilter
