#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prafilter/eval.hpp"
#include "prafilter/extractor.hpp"
#include "prafilter/fn_filter.hpp"
#include "prafilter/kg.hpp"
#include "prafilter/labeler.hpp"
#include "prafilter/path_model.hpp"
#include "prafilter/pipeline.hpp"
#include "prafilter/synth.hpp"
#include "prafilter/util.hpp"
#include "prafilter/walks.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace prafilter;

namespace {

std::vector<RelationPath> parse_paths(const std::vector<std::string>& machine) {
    std::vector<RelationPath> out;
    out.reserve(machine.size());
    for (const auto& text : machine) out.push_back(RelationPath::parse_machine(text));
    return out;
}

std::vector<std::pair<std::string, double>> entries_as_pairs(const PathModel& model) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& e : model.entries) out.emplace_back(e.path.machine_text(), e.weight);
    return out;
}

py::dict prf_dict(const Prf& p) {
    py::dict d;
    d["precision"] = p.precision;
    d["recall"] = p.recall;
    d["f1"] = p.f1;
    d["degenerate"] = p.degenerate;
    d["predicted_positive"] = p.predicted_positive;
    d["true_positive"] = p.true_positive;
    d["gold"] = p.gold_size;
    return d;
}

std::vector<PairPrediction> predictions_from_tuples(
    const std::vector<std::tuple<std::string, std::string, double>>& rows) {
    std::vector<PairPrediction> out;
    for (const auto& [a, b, prob] : rows) out.push_back({{a, b}, prob, prob >= 0.5});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Path-ranking false-negative filtering for distantly supervised data";
    m.attr("__version__") = "0.1.0";

    py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
        .def_static("load", &KnowledgeGraph::load_triples, "content"_a,
                    "source_name"_a = "<memory>")
        .def_static("load_file", &KnowledgeGraph::load_triples_file, "path"_a)
        .def("neighbors",
             py::overload_cast<const std::string&, const std::string&>(
                 &KnowledgeGraph::neighbors, py::const_),
             "node"_a, "relation"_a,
             "Sorted neighbor names; prefix the relation with '_' to walk inverse edges")
        .def("has_triple",
             py::overload_cast<const std::string&, const std::string&, const std::string&>(
                 &KnowledgeGraph::has_triple, py::const_))
        .def_property_readonly("entity_count", &KnowledgeGraph::entity_count)
        .def_property_readonly("relation_count", &KnowledgeGraph::relation_count)
        .def_property_readonly("triple_count", &KnowledgeGraph::triple_count)
        .def_property_readonly("self_loop_count", &KnowledgeGraph::self_loop_count)
        .def("relation_catalog", &KnowledgeGraph::relation_catalog)
        .def("relation_edge_count", &KnowledgeGraph::relation_edge_count, "name"_a)
        .def("relation_pairs",
             py::overload_cast<const std::string&>(&KnowledgeGraph::relation_pairs, py::const_),
             "name"_a)
        .def("remove_relation_edges",
             py::overload_cast<const std::string&,
                               const std::vector<std::pair<std::string, std::string>>&>(
                 &KnowledgeGraph::remove_relation_edges, py::const_),
             "relation"_a, "pairs"_a)
        .def("serialize", &KnowledgeGraph::serialize)
        .def("stats_text", &KnowledgeGraph::stats_text);

    m.def("path_display", [](const std::string& machine) {
        return RelationPath::parse_machine(machine).display_text();
    }, "machine"_a, "Rendering like 'rel1(x,a) ∧ _rel2(a,y)'");
    m.def("reverse_and_invert", [](const std::string& machine) {
        return RelationPath::parse_machine(machine).reversed_inverted().machine_text();
    }, "machine"_a);

    m.def(
        "rw_probability",
        [](const KnowledgeGraph& g, const std::string& machine, const std::string& source) {
            return rw_probability(g, RelationPath::parse_machine(machine), source);
        },
        "graph"_a, "path"_a, "source"_a,
        "Exact terminal distribution of the path's random walk from the source");
    m.def(
        "path_exists",
        [](const KnowledgeGraph& g, const std::string& machine, const std::string& source,
           const std::string& target) {
            return path_exists(g, RelationPath::parse_machine(machine), source, target);
        },
        "graph"_a, "path"_a, "source"_a, "target"_a);
    m.def(
        "enumerate_paths",
        [](const KnowledgeGraph& g, const std::vector<std::pair<std::string, std::string>>& pairs,
           int max_len, int min_support, size_t fanout_cap,
           const std::optional<std::string>& mask_relation) {
            PathEnumOptions opts;
            opts.max_len = max_len;
            opts.min_support = min_support;
            opts.fanout_cap = fanout_cap;
            opts.mask_relation = mask_relation;
            auto result = enumerate_paths(g, pairs, opts);
            std::vector<std::string> texts;
            for (const auto& p : result.paths) texts.push_back(p.machine_text());
            return py::make_tuple(texts, result.truncated_branches);
        },
        "graph"_a, "pairs"_a, "max_len"_a = 3, "min_support"_a = 2, "fanout_cap"_a = 10000,
        "mask_relation"_a = std::nullopt,
        "Returns (paths in machine form, truncated branch count)");

    py::class_<PathModel>(m, "PathModel")
        .def_readonly("relation", &PathModel::relation)
        .def_readonly("bias", &PathModel::bias)
        .def("entries", &entries_as_pairs, "(machine path, weight) sorted by descending weight")
        .def("positive_paths",
             [](const PathModel& model) {
                 std::vector<std::string> out;
                 for (const auto& e : select_positive_paths(model))
                     out.push_back(e.path.machine_text());
                 return out;
             })
        .def("serialize", &PathModel::serialize)
        .def_static("parse", &PathModel::parse, "text"_a)
        .def("save", &PathModel::save, "path"_a)
        .def_static("load_file", &PathModel::load, "path"_a);

    m.def(
        "learn_path_model",
        [](const KnowledgeGraph& g, const std::string& target, int max_len, int min_support,
           size_t fanout_cap, double neg_ratio, double l2, int max_iters, double tolerance,
           uint64_t seed, unsigned threads) {
            PraConfig config;
            config.max_len = max_len;
            config.min_support = min_support;
            config.fanout_cap = fanout_cap;
            config.neg_ratio = neg_ratio;
            config.l2 = l2;
            config.max_iters = max_iters;
            config.tolerance = tolerance;
            config.seed = seed;
            config.threads = threads;
            return learn_path_model(g, target, config);
        },
        "graph"_a, "target"_a, "max_len"_a = 3, "min_support"_a = 2, "fanout_cap"_a = 10000,
        "neg_ratio"_a = 4.0, "l2"_a = 0.1, "max_iters"_a = 500, "tolerance"_a = 1e-6,
        "seed"_a = 13, "threads"_a = 1);

    m.def("extract_positive_pairs", &extract_positive_pairs, "kb"_a, "target"_a);
    m.def("generate_negative_pairs", &generate_negative_pairs, "positives"_a, "count"_a, "seed"_a);
    m.def("mix_seed", &mix_seed, "base"_a, "tag"_a, "salt"_a = 0,
          "Stable per-stage seed derivation used across the pipeline");

    py::class_<LabeledDataset>(m, "LabeledDataset")
        .def_readonly("relation", &LabeledDataset::relation)
        .def_property_readonly("positive_count", &LabeledDataset::positive_count)
        .def_property_readonly("negative_count", &LabeledDataset::negative_count)
        .def_property_readonly("removed_count",
                               [](const LabeledDataset& ds) { return ds.removed.size(); })
        .def("bias_text", &LabeledDataset::bias_text)
        .def("pairs",
             [](const LabeledDataset& ds, bool positive) {
                 std::set<EntityPair> out;
                 for (const auto& e : ds.examples)
                     if (e.positive == positive) out.insert(e.pair);
                 return std::vector<EntityPair>(out.begin(), out.end());
             },
             "positive"_a, "Distinct pairs of the active examples with the given label")
        .def("serialize_jsonl", &LabeledDataset::serialize_jsonl)
        .def_static("parse_jsonl", &LabeledDataset::parse_jsonl, "text"_a,
                    "source_name"_a = "<memory>")
        .def("save", &LabeledDataset::save, "path"_a)
        .def_static("load_file", &LabeledDataset::load, "path"_a);

    m.def(
        "label_corpus",
        [](const std::string& corpus_jsonl, const std::vector<EntityPair>& positives,
           const std::vector<EntityPair>& negatives, const std::string& relation) {
            return label_corpus(parse_corpus_jsonl(corpus_jsonl), positives, negatives, relation);
        },
        "corpus_jsonl"_a, "positives"_a, "negatives"_a, "relation"_a);
    m.def("filter_examples", &filter_examples, "dataset"_a, "common_pair_max"_a = 1000);

    py::class_<ReductionReport>(m, "ReductionReport")
        .def_readonly("relation", &ReductionReport::relation)
        .def_readonly("empty_path_warning", &ReductionReport::empty_path_warning)
        .def_readonly("examples_removed", &ReductionReport::examples_removed)
        .def_readonly("bias_before", &ReductionReport::bias_before)
        .def_readonly("bias_after", &ReductionReport::bias_after)
        .def("flagged",
             [](const ReductionReport& r) {
                 std::vector<std::pair<EntityPair, std::vector<std::string>>> out;
                 for (const auto& f : r.flagged) {
                     std::vector<std::string> witnesses;
                     for (const auto& w : f.witnesses) witnesses.push_back(w.machine_text());
                     out.emplace_back(f.pair, witnesses);
                 }
                 return out;
             })
        .def("is_flagged", &ReductionReport::is_flagged, "pair"_a)
        .def("to_json", &ReductionReport::to_json)
        .def_static("from_json", &ReductionReport::from_json, "text"_a);

    m.def(
        "detect_false_negatives",
        [](const KnowledgeGraph& g, const std::vector<std::string>& paths,
           const std::vector<EntityPair>& negatives, unsigned threads) {
            return detect_false_negatives(g, parse_paths(paths), negatives, threads);
        },
        "graph"_a, "paths"_a, "negatives"_a, "threads"_a = 1);
    m.def("pra_reduce", &pra_reduce, "dataset"_a, "report"_a,
          "Removes flagged negatives; fills the report's removal counts");
    m.def("adjust_bias", &adjust_bias, "dataset"_a, "ratio"_a, "seed"_a);
    m.def("random_reduce", &random_reduce, "dataset"_a, "reference"_a, "seed"_a);

    py::class_<ExtractorModel>(m, "ExtractorModel")
        .def_readonly("relation", &ExtractorModel::relation)
        .def_readonly("bias", &ExtractorModel::bias)
        .def("serialize", &ExtractorModel::serialize)
        .def_static("parse", &ExtractorModel::parse, "text"_a)
        .def("save", &ExtractorModel::save, "path"_a)
        .def_static("load_file", &ExtractorModel::load, "path"_a);

    m.def(
        "train_extractor",
        [](const LabeledDataset& ds, double l2, uint64_t seed, int max_iters, double tolerance) {
            return train_extractor(ds, l2, seed, max_iters, tolerance);
        },
        "dataset"_a, "l2"_a = 1.0, "seed"_a = 1, "max_iters"_a = 500, "tolerance"_a = 1e-6);
    m.def(
        "predict_pairs",
        [](const ExtractorModel& model, const LabeledDataset& ds) {
            std::vector<std::tuple<std::string, std::string, double, bool>> out;
            for (const auto& p : predict_pairs(model, ds))
                out.emplace_back(p.pair.first, p.pair.second, p.probability, p.label);
            return out;
        },
        "model"_a, "dataset"_a, "One (first, second, probability, label) per distinct pair");

    m.def(
        "make_folds",
        [](const std::vector<EntityPair>& pairs, int k, uint64_t seed) {
            return make_folds(pairs, k, seed).assignment;
        },
        "pairs"_a, "k"_a = 4, "seed"_a = 1);
    m.def(
        "entity_prf",
        [](const std::vector<std::tuple<std::string, std::string, double>>& predictions,
           const std::vector<EntityPair>& gold) {
            std::set<EntityPair> gold_set(gold.begin(), gold.end());
            return prf_dict(entity_prf(predictions_from_tuples(predictions), gold_set));
        },
        "predictions"_a, "gold"_a, "Predictions are (first, second, probability) triples");
    m.def(
        "pr_curve",
        [](const std::vector<std::tuple<std::string, std::string, double>>& predictions,
           const std::vector<EntityPair>& gold) {
            std::set<EntityPair> gold_set(gold.begin(), gold.end());
            std::vector<std::tuple<double, double, double>> out;
            for (const auto& p : pr_curve(predictions_from_tuples(predictions), gold_set))
                out.emplace_back(p.threshold, p.recall, p.precision);
            return out;
        },
        "predictions"_a, "gold"_a, "(threshold, recall, precision) swept descending");

    py::class_<EvalConfig>(m, "EvalConfig")
        .def(py::init<>())
        .def_readwrite("folds", &EvalConfig::folds)
        .def_readwrite("max_len", &EvalConfig::max_len)
        .def_readwrite("min_support", &EvalConfig::min_support)
        .def_readwrite("fanout_cap", &EvalConfig::fanout_cap)
        .def_readwrite("pra_l2", &EvalConfig::pra_l2)
        .def_readwrite("pra_neg_ratio", &EvalConfig::pra_neg_ratio)
        .def_readwrite("neg_pair_ratio", &EvalConfig::neg_pair_ratio)
        .def_readwrite("neg_pair_count", &EvalConfig::neg_pair_count)
        .def_readwrite("common_pair_max", &EvalConfig::common_pair_max)
        .def_readwrite("bias_ratio", &EvalConfig::bias_ratio)
        .def_readwrite("extractor_l2", &EvalConfig::extractor_l2)
        .def_readwrite("fold_seed", &EvalConfig::fold_seed)
        .def_readwrite("neg_pair_seed", &EvalConfig::neg_pair_seed)
        .def_readwrite("pra_seed", &EvalConfig::pra_seed)
        .def_readwrite("adjust_seed", &EvalConfig::adjust_seed)
        .def_readwrite("random_reduce_seed", &EvalConfig::random_reduce_seed)
        .def_readwrite("threads", &EvalConfig::threads)
        .def_readwrite("min_pairs_per_class", &EvalConfig::min_pairs_per_class)
        .def_readwrite("force_empty_paths", &EvalConfig::force_empty_paths);

    py::class_<EvalReport>(m, "EvalReport")
        .def("to_json", &EvalReport::to_json)
        .def("table_text", &EvalReport::table_text)
        .def("overall",
             [](const EvalReport& r) {
                 py::dict out;
                 for (const auto& [name, metrics] : r.overall) {
                     py::dict d = prf_dict(metrics.prf);
                     d["false_negative_predictions"] = metrics.false_negative_predictions;
                     out[name.c_str()] = d;
                 }
                 return out;
             });

    m.def(
        "run_comparison",
        [](const KnowledgeGraph& kb, const std::string& corpus_jsonl,
           const std::vector<std::string>& relations, const EvalConfig& config) {
            return run_comparison(kb, parse_corpus_jsonl(corpus_jsonl), relations, config);
        },
        "kb"_a, "corpus_jsonl"_a, "relations"_a, "config"_a = EvalConfig{});

    py::class_<SynthSpec>(m, "SynthSpec")
        .def_static("standard", &SynthSpec::standard, "seed"_a)
        .def_static("from_json", &SynthSpec::from_json, "text"_a)
        .def("to_json", &SynthSpec::to_json)
        .def_readwrite("target", &SynthSpec::target)
        .def_readwrite("support_paths", &SynthSpec::support_paths)
        .def_readwrite("target_edges", &SynthSpec::target_edges)
        .def_readwrite("planted", &SynthSpec::planted)
        .def_readwrite("decoys", &SynthSpec::decoys)
        .def_readwrite("filler_negatives", &SynthSpec::filler_negatives)
        .def_readwrite("sentences_per_pair", &SynthSpec::sentences_per_pair)
        .def_readwrite("planted_sentences", &SynthSpec::planted_sentences)
        .def_readwrite("tail_cue_fraction", &SynthSpec::tail_cue_fraction)
        .def_readwrite("noise_rate", &SynthSpec::noise_rate)
        .def_readwrite("distractor_edges", &SynthSpec::distractor_edges)
        .def_readwrite("seed", &SynthSpec::seed)
        .def_readwrite("label_seed", &SynthSpec::label_seed);

    py::class_<SynthOutput>(m, "SynthOutput")
        .def_readonly("kb_tsv", &SynthOutput::kb_tsv)
        .def_readonly("corpus_jsonl", &SynthOutput::corpus_jsonl)
        .def("truth_json", [](const SynthOutput& out) { return out.truth.to_json(); })
        .def("graph", &SynthOutput::graph)
        .def("planted", [](const SynthOutput& out) { return out.truth.planted; })
        .def("positive_pairs", [](const SynthOutput& out) { return out.truth.positive_pairs; });

    m.def("generate_synth", &generate, "spec"_a);

    m.def(
        "run_all",
        [](const std::string& manifest_path, const std::string& out_dir) {
            auto manifest = RunManifest::load(manifest_path);
            return run_all(manifest, out_dir);
        },
        "manifest_path"_a, "out_dir"_a,
        "Chains synth/label/train/detect/reduce/evaluate from a manifest file");
}
