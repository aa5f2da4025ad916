#include "prafilter/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <set>
#include <stdexcept>

#include "prafilter/extractor.hpp"
#include "prafilter/fn_filter.hpp"
#include "prafilter/path_model.hpp"
#include "prafilter/sha256.hpp"
#include "prafilter/util.hpp"

namespace prafilter {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

uint64_t env_seed(const char* name, uint64_t fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    return std::strtoull(v, nullptr, 10);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / path).string();
}

}  // namespace

RunManifest RunManifest::from_json(const std::string& text, const std::string& base_dir) {
    ordered_json j = ordered_json::parse(text);
    RunManifest m;
    m.kb_path = resolve(base_dir, j.value("kb", ""));
    m.corpus_path = resolve(base_dir, j.value("corpus", ""));
    if (j.contains("relations"))
        for (const auto& r : j["relations"]) m.relations.push_back(r.get<std::string>());
    m.out_dir = resolve(base_dir, j.value("out_dir", ""));

    m.eval.folds = j.value("folds", m.eval.folds);
    m.eval.max_len = j.value("max_len", m.eval.max_len);
    m.eval.min_support = j.value("min_support", m.eval.min_support);
    m.eval.fanout_cap = j.value("fanout_cap", m.eval.fanout_cap);
    m.eval.pra_l2 = j.value("pra_l2", m.eval.pra_l2);
    m.eval.pra_neg_ratio = j.value("pra_neg_ratio", m.eval.pra_neg_ratio);
    m.eval.pra_max_iters = j.value("pra_max_iters", m.eval.pra_max_iters);
    m.eval.pra_tolerance = j.value("pra_tolerance", m.eval.pra_tolerance);
    m.eval.extractor_l2 = j.value("extractor_l2", m.eval.extractor_l2);
    m.eval.extractor_max_iters = j.value("extractor_max_iters", m.eval.extractor_max_iters);
    m.eval.extractor_tolerance = j.value("extractor_tolerance", m.eval.extractor_tolerance);
    m.eval.common_pair_max = j.value("common_pair_max", m.eval.common_pair_max);
    m.eval.bias_ratio = j.value("bias_ratio", m.eval.bias_ratio);
    m.eval.threads = j.value("threads", m.eval.threads);
    m.eval.min_pairs_per_class = j.value("min_pairs_per_class", m.eval.min_pairs_per_class);
    m.label_neg_ratio = j.value("neg_pair_ratio", m.label_neg_ratio);
    m.eval.neg_pair_ratio = m.label_neg_ratio;

    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        m.eval.fold_seed = s.value("folds", m.eval.fold_seed);
        m.eval.neg_pair_seed = s.value("neg_pairs", m.eval.neg_pair_seed);
        m.eval.pra_seed = s.value("pra", m.eval.pra_seed);
        m.eval.adjust_seed = s.value("adjust", m.eval.adjust_seed);
        m.eval.random_reduce_seed = s.value("random_reduce", m.eval.random_reduce_seed);
    }
    m.eval.fold_seed = env_seed("PRAFILTER_SEED_FOLDS", m.eval.fold_seed);
    m.eval.neg_pair_seed = env_seed("PRAFILTER_SEED_NEG_PAIRS", m.eval.neg_pair_seed);
    m.eval.pra_seed = env_seed("PRAFILTER_SEED_PRA", m.eval.pra_seed);
    m.eval.adjust_seed = env_seed("PRAFILTER_SEED_ADJUST", m.eval.adjust_seed);
    m.eval.random_reduce_seed = env_seed("PRAFILTER_SEED_RANDOM_REDUCE", m.eval.random_reduce_seed);

    if (j.contains("synth")) {
        m.synth = SynthSpec::from_json(j["synth"].dump());
        // The generated corpus realizes exactly the negative pairs the
        // labeling stage will draw; pin both sides to one seed and count.
        m.eval.neg_pair_seed = m.synth->label_seed;
        size_t total_neg =
            size_t(m.synth->planted) + m.synth->decoys + m.synth->filler_negatives;
        m.eval.neg_pair_count = total_neg;
        if (m.relations.empty()) m.relations = {m.synth->target};
    }
    return m;
}

RunManifest RunManifest::load(const std::string& path) {
    auto manifest = from_json(read_file(path), fs::path(path).parent_path().string());
    return manifest;
}

void RunManifest::validate(bool inputs_required) const {
    auto fail = [](const std::string& what) { throw std::runtime_error("manifest: " + what); };
    if (!synth && inputs_required) {
        if (kb_path.empty()) fail("'kb' path is required without a synth block");
        if (corpus_path.empty()) fail("'corpus' path is required without a synth block");
        if (!fs::exists(kb_path)) fail("kb file does not exist: " + kb_path);
        if (!fs::exists(corpus_path)) fail("corpus file does not exist: " + corpus_path);
        if (relations.empty()) fail("at least one target relation is required");
    }
    if (eval.folds < 2) fail("folds must be >= 2");
    if (eval.max_len < 1) fail("max_len must be >= 1");
    if (eval.min_support < 1) fail("min_support must be >= 1");
    if (eval.pra_l2 < 0 || eval.extractor_l2 < 0) fail("l2 strengths must be >= 0");
    if (eval.pra_neg_ratio <= 0) fail("pra_neg_ratio must be positive");
    if (label_neg_ratio <= 0) fail("neg_pair_ratio must be positive");
    if (eval.bias_ratio <= 0) fail("bias_ratio must be positive");
    if (eval.common_pair_max < 1) fail("common_pair_max must be >= 1");
    if (synth) synth->validate();
}

void StageSummary::add_input(const std::string& path) {
    inputs.emplace_back(path, sha256_file_hex(path));
}

void StageSummary::add_output(const std::string& path) {
    outputs.emplace_back(path, sha256_file_hex(path));
}

std::string StageSummary::to_json() const {
    ordered_json j;
    j["stage"] = stage;
    ordered_json in, out;
    for (const auto& [p, h] : inputs) in[p] = h;
    for (const auto& [p, h] : outputs) out[p] = h;
    j["inputs"] = in;
    j["outputs"] = out;
    ordered_json seeds_json;
    for (const auto& [k, v] : seeds) seeds_json[k] = v;
    j["seeds"] = seeds_json;
    ordered_json counts_json;
    for (const auto& [k, v] : counts) counts_json[k] = v;
    j["counts"] = counts_json;
    return j.dump(2) + "\n";
}

void StageSummary::save(const std::string& path) const { write_file(path, to_json()); }

namespace {

struct Runner {
    const RunManifest& manifest;
    fs::path out;
    fs::path summaries;
    std::string kb_path;
    std::string corpus_path;

    void summarize(StageSummary& s) { s.save((summaries / (s.stage + ".json")).string()); }

    void stage_synth() {
        auto result = generate(*manifest.synth);
        fs::create_directories(out / "synth");
        write_file((out / "synth" / "kb.tsv").string(), result.kb_tsv);
        write_file((out / "synth" / "corpus.jsonl").string(), result.corpus_jsonl);
        write_file((out / "synth" / "truth.json").string(), result.truth.to_json());
        write_file((out / "synth" / "spec.json").string(), manifest.synth->to_json());
        kb_path = (out / "synth" / "kb.tsv").string();
        corpus_path = (out / "synth" / "corpus.jsonl").string();

        StageSummary s;
        s.stage = "synth";
        s.seeds["seed"] = manifest.synth->seed;
        s.seeds["label_seed"] = manifest.synth->label_seed;
        s.add_output(kb_path);
        s.add_output(corpus_path);
        s.add_output((out / "synth" / "truth.json").string());
        s.counts["positive_pairs"] = std::to_string(result.truth.positive_pairs.size());
        s.counts["planted"] = std::to_string(result.truth.planted.size());
        s.counts["decoys"] = std::to_string(result.truth.decoys.size());
        s.counts["filler_negatives"] = std::to_string(result.truth.filler_negatives.size());
        s.counts["corrupted_support_edges"] = std::to_string(result.truth.corrupted_support_edges);
        summarize(s);
    }

    KnowledgeGraph stage_kg_stats() {
        auto g = KnowledgeGraph::load_triples_file(kb_path);
        std::string stats_path = (out / "kg_stats.txt").string();
        write_file(stats_path, g.stats_text());

        StageSummary s;
        s.stage = "kg_stats";
        s.add_input(kb_path);
        s.add_output(stats_path);
        s.counts["entities"] = std::to_string(g.entity_count());
        s.counts["relations"] = std::to_string(g.relation_count());
        s.counts["triples"] = std::to_string(g.triple_count());
        summarize(s);
        return g;
    }

    // Whole-graph dataset pipeline for one relation; the fold-level
    // evaluation re-runs these stages leakage-safe per fold.
    void stage_relation(const KnowledgeGraph& g, const std::vector<Sentence>& corpus,
                        const std::string& relation) {
        fs::path rel_dir = out / relation;
        fs::create_directories(rel_dir);
        const auto& cfg = manifest.eval;

        // label
        auto positives = extract_positive_pairs(g, relation);
        size_t neg_count =
            cfg.neg_pair_count
                ? *cfg.neg_pair_count
                : size_t(std::ceil(manifest.label_neg_ratio * double(positives.size())));
        auto negatives =
            generate_negative_pairs(positives, neg_count, mix_seed(cfg.neg_pair_seed, relation));
        auto dataset = filter_examples(label_corpus(corpus, positives, negatives, relation),
                                       cfg.common_pair_max);
        std::string dataset_path = (rel_dir / "dataset.jsonl").string();
        dataset.save(dataset_path);
        {
            StageSummary s;
            s.stage = relation + "_label";
            s.add_input(kb_path);
            s.add_input(corpus_path);
            s.add_output(dataset_path);
            s.seeds["neg_pairs"] = mix_seed(cfg.neg_pair_seed, relation);
            s.counts["positive_pairs"] = std::to_string(positives.size());
            s.counts["negative_pairs"] = std::to_string(negatives.size());
            s.counts["positive_examples"] = std::to_string(dataset.positive_count());
            s.counts["negative_examples"] = std::to_string(dataset.negative_count());
            s.counts["removed_examples"] = std::to_string(dataset.removed.size());
            s.counts["bias"] = dataset.bias_text();
            summarize(s);
        }

        // pra-train
        PraConfig pra;
        pra.max_len = cfg.max_len;
        pra.min_support = cfg.min_support;
        pra.fanout_cap = cfg.fanout_cap;
        pra.neg_ratio = cfg.pra_neg_ratio;
        pra.l2 = cfg.pra_l2;
        pra.max_iters = cfg.pra_max_iters;
        pra.tolerance = cfg.pra_tolerance;
        pra.seed = mix_seed(cfg.pra_seed, relation);
        pra.threads = cfg.threads;
        PraRunStats pra_stats;
        auto model = learn_path_model(g, relation, pra, &pra_stats);
        std::string model_path = (rel_dir / "model.txt").string();
        model.save(model_path);

        std::string paths_text;
        for (const auto& e : model.entries)
            paths_text += e.path.display_text() + "\t" + format_double(e.weight) + "\n";
        std::string paths_path = (rel_dir / "paths.txt").string();
        write_file(paths_path, paths_text);
        {
            StageSummary s;
            s.stage = relation + "_pra_train";
            s.add_input(kb_path);
            s.add_output(model_path);
            s.add_output(paths_path);
            s.seeds["pra"] = pra.seed;
            s.counts["positives"] = std::to_string(pra_stats.positives);
            s.counts["negatives"] = std::to_string(pra_stats.negatives);
            s.counts["paths"] = std::to_string(pra_stats.surviving_paths);
            s.counts["truncated_branches"] = std::to_string(pra_stats.truncated_branches);
            s.counts["iterations"] = std::to_string(pra_stats.train.iterations);
            s.counts["converged"] = pra_stats.train.converged ? "true" : "false";
            summarize(s);
        }

        // fn-detect on the dataset's negative pairs
        std::vector<RelationPath> positive_paths;
        for (const auto& e : select_positive_paths(model)) positive_paths.push_back(e.path);
        std::set<EntityPair> negative_pairs;
        for (const auto& e : dataset.examples)
            if (!e.positive) negative_pairs.insert(e.pair);
        auto report = detect_false_negatives(
            g, positive_paths, {negative_pairs.begin(), negative_pairs.end()}, cfg.threads);
        report.relation = relation;

        // dataset construction: unfiltered (bias-adjusted), pra-reduced,
        // random-reduced
        auto unfiltered = adjust_bias(dataset, cfg.bias_ratio, mix_seed(cfg.adjust_seed, relation));
        auto pra_reduced = pra_reduce(unfiltered, report);
        auto random_reduced =
            random_reduce(unfiltered, pra_reduced, mix_seed(cfg.random_reduce_seed, relation));

        std::string report_path = (rel_dir / "fn_report.json").string();
        report.save(report_path);
        {
            StageSummary s;
            s.stage = relation + "_fn_detect";
            s.add_input(kb_path);
            s.add_input(model_path);
            s.add_input(dataset_path);
            s.add_output(report_path);
            s.counts["negative_pairs"] = std::to_string(negative_pairs.size());
            s.counts["flagged_pairs"] = std::to_string(report.flagged.size());
            s.counts["examples_removed"] = std::to_string(report.examples_removed);
            s.counts["bias_before"] = report.bias_before;
            s.counts["bias_after"] = report.bias_after;
            summarize(s);
        }

        std::map<std::string, const LabeledDataset*> datasets = {
            {"unfiltered", &unfiltered},
            {"pra_reduced", &pra_reduced},
            {"random_reduced", &random_reduced},
        };
        for (const auto& [name, ds] : datasets) {
            std::string ds_path = (rel_dir / (name + ".jsonl")).string();
            ds->save(ds_path);
            auto extractor = train_extractor(*ds, cfg.extractor_l2,
                                             mix_seed(cfg.pra_seed, relation + "/" + name));
            std::string ex_path = (rel_dir / ("extractor_" + name + ".txt")).string();
            extractor.save(ex_path);

            StageSummary s;
            s.stage = relation + "_" + name;
            s.add_input(dataset_path);
            s.add_output(ds_path);
            s.add_output(ex_path);
            s.seeds["adjust"] = mix_seed(cfg.adjust_seed, relation);
            s.seeds["random_reduce"] = mix_seed(cfg.random_reduce_seed, relation);
            s.counts["positives"] = std::to_string(ds->positive_count());
            s.counts["negatives"] = std::to_string(ds->negative_count());
            s.counts["bias"] = ds->bias_text();
            summarize(s);
        }
    }

    EvalReport stage_evaluate(const KnowledgeGraph& g, const std::vector<Sentence>& corpus) {
        auto report = run_comparison(g, corpus, manifest.relations, manifest.eval);

        std::string report_path = (out / "eval_report.json").string();
        write_file(report_path, report.to_json());
        std::string table_path = (out / "table.txt").string();
        write_file(table_path, report.table_text());

        StageSummary s;
        s.stage = "evaluate";
        s.add_input(kb_path);
        s.add_input(corpus_path);
        s.add_output(report_path);
        s.add_output(table_path);
        for (const auto& rel_eval : report.relations) {
            if (rel_eval.skipped) continue;
            for (const auto& name : config_names()) {
                std::string curve_path =
                    (out / ("pr_" + rel_eval.relation + "_" + name + ".csv")).string();
                write_file(curve_path, pr_curve_csv(rel_eval.configs.at(name).curve));
                s.add_output(curve_path);
            }
        }
        for (const auto& name : config_names()) {
            std::string curve_path = (out / ("pr_overall_" + name + ".csv")).string();
            write_file(curve_path, pr_curve_csv(report.overall.at(name).curve));
            s.add_output(curve_path);
        }
        s.seeds["folds"] = manifest.eval.fold_seed;
        s.seeds["neg_pairs"] = manifest.eval.neg_pair_seed;
        s.seeds["pra"] = manifest.eval.pra_seed;
        s.seeds["adjust"] = manifest.eval.adjust_seed;
        s.seeds["random_reduce"] = manifest.eval.random_reduce_seed;
        size_t skipped = 0;
        for (const auto& rel_eval : report.relations) skipped += rel_eval.skipped ? 1 : 0;
        s.counts["relations"] = std::to_string(report.relations.size());
        s.counts["skipped_relations"] = std::to_string(skipped);
        summarize(s);
        return report;
    }
};

}  // namespace

EvalReport run_all(const RunManifest& manifest, const std::string& out_dir) {
    manifest.validate(!manifest.synth.has_value());

    Runner runner{manifest, fs::path(out_dir), fs::path(out_dir) / "summaries",
                  manifest.kb_path, manifest.corpus_path};
    fs::create_directories(runner.summaries);

    if (manifest.synth) runner.stage_synth();
    auto g = runner.stage_kg_stats();
    auto corpus = load_corpus_jsonl(runner.corpus_path);
    for (const auto& relation : manifest.relations) runner.stage_relation(g, corpus, relation);
    return runner.stage_evaluate(g, corpus);
}

EvalReport run_evaluate(const RunManifest& manifest, const std::string& out_dir) {
    if (manifest.kb_path.empty() || manifest.corpus_path.empty())
        throw std::runtime_error(
            "evaluate: kb and corpus paths are required (run-all generates them from a synth "
            "block)");
    manifest.validate(true);

    Runner runner{manifest, fs::path(out_dir), fs::path(out_dir) / "summaries",
                  manifest.kb_path, manifest.corpus_path};
    fs::create_directories(runner.summaries);

    auto g = KnowledgeGraph::load_triples_file(runner.kb_path);
    auto corpus = load_corpus_jsonl(runner.corpus_path);
    return runner.stage_evaluate(g, corpus);
}

}  // namespace prafilter
