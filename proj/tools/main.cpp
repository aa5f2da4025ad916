// prafilter: path-ranking false-negative filtering for distantly
// supervised relation extraction data, as library stages behind one CLI.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>

#include "prafilter/eval.hpp"
#include "prafilter/extractor.hpp"
#include "prafilter/fn_filter.hpp"
#include "prafilter/kg.hpp"
#include "prafilter/labeler.hpp"
#include "prafilter/path_model.hpp"
#include "prafilter/pipeline.hpp"
#include "prafilter/synth.hpp"
#include "prafilter/util.hpp"

namespace fs = std::filesystem;
using namespace prafilter;

namespace {

void maybe_summary(StageSummary& summary, const std::string& path) {
    if (!path.empty()) summary.save(path);
}

int run(int argc, char** argv) {
    CLI::App app{"PRA-based false-negative filtering for distantly supervised data"};
    app.require_subcommand(1);

    // kg-stats
    auto* kg_stats = app.add_subcommand("kg-stats", "Load a triple file and print graph stats");
    std::string kb_path, out_path, summary_path;
    kg_stats->add_option("--kb", kb_path, "triple file")->required();
    kg_stats->add_option("--out", out_path, "write stats here instead of stdout");
    kg_stats->add_option("--summary", summary_path, "stage summary JSON path");
    kg_stats->callback([&] {
        auto g = KnowledgeGraph::load_triples_file(kb_path);
        if (out_path.empty())
            std::cout << g.stats_text();
        else
            write_file(out_path, g.stats_text());
        StageSummary s;
        s.stage = "kg_stats";
        s.add_input(kb_path);
        if (!out_path.empty()) s.add_output(out_path);
        s.counts["triples"] = std::to_string(g.triple_count());
        maybe_summary(s, summary_path);
    });

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic kb/corpus/truth instance");
    std::string spec_path, synth_out_dir = ".";
    uint64_t synth_seed = 0;
    bool seed_given = false;
    synth->add_option("--spec", spec_path, "synth spec JSON (default: standard preset)");
    synth->add_option("--out-dir", synth_out_dir, "output directory")->required();
    synth->add_option("--seed", synth_seed, "override the spec seed")
        ->each([&](const std::string&) { seed_given = true; });
    synth->callback([&] {
        SynthSpec spec = spec_path.empty() ? SynthSpec::standard(1)
                                           : SynthSpec::from_json(read_file(spec_path));
        if (seed_given) spec.seed = synth_seed;
        auto result = generate(spec);
        fs::create_directories(synth_out_dir);
        fs::path dir(synth_out_dir);
        write_file((dir / "kb.tsv").string(), result.kb_tsv);
        write_file((dir / "corpus.jsonl").string(), result.corpus_jsonl);
        write_file((dir / "truth.json").string(), result.truth.to_json());
        write_file((dir / "spec.json").string(), spec.to_json());
        StageSummary s;
        s.stage = "synth";
        s.seeds["seed"] = spec.seed;
        s.seeds["label_seed"] = spec.label_seed;
        s.add_output((dir / "kb.tsv").string());
        s.add_output((dir / "corpus.jsonl").string());
        s.add_output((dir / "truth.json").string());
        s.counts["positive_pairs"] = std::to_string(result.truth.positive_pairs.size());
        s.counts["planted"] = std::to_string(result.truth.planted.size());
        s.save((dir / "synth_summary.json").string());
        std::cout << "synth: " << result.truth.positive_pairs.size() << " positive pairs, "
                  << result.truth.planted.size() << " planted false negatives\n";
    });

    // label
    auto* label = app.add_subcommand("label", "Distantly label a corpus for one relation");
    std::string corpus_path, relation, dataset_out;
    double neg_ratio = 5.0;
    int64_t neg_count = -1;
    size_t common_pair_max = 1000;
    uint64_t seed = 102;
    label->add_option("--kb", kb_path)->required();
    label->add_option("--corpus", corpus_path)->required();
    label->add_option("--relation", relation)->required();
    label->add_option("--neg-ratio", neg_ratio, "negative pairs per positive pair");
    label->add_option("--neg-count", neg_count, "absolute negative pair count (overrides ratio)");
    label->add_option("--common-pair-max", common_pair_max,
                      "drop pairs occurring in more than this many sentences");
    label->add_option("--seed", seed);
    label->add_option("--out", dataset_out)->required();
    label->add_option("--summary", summary_path);
    label->callback([&] {
        auto g = KnowledgeGraph::load_triples_file(kb_path);
        auto corpus = load_corpus_jsonl(corpus_path);
        auto positives = extract_positive_pairs(g, relation);
        size_t count = neg_count >= 0
                           ? size_t(neg_count)
                           : size_t(std::ceil(neg_ratio * double(positives.size())));
        auto negatives = generate_negative_pairs(positives, count, mix_seed(seed, relation));
        auto ds = filter_examples(label_corpus(corpus, positives, negatives, relation),
                                  common_pair_max);
        ds.save(dataset_out);
        StageSummary s;
        s.stage = "label";
        s.add_input(kb_path);
        s.add_input(corpus_path);
        s.add_output(dataset_out);
        s.seeds["neg_pairs"] = mix_seed(seed, relation);
        s.counts["positive_examples"] = std::to_string(ds.positive_count());
        s.counts["negative_examples"] = std::to_string(ds.negative_count());
        s.counts["removed_examples"] = std::to_string(ds.removed.size());
        s.counts["bias"] = ds.bias_text();
        maybe_summary(s, summary_path);
        std::cout << "label: " << ds.positive_count() << " positive, " << ds.negative_count()
                  << " negative examples (bias " << ds.bias_text() << "), " << ds.removed.size()
                  << " removed\n";
    });

    // pra-train
    auto* pra_train = app.add_subcommand("pra-train", "Learn the weighted relation-path model");
    PraConfig pra_config;
    std::string model_out;
    pra_train->add_option("--kb", kb_path)->required();
    pra_train->add_option("--relation", relation)->required();
    pra_train->add_option("--max-len", pra_config.max_len);
    pra_train->add_option("--min-support", pra_config.min_support);
    pra_train->add_option("--fanout-cap", pra_config.fanout_cap);
    pra_train->add_option("--neg-ratio", pra_config.neg_ratio);
    pra_train->add_option("--l2", pra_config.l2);
    pra_train->add_option("--max-iters", pra_config.max_iters);
    pra_train->add_option("--tol", pra_config.tolerance);
    pra_train->add_option("--seed", pra_config.seed);
    pra_train->add_option("--threads", pra_config.threads);
    pra_train->add_option("--out", model_out)->required();
    pra_train->add_option("--summary", summary_path);
    pra_train->callback([&] {
        auto g = KnowledgeGraph::load_triples_file(kb_path);
        PraRunStats stats;
        auto model = learn_path_model(g, relation, pra_config, &stats);
        model.save(model_out);
        StageSummary s;
        s.stage = "pra_train";
        s.add_input(kb_path);
        s.add_output(model_out);
        s.seeds["pra"] = pra_config.seed;
        s.counts["paths"] = std::to_string(stats.surviving_paths);
        s.counts["iterations"] = std::to_string(stats.train.iterations);
        s.counts["converged"] = stats.train.converged ? "true" : "false";
        s.counts["truncated_branches"] = std::to_string(stats.truncated_branches);
        maybe_summary(s, summary_path);
        std::cout << "pra-train: " << stats.surviving_paths << " paths ("
                  << (stats.train.converged ? "converged" : "max iters") << " after "
                  << stats.train.iterations << " iterations, "
                  << stats.negatives << " sampled negatives";
        if (stats.shortfall) std::cout << ", shortfall " << stats.shortfall;
        std::cout << ")\n";
    });

    // pra-paths
    auto* pra_paths = app.add_subcommand("pra-paths", "Print a model's paths sorted by weight");
    std::string model_path;
    bool positive_only = false;
    pra_paths->add_option("--model", model_path)->required();
    pra_paths->add_flag("--positive-only", positive_only, "only paths with positive weight");
    pra_paths->add_option("--out", out_path, "write to a file instead of stdout");
    pra_paths->callback([&] {
        auto model = PathModel::load(model_path);
        std::string text;
        for (const auto& e : model.entries) {
            if (positive_only && e.weight <= 0) continue;
            text += e.path.display_text() + "\t" + format_double(e.weight) + "\n";
        }
        if (out_path.empty())
            std::cout << text;
        else
            write_file(out_path, text);
    });

    // fn-detect
    auto* fn_detect = app.add_subcommand(
        "fn-detect", "Flag dataset negatives connected by the model's positive paths");
    std::string dataset_path, report_out;
    unsigned threads = 1;
    fn_detect->add_option("--kb", kb_path)->required();
    fn_detect->add_option("--model", model_path)->required();
    fn_detect->add_option("--dataset", dataset_path)->required();
    fn_detect->add_option("--threads", threads);
    fn_detect->add_option("--out", report_out)->required();
    fn_detect->add_option("--summary", summary_path);
    fn_detect->callback([&] {
        auto g = KnowledgeGraph::load_triples_file(kb_path);
        auto model = PathModel::load(model_path);
        auto ds = LabeledDataset::load(dataset_path);
        std::vector<RelationPath> paths;
        for (const auto& e : select_positive_paths(model)) paths.push_back(e.path);
        std::set<EntityPair> negatives;
        for (const auto& e : ds.examples)
            if (!e.positive) negatives.insert(e.pair);
        auto report =
            detect_false_negatives(g, paths, {negatives.begin(), negatives.end()}, threads);
        report.relation = model.relation;
        report.save(report_out);
        StageSummary s;
        s.stage = "fn_detect";
        s.add_input(kb_path);
        s.add_input(model_path);
        s.add_input(dataset_path);
        s.add_output(report_out);
        s.counts["negative_pairs"] = std::to_string(negatives.size());
        s.counts["flagged_pairs"] = std::to_string(report.flagged.size());
        maybe_summary(s, summary_path);
        if (report.empty_path_warning)
            std::cerr << "warning: model has no positive-weight paths; nothing can be flagged\n";
        std::cout << "fn-detect: " << report.flagged.size() << " of " << negatives.size()
                  << " negative pairs flagged\n";
    });

    // reduce
    auto* reduce = app.add_subcommand("reduce", "Remove flagged negatives from a dataset");
    std::string reference_path, report_path;
    reduce->add_option("--dataset", dataset_path)->required();
    reduce->add_option("--report", report_path)->required();
    reduce->add_option("--out", out_path)->required();
    reduce->add_option("--report-out", report_out, "write the report with removal counts filled");
    reduce->add_option("--summary", summary_path);
    reduce->callback([&] {
        auto ds = LabeledDataset::load(dataset_path);
        auto report = ReductionReport::load(report_path);
        auto reduced = pra_reduce(ds, report);
        reduced.save(out_path);
        if (!report_out.empty()) report.save(report_out);
        StageSummary s;
        s.stage = "reduce";
        s.add_input(dataset_path);
        s.add_input(report_path);
        s.add_output(out_path);
        s.counts["examples_removed"] = std::to_string(report.examples_removed);
        s.counts["bias_before"] = report.bias_before;
        s.counts["bias_after"] = report.bias_after;
        maybe_summary(s, summary_path);
        std::cout << "reduce: removed " << report.examples_removed << " examples, bias "
                  << report.bias_before << " -> " << report.bias_after << "\n";
    });

    // random-reduce
    auto* rrandom = app.add_subcommand(
        "random-reduce", "Remove random negatives to match a reference dataset's size");
    rrandom->add_option("--dataset", dataset_path)->required();
    rrandom->add_option("--reference", reference_path)->required();
    rrandom->add_option("--seed", seed)->required();
    rrandom->add_option("--out", out_path)->required();
    rrandom->add_option("--summary", summary_path);
    rrandom->callback([&] {
        auto ds = LabeledDataset::load(dataset_path);
        auto reference = LabeledDataset::load(reference_path);
        auto reduced = random_reduce(ds, reference, seed);
        reduced.save(out_path);
        StageSummary s;
        s.stage = "random_reduce";
        s.add_input(dataset_path);
        s.add_input(reference_path);
        s.add_output(out_path);
        s.seeds["random_reduce"] = seed;
        s.counts["negatives"] = std::to_string(reduced.negative_count());
        maybe_summary(s, summary_path);
        std::cout << "random-reduce: kept " << reduced.negative_count() << " negatives\n";
    });

    // adjust-bias
    auto* adjust = app.add_subcommand("adjust-bias", "Subsample negatives to a 1:r ratio");
    double ratio = 2.0;
    adjust->add_option("--dataset", dataset_path)->required();
    adjust->add_option("--ratio", ratio, "target negatives per positive (the r of 1:r)");
    adjust->add_option("--seed", seed)->required();
    adjust->add_option("--out", out_path)->required();
    adjust->add_option("--summary", summary_path);
    adjust->callback([&] {
        auto ds = LabeledDataset::load(dataset_path);
        auto adjusted = adjust_bias(ds, ratio, seed);
        adjusted.save(out_path);
        StageSummary s;
        s.stage = "adjust_bias";
        s.add_input(dataset_path);
        s.add_output(out_path);
        s.seeds["adjust"] = seed;
        s.counts["bias_before"] = ds.bias_text();
        s.counts["bias_after"] = adjusted.bias_text();
        maybe_summary(s, summary_path);
        std::cout << "adjust-bias: " << ds.bias_text() << " -> " << adjusted.bias_text() << "\n";
    });

    // train-extractor
    auto* train_ex = app.add_subcommand("train-extractor", "Train the baseline relation classifier");
    double extractor_l2 = 1.0;
    int max_iters = 500;
    double tol = 1e-6;
    train_ex->add_option("--dataset", dataset_path)->required();
    train_ex->add_option("--l2", extractor_l2);
    train_ex->add_option("--seed", seed)->required();
    train_ex->add_option("--max-iters", max_iters);
    train_ex->add_option("--tol", tol);
    train_ex->add_option("--out", model_out)->required();
    train_ex->add_option("--summary", summary_path);
    train_ex->callback([&] {
        auto ds = LabeledDataset::load(dataset_path);
        ExtractorTrainInfo info;
        auto model = train_extractor(ds, extractor_l2, seed, max_iters, tol, &info);
        model.save(model_out);
        StageSummary s;
        s.stage = "train_extractor";
        s.add_input(dataset_path);
        s.add_output(model_out);
        s.seeds["extractor"] = seed;
        s.counts["features"] = std::to_string(info.features);
        s.counts["iterations"] = std::to_string(info.iterations);
        s.counts["converged"] = info.converged ? "true" : "false";
        maybe_summary(s, summary_path);
        std::cout << "train-extractor: " << info.features << " features, "
                  << (info.converged ? "converged" : "max iters") << " after " << info.iterations
                  << " iterations\n";
    });

    // predict
    auto* predict = app.add_subcommand("predict", "Emit per-pair predictions as CSV");
    predict->add_option("--model", model_path)->required();
    predict->add_option("--dataset", dataset_path)->required();
    predict->add_option("--out", out_path)->required();
    predict->callback([&] {
        auto model = ExtractorModel::load(model_path);
        auto ds = LabeledDataset::load(dataset_path);
        write_file(out_path, predictions_csv(predict_pairs(model, ds)));
    });

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "Run the fold-level three-way comparison from a manifest");
    std::string manifest_path, run_out_dir;
    evaluate->add_option("--manifest", manifest_path)->required();
    evaluate->add_option("--out-dir", run_out_dir, "overrides the manifest out_dir");
    evaluate->callback([&] {
        auto manifest = RunManifest::load(manifest_path);
        std::string dir = run_out_dir.empty() ? manifest.out_dir : run_out_dir;
        if (dir.empty()) throw std::runtime_error("evaluate: an out_dir is required");
        auto report = run_evaluate(manifest, dir);
        std::cout << report.table_text();
    });

    // run-all
    auto* runall = app.add_subcommand("run-all", "Chain every stage from a manifest");
    runall->add_option("--manifest", manifest_path)->required();
    runall->add_option("--out-dir", run_out_dir, "overrides the manifest out_dir");
    runall->callback([&] {
        auto manifest = RunManifest::load(manifest_path);
        std::string dir = run_out_dir.empty() ? manifest.out_dir : run_out_dir;
        if (dir.empty()) throw std::runtime_error("run-all: an out_dir is required");
        auto report = run_all(manifest, dir);
        std::cout << report.table_text();
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
