#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prafilter/eval.hpp"
#include "prafilter/synth.hpp"

namespace prafilter {

// Single structured config driving the CLI stages. Seeds can be
// overridden through PRAFILTER_SEED_<NAME> environment variables.
struct RunManifest {
    std::string kb_path;
    std::string corpus_path;
    std::vector<std::string> relations;
    std::string out_dir;

    EvalConfig eval;
    double label_neg_ratio = 5.0;  // negative instance pairs per positive pair

    std::optional<SynthSpec> synth;  // when set, inputs are generated first

    static RunManifest load(const std::string& path);
    static RunManifest from_json(const std::string& text, const std::string& base_dir);
    // Checks referenced files exist and tunables are in range.
    void validate(bool inputs_required = true) const;
};

// Machine-readable per-stage summary: inputs/outputs with sha256 content
// hashes, the seeds involved, and headline counts.
struct StageSummary {
    std::string stage;
    std::vector<std::pair<std::string, std::string>> inputs;   // (path, sha256)
    std::vector<std::pair<std::string, std::string>> outputs;  // (path, sha256)
    std::map<std::string, uint64_t> seeds;
    std::map<std::string, std::string> counts;

    void add_input(const std::string& path);
    void add_output(const std::string& path);
    std::string to_json() const;
    void save(const std::string& path) const;
};

// Chains every stage for each target relation and the fold-level
// three-way evaluation, failing fast; every stage writes its outputs and
// a summary under out_dir. Returns the evaluation report.
EvalReport run_all(const RunManifest& manifest, const std::string& out_dir);

// Just the evaluation stage of run_all (kb and corpus must exist).
EvalReport run_evaluate(const RunManifest& manifest, const std::string& out_dir);

}  // namespace prafilter
