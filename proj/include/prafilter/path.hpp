#pragma once

#include <string>
#include <vector>

#include "prafilter/kg.hpp"

namespace prafilter {

// An ordered sequence of (possibly inverted) relation labels; the unit the
// path learner ranks and the false-negative filter follows.
struct RelationPath {
    std::vector<RelationRef> steps;  // length >= 1

    size_t length() const { return steps.size(); }

    // Machine form used in model files: "rel1,_rel2".
    std::string machine_text() const;
    static RelationPath parse_machine(const std::string& text);

    // Report form: "rel1(x,a) ∧ _rel2(a,y)". Intermediate variables run
    // a, b, c, ...; the walk source is always the first argument.
    std::string display_text() const;

    // Reverse the step order and flip every inversion flag. Following the
    // result from the target reaches the source iff the original path
    // connects source to target.
    RelationPath reversed_inverted() const;

    // Sort key: length first, then the step texts lexicographically.
    std::vector<std::string> step_texts() const;
    bool operator==(const RelationPath& o) const = default;
    bool operator<(const RelationPath& o) const;
};

}  // namespace prafilter
