#include "prafilter/path.hpp"

#include <stdexcept>

#include "prafilter/util.hpp"

namespace prafilter {

std::string RelationPath::machine_text() const {
    std::vector<std::string> parts;
    parts.reserve(steps.size());
    for (const auto& s : steps) parts.push_back(s.text());
    return join(parts, ",");
}

RelationPath RelationPath::parse_machine(const std::string& text) {
    RelationPath p;
    for (const auto& part : split(text, ',')) {
        if (part.empty()) throw std::invalid_argument("empty step in path: '" + text + "'");
        p.steps.push_back(RelationRef::parse(part));
    }
    if (p.steps.empty()) throw std::invalid_argument("path must have at least one step");
    return p;
}

std::string RelationPath::display_text() const {
    // Variables: x, then a, b, c, ... for intermediates, then y.
    std::vector<std::string> vars;
    vars.push_back("x");
    for (size_t i = 0; i + 1 < steps.size(); ++i) vars.push_back(std::string(1, char('a' + i)));
    vars.push_back("y");
    std::vector<std::string> parts;
    for (size_t i = 0; i < steps.size(); ++i)
        parts.push_back(steps[i].text() + "(" + vars[i] + "," + vars[i + 1] + ")");
    return join(parts, " ∧ ");
}

RelationPath RelationPath::reversed_inverted() const {
    RelationPath out;
    out.steps.reserve(steps.size());
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) out.steps.push_back(it->inverse());
    return out;
}

std::vector<std::string> RelationPath::step_texts() const {
    std::vector<std::string> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.text());
    return out;
}

bool RelationPath::operator<(const RelationPath& o) const {
    if (steps.size() != o.steps.size()) return steps.size() < o.steps.size();
    return step_texts() < o.step_texts();
}

}  // namespace prafilter
