#pragma once

#include <iosfwd>

#include "psl/store.hpp"

namespace psl {

/// Tab-separated fact lines: predicate, arguments, optional trailing value
/// (default 1). Predicates must exist in the program schema. Errors carry
/// the origin name and line number.
void loadFacts(Program& prog, std::istream& in, const std::string& origin, FactSet& out);
FactSet loadFactsFile(Program& prog, const std::string& path);

/// Canonical fact text: schema predicate order, rows in stored order,
/// values to 6 decimal places. Loading and re-rendering this text
/// reproduces it byte for byte.
std::string factsToText(const Program& prog, const FactSet& facts);

/// Query-atom lines "predicate<TAB>args...<TAB>value", 6 decimal places,
/// sorted by atom text.
std::string interpretationToText(const Program& prog, const Interpretation& interp);

/// Reads fact-shaped lines as query-atom labels into interp.
void loadLabels(Program& prog, std::istream& in, const std::string& origin, Interpretation& interp);

/// One line per soft rule: index, tab, weight.
std::string weightsToText(std::span<const double> weights);
std::vector<double> loadWeights(std::istream& in, const std::string& origin);

/// Replaces soft-rule weights in order; sizes must match.
void applyWeights(Program& prog, std::span<const double> weights);

std::string readTextFile(const std::string& path);
void writeTextFile(const std::string& path, const std::string& content);

} // namespace psl
