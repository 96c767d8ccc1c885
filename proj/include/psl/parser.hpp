#pragma once

#include <string_view>

#include "psl/ast.hpp"

namespace psl {

/// Parses rule-language text into a Program. Statements are predicate
/// declarations, exclusivity constraints and rules, each ending in '.'.
/// Undeclared predicates are added as closed with inferred arity.
/// Raises ParseError with line and column on malformed input.
Program parseProgram(std::string_view text);

} // namespace psl
