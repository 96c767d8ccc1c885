#pragma once

#include "psl/ast.hpp"

namespace psl {

/// Rewrites every set-similarity atom into element-level form: the member
/// predicate applied to fresh variables, bound by chain literals over the
/// path relations in the body. Head occurrences distribute, with bindings
/// moved to the body. Union sets multiply the rule, one variant per path
/// pair, each keeping the original weight. Programs without sets return
/// unchanged.
Program desugarSets(const Program& prog);

} // namespace psl
