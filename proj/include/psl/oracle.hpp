#pragma once

#include "psl/infer.hpp"

namespace psl {

struct OracleResult {
    Interpretation interp;
    double objective = kInf;
    int32_t queryAtoms = 0;
    int64_t evaluated = 0;
};

/// Exhaustive grid search over the query atoms of the complete grounding.
/// Values range over {0, step, ..., 1}; assignments violating a hard or
/// exclusivity constraint beyond feasTolerance are discarded. The returned
/// assignment is the lexicographically first minimizer over the atom order.
/// Refuses more than maxQueryAtoms atoms, and steps that do not divide 1.
OracleResult bruteForceMAP(const Grounder& g, const Interpretation& evidence, double gridStep,
                           const InferenceConfig& cfg, int maxQueryAtoms = 8);

} // namespace psl
