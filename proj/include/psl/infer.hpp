#pragma once

#include "psl/convex.hpp"
#include "psl/solver.hpp"

namespace psl {

struct RunReport {
    double objective = 0.0;
    bool converged = false;
    int outerIterations = 0;
    int solverIterations = 0;
    int32_t activeRuleCount = 0;
    int32_t atomCount = 0;
    int32_t variableCount = 0;
    double groundSeconds = 0.0;
    double solveSeconds = 0.0;
};

/// Weighted penalty of one soft rule at the given distance.
double rulePenalty(const InferenceConfig& cfg, double weight, double distance);

/// Human-readable identity of a ground constraint for diagnostics.
std::string describeGroundRule(const Grounder& g, const GroundRule& r);

/// Most probable interpretation under the program: lazily grounds, compiles
/// the active constraints into a box-constrained convex program and solves
/// it, activating atoms that cross the threshold until a fixed point.
/// interp starts as evidence and receives the query-atom values. Raises
/// SolveError with the conflicting constraints when hard rules cannot all
/// hold. activeOut, when given, receives the final active set.
RunReport mapInference(const Grounder& g, Interpretation& interp, const InferenceConfig& cfg,
                       ActiveSet* activeOut = nullptr);

/// Total weighted penalty at a complete grounding of the interpretation,
/// infinite when a hard or exclusivity constraint is violated beyond
/// the feasibility tolerance.
double objectiveValue(const Grounder& g, const Interpretation& interp, const InferenceConfig& cfg);

/// Log of the unnormalized density, the negated objective.
double logUnnormalizedDensity(const Grounder& g, const Interpretation& interp,
                              const InferenceConfig& cfg);

} // namespace psl
