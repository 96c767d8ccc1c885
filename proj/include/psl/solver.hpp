#pragma once

#include <optional>

#include "psl/convex.hpp"

namespace psl {

struct SolverOptions {
    double tolerance = 1e-8;
    int maxIterations = 300;
    double fractionToBoundary = 0.995;
    double centering = 0.1;
    ExecMode execMode = ExecMode::Auto;
};

struct SolverResult {
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
    double primalInf = 0.0;
    double dualInf = 0.0;
    double mu = 0.0;
    std::vector<double> x;
    std::vector<double> rowDual;
};

/// Primal-dual interior-point method on the box-and-rows form. Infeasible
/// start, fixed centering, fraction-to-boundary steps; every reduction runs
/// through the deterministic kernels, and the Newton systems go through a
/// sparse LDLT factorization whose pattern is analyzed once per program.
/// Throws SolveError on factorization breakdown; nonconvergence within the
/// iteration budget reports through the result flags.
SolverResult solveConvex(const ConvexProgram& p, const SolverOptions& opts,
                         const std::vector<double>* warmStart = nullptr);

struct InfeasibilityCertificate {
    std::vector<int32_t> rows; // conflicting row indices of the program
    double violation = 0.0;    // minimal total constraint excess
};

/// Elastic feasibility check of the hard subsystem: minimizes total excess
/// over hard rows under the variable boxes. Feasible within feasTol returns
/// nullopt and writes a feasible interior point; otherwise the certificate
/// carries a greedily minimized conflicting row set.
std::optional<InfeasibilityCertificate> checkHardFeasibility(const ConvexProgram& p,
                                                             const SolverOptions& opts,
                                                             double feasTol,
                                                             std::vector<double>* feasiblePoint);

} // namespace psl
