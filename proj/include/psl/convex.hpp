#pragma once

#include <limits>

#include "psl/grounding.hpp"
#include "psl/kernels.hpp"

namespace psl {

enum class DistanceMetric { L1, SquaredL2 };

/// Penalty shape under SquaredL2: weight * weight * d * d, or weight * d * d.
enum class WeightForm { SquaredWeight, PlainWeight };

struct InferenceConfig {
    DistanceMetric metric = DistanceMetric::SquaredL2;
    WeightForm weightForm = WeightForm::SquaredWeight;
    SetNormalizer setNormalizer = SetNormalizer::SizeSum;
    double activationThreshold = 0.01;
    double tolerance = 1e-6;
    double feasTolerance = 1e-6;
    int maxOuterIterations = 100;
    ExecMode execMode = ExecMode::Auto;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Box-constrained program min c'x + 0.5 x'Qx over Ax <= b, l <= x <= u,
/// with Q diagonal. Variables in order: one per participating query atom,
/// one clamp auxiliary per positive set occurrence, one distance variable
/// per soft ground rule. The transpose of A is stored explicitly so both
/// products run as row-parallel CSR kernels.
struct ConvexProgram {
    int32_t numVars = 0;
    std::vector<double> lower, upper;
    std::vector<double> cLin, qDiag;

    int32_t numRows = 0;
    std::vector<int32_t> rowPtr, colIdx;
    std::vector<double> vals, b;
    std::vector<int32_t> tRowPtr, tColIdx;
    std::vector<double> tVals;

    std::vector<int8_t> rowHard;   // 1 on hard and exclusivity rows and their clamp rows
    std::vector<int32_t> rowRule;  // originating ground rule, -1 for clamp rows

    int32_t numAtomVars = 0, numAuxVars = 0, numRuleVars = 0;
    std::vector<AtomId> atomOfVar;        // first numAtomVars entries
    std::vector<int32_t> varOfAtom;       // atom id -> variable index or -1
    std::vector<int32_t> ruleVarOfRule;   // ground rule -> variable index or -1

    bool hasHardRows() const;
    /// Objective at a full-length variable vector.
    double objective(std::span<const double> x, ExecMode mode) const;
};

/// Compiles active ground rules into the convex program. Atoms outside
/// every rule get no variable; callers keep them at zero.
ConvexProgram buildConvexProgram(std::span<const GroundRule> rules, const Interpretation& interp,
                                 const InferenceConfig& cfg);

/// Writes solved variable values back into query-atom truth values,
/// clamping solver round-off into [0, 1].
void applySolution(const ConvexProgram& prog, std::span<const double> x, Interpretation& interp);

} // namespace psl
