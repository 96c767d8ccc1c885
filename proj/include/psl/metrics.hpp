#pragma once

#include "psl/store.hpp"

namespace psl {

/// Orders atoms by predicate name, then argument spelling. Used for
/// deterministic output and documented tie breaking.
bool atomTextLess(const Program& prog, const GroundAtom& a, const GroundAtom& b);

/// Atoms judged positive, sorted by atomTextLess.
struct DecisionSet {
    std::vector<GroundAtom> positives;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Query atoms with value >= tau. tau must lie in (0, 1).
DecisionSet thresholdDecisions(const Program& prog, const Interpretation& interp, double tau);

/// Highest-valued candidate, ties resolved toward the atom earliest in
/// atomTextLess order. Empty candidate list raises DomainError.
AtomId argmaxDecision(const Program& prog, const Interpretation& interp,
                      std::span<const AtomId> candidates);

/// Precision, recall and their harmonic mean over set membership. An empty
/// prediction against nonempty gold scores zero precision; two empty sets
/// count as a perfect match.
Metrics f1Score(const DecisionSet& predicted, const DecisionSet& gold);

/// "precision<TAB>recall<TAB>f1" to 4 decimal places.
std::string formatMetrics(const Metrics& m);

} // namespace psl
