#pragma once

#include "psl/metrics.hpp"
#include "psl/store.hpp"

namespace psl {

/// Synthetic entity graph with a planted class partition. Pairwise
/// attribute scores and link edges correlate with co-membership; two
/// weighted rules plus a small negative prior explain the labels.
struct ClassifyInstance {
    Program prog;
    FactSet facts;
    std::vector<GroundAtom> goldPositives; // same-class ordered pairs
    Interpretation labels;                 // model state at the generating weights
};

/// attrWeight and linkWeight become the weights of the two evidence rules.
ClassifyInstance makeClassifyInstance(uint64_t seed, int entities = 50, int classes = 5,
                                      double attrWeight = 3.0, double linkWeight = 0.5);

/// Two mirrored concept trees with string names. The B side is perturbed:
/// a fraction of names replaced by random strings, a fraction of child
/// edges dropped. Rules: name similarity, child-set similarity through the
/// alignment itself, and a negative prior. Gold aligns mirror concepts.
struct AlignmentInstance {
    Program prog;
    FactSet facts;
    std::vector<GroundAtom> goldPositives;
    Interpretation labels;
    int concepts = 0; // per side
};

AlignmentInstance makeAlignmentInstance(uint64_t seed, double attrNoise, double structNoise,
                                        int branching = 3, int depth = 3);

/// Seeded chain: per-entity evidence rule, propagation along links, a
/// prior. Every grounding activates within a few sweeps, so the active
/// rule count tracks 3 * entities.
struct ChainInstance {
    Program prog;
    FactSet facts;
};

ChainInstance makeChainInstance(int entities, uint64_t seed);

} // namespace psl
