#pragma once

#include "psl/store.hpp"

namespace psl {

/// Perturbation recipe: replace a fraction of attribute strings, drop a
/// fraction of relation edges. Which predicates count as attributes and
/// which as relations is named explicitly; the attribute string is the
/// last argument of its predicate.
struct NoiseSpec {
    double attributeNoise = 0.0;
    double structuralNoise = 0.0;
    uint64_t seed = 0;
    std::vector<PredId> attributePreds;
    std::vector<PredId> relationPreds;
};

/// Returns a perturbed copy of facts. Exactly floor(attributeNoise * n)
/// attribute rows get a fresh uniformly random lowercase string of the
/// original length, and exactly floor(structuralNoise * m) relation rows
/// are dropped. Fully determined by the seed; changing only the seed keeps
/// both counts. New strings are interned into prog.symbols.
FactSet generateNoise(Program& prog, const FactSet& facts, const NoiseSpec& spec);

} // namespace psl
