#pragma once

#include "psl/infer.hpp"

namespace psl {

struct LearningConfig {
    double learningRate = 0.1;
    int iterations = 50;
    double minWeight = 1e-3;
    bool averaging = true;
    InferenceConfig inference;
};

struct LearnReport {
    std::vector<double> weights;
    std::vector<double> gradientNorms;  // one entry per pass
    std::vector<double> objectiveGaps;  // observed minus inferred penalty, per pass
    int iterations = 0;
};

/// Gradient weight fitting against a labeled interpretation. Each pass runs
/// inference under the current weights and moves every rule weight by the
/// difference between the penalty its groundings incur on the labels and on
/// the inferred values. Weights never drop below minWeight. With averaging
/// the reported weights are the mean over passes, which damps oscillation.
LearnReport learnWeights(const Program& prog, const FactSet& facts, const SimilarityRegistry& sims,
                         const Interpretation& observed, const LearningConfig& cfg);

} // namespace psl
