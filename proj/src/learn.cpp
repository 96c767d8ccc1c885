#include "psl/learn.hpp"

#include <algorithm>
#include <cmath>

namespace psl {

namespace {

double distanceTerm(DistanceMetric metric, double d) {
    return metric == DistanceMetric::L1 ? d : d * d;
}

/// Per-rule sums of the metric distance term over a complete grounding.
std::vector<double> ruleSums(const Grounder& g, const Interpretation& at, size_t numSoft,
                             DistanceMetric metric) {
    Interpretation work = at;
    std::vector<double> sums(numSoft, 0.0);
    for (const GroundRule& r : g.groundAll(work)) {
        if (r.kind != GroundKind::Soft) continue;
        sums[static_cast<size_t>(r.softIndex)] += distanceTerm(metric, r.distanceAt(work));
    }
    return sums;
}

double penaltyScale(const InferenceConfig& cfg, double w) {
    if (cfg.metric == DistanceMetric::L1) return w;
    return cfg.weightForm == WeightForm::SquaredWeight ? w * w : w;
}

} // namespace

LearnReport learnWeights(const Program& original, const FactSet& facts,
                         const SimilarityRegistry& sims, const Interpretation& observed,
                         const LearningConfig& cfg) {
    const size_t numSoft = original.softRules.size();
    LearnReport rep;
    rep.weights.resize(numSoft);
    for (size_t i = 0; i < numSoft; ++i) rep.weights[i] = original.softRules[i].weight;
    if (numSoft == 0 || cfg.iterations <= 0) return rep;

    Program prog = original;
    GroundingOptions gopts{cfg.inference.setNormalizer};

    std::vector<double> obsSums;
    {
        Grounder g(prog, facts, sims, gopts);
        obsSums = ruleSums(g, observed, numSoft, cfg.inference.metric);
    }

    std::vector<double> w = rep.weights;
    std::vector<double> avg(numSoft, 0.0);
    for (int pass = 0; pass < cfg.iterations; ++pass) {
        for (size_t i = 0; i < numSoft; ++i) prog.softRules[i].weight = w[i];
        Grounder g(prog, facts, sims, gopts);
        Interpretation inferred = evidenceInterpretation(prog, facts);
        mapInference(g, inferred, cfg.inference);
        std::vector<double> mapSums = ruleSums(g, inferred, numSoft, cfg.inference.metric);

        double gap = 0.0, norm = 0.0;
        for (size_t i = 0; i < numSoft; ++i) {
            double grad = obsSums[i] - mapSums[i];
            gap += penaltyScale(cfg.inference, w[i]) * grad;
            norm += grad * grad;
            w[i] = std::max(cfg.minWeight, w[i] - cfg.learningRate * grad);
            avg[i] += w[i];
        }
        rep.gradientNorms.push_back(std::sqrt(norm));
        rep.objectiveGaps.push_back(gap);
    }
    rep.iterations = cfg.iterations;
    for (size_t i = 0; i < numSoft; ++i) {
        rep.weights[i] = cfg.averaging ? avg[i] / cfg.iterations : w[i];
    }
    return rep;
}

} // namespace psl
