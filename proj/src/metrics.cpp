#include "psl/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include "psl/error.hpp"

namespace psl {

bool atomTextLess(const Program& prog, const GroundAtom& a, const GroundAtom& b) {
    if (a.pred != b.pred) {
        return prog.schema[static_cast<size_t>(a.pred)].name <
               prog.schema[static_cast<size_t>(b.pred)].name;
    }
    size_t n = std::min(a.args.size(), b.args.size());
    for (size_t i = 0; i < n; ++i) {
        std::string_view x = prog.symbols.name(a.args[i]);
        std::string_view y = prog.symbols.name(b.args[i]);
        if (x != y) return x < y;
    }
    return a.args.size() < b.args.size();
}

DecisionSet thresholdDecisions(const Program& prog, const Interpretation& interp, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw DomainError("decision threshold must lie strictly between 0 and 1");
    }
    DecisionSet out;
    for (AtomId id : interp.queryAtoms()) {
        if (interp.value(id) >= tau) out.positives.push_back(interp.atom(id));
    }
    std::sort(out.positives.begin(), out.positives.end(),
              [&](const GroundAtom& a, const GroundAtom& b) { return atomTextLess(prog, a, b); });
    return out;
}

AtomId argmaxDecision(const Program& prog, const Interpretation& interp,
                      std::span<const AtomId> candidates) {
    if (candidates.empty()) throw DomainError("argmax over empty candidate set");
    AtomId best = candidates[0];
    for (size_t i = 1; i < candidates.size(); ++i) {
        AtomId c = candidates[i];
        double dv = interp.value(c) - interp.value(best);
        if (dv > 0.0 ||
            (dv == 0.0 && atomTextLess(prog, interp.atom(c), interp.atom(best)))) {
            best = c;
        }
    }
    return best;
}

Metrics f1Score(const DecisionSet& predicted, const DecisionSet& gold) {
    std::unordered_set<GroundAtom, GroundAtomHash> inGold(gold.positives.begin(),
                                                          gold.positives.end());
    size_t tp = 0;
    for (const GroundAtom& p : predicted.positives) {
        tp += inGold.count(p);
    }
    Metrics m;
    if (predicted.positives.empty()) {
        m.precision = gold.positives.empty() ? 1.0 : 0.0;
    } else {
        m.precision = static_cast<double>(tp) / static_cast<double>(predicted.positives.size());
    }
    m.recall = gold.positives.empty()
                   ? 1.0
                   : static_cast<double>(tp) / static_cast<double>(gold.positives.size());
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

std::string formatMetrics(const Metrics& m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f\t%.4f\t%.4f", m.precision, m.recall, m.f1);
    return buf;
}

} // namespace psl
