#include "psl/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "psl/error.hpp"

#ifdef PSL_HAVE_OPENMP
#include <omp.h>
#endif

namespace psl {

namespace {

struct LinRef {
    int32_t rule;
    double coeff;
};
struct SetRef {
    int32_t rule;
    int32_t set;
    double coeff;
};

/// Incremental evaluation of all ground rules under one assignment to the
/// query slots. Updating one slot touches only the rules it appears in.
struct GridEval {
    const std::vector<GroundRule>* rules = nullptr;
    const InferenceConfig* cfg = nullptr;

    std::vector<std::vector<LinRef>> linTouch;
    std::vector<std::vector<SetRef>> setTouch;
    std::vector<std::vector<int32_t>> touched;
    std::vector<int32_t> setBase; // prefix offsets into rawSum per rule

    std::vector<double> linSum, rawSum, penalty;
    std::vector<int8_t> violated;
    double totalPenalty = 0.0;
    int32_t hardViolations = 0;

    void build(const std::vector<GroundRule>& rs, const InferenceConfig& c,
               const std::vector<int32_t>& slotOfAtom, int32_t numSlots) {
        rules = &rs;
        cfg = &c;
        linTouch.assign(static_cast<size_t>(numSlots), {});
        setTouch.assign(static_cast<size_t>(numSlots), {});
        touched.assign(static_cast<size_t>(numSlots), {});
        setBase.assign(rs.size() + 1, 0);
        for (size_t r = 0; r < rs.size(); ++r) {
            setBase[r + 1] = setBase[r] + static_cast<int32_t>(rs[r].sets.size());
            for (const LinearTerm& t : rs[r].linear.terms) {
                int32_t slot = slotOfAtom[static_cast<size_t>(t.atom)];
                if (slot >= 0) {
                    linTouch[static_cast<size_t>(slot)].push_back(
                        {static_cast<int32_t>(r), t.coeff});
                }
            }
            for (size_t s = 0; s < rs[r].sets.size(); ++s) {
                for (const auto& [atom, w] : rs[r].sets[s].expr.queryTerms) {
                    int32_t slot = slotOfAtom[static_cast<size_t>(atom)];
                    if (slot >= 0) {
                        setTouch[static_cast<size_t>(slot)].push_back(
                            {static_cast<int32_t>(r), static_cast<int32_t>(s), w});
                    }
                }
            }
        }
        for (int32_t slot = 0; slot < numSlots; ++slot) {
            std::vector<int32_t>& t = touched[static_cast<size_t>(slot)];
            for (const LinRef& l : linTouch[static_cast<size_t>(slot)]) t.push_back(l.rule);
            for (const SetRef& s : setTouch[static_cast<size_t>(slot)]) t.push_back(s.rule);
            std::sort(t.begin(), t.end());
            t.erase(std::unique(t.begin(), t.end()), t.end());
        }
    }

    /// Recomputes all sums from the interpretation, query slots included.
    void reset(const Interpretation& interp) {
        const auto& rs = *rules;
        linSum.assign(rs.size(), 0.0);
        rawSum.assign(static_cast<size_t>(setBase.back()), 0.0);
        penalty.assign(rs.size(), 0.0);
        violated.assign(rs.size(), 0);
        totalPenalty = 0.0;
        hardViolations = 0;
        for (size_t r = 0; r < rs.size(); ++r) {
            linSum[r] = rs[r].linear.eval(interp);
            for (size_t s = 0; s < rs[r].sets.size(); ++s) {
                rawSum[static_cast<size_t>(setBase[r]) + s] = rs[r].sets[s].expr.raw(interp);
            }
            refresh(static_cast<int32_t>(r));
        }
    }

    double distance(int32_t r) const {
        const GroundRule& g = (*rules)[static_cast<size_t>(r)];
        double d = linSum[static_cast<size_t>(r)];
        for (size_t s = 0; s < g.sets.size(); ++s) {
            double raw = rawSum[static_cast<size_t>(setBase[static_cast<size_t>(r)]) + s];
            d += g.sets[s].sign * std::min(1.0, raw);
        }
        return d > 0.0 ? d : 0.0;
    }

    void refresh(int32_t r) {
        const GroundRule& g = (*rules)[static_cast<size_t>(r)];
        double d = distance(r);
        if (g.kind == GroundKind::Soft) {
            double p = rulePenalty(*cfg, g.weight, d);
            totalPenalty += p - penalty[static_cast<size_t>(r)];
            penalty[static_cast<size_t>(r)] = p;
        } else {
            int8_t v = d > cfg->feasTolerance ? 1 : 0;
            hardViolations += v - violated[static_cast<size_t>(r)];
            violated[static_cast<size_t>(r)] = v;
        }
    }

    void update(int32_t slot, double delta) {
        for (const LinRef& l : linTouch[static_cast<size_t>(slot)]) {
            linSum[static_cast<size_t>(l.rule)] += l.coeff * delta;
        }
        for (const SetRef& s : setTouch[static_cast<size_t>(slot)]) {
            rawSum[static_cast<size_t>(setBase[static_cast<size_t>(s.rule)]) + s.set] +=
                s.coeff * delta;
        }
        for (int32_t r : touched[static_cast<size_t>(slot)]) refresh(r);
    }
};

struct SliceBest {
    double objective = kInf;
    std::vector<double> assignment;
};

/// Depth-first sweep over slots [depth, n), ascending values, strict
/// improvement. First minimum found is the lexicographically smallest.
void sweep(GridEval& ev, std::vector<double>& value, int32_t depth, int32_t numSlots,
           int32_t levels, double step, SliceBest& best, int64_t& evaluated) {
    if (depth == numSlots) {
        ++evaluated;
        if (ev.hardViolations == 0 && ev.totalPenalty < best.objective) {
            best.objective = ev.totalPenalty;
            best.assignment = value;
        }
        return;
    }
    double prev = value[static_cast<size_t>(depth)];
    for (int32_t lvl = 0; lvl <= levels; ++lvl) {
        double v = lvl == levels ? 1.0 : lvl * step;
        ev.update(depth, v - prev);
        value[static_cast<size_t>(depth)] = v;
        prev = v;
        sweep(ev, value, depth + 1, numSlots, levels, step, best, evaluated);
    }
    ev.update(depth, 0.0 - prev);
    value[static_cast<size_t>(depth)] = 0.0;
}

} // namespace

OracleResult bruteForceMAP(const Grounder& g, const Interpretation& evidence, double gridStep,
                           const InferenceConfig& cfg, int maxQueryAtoms) {
    if (!(gridStep > 0.0 && gridStep <= 1.0)) {
        throw DomainError("grid step must lie in (0, 1]");
    }
    int32_t levels = static_cast<int32_t>(std::llround(1.0 / gridStep));
    if (std::fabs(levels * gridStep - 1.0) > 1e-9) {
        throw DomainError("grid step must divide 1 evenly");
    }

    OracleResult res;
    res.interp = evidence;
    std::vector<GroundRule> all = g.groundAll(res.interp);
    std::vector<AtomId> slots = res.interp.queryAtoms();
    res.queryAtoms = static_cast<int32_t>(slots.size());
    if (res.queryAtoms > maxQueryAtoms) {
        throw DomainError("grid search refused: " + std::to_string(slots.size()) +
                          " query atoms exceed the limit of " + std::to_string(maxQueryAtoms));
    }
    for (AtomId a : slots) res.interp.setValue(a, 0.0);

    std::vector<int32_t> slotOfAtom(static_cast<size_t>(res.interp.size()), -1);
    for (size_t i = 0; i < slots.size(); ++i) {
        slotOfAtom[static_cast<size_t>(slots[i])] = static_cast<int32_t>(i);
    }
    int32_t numSlots = res.queryAtoms;

    GridEval proto;
    proto.build(all, cfg, slotOfAtom, numSlots);

    if (numSlots == 0) {
        proto.reset(res.interp);
        res.evaluated = 1;
        if (proto.hardViolations == 0) res.objective = proto.totalPenalty;
        return res;
    }

    // One slice per first-slot level; slices are independent and combined
    // in level order, so thread count never changes the answer.
    int32_t numSlices = levels + 1;
    std::vector<SliceBest> sliceBest(static_cast<size_t>(numSlices));
    std::vector<int64_t> sliceCount(static_cast<size_t>(numSlices), 0);
    int threads = kernels::resolveThreads(cfg.execMode, static_cast<int64_t>(numSlices) * 1000);
#ifdef PSL_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1)
#endif
    for (int32_t s = 0; s < numSlices; ++s) {
        GridEval ev = proto;
        Interpretation start = res.interp;
        double v0 = s == levels ? 1.0 : s * gridStep;
        start.setValue(slots[0], v0);
        ev.reset(start);
        std::vector<double> value(static_cast<size_t>(numSlots), 0.0);
        value[0] = v0;
        sweep(ev, value, 1, numSlots, levels, gridStep, sliceBest[static_cast<size_t>(s)],
              sliceCount[static_cast<size_t>(s)]);
    }
    (void)threads;

    for (int32_t s = 0; s < numSlices; ++s) {
        res.evaluated += sliceCount[static_cast<size_t>(s)];
        if (sliceBest[static_cast<size_t>(s)].objective < res.objective) {
            res.objective = sliceBest[static_cast<size_t>(s)].objective;
            for (size_t i = 0; i < slots.size(); ++i) {
                double v = i == 0 ? (s == levels ? 1.0 : s * gridStep)
                                  : sliceBest[static_cast<size_t>(s)].assignment[i];
                res.interp.setValue(slots[i], v);
            }
        }
    }
    return res;
}

} // namespace psl
