#include "psl/infer.hpp"

#include <chrono>
#include <sstream>

#include "psl/error.hpp"

namespace psl {

namespace {

double seconds(std::chrono::steady_clock::time_point from,
               std::chrono::steady_clock::time_point to) {
    return std::chrono::duration<double>(to - from).count();
}

std::string bindingText(const Program& prog, const Clause& clause, std::span<const Sym> binding) {
    std::ostringstream out;
    out << "[";
    for (size_t i = 0; i < binding.size(); ++i) {
        if (i) out << ", ";
        out << clause.varNames[i] << "=" << prog.symbols.name(binding[i]);
    }
    out << "]";
    return out.str();
}

} // namespace

double rulePenalty(const InferenceConfig& cfg, double weight, double distance) {
    if (cfg.metric == DistanceMetric::L1) return weight * distance;
    double w = cfg.weightForm == WeightForm::SquaredWeight ? weight * weight : weight;
    return w * distance * distance;
}

std::string describeGroundRule(const Grounder& g, const GroundRule& r) {
    const Program& prog = g.program();
    std::ostringstream out;
    if (r.kind == GroundKind::Exclusive) {
        const ExclusivityDecl& decl = prog.exclusivity[static_cast<size_t>(r.exclusivityId)];
        out << "exclusivity on " << prog.schema[static_cast<size_t>(decl.pred)].name << " (line "
            << decl.line << ") for group (";
        for (size_t i = 0; i < r.binding.size(); ++i) {
            if (i) out << ", ";
            out << prog.symbols.name(r.binding[i]);
        }
        out << ")";
        return out.str();
    }
    const Clause& clause = g.clauses()[static_cast<size_t>(r.clauseId)];
    out << (r.kind == GroundKind::Hard ? "hard rule" : "rule") << " at line " << clause.line << " "
        << bindingText(prog, clause, r.binding);
    return out.str();
}

namespace {

[[noreturn]] void throwInfeasible(const Grounder& g, const ConvexProgram& p,
                                  const InfeasibilityCertificate& cert,
                                  std::span<const GroundRule> rules) {
    std::ostringstream out;
    out << "hard constraints cannot all be satisfied (violation " << cert.violation
        << "); conflicting set:";
    int shown = 0;
    for (int32_t row : cert.rows) {
        int32_t ri = p.rowRule[static_cast<size_t>(row)];
        if (ri < 0) continue;
        out << "\n  " << describeGroundRule(g, rules[static_cast<size_t>(ri)]);
        if (++shown >= 12) {
            out << "\n  ...";
            break;
        }
    }
    if (shown == 0) out << "\n  (clamp rows only)";
    throw SolveError(out.str());
}

std::vector<double> warmVector(const ConvexProgram& p, const Interpretation& interp,
                               std::span<const GroundRule> rules) {
    std::vector<double> warm(static_cast<size_t>(p.numVars), 0.5);
    for (int32_t v = 0; v < p.numAtomVars; ++v) {
        warm[static_cast<size_t>(v)] = interp.value(p.atomOfVar[static_cast<size_t>(v)]);
    }
    for (size_t ri = 0; ri < rules.size(); ++ri) {
        int32_t v = p.ruleVarOfRule[ri];
        if (v >= 0) warm[static_cast<size_t>(v)] = rules[ri].distanceAt(interp);
    }
    return warm;
}

} // namespace

RunReport mapInference(const Grounder& g, Interpretation& interp, const InferenceConfig& cfg,
                       ActiveSet* activeOut) {
    using clock = std::chrono::steady_clock;
    RunReport rep;
    SolverOptions sopts;
    sopts.tolerance = std::min(cfg.tolerance * 1e-2, 1e-8);
    sopts.execMode = cfg.execMode;

    auto t0 = clock::now();
    ActiveSet active = g.initialActiveSet(interp);
    rep.groundSeconds += seconds(t0, clock::now());

    bool hardDirty = true;
    for (int outer = 0; outer < cfg.maxOuterIterations; ++outer) {
        rep.outerIterations = outer + 1;
        std::span<const GroundRule> rules{active.rules()};
        ConvexProgram p = buildConvexProgram(rules, interp, cfg);
        rep.variableCount = p.numVars;

        auto t1 = clock::now();
        if (hardDirty && p.hasHardRows()) {
            auto cert = checkHardFeasibility(p, sopts, cfg.feasTolerance, nullptr);
            if (cert) throwInfeasible(g, p, *cert, rules);
            hardDirty = false;
        }
        std::vector<double> warm = warmVector(p, interp, rules);
        SolverResult sol = solveConvex(p, sopts, &warm);
        rep.solveSeconds += seconds(t1, clock::now());
        rep.solverIterations += sol.iterations;
        applySolution(p, sol.x, interp);

        auto t2 = clock::now();
        AtomId firstNew = interp.size();
        int64_t versionBefore = active.version();
        AtomsByPred index = AtomsByPred::build(g.program(), interp);
        for (AtomId a = 0; a < firstNew; ++a) {
            if (interp.role(a) != AtomRole::Query) continue;
            if (interp.value(a) <= cfg.activationThreshold) continue;
            g.activateFor(active, interp, a, index);
        }
        int64_t afterSoft = active.version();
        g.closeHard(active, interp, firstNew);
        if (active.version() != afterSoft || interp.size() != firstNew) hardDirty = true;
        rep.groundSeconds += seconds(t2, clock::now());

        if (active.version() == versionBefore && interp.size() == firstNew) {
            rep.converged = sol.converged;
            break;
        }
    }

    rep.activeRuleCount = active.size();
    rep.atomCount = interp.queryCount();
    rep.objective = 0.0;
    for (const GroundRule& r : active.rules()) {
        if (r.kind == GroundKind::Soft) {
            rep.objective += rulePenalty(cfg, r.weight, r.distanceAt(interp));
        }
    }
    if (activeOut) *activeOut = std::move(active);
    return rep;
}

double objectiveValue(const Grounder& g, const Interpretation& interp, const InferenceConfig& cfg) {
    Interpretation work = interp;
    std::vector<GroundRule> all = g.groundAll(work);
    double total = 0.0;
    for (const GroundRule& r : all) {
        double d = r.distanceAt(work);
        if (r.kind == GroundKind::Soft) {
            total += rulePenalty(cfg, r.weight, d);
        } else if (d > cfg.feasTolerance) {
            return kInf;
        }
    }
    return total;
}

double logUnnormalizedDensity(const Grounder& g, const Interpretation& interp,
                              const InferenceConfig& cfg) {
    return -objectiveValue(g, interp, cfg);
}

} // namespace psl
