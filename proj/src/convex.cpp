#include "psl/convex.hpp"

#include <algorithm>
#include <cmath>

#include "psl/error.hpp"

namespace psl {

bool ConvexProgram::hasHardRows() const {
    for (int8_t h : rowHard) {
        if (h) return true;
    }
    return false;
}

double ConvexProgram::objective(std::span<const double> x, ExecMode mode) const {
    double lin = kernels::dot(cLin, x, mode);
    std::vector<double> qx(x.size());
    for (size_t i = 0; i < x.size(); ++i) qx[i] = qDiag[i] * x[i];
    return lin + 0.5 * kernels::dot(qx, x, mode);
}

namespace {

struct RowBuilder {
    std::vector<int32_t> rowPtr{0};
    std::vector<int32_t> colIdx;
    std::vector<double> vals;
    std::vector<double> b;
    std::vector<int8_t> hard;
    std::vector<int32_t> rule;

    void push(std::vector<std::pair<int32_t, double>>& coeffs, double rhs, bool isHard,
              int32_t ruleIdx) {
        std::sort(coeffs.begin(), coeffs.end());
        size_t out = 0;
        for (size_t i = 0; i < coeffs.size(); ++i) {
            if (out > 0 && coeffs[out - 1].first == coeffs[i].first) {
                coeffs[out - 1].second += coeffs[i].second;
            } else {
                coeffs[out++] = coeffs[i];
            }
        }
        coeffs.resize(out);
        for (const auto& [c, v] : coeffs) {
            colIdx.push_back(c);
            vals.push_back(v);
        }
        rowPtr.push_back(static_cast<int32_t>(colIdx.size()));
        b.push_back(rhs);
        hard.push_back(isHard ? 1 : 0);
        rule.push_back(ruleIdx);
        coeffs.clear();
    }
};

} // namespace

ConvexProgram buildConvexProgram(std::span<const GroundRule> rules, const Interpretation& interp,
                                 const InferenceConfig& cfg) {
    ConvexProgram p;

    // Atom variables: every query atom some rule touches, ascending id.
    p.varOfAtom.assign(static_cast<size_t>(interp.size()), -1);
    for (const GroundRule& r : rules) {
        for (AtomId a : r.atoms) p.varOfAtom[static_cast<size_t>(a)] = 0;
    }
    for (size_t a = 0; a < p.varOfAtom.size(); ++a) {
        if (p.varOfAtom[a] == 0) {
            p.varOfAtom[a] = p.numAtomVars++;
            p.atomOfVar.push_back(static_cast<AtomId>(a));
        }
    }

    // Clamp auxiliaries for positive set occurrences, then rule distance
    // variables for soft rules.
    std::vector<std::vector<int32_t>> auxOfRule(rules.size());
    int32_t nextVar = p.numAtomVars;
    for (size_t ri = 0; ri < rules.size(); ++ri) {
        for (const GroundSet& s : rules[ri].sets) {
            if (s.sign < 0.0) auxOfRule[ri].push_back(nextVar++);
            else auxOfRule[ri].push_back(-1);
        }
    }
    p.numAuxVars = nextVar - p.numAtomVars;
    p.ruleVarOfRule.assign(rules.size(), -1);
    for (size_t ri = 0; ri < rules.size(); ++ri) {
        if (rules[ri].kind == GroundKind::Soft) p.ruleVarOfRule[ri] = nextVar++;
    }
    p.numRuleVars = nextVar - p.numAtomVars - p.numAuxVars;
    p.numVars = nextVar;

    p.lower.assign(static_cast<size_t>(p.numVars), 0.0);
    p.upper.assign(static_cast<size_t>(p.numVars), 1.0);
    p.cLin.assign(static_cast<size_t>(p.numVars), 0.0);
    p.qDiag.assign(static_cast<size_t>(p.numVars), 0.0);
    for (size_t ri = 0; ri < rules.size(); ++ri) {
        int32_t rv = p.ruleVarOfRule[ri];
        if (rv < 0) continue;
        // Relaxed negated sets can push a distance slightly above 1.
        p.upper[static_cast<size_t>(rv)] = kInf;
        double w = rules[ri].weight;
        if (cfg.metric == DistanceMetric::L1) {
            p.cLin[static_cast<size_t>(rv)] = w;
        } else {
            double scale = cfg.weightForm == WeightForm::SquaredWeight ? w * w : w;
            p.qDiag[static_cast<size_t>(rv)] = 2.0 * scale;
        }
    }

    RowBuilder rb;
    std::vector<std::pair<int32_t, double>> coeffs;
    for (size_t ri = 0; ri < rules.size(); ++ri) {
        const GroundRule& r = rules[ri];
        bool isHard = r.kind != GroundKind::Soft;
        double rhs = -r.linear.constant;
        for (const LinearTerm& t : r.linear.terms) {
            coeffs.emplace_back(p.varOfAtom[static_cast<size_t>(t.atom)], t.coeff);
        }
        for (size_t si = 0; si < r.sets.size(); ++si) {
            const GroundSet& s = r.sets[si];
            if (s.sign < 0.0) {
                coeffs.emplace_back(auxOfRule[ri][si], -1.0);
            } else {
                // Negated occurrence relaxes the clamp; fold raw directly in.
                rhs -= s.expr.base;
                for (const auto& [atom, w] : s.expr.queryTerms) {
                    coeffs.emplace_back(p.varOfAtom[static_cast<size_t>(atom)], w);
                }
            }
        }
        int32_t rv = p.ruleVarOfRule[ri];
        if (rv >= 0) coeffs.emplace_back(rv, -1.0);
        rb.push(coeffs, rhs, isHard, static_cast<int32_t>(ri));

        // Clamp definition rows: aux <= raw, aux box keeps aux <= 1.
        for (size_t si = 0; si < r.sets.size(); ++si) {
            const GroundSet& s = r.sets[si];
            if (s.sign >= 0.0) continue;
            coeffs.emplace_back(auxOfRule[ri][si], 1.0);
            for (const auto& [atom, w] : s.expr.queryTerms) {
                coeffs.emplace_back(p.varOfAtom[static_cast<size_t>(atom)], -w);
            }
            rb.push(coeffs, s.expr.base, isHard, -1);
        }
    }

    p.numRows = static_cast<int32_t>(rb.b.size());
    p.rowPtr = std::move(rb.rowPtr);
    p.colIdx = std::move(rb.colIdx);
    p.vals = std::move(rb.vals);
    p.b = std::move(rb.b);
    p.rowHard = std::move(rb.hard);
    p.rowRule = std::move(rb.rule);

    // Explicit transpose, rows sorted by construction.
    std::vector<int32_t> count(static_cast<size_t>(p.numVars), 0);
    for (int32_t c : p.colIdx) ++count[static_cast<size_t>(c)];
    p.tRowPtr.assign(static_cast<size_t>(p.numVars) + 1, 0);
    for (int32_t v = 0; v < p.numVars; ++v) {
        p.tRowPtr[static_cast<size_t>(v) + 1] = p.tRowPtr[static_cast<size_t>(v)] + count[static_cast<size_t>(v)];
    }
    p.tColIdx.assign(p.colIdx.size(), 0);
    p.tVals.assign(p.vals.size(), 0.0);
    std::vector<int32_t> cursor(p.tRowPtr.begin(), p.tRowPtr.end() - 1);
    for (int32_t row = 0; row < p.numRows; ++row) {
        for (int32_t k = p.rowPtr[static_cast<size_t>(row)]; k < p.rowPtr[static_cast<size_t>(row) + 1]; ++k) {
            int32_t c = p.colIdx[static_cast<size_t>(k)];
            int32_t at = cursor[static_cast<size_t>(c)]++;
            p.tColIdx[static_cast<size_t>(at)] = row;
            p.tVals[static_cast<size_t>(at)] = p.vals[static_cast<size_t>(k)];
        }
    }
    return p;
}

void applySolution(const ConvexProgram& prog, std::span<const double> x, Interpretation& interp) {
    for (int32_t v = 0; v < prog.numAtomVars; ++v) {
        double val = std::clamp(x[static_cast<size_t>(v)], 0.0, 1.0);
        interp.setValue(prog.atomOfVar[static_cast<size_t>(v)], val);
    }
}

} // namespace psl
