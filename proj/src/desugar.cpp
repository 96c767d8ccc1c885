#include "psl/desugar.hpp"

#include <string>
#include <vector>

namespace psl {

namespace {

int freshVar(Rule& r, int& counter) {
    for (;;) {
        std::string name = "E" + std::to_string(++counter);
        bool taken = false;
        for (const std::string& v : r.varNames) {
            if (v == name) {
                taken = true;
                break;
            }
        }
        if (!taken) {
            r.varNames.push_back(name);
            return static_cast<int>(r.varNames.size()) - 1;
        }
    }
}

Term varTerm(int v) {
    Term t;
    t.kind = TermKind::Variable;
    t.var = v;
    return t;
}

/// Appends r1(anchor, v1), r2(v1, v2), ... to body; returns the last
/// chain variable.
int appendChain(Rule& r, const SetPath& path, int& counter, int line) {
    int prev = path.anchorVar;
    for (PredId rel : path.rels) {
        int next = freshVar(r, counter);
        Literal l;
        l.kind = LiteralKind::Atom;
        l.pred = rel;
        l.args = {varTerm(prev), varTerm(next)};
        l.line = line;
        r.body.push_back(std::move(l));
        prev = next;
    }
    return prev;
}

/// One variant per pair of union branches of the first set literal, then
/// recursion handles any further set literals.
void expandRule(const Rule& rule, std::vector<Rule>& out) {
    bool inBody = true;
    int where = -1;
    for (size_t i = 0; i < rule.body.size() && where < 0; ++i) {
        if (rule.body[i].kind == LiteralKind::SetSim) where = static_cast<int>(i);
    }
    if (where < 0) {
        inBody = false;
        for (size_t i = 0; i < rule.head.size() && where < 0; ++i) {
            if (rule.head[i].kind == LiteralKind::SetSim) where = static_cast<int>(i);
        }
    }
    if (where < 0) {
        out.push_back(rule);
        return;
    }

    const Literal& setLit =
        inBody ? rule.body[static_cast<size_t>(where)] : rule.head[static_cast<size_t>(where)];
    for (const SetPath& lp : setLit.left.paths) {
        for (const SetPath& rp : setLit.right.paths) {
            Rule variant = rule;
            Literal lit = setLit;
            if (inBody) {
                variant.body.erase(variant.body.begin() + where);
            } else {
                variant.head.erase(variant.head.begin() + where);
            }
            int counter = 0;
            int lv = appendChain(variant, lp, counter, lit.line);
            int rv = appendChain(variant, rp, counter, lit.line);
            Literal elem;
            elem.kind = LiteralKind::Atom;
            elem.negated = lit.negated;
            elem.pred = lit.pred;
            elem.args = {varTerm(lv), varTerm(rv)};
            elem.line = lit.line;
            if (inBody) {
                variant.body.push_back(std::move(elem));
            } else {
                variant.head.push_back(std::move(elem));
            }
            expandRule(variant, out);
        }
    }
}

std::vector<Rule> expandAll(const std::vector<Rule>& rules) {
    std::vector<Rule> out;
    for (const Rule& r : rules) expandRule(r, out);
    return out;
}

} // namespace

Program desugarSets(const Program& prog) {
    Program out = prog;
    out.softRules = expandAll(prog.softRules);
    out.hardRules = expandAll(prog.hardRules);
    return out;
}

} // namespace psl
