#include "psl/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>

#include "psl/error.hpp"
#include "psl/truth.hpp"

namespace psl {

void LinearExpr::add(AtomId atom, double coeff) {
    terms.push_back({atom, coeff});
}

void LinearExpr::normalize() {
    std::sort(terms.begin(), terms.end(),
              [](const LinearTerm& a, const LinearTerm& b) { return a.atom < b.atom; });
    size_t out = 0;
    for (size_t i = 0; i < terms.size(); ++i) {
        if (out > 0 && terms[out - 1].atom == terms[i].atom) {
            terms[out - 1].coeff += terms[i].coeff;
        } else {
            terms[out++] = terms[i];
        }
    }
    terms.resize(out);
}

double LinearExpr::eval(const Interpretation& interp) const {
    double s = constant;
    for (const LinearTerm& t : terms) s += t.coeff * interp.value(t.atom);
    return s;
}

double GroundRule::distanceAt(const Interpretation& interp) const {
    double d = linear.eval(interp);
    for (const GroundSet& s : sets) {
        double raw = s.expr.raw(interp);
        d += s.sign * (raw < 1.0 ? raw : 1.0);
    }
    return d > 0.0 ? d : 0.0;
}

int32_t ActiveSet::find(const GroundKey& k) const {
    auto it = index_.find(k);
    return it == index_.end() ? -1 : it->second;
}

std::pair<int32_t, bool> ActiveSet::insert(GroundKey key, GroundRule&& r) {
    auto it = index_.find(key);
    if (it != index_.end()) return {it->second, false};
    int32_t idx = static_cast<int32_t>(rules_.size());
    rules_.push_back(std::move(r));
    index_.emplace(std::move(key), idx);
    indexAtoms(idx, rules_.back());
    ++version_;
    return {idx, true};
}

void ActiveSet::replace(int32_t idx, GroundRule&& r) {
    rules_[static_cast<size_t>(idx)] = std::move(r);
    indexAtoms(idx, rules_[static_cast<size_t>(idx)]);
    ++version_;
}

void ActiveSet::indexAtoms(int32_t idx, const GroundRule& r) {
    for (AtomId a : r.atoms) {
        if (static_cast<size_t>(a) >= byAtom_.size()) byAtom_.resize(static_cast<size_t>(a) + 1);
        auto& v = byAtom_[static_cast<size_t>(a)];
        if (v.empty() || v.back() != idx) v.push_back(idx);
    }
}

const std::vector<int32_t>& ActiveSet::rulesOf(AtomId atom) const {
    if (static_cast<size_t>(atom) >= byAtom_.size()) return empty_;
    return byAtom_[static_cast<size_t>(atom)];
}

AtomsByPred AtomsByPred::build(const Program& prog, const Interpretation& interp) {
    AtomsByPred out;
    out.positive.resize(prog.schema.size());
    for (AtomId id = 0; id < interp.size(); ++id) {
        if (interp.role(id) == AtomRole::Query && interp.value(id) > 0.0) {
            out.positive[static_cast<size_t>(interp.atom(id).pred)].push_back(id);
        }
    }
    return out;
}

AtomsByPred AtomsByPred::empty(const Program& prog) {
    AtomsByPred out;
    out.positive.resize(prog.schema.size());
    return out;
}

namespace {

enum class StepKind { BindRows, BindUniverse, CheckAtom, CheckGuard, CheckBuiltin, CheckSet };

struct Step {
    StepKind kind = StepKind::CheckAtom;
    int lit = -1;
    std::vector<int> bindVars; // variables this step binds, in arg order
};

std::vector<int> litVars(const Literal& l) {
    std::vector<int> out;
    auto addTerm = [&](const Term& t) {
        if (t.kind == TermKind::Variable || t.kind == TermKind::PathApply) out.push_back(t.var);
    };
    switch (l.kind) {
        case LiteralKind::Atom:
        case LiteralKind::Builtin:
        case LiteralKind::Guard:
            for (const Term& t : l.args) addTerm(t);
            break;
        case LiteralKind::SetSim:
            for (const SetExpr* e : {&l.left, &l.right}) {
                for (const SetPath& p : e->paths) out.push_back(p.anchorVar);
            }
            break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

/// Executes one clause grounding as a left-deep join. Closed literals and
/// value-bearing rows drive the search; variables nothing binds enumerate
/// their type universe. In filtered mode branches whose satisfaction already
/// reaches 1 are cut, which is sound because contributions never decrease.
class JoinRun {
public:
    JoinRun(const Grounder& g, int clauseId, bool filtered, Interpretation& interp,
            const AtomsByPred& index)
        : g_(g), prog_(g.prog_), facts_(g.facts_), clause_(g.clauses_[static_cast<size_t>(clauseId)]),
          clauseId_(clauseId), filtered_(filtered), interp_(interp), index_(index) {}

    /// Runs the join from an initial partial binding. pinnedLit < 0 when
    /// nothing is pinned. Calls sink for every surviving complete binding.
    void run(std::vector<Sym> binding, double pinnedContrib, int pinnedLit,
             const std::function<void(const std::vector<Sym>&)>& sink) {
        binding_ = std::move(binding);
        binding_.resize(clause_.varNames.size(), -1);
        sink_ = &sink;
        contrib_ = pinnedContrib;
        buildPlan(pinnedLit);
        exec(0);
    }

    /// Fixes the binding for direct literal evaluation without a join.
    void seedBinding(const std::vector<Sym>& b) { binding_ = b; }

    double atomValue(const Literal& l) const {
        GroundAtom a;
        a.pred = l.pred;
        a.args.reserve(l.args.size());
        for (const Term& t : l.args) {
            a.args.push_back(t.kind == TermKind::Constant ? t.constant
                                                          : binding_[static_cast<size_t>(t.var)]);
        }
        return truthOrZero(prog_, facts_, interp_, a);
    }

    /// Multi-valued attributes compare by their best-matching pair.
    double builtinValue(const Literal& l) const {
        const SimilarityFn& fn = g_.sims_.get(l.fn);
        std::vector<Sym> a = termValues(l.args[0]);
        std::vector<Sym> b = termValues(l.args[1]);
        double best = 0.0;
        for (Sym x : a) {
            for (Sym y : b) {
                double v = fn(prog_.symbols.name(x), prog_.symbols.name(y));
                if (std::isnan(v) || v < -truth::kBoundTolerance || v > 1.0 + truth::kBoundTolerance) {
                    throw DomainError("similarity function '" + l.fn + "' returned " +
                                      std::to_string(v) + ", outside [0,1]");
                }
                best = std::max(best, std::clamp(v, 0.0, 1.0));
            }
        }
        return best;
    }

    double setRawPeek(const Literal& l) const {
        std::vector<Sym> left = materializeSet(prog_, facts_, l.left, binding_);
        std::vector<Sym> right = materializeSet(prog_, facts_, l.right, binding_);
        if (left.empty() || right.empty()) return 0.0;
        double denom = g_.opts_.setNormalizer == SetNormalizer::SizeSum
                           ? static_cast<double>(left.size() + right.size())
                           : static_cast<double>(left.size()) * static_cast<double>(right.size());
        double s = 0.0;
        GroundAtom atom;
        atom.pred = l.pred;
        atom.args.resize(2);
        for (Sym x : left) {
            for (Sym y : right) {
                atom.args[0] = x;
                atom.args[1] = y;
                s += truthOrZero(prog_, facts_, interp_, atom);
            }
        }
        return s / denom;
    }

private:
    void buildPlan(int pinnedLit) {
        steps_.clear();
        size_t n = clause_.lits.size() + clause_.guards.size();
        std::vector<bool> placed(n, false);
        if (pinnedLit >= 0) placed[static_cast<size_t>(pinnedLit)] = true;
        std::vector<bool> bound(clause_.varNames.size(), false);
        for (size_t v = 0; v < binding_.size(); ++v) bound[v] = binding_[v] >= 0;

        auto literalAt = [&](size_t i) -> const Literal& {
            return i < clause_.lits.size() ? clause_.lits[i]
                                           : clause_.guards[i - clause_.lits.size()];
        };
        auto ready = [&](size_t i) {
            for (int v : litVars(literalAt(i))) {
                if (!bound[static_cast<size_t>(v)]) return false;
            }
            return true;
        };

        size_t remaining = n - (pinnedLit >= 0 ? 1 : 0);
        while (remaining > 0) {
            for (size_t i = 0; i < n; ++i) {
                if (placed[i] || !ready(i)) continue;
                const Literal& l = literalAt(i);
                Step s;
                s.lit = static_cast<int>(i);
                switch (l.kind) {
                    case LiteralKind::Atom: s.kind = StepKind::CheckAtom; break;
                    case LiteralKind::Guard: s.kind = StepKind::CheckGuard; break;
                    case LiteralKind::Builtin: s.kind = StepKind::CheckBuiltin; break;
                    case LiteralKind::SetSim: s.kind = StepKind::CheckSet; break;
                }
                steps_.push_back(std::move(s));
                placed[i] = true;
                --remaining;
            }
            if (remaining == 0) break;

            // Choose the cheapest literal that can bind new variables.
            int bestLit = -1;
            StepKind bestKind = StepKind::BindRows;
            double bestScore = 0.0;
            int bestClass = 99;
            for (size_t i = 0; i < clause_.lits.size(); ++i) {
                if (placed[i]) continue;
                const Literal& l = clause_.lits[i];
                if (l.kind != LiteralKind::Atom) continue;
                bool connected = false, hasUnbound = false;
                for (int v : litVars(l)) {
                    if (bound[static_cast<size_t>(v)]) connected = true;
                    else hasUnbound = true;
                }
                for (const Term& t : l.args) {
                    if (t.kind == TermKind::Constant) connected = true;
                }
                if (!hasUnbound) continue;
                int cls;
                StepKind kind;
                double score;
                bool closedPred = prog_.schema[static_cast<size_t>(l.pred)].closed;
                if (l.negated && (filtered_ || closedPred)) {
                    kind = StepKind::BindRows;
                    score = static_cast<double>(facts_.rows(l.pred).size() +
                                                index_.positive[static_cast<size_t>(l.pred)].size());
                    cls = connected ? 0 : 1;
                } else {
                    kind = StepKind::BindUniverse;
                    score = 1.0;
                    for (const Term& t : l.args) {
                        if (t.kind != TermKind::Constant && !bound[static_cast<size_t>(t.var)]) {
                            score *= domainEstimate(l, t);
                        }
                    }
                    cls = connected ? 2 : 3;
                }
                if (bestLit < 0 || cls < bestClass || (cls == bestClass && score < bestScore)) {
                    bestLit = static_cast<int>(i);
                    bestKind = kind;
                    bestScore = score;
                    bestClass = cls;
                }
            }
            if (bestLit < 0) {
                for (size_t i = 0; i < n; ++i) {
                    if (placed[i]) continue;
                    for (int v : litVars(literalAt(i))) {
                        if (!bound[static_cast<size_t>(v)]) {
                            throw GroundingError(
                                "cannot bind variable " + clause_.varNames[static_cast<size_t>(v)] +
                                " of rule at line " + std::to_string(clause_.line) +
                                "; it needs a predicate literal or a typed position");
                        }
                    }
                }
                throw GroundingError("grounding stalled for rule at line " +
                                     std::to_string(clause_.line));
            }
            Step s;
            s.kind = bestKind;
            s.lit = bestLit;
            const Literal& l = clause_.lits[static_cast<size_t>(bestLit)];
            for (const Term& t : l.args) {
                if (t.kind != TermKind::Constant && !bound[static_cast<size_t>(t.var)]) {
                    s.bindVars.push_back(t.var);
                    bound[static_cast<size_t>(t.var)] = true;
                }
            }
            steps_.push_back(std::move(s));
            placed[static_cast<size_t>(bestLit)] = true;
            --remaining;
        }
    }

    double domainEstimate(const Literal& l, const Term& t) {
        size_t pos = 0;
        for (size_t i = 0; i < l.args.size(); ++i) {
            if (&l.args[i] == &t) pos = i;
        }
        const std::string& type = prog_.schema[static_cast<size_t>(l.pred)].argTypes[pos];
        if (type != kUntyped) return static_cast<double>(facts_.universe(type).size());
        return static_cast<double>(facts_.allConstants().size());
    }

    /// Domain for a variable an open or positive literal must enumerate:
    /// first typed position wins, untyped falls back to all constants when
    /// a closed literal mentions the variable, otherwise the program cannot
    /// be grounded and the variable is named in the error.
    const std::vector<Sym>& domainOf(int var) const {
        for (const Literal& l : clause_.lits) {
            if (l.kind != LiteralKind::Atom) continue;
            const PredicateDecl& d = prog_.schema[static_cast<size_t>(l.pred)];
            for (size_t i = 0; i < l.args.size(); ++i) {
                const Term& t = l.args[i];
                if (t.kind == TermKind::Constant || t.var != var) continue;
                if (d.argTypes[i] != kUntyped) return facts_.universe(d.argTypes[i]);
            }
        }
        for (const Literal& l : clause_.lits) {
            if (l.kind != LiteralKind::Atom) continue;
            if (!prog_.schema[static_cast<size_t>(l.pred)].closed) continue;
            for (const Term& t : l.args) {
                if (t.kind != TermKind::Constant && t.var == var) return facts_.allConstants();
            }
        }
        throw GroundingError("variable " + clause_.varNames[static_cast<size_t>(var)] +
                             " of rule at line " + std::to_string(clause_.line) +
                             " has no enumerable domain; declare argument types on an open predicate"
                             " or bind it through a closed literal");
    }

    const Literal& stepLiteral(const Step& s) const {
        size_t i = static_cast<size_t>(s.lit);
        return i < clause_.lits.size() ? clause_.lits[i] : clause_.guards[i - clause_.lits.size()];
    }

    void exec(size_t si) {
        if (filtered_ && contrib_ >= 1.0) return;
        if (si == steps_.size()) {
            (*sink_)(binding_);
            return;
        }
        const Step& s = steps_[si];
        const Literal& l = stepLiteral(s);
        switch (s.kind) {
            case StepKind::CheckAtom: {
                double v = atomValue(l);
                withContrib(l.negated ? 1.0 - v : v, si);
                return;
            }
            case StepKind::CheckGuard: {
                std::vector<Sym> a = termValues(l.args[0]);
                std::vector<Sym> b = termValues(l.args[1]);
                std::vector<Sym> common;
                std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                                      std::back_inserter(common));
                if (common.empty()) exec(si + 1);
                return;
            }
            case StepKind::CheckBuiltin: {
                double v = builtinValue(l);
                withContrib(l.negated ? 1.0 - v : v, si);
                return;
            }
            case StepKind::CheckSet: {
                double raw = setRawPeek(l);
                double clamped = raw < 1.0 ? raw : 1.0;
                withContrib(l.negated ? 1.0 - clamped : clamped, si);
                return;
            }
            case StepKind::BindRows: {
                bindFromRows(s, l, si);
                return;
            }
            case StepKind::BindUniverse: {
                bindFromUniverse(s, l, si, 0);
                return;
            }
        }
    }

    void withContrib(double c, size_t si) {
        contrib_ += c;
        exec(si + 1);
        contrib_ -= c;
    }

    void bindFromRows(const Step&, const Literal& l, size_t si) {
        const auto& rows = facts_.rows(l.pred);
        // Narrow with the positional index when some argument is fixed.
        int bestPos = -1;
        size_t bestN = rows.size();
        for (size_t i = 0; i < l.args.size(); ++i) {
            Sym fixed = termFixedValue(l.args[i]);
            if (fixed < 0) continue;
            size_t n = facts_.rowsMatching(l.pred, static_cast<int>(i), fixed).size();
            if (bestPos < 0 || n < bestN) {
                bestPos = static_cast<int>(i);
                bestN = n;
            }
        }
        auto tryRow = [&](std::span<const Sym> args, double value) {
            size_t touched = 0;
            bool ok = true;
            for (size_t i = 0; i < l.args.size() && ok; ++i) {
                const Term& t = l.args[i];
                Sym have = args[i];
                if (t.kind == TermKind::Constant) {
                    ok = t.constant == have;
                } else if (binding_[static_cast<size_t>(t.var)] >= 0) {
                    ok = binding_[static_cast<size_t>(t.var)] == have;
                } else {
                    binding_[static_cast<size_t>(t.var)] = have;
                    undo_.push_back(t.var);
                    ++touched;
                }
            }
            if (ok) withContrib(l.negated ? 1.0 - value : value, si);
            for (size_t k = 0; k < touched; ++k) {
                binding_[static_cast<size_t>(undo_.back())] = -1;
                undo_.pop_back();
            }
        };
        if (bestPos >= 0) {
            Sym fixed = termFixedValue(l.args[static_cast<size_t>(bestPos)]);
            for (int32_t idx : facts_.rowsMatching(l.pred, bestPos, fixed)) {
                const FactRow& r = rows[static_cast<size_t>(idx)];
                tryRow(r.args, r.value);
            }
        } else {
            for (const FactRow& r : rows) tryRow(r.args, r.value);
        }
        if (!prog_.schema[static_cast<size_t>(l.pred)].closed) {
            for (AtomId id : index_.positive[static_cast<size_t>(l.pred)]) {
                tryRow(interp_.atom(id).args, interp_.value(id));
            }
        }
    }

    void bindFromUniverse(const Step& s, const Literal& l, size_t si, size_t vi) {
        if (vi == s.bindVars.size()) {
            double v = atomValue(l);
            withContrib(l.negated ? 1.0 - v : v, si);
            return;
        }
        int var = s.bindVars[vi];
        for (Sym c : domainOf(var)) {
            binding_[static_cast<size_t>(var)] = c;
            bindFromUniverse(s, l, si, vi + 1);
            if (filtered_ && contrib_ >= 1.0) break;
        }
        binding_[static_cast<size_t>(var)] = -1;
    }

    Sym termFixedValue(const Term& t) const {
        if (t.kind == TermKind::Constant) return t.constant;
        if (t.kind == TermKind::Variable) return binding_[static_cast<size_t>(t.var)];
        return -1;
    }

    std::vector<Sym> termValues(const Term& t) const {
        switch (t.kind) {
            case TermKind::Constant: return {t.constant};
            case TermKind::Variable: return {binding_[static_cast<size_t>(t.var)]};
            case TermKind::PathApply: break;
        }
        std::vector<Sym> frontier{binding_[static_cast<size_t>(t.var)]};
        for (PredId rel : t.rels) {
            std::vector<Sym> next;
            const auto& rows = facts_.rows(rel);
            for (Sym e : frontier) {
                for (int32_t idx : facts_.rowsMatching(rel, 0, e)) {
                    const FactRow& r = rows[static_cast<size_t>(idx)];
                    if (r.value > 0.0) next.push_back(r.args[1]);
                }
            }
            std::sort(next.begin(), next.end());
            next.erase(std::unique(next.begin(), next.end()), next.end());
            frontier = std::move(next);
        }
        return frontier;
    }

    const Grounder& g_;
    const Program& prog_;
    const FactSet& facts_;
    const Clause& clause_;
    int clauseId_;
    bool filtered_;
    Interpretation& interp_;
    const AtomsByPred& index_;
    std::vector<Step> steps_;
    std::vector<Sym> binding_;
    std::vector<int> undo_;
    double contrib_ = 0.0;
    const std::function<void(const std::vector<Sym>&)>* sink_ = nullptr;
};

Grounder::Grounder(const Program& prog, const FactSet& facts, const SimilarityRegistry& sims,
                   GroundingOptions opts)
    : prog_(prog), facts_(facts), sims_(sims), opts_(opts), clauses_(normalizeProgram(prog)) {
    if (!facts.finalized()) throw StoreError("fact set must be finalized before grounding");
}

/// Builds the ground rule for one complete binding. When filterUnsat is set
/// and the clause is soft, bindings already satisfied come back empty and
/// nothing is registered.
static std::optional<GroundRule> assemble(const Grounder& g, int clauseId,
                                          const std::vector<Sym>& binding, Interpretation& interp,
                                          bool filterUnsat) {
    const Program& prog = g.program();
    const FactSet& facts = g.facts();
    const Clause& clause = g.clauses()[static_cast<size_t>(clauseId)];

    // Peek pass: exact distance with unregistered atoms read as zero.
    AtomsByPred noIndex = AtomsByPred::empty(prog);
    JoinRun peek(g, clauseId, false, interp, noIndex);
    peek.seedBinding(binding);
    double contrib = 0.0;
    for (const Literal& l : clause.lits) {
        switch (l.kind) {
            case LiteralKind::Atom: {
                double v = peek.atomValue(l);
                contrib += l.negated ? 1.0 - v : v;
                break;
            }
            case LiteralKind::Builtin: {
                double v = peek.builtinValue(l);
                contrib += l.negated ? 1.0 - v : v;
                break;
            }
            case LiteralKind::SetSim: {
                double raw = peek.setRawPeek(l);
                double clamped = raw < 1.0 ? raw : 1.0;
                contrib += l.negated ? 1.0 - clamped : clamped;
                break;
            }
            case LiteralKind::Guard:
                break;
        }
    }
    double distance = 1.0 - contrib;
    if (filterUnsat && !clause.hard && distance <= 0.0) return std::nullopt;

    GroundRule r;
    r.kind = clause.hard ? GroundKind::Hard : GroundKind::Soft;
    r.clauseId = clauseId;
    r.softIndex = clause.softIndex;
    r.weight = clause.weight;
    r.binding = binding;
    r.linear.constant = 1.0;

    for (const Literal& l : clause.lits) {
        switch (l.kind) {
            case LiteralKind::Atom: {
                GroundAtom a;
                a.pred = l.pred;
                for (const Term& t : l.args) {
                    a.args.push_back(t.kind == TermKind::Constant
                                         ? t.constant
                                         : binding[static_cast<size_t>(t.var)]);
                }
                const PredicateDecl& d = prog.schema[static_cast<size_t>(l.pred)];
                bool constant = d.closed;
                double v = 0.0;
                if (d.closed) {
                    v = facts.closedValue(l.pred, a.args);
                } else {
                    AtomId id = interp.lookup(a);
                    if (id >= 0 && interp.role(id) == AtomRole::Evidence) {
                        constant = true;
                        v = interp.value(id);
                    }
                }
                if (constant) {
                    r.linear.constant -= l.negated ? 1.0 - v : v;
                } else {
                    AtomId id = interp.registerQuery(a);
                    if (l.negated) {
                        r.linear.constant -= 1.0;
                        r.linear.add(id, 1.0);
                    } else {
                        r.linear.add(id, -1.0);
                    }
                }
                break;
            }
            case LiteralKind::Builtin: {
                double v = peek.builtinValue(l);
                r.linear.constant -= l.negated ? 1.0 - v : v;
                break;
            }
            case LiteralKind::SetSim: {
                std::vector<Sym> left = materializeSet(prog, facts, l.left, binding);
                std::vector<Sym> right = materializeSet(prog, facts, l.right, binding);
                SetSimilarityExpression expr =
                    buildSetSimilarity(prog, facts, interp, l.pred, left, right,
                                       g.optsRef().setNormalizer);
                GroundSet gs;
                gs.sign = l.negated ? 1.0 : -1.0;
                if (l.negated) r.linear.constant -= 1.0;
                gs.expr = std::move(expr);
                r.sets.push_back(std::move(gs));
                break;
            }
            case LiteralKind::Guard:
                break;
        }
    }
    r.linear.normalize();

    // Groundings no query assignment can violate carry no constraint.
    double upper = r.linear.constant;
    for (const LinearTerm& t : r.linear.terms) upper += std::max(t.coeff, 0.0);
    for (const GroundSet& s : r.sets) {
        double hi = s.expr.base;
        double lo = s.expr.base;
        for (const auto& [id, w] : s.expr.queryTerms) {
            if (w > 0) hi += w;
            else lo += w;
        }
        upper += s.sign > 0 ? std::min(1.0, hi) : -std::min(1.0, lo);
    }
    if (upper <= truth::kBoundTolerance) return std::nullopt;

    for (const LinearTerm& t : r.linear.terms) r.atoms.push_back(t.atom);
    for (const GroundSet& s : r.sets) {
        for (const auto& [id, w] : s.expr.queryTerms) r.atoms.push_back(id);
    }
    std::sort(r.atoms.begin(), r.atoms.end());
    r.atoms.erase(std::unique(r.atoms.begin(), r.atoms.end()), r.atoms.end());
    return r;
}

std::vector<GroundRule> Grounder::groundClause(int clauseId, Interpretation& interp) const {
    std::vector<GroundRule> out;
    AtomsByPred none = AtomsByPred::empty(prog_);
    JoinRun join(*this, clauseId, false, interp, none);
    std::function<void(const std::vector<Sym>&)> sink = [&](const std::vector<Sym>& b) {
        auto r = assemble(*this, clauseId, b, interp, false);
        if (r) out.push_back(std::move(*r));
    };
    join.run(std::vector<Sym>(clauses_[static_cast<size_t>(clauseId)].varNames.size(), -1), 0.0, -1,
             sink);
    return out;
}

std::vector<GroundRule> Grounder::groundAll(Interpretation& interp) const {
    std::vector<GroundRule> out;
    for (int c = 0; c < numClauses(); ++c) {
        auto rs = groundClause(c, interp);
        for (auto& r : rs) out.push_back(std::move(r));
    }
    for (size_t e = 0; e < prog_.exclusivity.size(); ++e) {
        appendExclusiveRows(static_cast<int>(e), interp, out);
    }
    return out;
}

GroundRule Grounder::exclusiveRow(int exIdx, const std::vector<Sym>& groupKey,
                                  const Interpretation& interp) const {
    const ExclusivityDecl& decl = prog_.exclusivity[static_cast<size_t>(exIdx)];
    GroundRule r;
    r.kind = GroundKind::Exclusive;
    r.exclusivityId = exIdx;
    r.binding = groupKey;
    r.linear.constant = -1.0;
    for (AtomId id = 0; id < interp.size(); ++id) {
        const GroundAtom& a = interp.atom(id);
        if (a.pred != decl.pred) continue;
        bool match = true;
        size_t k = 0;
        for (size_t i = 0; i < decl.starred.size() && match; ++i) {
            if (!decl.starred[i]) match = a.args[i] == groupKey[k++];
        }
        if (!match) continue;
        if (interp.role(id) == AtomRole::Evidence) {
            r.linear.constant += interp.value(id);
        } else {
            r.linear.add(id, 1.0);
        }
    }
    r.linear.normalize();
    for (const LinearTerm& t : r.linear.terms) r.atoms.push_back(t.atom);
    return r;
}

void Grounder::appendExclusiveRows(int exIdx, const Interpretation& interp,
                                   std::vector<GroundRule>& out) const {
    const ExclusivityDecl& decl = prog_.exclusivity[static_cast<size_t>(exIdx)];
    std::set<std::vector<Sym>> groups;
    for (AtomId id = 0; id < interp.size(); ++id) {
        const GroundAtom& a = interp.atom(id);
        if (a.pred != decl.pred) continue;
        std::vector<Sym> key;
        for (size_t i = 0; i < decl.starred.size(); ++i) {
            if (!decl.starred[i]) key.push_back(a.args[i]);
        }
        groups.insert(std::move(key));
    }
    for (const auto& key : groups) out.push_back(exclusiveRow(exIdx, key, interp));
}

ActiveSet Grounder::initialActiveSet(Interpretation& interp) const {
    ActiveSet active;
    AtomsByPred none = AtomsByPred::empty(prog_);
    for (int c = 0; c < numClauses(); ++c) {
        const Clause& clause = clauses_[static_cast<size_t>(c)];
        if (clause.hard) continue;
        JoinRun join(*this, c, true, interp, none);
        std::function<void(const std::vector<Sym>&)> sink = [&](const std::vector<Sym>& b) {
            auto r = assemble(*this, c, b, interp, true);
            if (r) active.insert({c, b}, std::move(*r));
        };
        join.run(std::vector<Sym>(clause.varNames.size(), -1), 0.0, -1, sink);
    }
    // Hard rules over closed data only never see an activation trigger.
    for (int c = 0; c < numClauses(); ++c) {
        const Clause& clause = clauses_[static_cast<size_t>(c)];
        if (!clause.hard || hasOpenLiteral(clause)) continue;
        JoinRun join(*this, c, false, interp, none);
        std::function<void(const std::vector<Sym>&)> sink = [&](const std::vector<Sym>& b) {
            auto r = assemble(*this, c, b, interp, false);
            if (r) active.insert({c, b}, std::move(*r));
        };
        join.run(std::vector<Sym>(clause.varNames.size(), -1), 0.0, -1, sink);
    }
    // Hard rules a clause-negated closed literal drives ground from its rows.
    // Bindings outside those rows satisfy the clause identically. Hard rules
    // over open data only join in later through registered atoms.
    for (int c = 0; c < numClauses(); ++c) {
        const Clause& clause = clauses_[static_cast<size_t>(c)];
        if (!clause.hard || !hasOpenLiteral(clause)) continue;
        bool rowSeed = false;
        for (const Literal& l : clause.lits) {
            if (l.kind == LiteralKind::Atom && l.negated &&
                prog_.schema[static_cast<size_t>(l.pred)].closed) {
                rowSeed = true;
            }
        }
        if (!rowSeed) continue;
        JoinRun join(*this, c, false, interp, none);
        std::function<void(const std::vector<Sym>&)> sink = [&](const std::vector<Sym>& b) {
            if (active.find({c, b}) >= 0) return;
            auto r = assemble(*this, c, b, interp, false);
            if (r) active.insert({c, b}, std::move(*r));
        };
        join.run(std::vector<Sym>(clause.varNames.size(), -1), 0.0, -1, sink);
    }
    closeHard(active, interp, 0);
    return active;
}

bool Grounder::hasOpenLiteral(const Clause& clause) const {
    for (const Literal& l : clause.lits) {
        if (l.kind == LiteralKind::Atom &&
            !prog_.schema[static_cast<size_t>(l.pred)].closed) {
            return true;
        }
        if (l.kind == LiteralKind::SetSim &&
            !prog_.schema[static_cast<size_t>(l.pred)].closed) {
            return true;
        }
    }
    return false;
}

int Grounder::activateFor(ActiveSet& active, Interpretation& interp, AtomId atom,
                          const AtomsByPred& index) const {
    // Copy: assemble registers atoms and may reallocate interp storage.
    GroundAtom ga = interp.atom(atom);
    double av = interp.value(atom);
    int added = 0;
    for (int c = 0; c < numClauses(); ++c) {
        const Clause& clause = clauses_[static_cast<size_t>(c)];
        if (clause.hard) continue;
        bool setMatch = false;
        for (const Literal& l : clause.lits) {
            if (l.kind == LiteralKind::SetSim && l.pred == ga.pred) setMatch = true;
        }
        for (size_t li = 0; li < clause.lits.size(); ++li) {
            const Literal& l = clause.lits[li];
            if (l.kind != LiteralKind::Atom || l.pred != ga.pred) continue;
            std::vector<Sym> binding(clause.varNames.size(), -1);
            if (!unify(l, ga, binding)) continue;
            double pinContrib = l.negated ? 1.0 - av : av;
            JoinRun join(*this, c, true, interp, index);
            std::function<void(const std::vector<Sym>&)> sink = [&](const std::vector<Sym>& b) {
                if (active.find({c, b}) >= 0) return;
                auto r = assemble(*this, c, b, interp, true);
                if (r && active.insert({c, b}, std::move(*r)).second) ++added;
            };
            join.run(binding, pinContrib, static_cast<int>(li), sink);
        }
        if (setMatch) {
            JoinRun join(*this, c, true, interp, index);
            std::function<void(const std::vector<Sym>&)> sink = [&](const std::vector<Sym>& b) {
                if (active.find({c, b}) >= 0) return;
                auto r = assemble(*this, c, b, interp, true);
                if (r && active.insert({c, b}, std::move(*r)).second) ++added;
            };
            join.run(std::vector<Sym>(clause.varNames.size(), -1), 0.0, -1, sink);
        }
    }
    return added;
}

bool Grounder::unify(const Literal& l, const GroundAtom& atom, std::vector<Sym>& binding) {
    for (size_t i = 0; i < l.args.size(); ++i) {
        const Term& t = l.args[i];
        if (t.kind == TermKind::Constant) {
            if (t.constant != atom.args[i]) return false;
        } else {
            Sym& slot = binding[static_cast<size_t>(t.var)];
            if (slot >= 0 && slot != atom.args[i]) return false;
            slot = atom.args[i];
        }
    }
    return true;
}

int Grounder::closeHard(ActiveSet& active, Interpretation& interp, AtomId firstAtom) const {
    int added = 0;
    AtomsByPred none = AtomsByPred::empty(prog_);
    while (firstAtom < interp.size()) {
        AtomId waveEnd = interp.size();
        for (AtomId id = firstAtom; id < waveEnd; ++id) {
            // Copy: assemble may grow interp under this loop.
            GroundAtom ga = interp.atom(id);
            double av = interp.value(id);
            for (int c = 0; c < numClauses(); ++c) {
                const Clause& clause = clauses_[static_cast<size_t>(c)];
                if (!clause.hard) continue;
                bool setMatch = false;
                for (const Literal& l : clause.lits) {
                    if (l.kind == LiteralKind::SetSim && l.pred == ga.pred) setMatch = true;
                }
                for (size_t li = 0; li < clause.lits.size(); ++li) {
                    const Literal& l = clause.lits[li];
                    if (l.kind != LiteralKind::Atom || l.pred != ga.pred) continue;
                    std::vector<Sym> binding(clause.varNames.size(), -1);
                    if (!unify(l, ga, binding)) continue;
                    double pinContrib = l.negated ? 1.0 - av : av;
                    JoinRun join(*this, c, false, interp, none);
                    std::function<void(const std::vector<Sym>&)> sink =
                        [&](const std::vector<Sym>& b) {
                            if (active.find({c, b}) >= 0) return;
                            auto r = assemble(*this, c, b, interp, false);
                            if (r && active.insert({c, b}, std::move(*r)).second) ++added;
                        };
                    join.run(binding, pinContrib, static_cast<int>(li), sink);
                }
                if (setMatch) {
                    JoinRun join(*this, c, false, interp, none);
                    std::function<void(const std::vector<Sym>&)> sink =
                        [&](const std::vector<Sym>& b) {
                            if (active.find({c, b}) >= 0) return;
                            auto r = assemble(*this, c, b, interp, false);
                            if (r && active.insert({c, b}, std::move(*r)).second) ++added;
                        };
                    join.run(std::vector<Sym>(clause.varNames.size(), -1), 0.0, -1, sink);
                }
            }
            for (size_t e = 0; e < prog_.exclusivity.size(); ++e) {
                const ExclusivityDecl& decl = prog_.exclusivity[e];
                if (decl.pred != ga.pred) continue;
                std::vector<Sym> key;
                for (size_t i = 0; i < decl.starred.size(); ++i) {
                    if (!decl.starred[i]) key.push_back(ga.args[i]);
                }
                GroundKey gk{numClauses() + static_cast<int>(e), key};
                GroundRule row = exclusiveRow(static_cast<int>(e), key, interp);
                int32_t at = active.find(gk);
                if (at >= 0) {
                    active.replace(at, std::move(row));
                } else {
                    active.insert(std::move(gk), std::move(row));
                    ++added;
                }
            }
        }
        firstAtom = waveEnd;
    }
    return added;
}

} // namespace psl
