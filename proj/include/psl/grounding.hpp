#pragma once

#include <unordered_map>
#include <unordered_set>

#include "psl/similarity.hpp"

namespace psl {

struct LinearTerm {
    AtomId atom = -1;
    double coeff = 0.0;
};

/// Affine form constant + sum coeff * value(atom), terms sorted by atom id
/// with one entry per atom.
struct LinearExpr {
    double constant = 0.0;
    std::vector<LinearTerm> terms;

    void add(AtomId atom, double coeff);
    void normalize();
    double eval(const Interpretation& interp) const;
};

/// One set-similarity occurrence inside a ground rule. sign is -1 for a
/// positive clause occurrence and +1 for a negated one; the distance gains
/// sign * min(1, raw).
struct GroundSet {
    SetSimilarityExpression expr;
    double sign = -1.0;
};

enum class GroundKind : uint8_t { Soft, Hard, Exclusive };

/// One active ground constraint. Distance from satisfaction is
/// max(0, linear + sum over sets of sign * min(1, raw)).
struct GroundRule {
    GroundKind kind = GroundKind::Soft;
    int clauseId = -1;      // index into Grounder::clauses(), -1 for exclusivity rows
    int exclusivityId = -1;
    int softIndex = -1;     // position in Program::softRules, -1 otherwise
    double weight = 0.0;
    LinearExpr linear;
    std::vector<GroundSet> sets;
    std::vector<Sym> binding; // clause variable assignment, identity within clauseId
    std::vector<AtomId> atoms; // query atoms involved, sorted unique

    double distanceAt(const Interpretation& interp) const;
};

struct GroundKey {
    int owner = -1; // clause id, or numClauses + exclusivity id
    std::vector<Sym> binding;

    bool operator==(const GroundKey& o) const { return owner == o.owner && binding == o.binding; }
};

struct GroundKeyHash {
    size_t operator()(const GroundKey& k) const {
        uint64_t h = 1469598103934665603ull ^ static_cast<uint64_t>(k.owner);
        for (Sym s : k.binding) {
            h ^= static_cast<uint64_t>(static_cast<uint32_t>(s));
            h *= 1099511628211ull;
        }
        return static_cast<size_t>(h);
    }
};

/// Grows monotonically; inserting an existing key is a no-op, so activation
/// is idempotent. Exclusivity rows are replaced in place when their group
/// gains atoms.
class ActiveSet {
public:
    const std::vector<GroundRule>& rules() const { return rules_; }
    int32_t size() const { return static_cast<int32_t>(rules_.size()); }

    int32_t find(const GroundKey& k) const;
    /// Returns {index, true} when newly inserted, {existing, false} otherwise.
    std::pair<int32_t, bool> insert(GroundKey key, GroundRule&& r);
    void replace(int32_t idx, GroundRule&& r);

    /// Indices of rules whose atom list contains the given atom.
    const std::vector<int32_t>& rulesOf(AtomId atom) const;

    /// Bumped on every insert or replace.
    int64_t version() const { return version_; }

private:
    void indexAtoms(int32_t idx, const GroundRule& r);

    std::vector<GroundRule> rules_;
    std::unordered_map<GroundKey, int32_t, GroundKeyHash> index_;
    std::vector<std::vector<int32_t>> byAtom_;
    std::vector<int32_t> empty_;
    int64_t version_ = 0;
};

/// Query atoms with positive value, bucketed by predicate. Rebuilt once per
/// activation sweep so negated-literal joins stay linear in relevant atoms.
struct AtomsByPred {
    std::vector<std::vector<AtomId>> positive;

    static AtomsByPred build(const Program& prog, const Interpretation& interp);
    static AtomsByPred empty(const Program& prog);
};

struct GroundingOptions {
    SetNormalizer setNormalizer = SetNormalizer::SizeSum;
};

class JoinRun;

/// Grounds clauses of a program against fact data. Query atoms are
/// registered in the interpretation as groundings touch them.
class Grounder {
public:
    Grounder(const Program& prog, const FactSet& facts, const SimilarityRegistry& sims,
             GroundingOptions opts = {});

    const std::vector<Clause>& clauses() const { return clauses_; }
    const Program& program() const { return prog_; }
    const FactSet& facts() const { return facts_; }

    /// Complete enumeration of one clause. Exhaustive over type universes
    /// for variables no closed literal binds; such a variable without a
    /// declared type raises GroundingError naming it.
    std::vector<GroundRule> groundClause(int clauseId, Interpretation& interp) const;

    /// Complete enumeration of all clauses, soft then hard, plus
    /// exclusivity rows over every registered atom.
    std::vector<GroundRule> groundAll(Interpretation& interp) const;

    /// Soft groundings unsatisfied at the current interpretation (query
    /// atoms all zero initially), plus hard closure over the atoms that
    /// registers.
    ActiveSet initialActiveSet(Interpretation& interp) const;

    /// Grounds every soft clause containing the given atom, pinned at each
    /// matching literal; unsatisfied groundings join the active set.
    /// Returns how many rules were added.
    int activateFor(ActiveSet& active, Interpretation& interp, AtomId atom,
                    const AtomsByPred& index) const;

    /// Hard-rule and exclusivity closure over atoms with id >= firstAtom.
    /// Follows atoms registered by its own groundings to a fixpoint.
    int closeHard(ActiveSet& active, Interpretation& interp, AtomId firstAtom) const;

    int numClauses() const { return static_cast<int>(clauses_.size()); }
    const GroundingOptions& optsRef() const { return opts_; }

private:
    friend class JoinRun;

    GroundRule exclusiveRow(int exIdx, const std::vector<Sym>& groupKey,
                            const Interpretation& interp) const;
    void appendExclusiveRows(int exIdx, const Interpretation& interp,
                             std::vector<GroundRule>& out) const;
    bool hasOpenLiteral(const Clause& clause) const;
    static bool unify(const Literal& l, const GroundAtom& atom, std::vector<Sym>& binding);

    const Program& prog_;
    const FactSet& facts_;
    const SimilarityRegistry& sims_;
    GroundingOptions opts_;
    std::vector<Clause> clauses_;
};

} // namespace psl
