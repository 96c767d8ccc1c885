#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "psl/ast.hpp"

namespace psl {

/// Dense id of a registered ground atom inside an Interpretation.
using AtomId = int32_t;

struct GroundAtom {
    PredId pred = -1;
    std::vector<Sym> args;

    bool operator==(const GroundAtom& o) const { return pred == o.pred && args == o.args; }
};

struct GroundAtomHash {
    size_t operator()(const GroundAtom& a) const {
        uint64_t h = 1469598103934665603ull ^ static_cast<uint64_t>(a.pred);
        for (Sym s : a.args) {
            h ^= static_cast<uint64_t>(static_cast<uint32_t>(s));
            h *= 1099511628211ull;
        }
        return static_cast<size_t>(h);
    }
};

struct FactRow {
    std::vector<Sym> args;
    double value = 1.0;
};

/// Loaded ground data, closed-world for closed predicates. Rows for open
/// predicates are evidence and seed an Interpretation. Immutable after
/// finalize.
class FactSet {
public:
    FactSet() = default;
    explicit FactSet(int numPreds) { rows_.resize(static_cast<size_t>(numPreds)); }

    /// Adds one row. Duplicate keys with equal values collapse, conflicting
    /// values raise StoreError. origin names the source for diagnostics.
    void addRow(const Program& prog, PredId pred, std::vector<Sym> args, double value,
                const std::string& origin);

    /// Sorts rows, builds positional indexes and type universes. Required
    /// before lookups. May be called again after further addRow calls.
    void finalize(const Program& prog);

    const std::vector<FactRow>& rows(PredId pred) const { return rows_.at(static_cast<size_t>(pred)); }

    /// Closed-world truth of a closed-predicate atom: stored value, else 0.
    double closedValue(PredId pred, std::span<const Sym> args) const;

    bool hasRow(PredId pred, std::span<const Sym> args) const;

    /// Stored value of an open-predicate evidence row; -1 when absent.
    double evidenceValue(PredId pred, std::span<const Sym> args) const;

    /// Row indices whose argument at pos equals c. Empty vector when none.
    const std::vector<int32_t>& rowsMatching(PredId pred, int pos, Sym c) const;

    /// Constants seen at positions of the given declared type, sorted.
    const std::vector<Sym>& universe(const std::string& type) const;

    /// Every constant seen anywhere, sorted.
    const std::vector<Sym>& allConstants() const { return allConstants_; }

    int64_t totalRows() const;
    bool finalized() const { return finalized_; }

private:
    struct ArgsHash {
        size_t operator()(const std::vector<Sym>& v) const {
            uint64_t h = 1469598103934665603ull;
            for (Sym s : v) {
                h ^= static_cast<uint64_t>(static_cast<uint32_t>(s));
                h *= 1099511628211ull;
            }
            return static_cast<size_t>(h);
        }
    };

    std::vector<std::vector<FactRow>> rows_;
    std::vector<std::unordered_map<std::vector<Sym>, double, ArgsHash>> byArgs_;
    std::vector<std::unordered_map<int64_t, std::vector<int32_t>>> posIndex_;
    std::unordered_map<std::string, std::vector<Sym>> universes_;
    std::vector<Sym> allConstants_;
    std::vector<int32_t> empty_;
    bool finalized_ = false;
};

enum class AtomRole : uint8_t { Evidence, Query };

/// Truth assignment over registered ground atoms of open predicates.
/// Evidence atoms are fixed inputs, query atoms are decision variables.
/// The two sets never overlap.
class Interpretation {
public:
    AtomId lookup(const GroundAtom& a) const {
        auto it = index_.find(a);
        return it == index_.end() ? AtomId(-1) : it->second;
    }

    AtomId addEvidence(const GroundAtom& a, double value);

    /// Registers a query atom at value 0, or returns the existing id.
    /// Registering over an evidence atom raises StoreError.
    AtomId registerQuery(const GroundAtom& a);

    double value(AtomId id) const { return values_[static_cast<size_t>(id)]; }
    void setValue(AtomId id, double v);
    AtomRole role(AtomId id) const { return roles_[static_cast<size_t>(id)]; }
    const GroundAtom& atom(AtomId id) const { return atoms_[static_cast<size_t>(id)]; }
    int32_t size() const { return static_cast<int32_t>(atoms_.size()); }

    std::vector<AtomId> queryAtoms() const;
    int32_t queryCount() const;

private:
    std::vector<GroundAtom> atoms_;
    std::vector<double> values_;
    std::vector<AtomRole> roles_;
    std::unordered_map<GroundAtom, AtomId, GroundAtomHash> index_;
};

/// Evidence-only interpretation from the open-predicate rows of facts.
Interpretation evidenceInterpretation(const Program& prog, const FactSet& facts);

/// Truth of any ground atom: closed predicates resolve against facts,
/// open ones against the interpretation. Unregistered open atoms raise
/// StoreError.
double getTruth(const Program& prog, const FactSet& facts, const Interpretation& interp,
                const GroundAtom& atom);

/// Same as getTruth but unregistered open atoms read as 0.
double truthOrZero(const Program& prog, const FactSet& facts, const Interpretation& interp,
                   const GroundAtom& atom);

/// Rows of pred matching a pattern; negative entries are wildcards. Uses
/// the positional index when any position is bound.
std::vector<FactRow> matchRows(const FactSet& facts, PredId pred, std::span<const Sym> pattern);

/// Canonical text form "pred(a, b)" used in messages and sorted output.
std::string formatAtom(const Program& prog, const GroundAtom& atom);

} // namespace psl
