#include "psl/store.hpp"

#include <algorithm>
#include <set>

#include "psl/truth.hpp"

namespace psl {

namespace {
int64_t posKey(int pos, Sym c) {
    return (static_cast<int64_t>(pos) << 32) | static_cast<uint32_t>(c);
}
} // namespace

void FactSet::addRow(const Program& prog, PredId pred, std::vector<Sym> args, double value,
                     const std::string& origin) {
    if (pred < 0 || static_cast<size_t>(pred) >= prog.schema.size()) {
        throw StoreError("unknown predicate id in " + origin);
    }
    if (rows_.size() < prog.schema.size()) rows_.resize(prog.schema.size());
    const PredicateDecl& d = prog.schema[static_cast<size_t>(pred)];
    if (static_cast<int>(args.size()) != d.arity) {
        throw StoreError("row for " + d.name + " has " + std::to_string(args.size()) +
                         " arguments, expected " + std::to_string(d.arity) + " (" + origin + ")");
    }
    double v = 0.0;
    try {
        v = truth::checked(value, "fact value");
    } catch (const DomainError& e) {
        throw StoreError(std::string(e.what()) + " for " + d.name + " (" + origin + ")");
    }
    if (byArgs_.size() < rows_.size()) byArgs_.resize(rows_.size());
    auto& keyMap = byArgs_[static_cast<size_t>(pred)];
    auto it = keyMap.find(args);
    if (it != keyMap.end()) {
        if (it->second != v) {
            throw StoreError("conflicting values for a " + d.name + " row (" + origin + ")");
        }
        return;
    }
    keyMap.emplace(args, v);
    rows_[static_cast<size_t>(pred)].push_back({std::move(args), v});
    finalized_ = false;
}

void FactSet::finalize(const Program& prog) {
    if (rows_.size() < prog.schema.size()) rows_.resize(prog.schema.size());
    if (byArgs_.size() < rows_.size()) byArgs_.resize(rows_.size());
    posIndex_.assign(rows_.size(), {});
    universes_.clear();

    std::set<Sym> all;
    std::unordered_map<std::string, std::set<Sym>> perType;

    auto note = [&](const std::string& type, Sym c) {
        all.insert(c);
        if (type != kUntyped) perType[type].insert(c);
    };

    for (size_t p = 0; p < rows_.size(); ++p) {
        auto& rs = rows_[p];
        std::sort(rs.begin(), rs.end(),
                  [](const FactRow& a, const FactRow& b) { return a.args < b.args; });
        const PredicateDecl& d = prog.schema[p];
        for (int32_t i = 0; i < static_cast<int32_t>(rs.size()); ++i) {
            for (int pos = 0; pos < d.arity; ++pos) {
                Sym c = rs[static_cast<size_t>(i)].args[static_cast<size_t>(pos)];
                posIndex_[p][posKey(pos, c)].push_back(i);
                note(d.argTypes[static_cast<size_t>(pos)], c);
            }
        }
    }

    // Constants written in rules take part in type universes as well.
    auto noteRules = [&](const std::vector<Rule>& rules) {
        for (const Rule& r : rules) {
            auto scan = [&](const Literal& l) {
                if (l.kind != LiteralKind::Atom) return;
                const PredicateDecl& d = prog.schema[static_cast<size_t>(l.pred)];
                for (size_t i = 0; i < l.args.size(); ++i) {
                    if (l.args[i].kind == TermKind::Constant) {
                        note(d.argTypes[i], l.args[i].constant);
                    }
                }
            };
            for (const Literal& l : r.body) scan(l);
            for (const Literal& l : r.head) scan(l);
        }
    };
    noteRules(prog.softRules);
    noteRules(prog.hardRules);

    allConstants_.assign(all.begin(), all.end());
    for (auto& [type, syms] : perType) {
        universes_[type].assign(syms.begin(), syms.end());
    }
    finalized_ = true;
}

double FactSet::closedValue(PredId pred, std::span<const Sym> args) const {
    if (static_cast<size_t>(pred) >= byArgs_.size()) return 0.0;
    const auto& m = byArgs_[static_cast<size_t>(pred)];
    std::vector<Sym> key(args.begin(), args.end());
    auto it = m.find(key);
    return it == m.end() ? 0.0 : it->second;
}

bool FactSet::hasRow(PredId pred, std::span<const Sym> args) const {
    if (static_cast<size_t>(pred) >= byArgs_.size()) return false;
    const auto& m = byArgs_[static_cast<size_t>(pred)];
    return m.find(std::vector<Sym>(args.begin(), args.end())) != m.end();
}

double FactSet::evidenceValue(PredId pred, std::span<const Sym> args) const {
    if (static_cast<size_t>(pred) >= byArgs_.size()) return -1.0;
    const auto& m = byArgs_[static_cast<size_t>(pred)];
    auto it = m.find(std::vector<Sym>(args.begin(), args.end()));
    return it == m.end() ? -1.0 : it->second;
}

const std::vector<int32_t>& FactSet::rowsMatching(PredId pred, int pos, Sym c) const {
    if (static_cast<size_t>(pred) >= posIndex_.size()) return empty_;
    const auto& m = posIndex_[static_cast<size_t>(pred)];
    auto it = m.find(posKey(pos, c));
    return it == m.end() ? empty_ : it->second;
}

const std::vector<Sym>& FactSet::universe(const std::string& type) const {
    static const std::vector<Sym> none;
    auto it = universes_.find(type);
    return it == universes_.end() ? none : it->second;
}

int64_t FactSet::totalRows() const {
    int64_t n = 0;
    for (const auto& rs : rows_) n += static_cast<int64_t>(rs.size());
    return n;
}

AtomId Interpretation::addEvidence(const GroundAtom& a, double value) {
    double v = truth::checked(value, "evidence value");
    auto it = index_.find(a);
    if (it != index_.end()) {
        AtomId id = it->second;
        if (roles_[static_cast<size_t>(id)] == AtomRole::Query) {
            throw StoreError("atom already registered as a query atom");
        }
        if (values_[static_cast<size_t>(id)] != v) {
            throw StoreError("conflicting evidence values for one atom");
        }
        return id;
    }
    AtomId id = static_cast<AtomId>(atoms_.size());
    atoms_.push_back(a);
    values_.push_back(v);
    roles_.push_back(AtomRole::Evidence);
    index_.emplace(atoms_.back(), id);
    return id;
}

AtomId Interpretation::registerQuery(const GroundAtom& a) {
    auto it = index_.find(a);
    if (it != index_.end()) {
        AtomId id = it->second;
        if (roles_[static_cast<size_t>(id)] == AtomRole::Evidence) {
            throw StoreError("atom already present as evidence");
        }
        return id;
    }
    AtomId id = static_cast<AtomId>(atoms_.size());
    atoms_.push_back(a);
    values_.push_back(0.0);
    roles_.push_back(AtomRole::Query);
    index_.emplace(atoms_.back(), id);
    return id;
}

void Interpretation::setValue(AtomId id, double v) {
    values_[static_cast<size_t>(id)] = truth::checked(v, "interpretation value");
}

std::vector<AtomId> Interpretation::queryAtoms() const {
    std::vector<AtomId> out;
    for (AtomId i = 0; i < size(); ++i) {
        if (roles_[static_cast<size_t>(i)] == AtomRole::Query) out.push_back(i);
    }
    return out;
}

int32_t Interpretation::queryCount() const {
    int32_t n = 0;
    for (AtomRole r : roles_) n += (r == AtomRole::Query) ? 1 : 0;
    return n;
}

Interpretation evidenceInterpretation(const Program& prog, const FactSet& facts) {
    Interpretation interp;
    for (size_t p = 0; p < prog.schema.size(); ++p) {
        if (prog.schema[p].closed) continue;
        for (const FactRow& r : facts.rows(static_cast<PredId>(p))) {
            interp.addEvidence({static_cast<PredId>(p), r.args}, r.value);
        }
    }
    return interp;
}

double getTruth(const Program& prog, const FactSet& facts, const Interpretation& interp,
                const GroundAtom& atom) {
    const PredicateDecl& d = prog.schema.at(static_cast<size_t>(atom.pred));
    if (d.closed) return facts.closedValue(atom.pred, atom.args);
    AtomId id = interp.lookup(atom);
    if (id < 0) {
        throw StoreError("atom " + formatAtom(prog, atom) + " is not registered");
    }
    return interp.value(id);
}

double truthOrZero(const Program& prog, const FactSet& facts, const Interpretation& interp,
                   const GroundAtom& atom) {
    const PredicateDecl& d = prog.schema.at(static_cast<size_t>(atom.pred));
    if (d.closed) return facts.closedValue(atom.pred, atom.args);
    AtomId id = interp.lookup(atom);
    return id < 0 ? 0.0 : interp.value(id);
}

std::vector<FactRow> matchRows(const FactSet& facts, PredId pred, std::span<const Sym> pattern) {
    const std::vector<FactRow>& all = facts.rows(pred);
    auto matches = [&](const FactRow& r) {
        for (size_t i = 0; i < pattern.size(); ++i) {
            if (pattern[i] >= 0 && r.args[i] != pattern[i]) return false;
        }
        return true;
    };
    std::vector<FactRow> out;
    int bound = -1;
    for (size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] >= 0) {
            bound = static_cast<int>(i);
            break;
        }
    }
    if (bound < 0) return all;
    for (int32_t idx : facts.rowsMatching(pred, bound, pattern[static_cast<size_t>(bound)])) {
        const FactRow& r = all[static_cast<size_t>(idx)];
        if (matches(r)) out.push_back(r);
    }
    return out;
}

std::string formatAtom(const Program& prog, const GroundAtom& atom) {
    std::string out = prog.schema.at(static_cast<size_t>(atom.pred)).name + "(";
    for (size_t i = 0; i < atom.args.size(); ++i) {
        if (i) out += ", ";
        out += prog.symbols.name(atom.args[i]);
    }
    out += ")";
    return out;
}

} // namespace psl
