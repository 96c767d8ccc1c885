#include "psl/noise.hpp"

#include <algorithm>
#include <random>

#include "psl/error.hpp"

namespace psl {

namespace {

struct RowRef {
    PredId pred;
    int32_t row;
};

/// Fisher-Yates with modulo draws. std::shuffle delegates to a
/// distribution whose draw sequence the standard leaves open; this stays
/// identical everywhere.
void shuffleRefs(std::vector<RowRef>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

std::vector<RowRef> collect(const FactSet& facts, const std::vector<PredId>& preds) {
    std::vector<PredId> order = preds;
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    std::vector<RowRef> refs;
    for (PredId p : order) {
        const auto& rows = facts.rows(p);
        for (int32_t r = 0; r < static_cast<int32_t>(rows.size()); ++r) {
            refs.push_back({p, r});
        }
    }
    return refs;
}

} // namespace

FactSet generateNoise(Program& prog, const FactSet& facts, const NoiseSpec& spec) {
    if (spec.attributeNoise < 0.0 || spec.attributeNoise > 1.0 || spec.structuralNoise < 0.0 ||
        spec.structuralNoise > 1.0) {
        throw DomainError("noise fractions must lie in [0, 1]");
    }
    std::mt19937_64 rng(spec.seed);

    std::vector<RowRef> attrs = collect(facts, spec.attributePreds);
    std::vector<RowRef> rels = collect(facts, spec.relationPreds);
    size_t nAttr = static_cast<size_t>(spec.attributeNoise * static_cast<double>(attrs.size()));
    size_t nRel = static_cast<size_t>(spec.structuralNoise * static_cast<double>(rels.size()));

    shuffleRefs(attrs, rng);
    attrs.resize(std::min(nAttr, attrs.size()));
    std::sort(attrs.begin(), attrs.end(),
              [](const RowRef& a, const RowRef& b) {
                  return a.pred != b.pred ? a.pred < b.pred : a.row < b.row;
              });
    shuffleRefs(rels, rng);
    rels.resize(std::min(nRel, rels.size()));

    auto isChosen = [](const std::vector<RowRef>& chosen, PredId p, int32_t r) {
        for (const RowRef& c : chosen) {
            if (c.pred == p && c.row == r) return true;
        }
        return false;
    };

    // Replacement strings are drawn in canonical row order, independent of
    // the shuffle that picked the rows.
    std::unordered_map<int64_t, Sym> replacement;
    for (const RowRef& a : attrs) {
        const FactRow& row = facts.rows(a.pred)[static_cast<size_t>(a.row)];
        std::string_view old = prog.symbols.name(row.args.back());
        std::string fresh(old.size(), 'a');
        for (char& c : fresh) c = static_cast<char>('a' + rng() % 26);
        replacement[(static_cast<int64_t>(a.pred) << 32) | a.row] = prog.symbols.intern(fresh);
    }

    FactSet out(static_cast<int>(prog.schema.size()));
    for (PredId p = 0; p < static_cast<PredId>(prog.schema.size()); ++p) {
        const auto& rows = facts.rows(p);
        for (int32_t r = 0; r < static_cast<int32_t>(rows.size()); ++r) {
            if (isChosen(rels, p, r)) continue;
            FactRow row = rows[static_cast<size_t>(r)];
            auto it = replacement.find((static_cast<int64_t>(p) << 32) | r);
            if (it != replacement.end()) row.args.back() = it->second;
            out.addRow(prog, p, std::move(row.args), row.value, "noise");
        }
    }
    out.finalize(prog);
    return out;
}

} // namespace psl
