#include "psl/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "psl/error.hpp"
#include "psl/truth.hpp"

namespace psl {

namespace {

std::string fold(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace

double levenshteinSimilarity(std::string_view av, std::string_view bv) {
    std::string a = fold(av), b = fold(bv);
    if (a.empty() && b.empty()) return 1.0;
    const size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            int sub = prev[j - 1] + (a[i - 1] != b[j - 1] ? 1 : 0);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    double d = static_cast<double>(prev[m]);
    return 1.0 - d / static_cast<double>(std::max(n, m));
}

double diceBigramSimilarity(std::string_view av, std::string_view bv) {
    std::string a = fold(av), b = fold(bv);
    auto bigrams = [](const std::string& s) {
        std::vector<std::string> out;
        for (size_t i = 0; i + 1 < s.size(); ++i) out.push_back(s.substr(i, 2));
        std::sort(out.begin(), out.end());
        return out;
    };
    std::vector<std::string> ba = bigrams(a), bb = bigrams(b);
    if (ba.empty() || bb.empty()) return a == b ? 1.0 : 0.0;
    std::vector<std::string> common;
    std::set_intersection(ba.begin(), ba.end(), bb.begin(), bb.end(), std::back_inserter(common));
    return 2.0 * static_cast<double>(common.size()) /
           static_cast<double>(ba.size() + bb.size());
}

namespace {

std::vector<std::pair<std::string, double>> parseSparse(std::string_view s) {
    std::vector<std::pair<std::string, double>> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i >= s.size()) break;
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        std::string_view entry = s.substr(i, j - i);
        size_t colon = entry.rfind(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 == entry.size()) {
            throw DomainError("sparse vector entry must be token:weight, got '" + std::string(entry) + "'");
        }
        double w = 0.0;
        auto num = entry.substr(colon + 1);
        auto res = std::from_chars(num.data(), num.data() + num.size(), w);
        if (res.ec != std::errc() || res.ptr != num.data() + num.size()) {
            throw DomainError("bad weight in sparse vector entry '" + std::string(entry) + "'");
        }
        if (w < 0.0) {
            throw DomainError("negative weight in sparse vector entry '" + std::string(entry) + "'");
        }
        out.emplace_back(std::string(entry.substr(0, colon)), w);
        i = j;
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

double cosineSparseSimilarity(std::string_view av, std::string_view bv) {
    auto a = parseSparse(av), b = parseSparse(bv);
    double dot = 0.0, na = 0.0, nb = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j >= b.size() || (i < a.size() && a[i].first < b[j].first)) {
            na += a[i].second * a[i].second;
            ++i;
        } else if (i >= a.size() || b[j].first < a[i].first) {
            nb += b[j].second * b[j].second;
            ++j;
        } else {
            dot += a[i].second * b[j].second;
            na += a[i].second * a[i].second;
            nb += b[j].second * b[j].second;
            ++i;
            ++j;
        }
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

SimilarityRegistry SimilarityRegistry::builtins() {
    SimilarityRegistry r;
    r.add("levenshtein", [](std::string_view a, std::string_view b) {
        return levenshteinSimilarity(a, b);
    });
    r.add("dice", [](std::string_view a, std::string_view b) {
        return diceBigramSimilarity(a, b);
    });
    r.add("cosine", [](std::string_view a, std::string_view b) {
        return cosineSparseSimilarity(a, b);
    });
    return r;
}

void SimilarityRegistry::add(const std::string& name, SimilarityFn fn) {
    fns_[name] = std::move(fn);
}

const SimilarityFn& SimilarityRegistry::get(const std::string& name) const {
    auto it = fns_.find(name);
    if (it == fns_.end()) throw DomainError("unknown similarity function '" + name + "'");
    return it->second;
}

std::vector<Sym> materializeSet(const Program&, const FactSet& facts, const SetExpr& expr,
                                std::span<const Sym> binding) {
    std::set<Sym> members;
    for (const SetPath& p : expr.paths) {
        Sym anchor = binding[static_cast<size_t>(p.anchorVar)];
        if (anchor < 0) throw GroundingError("set anchor variable is unbound");
        std::vector<Sym> frontier{anchor};
        for (PredId rel : p.rels) {
            std::vector<Sym> nextFrontier;
            const auto& rs = facts.rows(rel);
            for (Sym e : frontier) {
                for (int32_t idx : facts.rowsMatching(rel, 0, e)) {
                    const FactRow& row = rs[static_cast<size_t>(idx)];
                    if (row.value > 0.0) nextFrontier.push_back(row.args[1]);
                }
            }
            std::sort(nextFrontier.begin(), nextFrontier.end());
            nextFrontier.erase(std::unique(nextFrontier.begin(), nextFrontier.end()),
                               nextFrontier.end());
            frontier = std::move(nextFrontier);
        }
        members.insert(frontier.begin(), frontier.end());
    }
    return std::vector<Sym>(members.begin(), members.end());
}

SetSimilarityExpression buildSetSimilarity(const Program& prog, const FactSet& facts,
                                           Interpretation& interp, PredId pred,
                                           std::span<const Sym> left, std::span<const Sym> right,
                                           SetNormalizer norm) {
    SetSimilarityExpression expr;
    if (left.empty() || right.empty()) return expr;
    double denom = norm == SetNormalizer::SizeSum
                       ? static_cast<double>(left.size() + right.size())
                       : static_cast<double>(left.size()) * static_cast<double>(right.size());
    double coeff = 1.0 / denom;
    const bool closed = prog.schema[static_cast<size_t>(pred)].closed;
    GroundAtom atom;
    atom.pred = pred;
    atom.args.resize(2);
    for (Sym a : left) {
        for (Sym b : right) {
            atom.args[0] = a;
            atom.args[1] = b;
            if (closed) {
                expr.base += coeff * facts.closedValue(pred, atom.args);
                continue;
            }
            AtomId id = interp.lookup(atom);
            if (id >= 0 && interp.role(id) == AtomRole::Evidence) {
                expr.base += coeff * interp.value(id);
            } else {
                expr.queryTerms.emplace_back(interp.registerQuery(atom), coeff);
            }
        }
    }
    return expr;
}

} // namespace psl
