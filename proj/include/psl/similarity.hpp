#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "psl/store.hpp"

namespace psl {

/// Symmetric string similarity in [0, 1].
using SimilarityFn = std::function<double(std::string_view, std::string_view)>;

/// Edit-distance similarity on case-folded strings: 1 - d/maxlen.
/// Two empty strings compare as 1.
double levenshteinSimilarity(std::string_view a, std::string_view b);

/// Dice coefficient over character-bigram multisets, case-folded.
/// Strings without bigrams fall back to exact comparison.
double diceBigramSimilarity(std::string_view a, std::string_view b);

/// Cosine over sparse vectors written "token:weight token:weight".
/// Weights must be nonnegative; a zero vector compares as 0.
double cosineSparseSimilarity(std::string_view a, std::string_view b);

class SimilarityRegistry {
public:
    /// levenshtein, dice and cosine under those names.
    static SimilarityRegistry builtins();

    void add(const std::string& name, SimilarityFn fn);
    const SimilarityFn& get(const std::string& name) const; // DomainError when unknown
    bool has(const std::string& name) const { return fns_.count(name) != 0; }

private:
    std::map<std::string, SimilarityFn> fns_;
};

enum class SetNormalizer {
    SizeSum,  // divide pair similarities by |A| + |B|
    PairCount // divide by |A| * |B|
};

/// Grounded aggregate similarity between two entity sets: a constant from
/// evidence and closed data plus weighted query-atom terms. The reported
/// value clamps the raw affine form to 1.
struct SetSimilarityExpression {
    double base = 0.0;
    std::vector<std::pair<AtomId, double>> queryTerms;

    double raw(const Interpretation& interp) const {
        double s = base;
        for (const auto& [id, w] : queryTerms) s += w * interp.value(id);
        return s;
    }
    double value(const Interpretation& interp) const {
        double r = raw(interp);
        return r < 1.0 ? r : 1.0;
    }
};

/// Entities reached from anchor by following each path of expr through the
/// closed relation data; union over paths, deduplicated, sorted.
std::vector<Sym> materializeSet(const Program& prog, const FactSet& facts, const SetExpr& expr,
                                std::span<const Sym> binding);

/// Builds the grounded expression for member similarities between left and
/// right sets under pred. Query atoms for unseen pairs are registered in
/// interp. Empty sets yield a constant 0 expression.
SetSimilarityExpression buildSetSimilarity(const Program& prog, const FactSet& facts,
                                           Interpretation& interp, PredId pred,
                                           std::span<const Sym> left, std::span<const Sym> right,
                                           SetNormalizer norm);

} // namespace psl
