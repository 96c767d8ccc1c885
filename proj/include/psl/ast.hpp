#pragma once

#include <string>
#include <vector>

#include "psl/symbols.hpp"

namespace psl {

using PredId = int32_t;

/// Placeholder type name for undeclared argument positions.
inline constexpr const char* kUntyped = "_";

struct PredicateDecl {
    std::string name;
    int arity = 0;
    std::vector<std::string> argTypes; // size arity, kUntyped when unknown
    bool closed = true;
    bool declaredExplicitly = false;
    int line = 0;
};

enum class TermKind { Variable, Constant, PathApply };

/// Argument term. Variables index into the owning rule's varNames.
/// PathApply follows closed binary relations from a variable, e.g. X.name.
struct Term {
    TermKind kind = TermKind::Constant;
    int var = -1;
    Sym constant = -1;
    std::vector<PredId> rels;
};

/// One branch of a set expression: entities reached from anchorVar by
/// following rels in order.
struct SetPath {
    int anchorVar = -1;
    std::vector<PredId> rels;
};

/// Union of one or more paths, written {A.r1} ++ {A.r2}.
struct SetExpr {
    std::vector<SetPath> paths;
};

enum class LiteralKind {
    Atom,    // predicate applied to terms
    Builtin, // similarity function over attribute terms, fn[name](...)
    SetSim,  // aggregate similarity between two sets, setsim[pred](L, R)
    Guard    // inequality side condition, A != B
};

struct Literal {
    LiteralKind kind = LiteralKind::Atom;
    bool negated = false;
    PredId pred = -1;          // Atom: predicate; SetSim: member-pair predicate
    std::vector<Term> args;    // Atom, Builtin and Guard arguments
    std::string fn;            // Builtin: registered similarity function name
    SetExpr left, right;       // SetSim operands
    int line = 0, col = 0;
};

/// Weighted implication body => head, or a bare disjunction when body is
/// empty. Guards live in the body and never ground to literals.
struct Rule {
    std::vector<std::string> varNames;
    std::vector<Literal> body;
    std::vector<Literal> head;
    bool hard = false;
    double weight = 0.0;
    std::string weightText; // original spelling, kept for round trips
    int line = 0;
};

/// At most one true atom per group: for each binding of the non-starred
/// positions, values over the starred position sum to at most 1.
struct ExclusivityDecl {
    PredId pred = -1;
    std::vector<bool> starred;
    int line = 0;
};

struct Program {
    SymbolTable symbols;
    std::vector<PredicateDecl> schema;
    std::vector<Rule> softRules;
    std::vector<Rule> hardRules;
    std::vector<ExclusivityDecl> exclusivity;

    /// Returns -1 when no predicate has this name.
    PredId predId(std::string_view name) const {
        for (size_t i = 0; i < schema.size(); ++i) {
            if (schema[i].name == name) return static_cast<PredId>(i);
        }
        return -1;
    }
};

/// Disjunctive normal form of one rule: body literals flip sign, head
/// literals keep theirs. negated on each literal is the sign in the clause.
struct Clause {
    std::vector<std::string> varNames;
    std::vector<Literal> lits;
    std::vector<Literal> guards; // kind Guard, conjunctive filters
    bool hard = false;
    double weight = 0.0;
    int softIndex = -1; // position in Program::softRules, -1 for hard
    int hardIndex = -1; // position in Program::hardRules, -1 for soft
    int line = 0;
};

Clause normalizeToClause(const Rule& rule, int softIndex, int hardIndex);

/// All rules of the program in clause form, soft rules first in order.
std::vector<Clause> normalizeProgram(const Program& prog);

/// Structural checks beyond the grammar: arity agreement, guard placement,
/// set paths over closed binary relations, positive weights, exclusivity
/// over open predicates. Throws DomainError with rule line context.
void validateProgram(const Program& prog);

/// Renders the program back to rule-language text. parseProgram of the
/// output yields a structurally identical program.
std::string printProgram(const Program& prog);

/// Renders one rule (used in diagnostics and certificates).
std::string printRule(const Program& prog, const Rule& rule);

std::string printLiteral(const Program& prog, const Rule& rule, const Literal& lit);

} // namespace psl
