#include "psl/ast.hpp"

#include <cctype>
#include <sstream>

#include "psl/error.hpp"

namespace psl {

Clause normalizeToClause(const Rule& rule, int softIndex, int hardIndex) {
    Clause c;
    c.varNames = rule.varNames;
    c.hard = rule.hard;
    c.weight = rule.weight;
    c.softIndex = softIndex;
    c.hardIndex = hardIndex;
    c.line = rule.line;
    for (const Literal& l : rule.body) {
        if (l.kind == LiteralKind::Guard) {
            c.guards.push_back(l);
            continue;
        }
        Literal flipped = l;
        flipped.negated = !l.negated;
        c.lits.push_back(std::move(flipped));
    }
    for (const Literal& l : rule.head) c.lits.push_back(l);
    return c;
}

std::vector<Clause> normalizeProgram(const Program& prog) {
    std::vector<Clause> out;
    out.reserve(prog.softRules.size() + prog.hardRules.size());
    for (size_t i = 0; i < prog.softRules.size(); ++i) {
        out.push_back(normalizeToClause(prog.softRules[i], static_cast<int>(i), -1));
    }
    for (size_t i = 0; i < prog.hardRules.size(); ++i) {
        out.push_back(normalizeToClause(prog.hardRules[i], -1, static_cast<int>(i)));
    }
    return out;
}

namespace {

[[noreturn]] void bad(const std::string& msg, int line) {
    throw DomainError(msg + " (rule at line " + std::to_string(line) + ")");
}

void checkPathRels(const Program& prog, const std::vector<PredId>& rels, int line) {
    for (PredId p : rels) {
        const PredicateDecl& d = prog.schema[static_cast<size_t>(p)];
        if (!d.closed || d.arity != 2) {
            bad("path relation " + d.name + " must be a closed binary predicate", line);
        }
    }
}

void checkRule(const Program& prog, const Rule& r) {
    if (r.head.empty()) bad("rule has no head literals", r.line);
    std::vector<bool> bindable(r.varNames.size(), false);
    auto markTerm = [&](const Term& t) {
        if (t.kind == TermKind::Variable || t.kind == TermKind::PathApply) {
            bindable[static_cast<size_t>(t.var)] = true;
        }
        if (t.kind == TermKind::PathApply) checkPathRels(prog, t.rels, r.line);
    };
    auto checkLit = [&](const Literal& l, bool inHead) {
        switch (l.kind) {
            case LiteralKind::Guard:
                if (inHead) bad("guard in rule head", r.line);
                for (const Term& t : l.args) {
                    if (t.kind == TermKind::PathApply) checkPathRels(prog, t.rels, r.line);
                }
                break;
            case LiteralKind::Atom:
                for (const Term& t : l.args) markTerm(t);
                break;
            case LiteralKind::Builtin:
                if (l.args.size() != 2) bad("similarity function " + l.fn + " takes two arguments", r.line);
                for (const Term& t : l.args) markTerm(t);
                break;
            case LiteralKind::SetSim: {
                const PredicateDecl& d = prog.schema[static_cast<size_t>(l.pred)];
                if (d.arity != 2) bad("set member predicate " + d.name + " must be binary", r.line);
                for (const SetExpr* e : {&l.left, &l.right}) {
                    for (const SetPath& p : e->paths) {
                        checkPathRels(prog, p.rels, r.line);
                        bindable[static_cast<size_t>(p.anchorVar)] = true;
                    }
                }
                break;
            }
        }
    };
    for (const Literal& l : r.body) checkLit(l, false);
    for (const Literal& l : r.head) checkLit(l, true);
    for (size_t v = 0; v < r.varNames.size(); ++v) {
        if (!bindable[v]) {
            bad("variable " + r.varNames[v] + " appears only in guards", r.line);
        }
    }
    if (!r.hard && !(r.weight > 0.0)) bad("soft rule weight must be positive", r.line);
}

} // namespace

void validateProgram(const Program& prog) {
    for (const Rule& r : prog.softRules) checkRule(prog, r);
    for (const Rule& r : prog.hardRules) checkRule(prog, r);
    for (const ExclusivityDecl& e : prog.exclusivity) {
        const PredicateDecl& d = prog.schema[static_cast<size_t>(e.pred)];
        if (d.closed) {
            throw DomainError("exclusivity constraint on closed predicate " + d.name +
                              " (line " + std::to_string(e.line) + ")");
        }
        if (static_cast<int>(e.starred.size()) != d.arity) {
            throw DomainError("exclusivity arity mismatch for " + d.name);
        }
    }
}

namespace {

bool bareSafe(const std::string& s) {
    if (s.empty()) return false;
    char c0 = s[0];
    if (std::islower(static_cast<unsigned char>(c0)) || c0 == '_') {
        for (char c : s) {
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
        }
        return s != "open" && s != "closed" && s != "fn" && s != "setsim";
    }
    if (std::isdigit(static_cast<unsigned char>(c0))) {
        // Must survive the number lexer unchanged.
        size_t i = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i < s.size() && s[i] == '.') {
            ++i;
            if (i == s.size()) return false;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
        return i == s.size();
    }
    return false;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string constText(const Program& prog, Sym c) {
    const std::string& s = prog.symbols.name(c);
    return bareSafe(s) ? s : quoted(s);
}

std::string termText(const Program& prog, const Rule& rule, const Term& t) {
    switch (t.kind) {
        case TermKind::Constant:
            return constText(prog, t.constant);
        case TermKind::Variable:
            return rule.varNames[static_cast<size_t>(t.var)];
        case TermKind::PathApply: {
            std::string out = rule.varNames[static_cast<size_t>(t.var)];
            for (PredId p : t.rels) out += "." + prog.schema[static_cast<size_t>(p)].name;
            return out;
        }
    }
    return "?";
}

std::string setText(const Program& prog, const Rule& rule, const SetExpr& e) {
    std::string out;
    for (size_t i = 0; i < e.paths.size(); ++i) {
        if (i) out += " ++ ";
        out += "{" + rule.varNames[static_cast<size_t>(e.paths[i].anchorVar)];
        for (PredId p : e.paths[i].rels) out += "." + prog.schema[static_cast<size_t>(p)].name;
        out += "}";
    }
    return out;
}

std::string weightText(const Rule& r) {
    if (!r.weightText.empty()) return r.weightText;
    std::ostringstream os;
    os << r.weight;
    return os.str();
}

} // namespace

std::string printLiteral(const Program& prog, const Rule& rule, const Literal& lit) {
    std::string out = lit.negated ? "~" : "";
    switch (lit.kind) {
        case LiteralKind::Guard:
            return termText(prog, rule, lit.args[0]) + " != " + termText(prog, rule, lit.args[1]);
        case LiteralKind::Atom: {
            out += prog.schema[static_cast<size_t>(lit.pred)].name + "(";
            for (size_t i = 0; i < lit.args.size(); ++i) {
                if (i) out += ", ";
                out += termText(prog, rule, lit.args[i]);
            }
            out += ")";
            return out;
        }
        case LiteralKind::Builtin: {
            out += "fn[" + lit.fn + "](";
            for (size_t i = 0; i < lit.args.size(); ++i) {
                if (i) out += ", ";
                out += termText(prog, rule, lit.args[i]);
            }
            out += ")";
            return out;
        }
        case LiteralKind::SetSim:
            out += "setsim[" + prog.schema[static_cast<size_t>(lit.pred)].name + "](" +
                   setText(prog, rule, lit.left) + ", " + setText(prog, rule, lit.right) + ")";
            return out;
    }
    return out;
}

std::string printRule(const Program& prog, const Rule& rule) {
    std::string out = rule.hard ? "HARD" : weightText(rule);
    out += ": ";
    for (size_t i = 0; i < rule.body.size(); ++i) {
        if (i) out += " & ";
        out += printLiteral(prog, rule, rule.body[i]);
    }
    if (!rule.body.empty()) out += " => ";
    for (size_t i = 0; i < rule.head.size(); ++i) {
        if (i) out += " | ";
        out += printLiteral(prog, rule, rule.head[i]);
    }
    out += ".";
    return out;
}

std::string printProgram(const Program& prog) {
    std::ostringstream os;
    for (const PredicateDecl& d : prog.schema) {
        if (!d.declaredExplicitly) continue;
        os << (d.closed ? "closed " : "open ") << d.name;
        bool typed = false;
        for (const std::string& t : d.argTypes) typed = typed || t != kUntyped;
        if (typed) {
            os << "(";
            for (int i = 0; i < d.arity; ++i) os << (i ? ", " : "") << d.argTypes[static_cast<size_t>(i)];
            os << ")";
        } else {
            os << "/" << d.arity;
        }
        os << ".\n";
    }
    for (const ExclusivityDecl& e : prog.exclusivity) {
        os << "EXCLUSIVE: " << prog.schema[static_cast<size_t>(e.pred)].name << "(";
        int varOrd = 0;
        for (size_t i = 0; i < e.starred.size(); ++i) {
            if (i) os << ", ";
            if (e.starred[i]) os << "*";
            else os << static_cast<char>('A' + (varOrd++ % 26));
        }
        os << ").\n";
    }
    for (const Rule& r : prog.softRules) os << printRule(prog, r) << "\n";
    for (const Rule& r : prog.hardRules) os << printRule(prog, r) << "\n";
    return os.str();
}

} // namespace psl
