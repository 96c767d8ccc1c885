#include "psl/parser.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

#include "psl/error.hpp"

namespace psl {
namespace {

enum class Tok {
    Name,    // lowercase-start identifier
    Var,     // uppercase-start identifier
    Number,
    Quoted,
    LParen, RParen, LBrace, RBrace, LBracket, RBracket,
    Comma, Colon, Dot, Amp, Pipe, Tilde, Implies, NotEq, Concat,
    Star, Slash,
    End
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1, col = 1;
    bool spaceBefore = true;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { tokenize(); }
    const Token& peek(int ahead = 0) const {
        size_t i = pos_ + static_cast<size_t>(ahead);
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    Token next() {
        Token t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }

private:
    void tokenize() {
        int line = 1, col = 1;
        bool space = true;
        size_t i = 0;
        auto push = [&](Tok k, std::string text, int l, int c) {
            toks_.push_back({k, std::move(text), l, c, space});
            space = false;
        };
        while (i < src_.size()) {
            char ch = src_[i];
            if (ch == '\n') { ++line; col = 1; ++i; space = true; continue; }
            if (std::isspace(static_cast<unsigned char>(ch))) { ++col; ++i; space = true; continue; }
            if (ch == '#') {
                while (i < src_.size() && src_[i] != '\n') ++i;
                continue;
            }
            int l = line, c = col;
            auto two = [&](char a, char b) {
                return ch == a && i + 1 < src_.size() && src_[i + 1] == b;
            };
            if (two('=', '>')) { push(Tok::Implies, "=>", l, c); i += 2; col += 2; continue; }
            if (two('!', '=')) { push(Tok::NotEq, "!=", l, c); i += 2; col += 2; continue; }
            if (two('+', '+')) { push(Tok::Concat, "++", l, c); i += 2; col += 2; continue; }
            if (std::isdigit(static_cast<unsigned char>(ch))) {
                size_t j = i;
                while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
                if (j < src_.size() && src_[j] == '.' && j + 1 < src_.size() &&
                    std::isdigit(static_cast<unsigned char>(src_[j + 1]))) {
                    ++j;
                    while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
                }
                if (j < src_.size() && (src_[j] == 'e' || src_[j] == 'E')) {
                    size_t k = j + 1;
                    if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
                    if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
                        ++k;
                        while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
                        j = k;
                    }
                }
                push(Tok::Number, std::string(src_.substr(i, j - i)), l, c);
                col += static_cast<int>(j - i);
                i = j;
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
                size_t j = i;
                while (j < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_')) ++j;
                Tok k = std::isupper(static_cast<unsigned char>(ch)) ? Tok::Var : Tok::Name;
                push(k, std::string(src_.substr(i, j - i)), l, c);
                col += static_cast<int>(j - i);
                i = j;
                continue;
            }
            if (ch == '"') {
                std::string out;
                size_t j = i + 1;
                while (j < src_.size() && src_[j] != '"') {
                    if (src_[j] == '\\' && j + 1 < src_.size()) { out.push_back(src_[j + 1]); j += 2; }
                    else { out.push_back(src_[j]); ++j; }
                }
                if (j >= src_.size()) throw ParseError("unterminated string literal", l, c);
                push(Tok::Quoted, out, l, c);
                col += static_cast<int>(j + 1 - i);
                i = j + 1;
                continue;
            }
            Tok k;
            switch (ch) {
                case '(': k = Tok::LParen; break;
                case ')': k = Tok::RParen; break;
                case '{': k = Tok::LBrace; break;
                case '}': k = Tok::RBrace; break;
                case '[': k = Tok::LBracket; break;
                case ']': k = Tok::RBracket; break;
                case ',': k = Tok::Comma; break;
                case ':': k = Tok::Colon; break;
                case '.': k = Tok::Dot; break;
                case '&': k = Tok::Amp; break;
                case '|': k = Tok::Pipe; break;
                case '~': k = Tok::Tilde; break;
                case '*': k = Tok::Star; break;
                case '/': k = Tok::Slash; break;
                default:
                    throw ParseError(std::string("unexpected character '") + ch + "'", l, c);
            }
            push(k, std::string(1, ch), l, c);
            ++col;
            ++i;
        }
        toks_.push_back({Tok::End, "", line, col, true});
    }

    std::string_view src_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
};

class ParserImpl {
public:
    explicit ParserImpl(std::string_view text) : lex_(text) {}

    Program run() {
        while (lex_.peek().kind != Tok::End) statement();
        return std::move(prog_);
    }

private:
    [[noreturn]] void fail(const std::string& msg, const Token& t) {
        throw ParseError(msg, t.line, t.col);
    }

    Token expect(Tok k, const char* what) {
        Token t = lex_.next();
        if (t.kind != k) fail(std::string("expected ") + what + ", found '" + t.text + "'", t);
        return t;
    }

    void statement() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Name && (t.text == "open" || t.text == "closed")) {
            declaration(t.text == "closed");
            return;
        }
        if (t.kind == Tok::Var && t.text == "EXCLUSIVE") {
            exclusivity();
            return;
        }
        if (t.kind == Tok::Number || (t.kind == Tok::Var && t.text == "HARD")) {
            rule();
            return;
        }
        fail("expected a declaration, rule, or EXCLUSIVE constraint", t);
    }

    // open name/2.   open name(type, type).   closed variants alike.
    void declaration(bool closed) {
        lex_.next();
        Token name = expect(Tok::Name, "predicate name");
        int arity = 0;
        std::vector<std::string> types;
        if (lex_.peek().kind == Tok::Slash) {
            lex_.next();
            Token n = expect(Tok::Number, "arity");
            arity = std::atoi(n.text.c_str());
            if (arity <= 0) fail("arity must be a positive integer", n);
            types.assign(static_cast<size_t>(arity), kUntyped);
        } else {
            expect(Tok::LParen, "'(' or '/'");
            while (true) {
                Token ty = expect(Tok::Name, "type name");
                types.push_back(ty.text);
                if (lex_.peek().kind == Tok::Comma) { lex_.next(); continue; }
                break;
            }
            expect(Tok::RParen, "')'");
            arity = static_cast<int>(types.size());
        }
        expect(Tok::Dot, "'.'");
        declarePred(name, arity, types, closed, true);
    }

    void exclusivity() {
        lex_.next();
        expect(Tok::Colon, "':'");
        Token name = expect(Tok::Name, "predicate name");
        expect(Tok::LParen, "'('");
        ExclusivityDecl decl;
        decl.line = name.line;
        while (true) {
            const Token& t = lex_.peek();
            if (t.kind == Tok::Star) { lex_.next(); decl.starred.push_back(true); }
            else if (t.kind == Tok::Var) { lex_.next(); decl.starred.push_back(false); }
            else fail("expected a variable or '*' in exclusivity argument", t);
            if (lex_.peek().kind == Tok::Comma) { lex_.next(); continue; }
            break;
        }
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
        bool anyStar = false;
        for (bool b : decl.starred) anyStar = anyStar || b;
        if (!anyStar) fail("exclusivity needs at least one '*' position", name);
        decl.pred = implicitPred(name, static_cast<int>(decl.starred.size()));
        prog_.exclusivity.push_back(std::move(decl));
    }

    void rule() {
        Rule r;
        Token first = lex_.next();
        r.line = first.line;
        if (first.kind == Tok::Var) {
            r.hard = true;
        } else {
            r.weight = std::strtod(first.text.c_str(), nullptr);
            r.weightText = first.text;
            if (!(r.weight > 0.0)) fail("rule weight must be positive", first);
        }
        expect(Tok::Colon, "':'");

        curRule_ = &r;
        vars_.clear();

        bool sawAmp = false, sawPipe = false;
        std::vector<Literal> part;
        while (true) {
            part.push_back(element());
            Tok k = lex_.peek().kind;
            if (k == Tok::Amp) { lex_.next(); sawAmp = true; continue; }
            if (k == Tok::Pipe) { lex_.next(); sawPipe = true; continue; }
            break;
        }
        if (sawAmp && sawPipe) {
            fail("cannot mix '&' and '|' on one side of a rule; use body => head", lex_.peek());
        }

        if (lex_.peek().kind == Tok::Implies) {
            lex_.next();
            if (sawPipe) fail("rule body must be a conjunction", lex_.peek());
            r.body = std::move(part);
            while (true) {
                Literal h = element();
                if (h.kind == LiteralKind::Guard) fail("guards belong in the rule body", lex_.peek());
                r.head.push_back(std::move(h));
                Tok k = lex_.peek().kind;
                if (k == Tok::Pipe) { lex_.next(); continue; }
                if (k == Tok::Amp) fail("rule head must be a disjunction", lex_.peek());
                break;
            }
        } else {
            if (sawAmp) fail("conjunction without a head; write body => head", lex_.peek());
            for (const Literal& l : part) {
                if (l.kind == LiteralKind::Guard) fail("guards belong in the rule body", lex_.peek());
            }
            r.head = std::move(part);
        }
        expect(Tok::Dot, "'.'");
        curRule_ = nullptr;
        if (r.hard) prog_.hardRules.push_back(std::move(r));
        else prog_.softRules.push_back(std::move(r));
    }

    // One body or head element: a literal or an inequality guard.
    Literal element() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Tilde) {
            lex_.next();
            Literal lit = atomLike();
            lit.negated = true;
            return lit;
        }
        bool atomish = (t.kind == Tok::Name) &&
                       (lex_.peek(1).kind == Tok::LParen || lex_.peek(1).kind == Tok::LBracket);
        if (atomish) return atomLike();

        Literal g;
        g.kind = LiteralKind::Guard;
        g.line = t.line;
        g.col = t.col;
        g.args.push_back(term());
        expect(Tok::NotEq, "'!='");
        g.args.push_back(term());
        return g;
    }

    Literal atomLike() {
        Token name = expect(Tok::Name, "predicate or function name");
        Literal lit;
        lit.line = name.line;
        lit.col = name.col;
        if (name.text == "fn" && lex_.peek().kind == Tok::LBracket) {
            lex_.next();
            Token fn = expect(Tok::Name, "similarity function name");
            expect(Tok::RBracket, "']'");
            lit.kind = LiteralKind::Builtin;
            lit.fn = fn.text;
            expect(Tok::LParen, "'('");
            while (true) {
                lit.args.push_back(term());
                if (lex_.peek().kind == Tok::Comma) { lex_.next(); continue; }
                break;
            }
            expect(Tok::RParen, "')'");
            return lit;
        }
        if (name.text == "setsim" && lex_.peek().kind == Tok::LBracket) {
            lex_.next();
            Token pred = expect(Tok::Name, "member predicate name");
            expect(Tok::RBracket, "']'");
            lit.kind = LiteralKind::SetSim;
            lit.pred = implicitPred(pred, 2);
            expect(Tok::LParen, "'('");
            lit.left = setExpr();
            expect(Tok::Comma, "','");
            lit.right = setExpr();
            expect(Tok::RParen, "')'");
            return lit;
        }
        expect(Tok::LParen, "'('");
        while (true) {
            lit.args.push_back(term());
            if (lex_.peek().kind == Tok::Comma) { lex_.next(); continue; }
            break;
        }
        expect(Tok::RParen, "')'");
        lit.pred = implicitPred(name, static_cast<int>(lit.args.size()));
        return lit;
    }

    SetExpr setExpr() {
        SetExpr e;
        while (true) {
            expect(Tok::LBrace, "'{'");
            Token v = expect(Tok::Var, "anchor variable");
            SetPath p;
            p.anchorVar = internVar(v.text);
            while (lex_.peek().kind == Tok::Dot) {
                lex_.next();
                Token rel = expect(Tok::Name, "relation name");
                p.rels.push_back(implicitPred(rel, 2));
            }
            if (p.rels.empty()) fail("set path needs at least one relation, e.g. {A.child}", v);
            expect(Tok::RBrace, "'}'");
            e.paths.push_back(std::move(p));
            if (lex_.peek().kind == Tok::Concat) { lex_.next(); continue; }
            break;
        }
        return e;
    }

    // Paths bind tighter than anything else and must be written without
    // spaces, so `p(A).` keeps its terminating dot.
    Term term() {
        Token t = lex_.next();
        Term out;
        if (t.kind == Tok::Var) {
            out.var = internVar(t.text);
            out.kind = TermKind::Variable;
            while (lex_.peek().kind == Tok::Dot && !lex_.peek().spaceBefore &&
                   lex_.peek(1).kind == Tok::Name && !lex_.peek(1).spaceBefore) {
                lex_.next();
                Token rel = expect(Tok::Name, "relation name");
                out.rels.push_back(implicitPred(rel, 2));
                out.kind = TermKind::PathApply;
            }
            return out;
        }
        if (t.kind == Tok::Name || t.kind == Tok::Quoted || t.kind == Tok::Number) {
            out.kind = TermKind::Constant;
            out.constant = prog_.symbols.intern(t.text);
            return out;
        }
        fail("expected a term", t);
    }

    int internVar(const std::string& name) {
        auto it = vars_.find(name);
        if (it != vars_.end()) return it->second;
        int idx = static_cast<int>(curRule_->varNames.size());
        curRule_->varNames.push_back(name);
        vars_.emplace(name, idx);
        return idx;
    }

    PredId declarePred(const Token& name, int arity, std::vector<std::string> types, bool closed,
                       bool explicitDecl) {
        PredId id = prog_.predId(name.text);
        if (id < 0) {
            PredicateDecl d;
            d.name = name.text;
            d.arity = arity;
            d.argTypes = std::move(types);
            d.closed = closed;
            d.declaredExplicitly = explicitDecl;
            d.line = name.line;
            prog_.schema.push_back(std::move(d));
            return static_cast<PredId>(prog_.schema.size() - 1);
        }
        PredicateDecl& d = prog_.schema[static_cast<size_t>(id)];
        if (d.arity != arity) {
            fail("predicate " + name.text + " used with arity " + std::to_string(arity) +
                     " but has arity " + std::to_string(d.arity), name);
        }
        if (explicitDecl) {
            if (d.declaredExplicitly) fail("predicate " + name.text + " declared twice", name);
            d.argTypes = std::move(types);
            d.closed = closed;
            d.declaredExplicitly = true;
        }
        return id;
    }

    PredId implicitPred(const Token& name, int arity) {
        return declarePred(name, arity, std::vector<std::string>(static_cast<size_t>(arity), kUntyped),
                           true, false);
    }

    Lexer lex_;
    Program prog_;
    Rule* curRule_ = nullptr;
    std::unordered_map<std::string, int> vars_;
};

} // namespace

Program parseProgram(std::string_view text) {
    return ParserImpl(text).run();
}

} // namespace psl
