#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "generators.hpp"
#include "psl/store.hpp"

using namespace psl;

namespace {

GroundAtom atom(Program& p, const std::string& pred, std::vector<std::string> args) {
    GroundAtom a;
    a.pred = p.predId(pred);
    for (const std::string& s : args) a.args.push_back(p.symbols.intern(s));
    return a;
}

} // namespace

TEST_CASE("closed-world lookup returns stored value or zero") {
    auto ins = testutil::makeInstance("open q(ent).\nclosed ev(ent, ent).\n1.0 : q(X) .\n",
                                      "ev\ta\tb\t0.7\nev\tb\tc\n");
    PredId ev = ins.prog.predId("ev");
    Sym a = ins.prog.symbols.find("a"), b = ins.prog.symbols.find("b"),
        c = ins.prog.symbols.find("c");
    CHECK(ins.facts.closedValue(ev, std::vector<Sym>{a, b}) == doctest::Approx(0.7));
    CHECK(ins.facts.closedValue(ev, std::vector<Sym>{b, c}) == 1.0);
    CHECK(ins.facts.closedValue(ev, std::vector<Sym>{c, a}) == 0.0);
    CHECK(ins.facts.hasRow(ev, std::vector<Sym>{a, b}));
    CHECK_FALSE(ins.facts.hasRow(ev, std::vector<Sym>{c, a}));
}

TEST_CASE("duplicate rows collapse when equal and conflict otherwise") {
    Program p = parseProgram("closed ev(ent).\nopen q(ent).\n1.0 : q(X) .\n");
    FactSet f(static_cast<int>(p.schema.size()));
    Sym a = p.symbols.intern("a");
    f.addRow(p, p.predId("ev"), {a}, 0.5, "t");
    f.addRow(p, p.predId("ev"), {a}, 0.5, "t");
    f.finalize(p);
    CHECK(f.rows(p.predId("ev")).size() == 1);
    CHECK_THROWS_AS(f.addRow(p, p.predId("ev"), {a}, 0.6, "t"), StoreError);
}

TEST_CASE("positional index narrows to the same rows as a full scan") {
    Program p = parseProgram("closed ev(ent, ent).\nopen q(ent).\n1.0 : q(X) .\n");
    FactSet f(static_cast<int>(p.schema.size()));
    std::mt19937_64 rng(31);
    PredId ev = p.predId("ev");
    for (int i = 0; i < 60; ++i) {
        Sym x = p.symbols.intern("n" + std::to_string(rng() % 8));
        Sym y = p.symbols.intern("n" + std::to_string(rng() % 8));
        if (!f.hasRow(ev, std::vector<Sym>{x, y})) {
            f.addRow(p, ev, {x, y}, 1.0, "t");
        }
    }
    f.finalize(p);

    auto scan = [&](Sym x, Sym y) {
        std::vector<FactRow> out;
        for (const FactRow& r : f.rows(ev)) {
            if ((x < 0 || r.args[0] == x) && (y < 0 || r.args[1] == y)) out.push_back(r);
        }
        return out;
    };
    auto sameRows = [](std::vector<FactRow> a, std::vector<FactRow> b) {
        auto key = [](const FactRow& r) { return r.args; };
        std::sort(a.begin(), a.end(), [&](auto& l, auto& r) { return key(l) < key(r); });
        std::sort(b.begin(), b.end(), [&](auto& l, auto& r) { return key(l) < key(r); });
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i) {
            if (a[i].args != b[i].args) return false;
        }
        return true;
    };

    for (int s = 0; s < 8; ++s) {
        Sym x = p.symbols.find("n" + std::to_string(s));
        CHECK(sameRows(matchRows(f, ev, std::vector<Sym>{x, -1}), scan(x, -1)));
        CHECK(sameRows(matchRows(f, ev, std::vector<Sym>{-1, x}), scan(-1, x)));
        CHECK(sameRows(matchRows(f, ev, std::vector<Sym>{x, x}), scan(x, x)));
    }
    CHECK(matchRows(f, ev, std::vector<Sym>{-1, -1}).size() == f.rows(ev).size());
}

TEST_CASE("universes collect constants by declared type") {
    auto ins = testutil::makeInstance(
        "closed owns(person, thing).\nopen q(person).\n1.0 : q(X) .\n",
        "owns\talice\that\nowns\tbob\tshoe\n");
    const auto& people = ins.facts.universe("person");
    REQUIRE(people.size() == 2);
    CHECK(ins.facts.universe("thing").size() == 2);
    CHECK(ins.facts.universe("nothing").empty());
    CHECK(ins.facts.allConstants().size() == 4);
    CHECK(std::is_sorted(people.begin(), people.end()));
}

TEST_CASE("evidence and query atoms stay disjoint") {
    Program p = parseProgram("open q(ent).\n1.0 : q(X) .\n");
    Interpretation interp;
    GroundAtom qa = atom(p, "q", {"a"});
    GroundAtom qb = atom(p, "q", {"b"});
    AtomId ida = interp.addEvidence(qa, 0.8);
    AtomId idb = interp.registerQuery(qb);
    CHECK(interp.role(ida) == AtomRole::Evidence);
    CHECK(interp.role(idb) == AtomRole::Query);
    CHECK(interp.value(ida) == doctest::Approx(0.8));
    CHECK(interp.value(idb) == 0.0);
    CHECK(interp.registerQuery(qb) == idb);
    CHECK_THROWS_AS(interp.registerQuery(qa), StoreError);
    CHECK(interp.queryCount() == 1);
    CHECK(interp.lookup(atom(p, "q", {"zz"})) == -1);
}

TEST_CASE("open rows become evidence, closed rows do not") {
    auto ins = testutil::makeInstance("open q(ent).\nclosed ev(ent).\n1.0 : ev(X) => q(X) .\n",
                                      "q\ta\t0.9\nev\tb\t0.5\n");
    Interpretation interp = evidenceInterpretation(ins.prog, ins.facts);
    CHECK(interp.size() == 1);
    AtomId id = interp.lookup(atom(ins.prog, "q", {"a"}));
    REQUIRE(id >= 0);
    CHECK(interp.role(id) == AtomRole::Evidence);
    CHECK(interp.value(id) == doctest::Approx(0.9));
}

TEST_CASE("truth lookup routes closed atoms to facts and open atoms to the interpretation") {
    auto ins = testutil::makeInstance("open q(ent).\nclosed ev(ent).\n1.0 : ev(X) => q(X) .\n",
                                      "q\ta\t0.9\nev\tb\t0.5\n");
    Interpretation interp = evidenceInterpretation(ins.prog, ins.facts);
    CHECK(getTruth(ins.prog, ins.facts, interp, atom(ins.prog, "ev", {"b"})) ==
          doctest::Approx(0.5));
    CHECK(getTruth(ins.prog, ins.facts, interp, atom(ins.prog, "ev", {"zz"})) == 0.0);
    CHECK(getTruth(ins.prog, ins.facts, interp, atom(ins.prog, "q", {"a"})) ==
          doctest::Approx(0.9));
    CHECK_THROWS_AS(getTruth(ins.prog, ins.facts, interp, atom(ins.prog, "q", {"b"})), StoreError);
    CHECK(truthOrZero(ins.prog, ins.facts, interp, atom(ins.prog, "q", {"b"})) == 0.0);
}

TEST_CASE("atom formatting is predicate then parenthesized arguments") {
    Program p = parseProgram("open q(ent, ent).\n1.0 : q(X, Y) .\n");
    CHECK(formatAtom(p, atom(p, "q", {"a", "b"})) == "q(a, b)");
}

TEST_CASE("setValue rejects out-of-range truth") {
    Program p = parseProgram("open q(ent).\n1.0 : q(X) .\n");
    Interpretation interp;
    AtomId id = interp.registerQuery(atom(p, "q", {"a"}));
    interp.setValue(id, 0.25);
    CHECK(interp.value(id) == doctest::Approx(0.25));
    CHECK_THROWS_AS(interp.setValue(id, 1.5), DomainError);
}
