#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>

#include "generators.hpp"
#include "psl/desugar.hpp"
#include "psl/io.hpp"
#include "psl/metrics.hpp"
#include "psl/noise.hpp"
#include "psl/oracle.hpp"

using namespace psl;

namespace {

SimilarityRegistry& sims() {
    static SimilarityRegistry reg = SimilarityRegistry::builtins();
    return reg;
}

bool hasSetLiteral(const Program& prog) {
    auto scan = [](const std::vector<Rule>& rules) {
        for (const Rule& r : rules) {
            for (const Literal& l : r.body) {
                if (l.kind == LiteralKind::SetSim) return true;
            }
            for (const Literal& l : r.head) {
                if (l.kind == LiteralKind::SetSim) return true;
            }
        }
        return false;
    };
    return scan(prog.softRules) || scan(prog.hardRules);
}

} // namespace

TEST_CASE("f1 agrees with direct counting over random subset pairs") {
    Program prog;
    PredicateDecl q;
    q.name = "q";
    prog.schema.push_back(q);
    std::vector<GroundAtom> pool;
    for (int i = 0; i < 6; ++i) {
        pool.push_back({0, {prog.symbols.intern("c" + std::to_string(i))}});
    }
    auto subset = [&](unsigned mask) {
        DecisionSet s;
        for (int i = 0; i < 6; ++i) {
            if (mask & (1u << i)) s.positives.push_back(pool[static_cast<size_t>(i)]);
        }
        return s;
    };

    testutil::Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        unsigned mp = static_cast<unsigned>(testutil::pick(rng, 0, 63));
        unsigned mg = static_cast<unsigned>(testutil::pick(rng, 0, 63));
        Metrics m = f1Score(subset(mp), subset(mg));

        int tp = std::popcount(mp & mg);
        int np = std::popcount(mp);
        int ng = std::popcount(mg);
        double prec = np == 0 ? (ng == 0 ? 1.0 : 0.0) : static_cast<double>(tp) / np;
        double rec = ng == 0 ? 1.0 : static_cast<double>(tp) / ng;
        double f1 = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
        CHECK(m.precision == doctest::Approx(prec).epsilon(1e-12));
        CHECK(m.recall == doctest::Approx(rec).epsilon(1e-12));
        CHECK(m.f1 == doctest::Approx(f1).epsilon(1e-12));
    }
}

TEST_CASE("f1 edge conventions") {
    DecisionSet empty;
    DecisionSet one;
    one.positives.push_back({0, {}});

    Metrics both = f1Score(empty, empty);
    CHECK(both.precision == 1.0);
    CHECK(both.recall == 1.0);
    CHECK(both.f1 == 1.0);

    Metrics miss = f1Score(empty, one);
    CHECK(miss.precision == 0.0);
    CHECK(miss.recall == 0.0);
    CHECK(miss.f1 == 0.0);

    Metrics spurious = f1Score(one, empty);
    CHECK(spurious.precision == 0.0);
    CHECK(spurious.recall == 1.0);
    CHECK(spurious.f1 == 0.0);
}

TEST_CASE("metric formatting uses four decimal places") {
    Metrics m;
    m.precision = 0.5;
    m.recall = 1.0;
    m.f1 = 2.0 / 3.0;
    CHECK(formatMetrics(m) == "0.5000\t1.0000\t0.6667");
}

TEST_CASE("threshold decisions are inclusive and sorted") {
    auto ins = testutil::makeInstance(
        "open q(ent).\nclosed seen(ent).\n1.0 : seen(A) => q(A) .\n",
        "seen\ta\t1.0\nseen\tb\t1.0\nseen\tc\t1.0\nseen\td\t1.0\n");
    Interpretation interp;
    auto reg = [&](const char* name, double v) {
        AtomId id = interp.registerQuery({ins.prog.predId("q"), {ins.prog.symbols.intern(name)}});
        interp.setValue(id, v);
        return id;
    };
    reg("d", 0.9);
    reg("a", 0.5);
    reg("b", 0.49);
    reg("c", 0.1);

    DecisionSet s = thresholdDecisions(ins.prog, interp, 0.5);
    REQUIRE(s.positives.size() == 2);
    CHECK(formatAtom(ins.prog, s.positives[0]) == "q(a)");
    CHECK(formatAtom(ins.prog, s.positives[1]) == "q(d)");

    CHECK_THROWS_AS(thresholdDecisions(ins.prog, interp, 0.0), DomainError);
    CHECK_THROWS_AS(thresholdDecisions(ins.prog, interp, 1.0), DomainError);
    CHECK_THROWS_AS(thresholdDecisions(ins.prog, interp, 1.5), DomainError);
}

TEST_CASE("argmax breaks ties toward the textually first atom") {
    auto ins = testutil::makeInstance(
        "open q(ent).\nclosed seen(ent).\n1.0 : seen(A) => q(A) .\n",
        "seen\ta\t1.0\nseen\tb\t1.0\nseen\tc\t1.0\n");
    Interpretation interp;
    std::vector<AtomId> ids;
    auto reg = [&](const char* name, double v) {
        AtomId id = interp.registerQuery({ins.prog.predId("q"), {ins.prog.symbols.intern(name)}});
        interp.setValue(id, v);
        ids.push_back(id);
    };
    reg("c", 0.7);
    reg("a", 0.3);
    reg("b", 0.7);

    AtomId best = argmaxDecision(ins.prog, interp, ids);
    CHECK(formatAtom(ins.prog, interp.atom(best)) == "q(b)");

    std::vector<AtomId> none;
    CHECK_THROWS_AS(argmaxDecision(ins.prog, interp, none), DomainError);
}

TEST_CASE("noise perturbs exact counts and is seed deterministic") {
    std::string factText;
    for (int i = 0; i < 10; ++i) {
        factText += "name\tn" + std::to_string(i) + "\tlabel" + std::to_string(i) + "x\n";
    }
    factText +=
        "edge\tn0\tn1\nedge\tn1\tn2\nedge\tn2\tn3\nedge\tn3\tn4\n"
        "edge\tn4\tn5\nedge\tn5\tn6\nedge\tn6\tn7\nedge\tn7\tn8\n";
    auto ins = testutil::makeInstance(
        "closed name(node, str).\nclosed edge(node, node).\nopen align(node, node).\n"
        "1.0 : fn[levenshtein](A.name, B.name) => align(A, B) .\n",
        factText);
    PredId nameP = ins.prog.predId("name");
    PredId edgeP = ins.prog.predId("edge");

    NoiseSpec spec;
    spec.attributeNoise = 0.35; // floor(0.35 * 10) = 3 replacements
    spec.structuralNoise = 0.25; // floor(0.25 * 8) = 2 drops
    spec.seed = 7;
    spec.attributePreds = {nameP};
    spec.relationPreds = {edgeP};

    FactSet out1 = generateNoise(ins.prog, ins.facts, spec);
    FactSet out2 = generateNoise(ins.prog, ins.facts, spec);
    CHECK(factsToText(ins.prog, out1) == factsToText(ins.prog, out2));

    CHECK(out1.rows(nameP).size() == 10);
    CHECK(out1.rows(edgeP).size() == 6);

    int changed = 0;
    for (size_t r = 0; r < 10; ++r) {
        Sym before = ins.facts.rows(nameP)[r].args.back();
        Sym after = out1.rows(nameP)[r].args.back();
        if (before != after) {
            ++changed;
            CHECK(ins.prog.symbols.name(after).size() == ins.prog.symbols.name(before).size());
        }
    }
    CHECK(changed == 3);

    NoiseSpec other = spec;
    other.seed = 8;
    FactSet out3 = generateNoise(ins.prog, ins.facts, other);
    CHECK(out3.rows(nameP).size() == 10);
    CHECK(out3.rows(edgeP).size() == 6);
    CHECK(factsToText(ins.prog, out3) != factsToText(ins.prog, out1));

    NoiseSpec silent;
    silent.attributePreds = {nameP};
    silent.relationPreds = {edgeP};
    FactSet same = generateNoise(ins.prog, ins.facts, silent);
    CHECK(factsToText(ins.prog, same) == factsToText(ins.prog, ins.facts));

    NoiseSpec bad = spec;
    bad.attributeNoise = 1.2;
    CHECK_THROWS_AS(generateNoise(ins.prog, ins.facts, bad), DomainError);
    bad = spec;
    bad.structuralNoise = -0.1;
    CHECK_THROWS_AS(generateNoise(ins.prog, ins.facts, bad), DomainError);
}

TEST_CASE("set rewriting multiplies union paths and removes set literals") {
    Program prog = parseProgram(
        "closed childa(n, n).\nclosed childb(n, n).\nopen align(n, n).\n"
        "1.0 : setsim[align]({A.childa} ++ {A.childa.childa}, "
        "{B.childb} ++ {B.childb.childb}) => align(A, B) .\n"
        "0.5 : ~align(A, B) .\n");
    validateProgram(prog);
    REQUIRE(hasSetLiteral(prog));

    Program flat = desugarSets(prog);
    CHECK(!hasSetLiteral(flat));
    CHECK(flat.softRules.size() == 5); // 2 x 2 path pairs plus the prior
    int wide = 0, prior = 0;
    for (const Rule& r : flat.softRules) {
        if (r.weight == 1.0) ++wide;
        if (r.weight == 0.5) ++prior;
    }
    CHECK(wide == 4);
    CHECK(prior == 1);
    validateProgram(flat);

    std::string printed = printProgram(flat);
    Program reparsed = parseProgram(printed);
    validateProgram(reparsed);
    CHECK(printProgram(reparsed) == printed);
}

TEST_CASE("set free programs pass through the rewrite unchanged") {
    Program prog = parseProgram(
        "closed ev(ent).\nopen q(ent).\n1.0 : ev(A) => q(A) .\nHARD : ev(A) => q(A) .\n");
    validateProgram(prog);
    Program flat = desugarSets(prog);
    CHECK(printProgram(flat) == printProgram(prog));
}

TEST_CASE("grid search rejects bad steps and large problems") {
    auto ins = testutil::makeInstance(
        "closed ev(ent).\nopen q(ent).\n1.0 : ev(A) => q(A) .\n",
        "ev\ta\t0.5\nev\tb\t0.5\nev\tc\t0.5\n");
    Grounder g(ins.prog, ins.facts, sims());
    Interpretation ev = evidenceInterpretation(ins.prog, ins.facts);
    InferenceConfig cfg;

    CHECK_THROWS_AS(bruteForceMAP(g, ev, 0.07, cfg), DomainError);
    CHECK_THROWS_AS(bruteForceMAP(g, ev, 0.0, cfg), DomainError);
    CHECK_THROWS_AS(bruteForceMAP(g, ev, 1.5, cfg), DomainError);
    CHECK_THROWS_AS(bruteForceMAP(g, ev, 0.5, cfg, 2), DomainError);
}

TEST_CASE("grid search returns the lexicographically first minimizer") {
    // Any value in [0.5, 1] is optimal, so the reported one must be 0.5.
    auto flat = testutil::makeInstance(
        "closed ev(ent).\nopen q(ent).\n1.0 : ev(A) => q(A) .\n", "ev\ta\t0.5\n");
    Grounder g1(flat.prog, flat.facts, sims());
    InferenceConfig l1;
    l1.metric = DistanceMetric::L1;
    OracleResult r1 = bruteForceMAP(g1, evidenceInterpretation(flat.prog, flat.facts), 0.05, l1);
    REQUIRE(r1.queryAtoms == 1);
    AtomId qa = r1.interp.lookup({flat.prog.predId("q"), {flat.prog.symbols.intern("a")}});
    CHECK(r1.interp.value(qa) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r1.objective <= 1e-12);

    // The optimum needs the two values to sum to one; the first atom takes
    // the smallest value on the grid and forces the second to one.
    auto disj = testutil::makeInstance(
        "open q(ent).\nclosed seen(ent).\n1.0 : q(a) | q(b) .\n",
        "seen\ta\t1.0\nseen\tb\t1.0\n");
    Grounder g2(disj.prog, disj.facts, sims());
    OracleResult r2 = bruteForceMAP(g2, evidenceInterpretation(disj.prog, disj.facts), 0.5, l1);
    REQUIRE(r2.queryAtoms == 2);
    CHECK(r2.evaluated == 9);
    AtomId a = r2.interp.lookup({disj.prog.predId("q"), {disj.prog.symbols.intern("a")}});
    AtomId b = r2.interp.lookup({disj.prog.predId("q"), {disj.prog.symbols.intern("b")}});
    CHECK(r2.interp.value(a) == 0.0);
    CHECK(r2.interp.value(b) == 1.0);
    CHECK(r2.objective <= 1e-12);
}

TEST_CASE("grid optimum tracks the solver optimum") {
    auto ins = testutil::makeInstance(
        "closed ev(ent).\nopen q(ent).\n1.0 : ev(A) => q(A) .\n0.5 : ~q(A) .\n",
        "ev\ta\t0.8\n");
    InferenceConfig cfg;

    Grounder g(ins.prog, ins.facts, sims());
    OracleResult grid = bruteForceMAP(g, evidenceInterpretation(ins.prog, ins.facts), 0.05, cfg);

    Interpretation interp = evidenceInterpretation(ins.prog, ins.facts);
    RunReport rep = mapInference(g, interp, cfg);
    REQUIRE(rep.converged);

    CHECK(rep.objective <= grid.objective + 1e-7);
    CHECK(std::abs(rep.objective - grid.objective) <= 0.02);
}
