#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "generators.hpp"

using namespace psl;

namespace {

SimilarityRegistry& sims() {
    static SimilarityRegistry reg = SimilarityRegistry::builtins();
    return reg;
}

struct Solved {
    testutil::Instance ins;
    Interpretation interp;
    RunReport report;
};

Solved run(const std::string& programText, const std::string& factText, InferenceConfig cfg = {}) {
    Solved s;
    s.ins = testutil::makeInstance(programText, factText);
    Grounder g(s.ins.prog, s.ins.facts, sims(), GroundingOptions{cfg.setNormalizer});
    s.interp = evidenceInterpretation(s.ins.prog, s.ins.facts);
    s.report = mapInference(g, s.interp, cfg);
    return s;
}

double valueOf(const Solved& s, const std::string& pred, std::vector<std::string> args) {
    GroundAtom a;
    a.pred = s.ins.prog.predId(pred);
    for (const auto& arg : args) a.args.push_back(s.ins.prog.symbols.find(arg));
    AtomId id = s.interp.lookup(a);
    REQUIRE(id >= 0);
    return s.interp.value(id);
}

} // namespace

TEST_CASE("opposing unit rules split the difference") {
    Solved s = run("open h(ent).\nclosed mark(ent).\n"
                   "1.0 : mark(A) => h(A) .\n"
                   "1.0 : ~h(A) .\n",
                   "mark\ta\t1.0\n");
    CHECK(s.report.converged);
    CHECK(valueOf(s, "h", {"a"}) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(s.report.objective == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("a single implication under the linear metric costs nothing") {
    InferenceConfig cfg;
    cfg.metric = DistanceMetric::L1;
    Solved s = run("open same(doc, doc).\nclosed simtext(doc, doc).\n"
                   "1.0 : simtext(A, B) => same(A, B) .\n",
                   "simtext\td1\td2\t0.8\n", cfg);
    CHECK(s.report.converged);
    double v = valueOf(s, "same", {"d1", "d2"});
    CHECK(v >= 0.8 - 1e-6);
    CHECK(v <= 1.0 + 1e-9);
    CHECK(s.report.objective == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("lazy inference matches an eager solve over the full grounding") {
    const char* programText =
        "closed base(ent, ent).\nopen r(ent, ent).\n"
        "1.2 : base(A, B) => r(A, B) .\n"
        "0.5 : ~r(A, B) .\n"
        "0.8 : r(A, B) => r(B, A) .\n";
    const char* factText =
        "base\ta\tb\t0.9\nbase\tb\tc\t0.7\nbase\tc\ta\t0.4\nbase\ta\ta\t0.1\n";

    for (DistanceMetric metric : {DistanceMetric::SquaredL2, DistanceMetric::L1}) {
        InferenceConfig cfg;
        cfg.metric = metric;
        cfg.activationThreshold = 1e-8;

        Solved lazy = run(programText, factText, cfg);
        REQUIRE(lazy.report.converged);

        auto ins = testutil::makeInstance(programText, factText);
        Grounder g(ins.prog, ins.facts, sims());
        Interpretation eager = evidenceInterpretation(ins.prog, ins.facts);
        auto all = g.groundAll(eager);
        ConvexProgram p = buildConvexProgram(all, eager, cfg);
        SolverResult res = solveConvex(p, SolverOptions{});
        REQUIRE(res.converged);
        applySolution(p, res.x, eager);

        Grounder gLazy(lazy.ins.prog, lazy.ins.facts, sims());
        double lazyObj = objectiveValue(gLazy, lazy.interp, cfg);
        double eagerObj = objectiveValue(g, eager, cfg);
        CHECK(std::abs(lazyObj - eagerObj) <= 1e-5);
    }
}

TEST_CASE("activation sweeps stop at a fixed point") {
    Solved s = run("closed seed(ent).\nclosed link(ent, ent).\nopen score(ent).\n"
                   "2.0 : seed(A) => score(A) .\n"
                   "1.0 : link(A, B) & score(A) => score(B) .\n"
                   "0.5 : ~score(A) .\n",
                   "seed\te0\t0.9\nlink\te0\te1\nlink\te1\te2\n");
    CHECK(s.report.converged);
    CHECK(s.report.outerIterations >= 2);
    CHECK(valueOf(s, "score", {"e0"}) > valueOf(s, "score", {"e1"}));
    CHECK(valueOf(s, "score", {"e1"}) > valueOf(s, "score", {"e2"}));
    CHECK(valueOf(s, "score", {"e2"}) > 0.0);
}

TEST_CASE("hard transitivity holds at the solution") {
    InferenceConfig cfg;
    cfg.activationThreshold = 1e-6;
    Solved s = run("closed base(ent, ent).\nopen r(ent, ent).\n"
                   "2.0 : base(A, B) => r(A, B) .\n"
                   "0.3 : ~r(A, B) .\n"
                   "HARD : r(A, B) & r(B, C) => r(A, C) .\n",
                   "base\ta\tb\t0.9\nbase\tb\tc\t0.8\n", cfg);
    REQUIRE(s.report.converged);
    Grounder g(s.ins.prog, s.ins.facts, sims());
    Interpretation work = s.interp;
    for (const GroundRule& r : g.groundAll(work)) {
        if (r.kind != GroundKind::Soft) {
            CHECK(r.distanceAt(work) <= 1e-6);
        }
    }
    // r(a,c) is forced up to at least tnorm of the chain.
    double ab = valueOf(s, "r", {"a", "b"});
    double bc = valueOf(s, "r", {"b", "c"});
    CHECK(valueOf(s, "r", {"a", "c"}) >= ab + bc - 1.0 - 1e-6);
}

TEST_CASE("exclusivity caps a group at total mass one") {
    Solved s = run("closed cand(ent, ent).\nopen r(ent, ent).\n"
                   "EXCLUSIVE: r(A, *).\n"
                   "2.0 : cand(A, B) => r(A, B) .\n",
                   "cand\ta\tb\t0.9\ncand\ta\tc\t0.9\n");
    REQUIRE(s.report.converged);
    double vb = valueOf(s, "r", {"a", "b"});
    double vc = valueOf(s, "r", {"a", "c"});
    CHECK(vb + vc <= 1.0 + 1e-6);
    CHECK(vb == doctest::Approx(vc).epsilon(1e-5));
    CHECK(vb == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("contradictory hard rules raise a conflict with named rules") {
    try {
        run("closed ev(ent).\nopen q(ent).\n"
            "HARD : ev(A) => q(A) .\n"
            "HARD : ~q(A) .\n",
            "ev\ta\t0.9\n");
        FAIL("expected SolveError");
    } catch (const SolveError& e) {
        std::string msg = e.what();
        CHECK(msg.find("hard") != std::string::npos);
        CHECK(msg.find("line") != std::string::npos);
    }
}

TEST_CASE("objective value is infinite beyond the hard tolerance") {
    auto ins = testutil::makeInstance("closed ev(ent).\nopen q(ent).\n"
                                      "HARD : ev(A) => q(A) .\n"
                                      "1.0 : ~q(A) .\n",
                                      "ev\ta\t0.9\n");
    Grounder g(ins.prog, ins.facts, sims());
    Interpretation interp = evidenceInterpretation(ins.prog, ins.facts);
    Interpretation work = interp;
    g.groundAll(work);
    AtomId qa = work.lookup(GroundAtom{ins.prog.predId("q"), {ins.prog.symbols.find("a")}});
    REQUIRE(qa >= 0);

    InferenceConfig cfg;
    work.setValue(qa, 0.9);
    double ok = objectiveValue(g, work, cfg);
    CHECK(ok == doctest::Approx(0.9 * 0.9));
    CHECK(logUnnormalizedDensity(g, work, cfg) == doctest::Approx(-ok));

    work.setValue(qa, 0.2);
    CHECK(objectiveValue(g, work, cfg) == kInf);
    CHECK(logUnnormalizedDensity(g, work, cfg) == -kInf);
}

TEST_CASE("rule penalties follow the configured metric and weight form") {
    InferenceConfig cfg;
    cfg.metric = DistanceMetric::L1;
    CHECK(rulePenalty(cfg, 2.0, 0.3) == doctest::Approx(0.6));
    cfg.metric = DistanceMetric::SquaredL2;
    cfg.weightForm = WeightForm::SquaredWeight;
    CHECK(rulePenalty(cfg, 2.0, 0.3) == doctest::Approx(4.0 * 0.09));
    cfg.weightForm = WeightForm::PlainWeight;
    CHECK(rulePenalty(cfg, 2.0, 0.3) == doctest::Approx(2.0 * 0.09));
}

TEST_CASE("plain weights put the split at the weight ratio") {
    for (auto [w1, w2] : std::vector<std::pair<double, double>>{{1, 1}, {2, 1}, {1, 3}}) {
        InferenceConfig cfg;
        cfg.weightForm = WeightForm::PlainWeight;
        cfg.activationThreshold = 1e-6;
        char text[160];
        std::snprintf(text, sizeof text,
                      "open h(ent).\nclosed mark(ent).\n"
                      "%.1f : mark(A) => h(A) .\n"
                      "%.1f : ~h(A) .\n",
                      w1, w2);
        Solved s = run(text, "mark\ta\t1.0\n", cfg);
        REQUIRE(s.report.converged);
        CHECK(valueOf(s, "h", {"a"}) == doctest::Approx(w1 / (w1 + w2)).epsilon(1e-4));
    }
}

TEST_CASE("the final active set is returned on request") {
    auto ins = testutil::makeInstance("closed ev(ent).\nopen q(ent).\n"
                                      "1.0 : ev(A) => q(A) .\n"
                                      "0.5 : ~q(A) .\n",
                                      "ev\ta\t0.8\n");
    Grounder g(ins.prog, ins.facts, sims());
    Interpretation interp = evidenceInterpretation(ins.prog, ins.facts);
    ActiveSet active;
    RunReport rep = mapInference(g, interp, InferenceConfig{}, &active);
    CHECK(active.size() == rep.activeRuleCount);
    CHECK(active.size() == 2);
}
