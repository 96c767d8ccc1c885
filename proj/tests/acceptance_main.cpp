// Acceptance checks for the reasoning engine, one line of output each.
// Exit status is zero only when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "generators.hpp"
#include "psl/desugar.hpp"
#include "psl/infer.hpp"
#include "psl/io.hpp"
#include "psl/learn.hpp"
#include "psl/metrics.hpp"
#include "psl/oracle.hpp"
#include "psl/scenario.hpp"
#include "psl/truth.hpp"

using namespace psl;
using Clock = std::chrono::steady_clock;

namespace {

SimilarityRegistry& sims() {
    static SimilarityRegistry reg = SimilarityRegistry::builtins();
    return reg;
}

double secondsSince(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v, const char* fmt = "%.3f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string note;
};

GroundKey keyOf(const Grounder& g, const GroundRule& r) {
    if (r.kind == GroundKind::Exclusive) {
        return {g.numClauses() + r.exclusivityId, r.binding};
    }
    return {r.clauseId, r.binding};
}

Metrics f1Against(const Program& prog, const Interpretation& interp,
                  const std::vector<GroundAtom>& gold) {
    DecisionSet predicted = thresholdDecisions(prog, interp, 0.5);
    DecisionSet goldSet;
    goldSet.positives = gold;
    return f1Score(predicted, goldSet);
}

double solveF1(const Program& prog, const FactSet& facts, const std::vector<GroundAtom>& gold,
               const InferenceConfig& cfg) {
    Grounder g(prog, facts, sims(), GroundingOptions{cfg.setNormalizer});
    Interpretation interp = evidenceInterpretation(prog, facts);
    mapInference(g, interp, cfg);
    return f1Against(prog, interp, gold).f1;
}

// 1. Algebra identities on random triples, exact to 1e-12, under a second.
Outcome criterion1() {
    auto start = Clock::now();
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double maxErr = 0.0;
    auto track = [&](double x, double y) { maxErr = std::max(maxErr, std::abs(x - y)); };
    for (int i = 0; i < 10000; ++i) {
        double a = u(rng), b = u(rng), c = u(rng);
        track(truth::tnorm(a, b), truth::tnorm(b, a));
        track(truth::tconorm(a, b), truth::tconorm(b, a));
        track(truth::tnorm(truth::tnorm(a, b), c), truth::tnorm(a, truth::tnorm(b, c)));
        track(truth::tconorm(truth::tconorm(a, b), c), truth::tconorm(a, truth::tconorm(b, c)));
        track(truth::tnorm(a, 1.0), a);
        track(truth::tconorm(a, 0.0), a);
        track(truth::negate(truth::tnorm(a, b)),
              truth::tconorm(truth::negate(a), truth::negate(b)));
        track(truth::negate(truth::tconorm(a, b)),
              truth::tnorm(truth::negate(a), truth::negate(b)));
    }
    const double bits[2] = {0.0, 1.0};
    for (double a : bits) {
        for (double b : bits) {
            track(truth::tnorm(a, b), a == 1.0 && b == 1.0 ? 1.0 : 0.0);
            track(truth::tconorm(a, b), a == 1.0 || b == 1.0 ? 1.0 : 0.0);
        }
    }
    double secs = secondsSince(start);
    bool pass = maxErr <= 1e-12 && secs < 1.0;
    return {pass, "max error " + num(maxErr, "%.1e") + ", " + num(secs) + " s"};
}

// 2. Clause distance equals the fold form on random implication shapes.
Outcome criterion2() {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> nb(1, 4), nh(1, 3);
    double maxErr = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double bodyFold = 1.0, headFold = 0.0, contributions = 0.0;
        int b = nb(rng), h = nh(rng);
        for (int k = 0; k < b; ++k) {
            double v = u(rng);
            bodyFold = truth::tnorm(bodyFold, v);
            contributions += 1.0 - v;
        }
        for (int k = 0; k < h; ++k) {
            double v = u(rng);
            headFold = truth::tconorm(headFold, v);
            contributions += v;
        }
        double law = std::max(0.0, bodyFold - headFold);
        maxErr = std::max(maxErr,
                          std::abs(law - truth::distanceFromSatisfaction(contributions)));
    }
    return {maxErr <= 1e-12, "max error " + num(maxErr, "%.1e")};
}

// 3. Continuous optimum against exhaustive grid search on random small
// programs, both metrics, grid step 0.05.
Outcome criterion3() {
    auto start = Clock::now();
    testutil::Rng rng(31);
    int fails = 0, solves = 0;
    std::string firstBad;
    for (int i = 0; i < 200; ++i) {
        testutil::GenCase gc = testutil::genGroundCase(rng, 4, 12);
        for (DistanceMetric m : {DistanceMetric::L1, DistanceMetric::SquaredL2}) {
            ++solves;
            try {
                auto ins = testutil::makeInstance(gc.programText, gc.factsText);
                InferenceConfig cfg;
                cfg.metric = m;
                cfg.tolerance = 1e-8;
                cfg.activationThreshold = 1e-6;
                Grounder g(ins.prog, ins.facts, sims());
                OracleResult grid =
                    bruteForceMAP(g, evidenceInterpretation(ins.prog, ins.facts), 0.05, cfg);
                Interpretation interp = evidenceInterpretation(ins.prog, ins.facts);
                mapInference(g, interp, cfg);
                double obj = objectiveValue(g, interp, cfg);
                bool ok = std::isfinite(grid.objective) && obj <= grid.objective + 1e-5 &&
                          obj >= grid.objective - 0.02;
                if (!ok) {
                    ++fails;
                    if (firstBad.empty()) {
                        firstBad = "case " + std::to_string(i) + " solver " + num(obj, "%.6f") +
                                   " grid " + num(grid.objective, "%.6f");
                    }
                }
            } catch (const Error& e) {
                ++fails;
                if (firstBad.empty()) {
                    firstBad = "case " + std::to_string(i) + " threw: " + e.what();
                }
            }
        }
    }
    double secs = secondsSince(start);
    bool pass = fails == 0 && secs < 60.0;
    std::string note = std::to_string(solves) + " solves, " + num(secs) + " s";
    if (!firstBad.empty()) note += "; " + firstBad;
    return {pass, note};
}

// 4. Opposing unit rules under plain-weight squared distance settle at the
// weight ratio.
Outcome criterion4() {
    const double pairs[3][2] = {{1.0, 1.0}, {2.0, 1.0}, {1.0, 3.0}};
    double maxErr = 0.0;
    for (const auto& p : pairs) {
        char text[160];
        std::snprintf(text, sizeof text,
                      "closed seen(ent).\nopen q(ent).\n%.1f : q(a) .\n%.1f : ~q(a) .\n",
                      p[0], p[1]);
        auto ins = testutil::makeInstance(text, "seen\ta\t1.0\n");
        InferenceConfig cfg;
        cfg.weightForm = WeightForm::PlainWeight;
        cfg.tolerance = 1e-9;
        Grounder g(ins.prog, ins.facts, sims());
        Interpretation interp = evidenceInterpretation(ins.prog, ins.facts);
        mapInference(g, interp, cfg);
        AtomId id = interp.lookup({ins.prog.predId("q"), {ins.prog.symbols.intern("a")}});
        double got = interp.value(id);
        maxErr = std::max(maxErr, std::abs(got - p[0] / (p[0] + p[1])));
    }
    return {maxErr <= 1e-4, "max deviation " + num(maxErr, "%.2e")};
}

// 5. Lazy activation reaches the eager optimum, and every ground rule left
// unsatisfied at the lazy solution sits in the active set.
Outcome criterion5() {
    testutil::Rng rng(47);
    int fails = 0;
    std::string firstBad;
    for (int i = 0; i < 100; ++i) {
        testutil::GenCase gc =
            i < 50 ? testutil::genGroundCase(rng, 4, 12)
                   : testutil::genRelationalCase(rng, testutil::pick(rng, 0, 1) == 1,
                                                 testutil::pick(rng, 0, 1) == 1);
        try {
            auto ins = testutil::makeInstance(gc.programText, gc.factsText);
            InferenceConfig cfg;
            cfg.metric = i % 2 == 0 ? DistanceMetric::SquaredL2 : DistanceMetric::L1;
            cfg.tolerance = 1e-8;
            cfg.activationThreshold = 1e-8;
            Grounder g(ins.prog, ins.facts, sims());

            Interpretation eager = evidenceInterpretation(ins.prog, ins.facts);
            std::vector<GroundRule> all = g.groundAll(eager);
            if (all.size() > 200) {
                ++fails;
                if (firstBad.empty()) firstBad = "case too large: " + std::to_string(all.size());
                continue;
            }
            ConvexProgram cp = buildConvexProgram(all, eager, cfg);
            SolverOptions so;
            so.tolerance = 1e-8;
            SolverResult res = solveConvex(cp, so);
            applySolution(cp, res.x, eager);
            double eagerObj = objectiveValue(g, eager, cfg);

            Interpretation lazy = evidenceInterpretation(ins.prog, ins.facts);
            ActiveSet active;
            mapInference(g, lazy, cfg, &active);
            double lazyObj = objectiveValue(g, lazy, cfg);

            bool ok = std::abs(lazyObj - eagerObj) <= 1e-5;
            Interpretation scratch = lazy;
            for (const GroundRule& r : g.groundAll(scratch)) {
                if (r.distanceAt(scratch) > 1e-6 && active.find(keyOf(g, r)) < 0) {
                    ok = false;
                    if (firstBad.empty()) {
                        firstBad = "case " + std::to_string(i) + " missing active rule";
                    }
                }
            }
            if (!ok) {
                ++fails;
                if (firstBad.empty()) {
                    firstBad = "case " + std::to_string(i) + " lazy " + num(lazyObj, "%.7f") +
                               " eager " + num(eagerObj, "%.7f");
                }
            }
        } catch (const Error& e) {
            ++fails;
            if (firstBad.empty()) firstBad = "case " + std::to_string(i) + " threw: " + e.what();
        }
    }
    std::string note = "100 cases";
    if (!firstBad.empty()) note += "; " + firstBad;
    return {fails == 0, note};
}

// 6. Solutions respect transitivity and exclusivity, and a contradictory
// hard system is rejected with a conflict description.
Outcome criterion6() {
    testutil::Rng rng(59);
    int fails = 0;
    std::string firstBad;
    for (int i = 0; i < 50; ++i) {
        testutil::GenCase gc = testutil::genRelationalCase(rng, true, true);
        try {
            auto ins = testutil::makeInstance(gc.programText, gc.factsText);
            InferenceConfig cfg;
            cfg.tolerance = 1e-8;
            Grounder g(ins.prog, ins.facts, sims());
            Interpretation interp = evidenceInterpretation(ins.prog, ins.facts);
            mapInference(g, interp, cfg);
            Interpretation scratch = interp;
            for (const GroundRule& r : g.groundAll(scratch)) {
                if (r.kind != GroundKind::Soft && r.distanceAt(scratch) > 1e-6) {
                    ++fails;
                    if (firstBad.empty()) {
                        firstBad = "case " + std::to_string(i) + " violates a constraint by " +
                                   num(r.distanceAt(scratch), "%.2e");
                    }
                    break;
                }
            }
        } catch (const Error& e) {
            ++fails;
            if (firstBad.empty()) firstBad = "case " + std::to_string(i) + " threw: " + e.what();
        }
    }

    bool rejected = false;
    try {
        auto ins = testutil::makeInstance(
            "closed ev(ent).\nopen q(ent).\n"
            "HARD : ev(A) => q(A) .\n"
            "HARD : ~q(A) | ~q(A) .\n",
            "ev\ta\t0.9\n");
        Grounder g(ins.prog, ins.facts, sims());
        Interpretation interp = evidenceInterpretation(ins.prog, ins.facts);
        mapInference(g, interp, InferenceConfig{});
    } catch (const SolveError& e) {
        std::string msg = e.what();
        rejected = msg.find("hard") != std::string::npos && msg.size() > 20;
    }
    if (!rejected && firstBad.empty()) firstBad = "contradiction was not rejected";

    std::string note = "50 feasible cases, 1 contradiction";
    if (!firstBad.empty()) note += "; " + firstBad;
    return {fails == 0 && rejected, note};
}

// 7. Weights fit from labels recover the generating order and matching
// decision quality.
Outcome criterion7() {
    auto start = Clock::now();
    int orderOk = 0;
    double sumLearned = 0.0, sumGenerating = 0.0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        ClassifyInstance inst = makeClassifyInstance(seed);
        InferenceConfig icfg;

        double f1Gen =
            solveF1(inst.prog, inst.facts, inst.goldPositives, icfg);

        Program neutral = inst.prog;
        std::vector<double> ones(neutral.softRules.size(), 1.0);
        applyWeights(neutral, ones);
        LearningConfig lc;
        lc.iterations = 50;
        lc.learningRate = 0.001;
        lc.inference = icfg;
        lc.inference.tolerance = 1e-5;
        lc.inference.maxOuterIterations = 8;
        LearnReport rep = learnWeights(neutral, inst.facts, sims(), inst.labels, lc);
        if (rep.weights[0] > rep.weights[1]) ++orderOk;

        Program learned = inst.prog;
        applyWeights(learned, rep.weights);
        double f1Learned = solveF1(learned, inst.facts, inst.goldPositives, icfg);

        sumLearned += f1Learned;
        sumGenerating += f1Gen;
    }
    double meanL = sumLearned / 10.0, meanG = sumGenerating / 10.0;
    double secs = secondsSince(start);
    bool pass = orderOk >= 9 && std::abs(meanL - meanG) <= 0.05 && secs < 300.0;
    return {pass, "order " + std::to_string(orderOk) + "/10, F1 learned " + num(meanL) +
                      " vs generating " + num(meanG) + ", " + num(secs) + " s"};
}

// 8. Aggregate set rules beat their element-level rewriting as attribute
// noise grows.
Outcome criterion8() {
    auto start = Clock::now();
    std::string detail;
    bool pass = true;
    for (double attrNoise : {0.4, 0.6, 0.8}) {
        int wins = 0;
        for (uint64_t seed = 0; seed < 10; ++seed) {
            AlignmentInstance inst = makeAlignmentInstance(seed, attrNoise, 0.2);
            InferenceConfig cfg;
            double withSets = solveF1(inst.prog, inst.facts, inst.goldPositives, cfg);
            Program flat = desugarSets(inst.prog);
            double without = solveF1(flat, inst.facts, inst.goldPositives, cfg);
            if (withSets >= without - 1e-12) ++wins;
        }
        if (!detail.empty()) detail += ", ";
        detail += num(attrNoise, "%.1f") + ": " + std::to_string(wins) + "/10";
        if (wins < 8) pass = false;
    }
    return {pass, detail + ", " + num(secondsSince(start)) + " s"};
}

// 9. One aggregate grounding per entity pair against k squared after the
// rewrite.
Outcome criterion9() {
    for (int k : {2, 4, 8}) {
        std::string factText;
        for (int i = 0; i < k; ++i) {
            factText += "childa\ta\tx" + std::to_string(i) + "\n";
            factText += "childb\tb\ty" + std::to_string(i) + "\n";
        }
        auto ins = testutil::makeInstance(
            "closed childa(n, n).\nclosed childb(n, n).\nopen align(n, n).\n"
            "1.0 : setsim[align]({A.childa}, {B.childb}) => align(A, B) .\n",
            factText);
        Program flat = desugarSets(ins.prog);
        validateProgram(flat);

        auto countForPair = [&](const Program& prog) {
            Grounder g(prog, ins.facts, sims());
            Interpretation interp = evidenceInterpretation(prog, ins.facts);
            std::vector<GroundRule> rules = g.groundClause(0, interp);
            const Clause& clause = g.clauses()[0];
            size_t ia = 0, ib = 0;
            for (size_t v = 0; v < clause.varNames.size(); ++v) {
                if (clause.varNames[v] == "A") ia = v;
                if (clause.varNames[v] == "B") ib = v;
            }
            Sym a = prog.symbols.find("a"), b = prog.symbols.find("b");
            int64_t count = 0;
            for (const GroundRule& r : rules) {
                if (r.binding[ia] == a && r.binding[ib] == b) ++count;
            }
            return count;
        };

        int64_t aggregate = countForPair(ins.prog);
        int64_t element = countForPair(flat);
        if (aggregate != 1 || element != static_cast<int64_t>(k) * k) {
            return {false, "k " + std::to_string(k) + ": aggregate " + std::to_string(aggregate) +
                               ", element " + std::to_string(element)};
        }
    }
    return {true, "k in {2, 4, 8}: 1 vs k squared groundings"};
}

// 10. Solve time grows polynomially with the active rule count, and the
// largest instance stays under a minute.
Outcome criterion10() {
    const int sizes[4] = {350, 1700, 3400, 6700};
    const int targets[4] = {1000, 5000, 10000, 20000};
    std::vector<double> xs, ys;
    double largestWall = 0.0;
    std::string counts;
    for (int i = 0; i < 4; ++i) {
        double bestSolve = kInf;
        int32_t rules = 0;
        int runs = i < 2 ? 2 : 1; // repeat tiny runs to damp timer noise
        double wall = 0.0;
        for (int rep = 0; rep < runs; ++rep) {
            ChainInstance inst = makeChainInstance(sizes[i], 1);
            Grounder g(inst.prog, inst.facts, sims());
            Interpretation interp = evidenceInterpretation(inst.prog, inst.facts);
            auto t0 = Clock::now();
            RunReport r = mapInference(g, interp, InferenceConfig{});
            wall = secondsSince(t0);
            bestSolve = std::min(bestSolve, r.solveSeconds);
            rules = r.activeRuleCount;
        }
        if (rules < targets[i] * 4 / 5 || rules > targets[i] * 6 / 5) {
            return {false, "unexpected active count " + std::to_string(rules) + " at size " +
                               std::to_string(sizes[i])};
        }
        if (i == 3) largestWall = wall;
        xs.push_back(std::log(static_cast<double>(rules)));
        ys.push_back(std::log(std::max(bestSolve, 1e-4)));
        if (!counts.empty()) counts += ", ";
        counts += std::to_string(rules) + ":" + num(bestSolve) + "s";
    }
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    double slope = sxy / sxx;
    bool pass = slope <= 3.5 && largestWall < 60.0;
    return {pass, "slope " + num(slope, "%.2f") + ", largest " + num(largestWall) + " s (" +
                      counts + ")"};
}

// 11. Text round trips and command exit codes.
Outcome criterion11() {
    const char* programs[2] = {
        "open sim(doc, doc).\n"
        "closed text(doc, str).\n"
        "closed editor(doc, user).\n"
        "closed linksTo(doc, doc).\n"
        "1.2 : fn[levenshtein](A.text, B.text) => sim(A, B) .\n"
        "1.0 : setsim[sim]({A.editor}, {B.editor}) => sim(A, B) .\n"
        "0.8 : setsim[sim]({A.linksTo} ++ {A.linksTo.linksTo}, "
        "{B.linksTo} ++ {B.linksTo.linksTo}) => sim(A, B) .\n"
        "HARD : sim(A, B) & sim(B, C) => sim(A, C) .\n",
        "closed link(page, page).\nopen hasCat(page, cat).\n"
        "1.0 : link(A, B) & hasCat(B, C) & A != B => hasCat(A, C) .\n"
        "EXCLUSIVE: hasCat(A, *).\n"};
    for (const char* text : programs) {
        Program prog = parseProgram(text);
        validateProgram(prog);
        std::string once = printProgram(prog);
        Program again = parseProgram(once);
        validateProgram(again);
        if (printProgram(again) != once) return {false, "program text did not round trip"};
    }

    Program prog = parseProgram(
        "closed name(node, str).\nclosed edge(node, node).\nopen align(node, node).\n"
        "1.0 : edge(A, B) => align(A, B) .\n");
    std::istringstream rows("edge\tzeta\talpha\t0.5\nedge\talpha\tzeta\nname\tzeta\tzed\n");
    FactSet facts(static_cast<int>(prog.schema.size()));
    loadFacts(prog, rows, "inline", facts);
    std::string text = factsToText(prog, facts);
    Program fresh = parseProgram(
        "closed name(node, str).\nclosed edge(node, node).\nopen align(node, node).\n"
        "1.0 : edge(A, B) => align(A, B) .\n");
    std::istringstream back(text);
    FactSet reloaded(static_cast<int>(fresh.schema.size()));
    loadFacts(fresh, back, "inline", reloaded);
    if (factsToText(fresh, reloaded) != text) return {false, "fact text is not byte stable"};

    std::string dir = "/tmp/psl_acc_" + std::to_string(::getpid());
    std::filesystem::create_directories(dir);
    writeTextFile(dir + "/prog.psl",
                  "closed ev(ent).\nopen q(ent).\n1.0 : ev(A) => q(A) .\n");
    writeTextFile(dir + "/facts.tsv", "ev\ta\t0.8\n");
    writeTextFile(dir + "/bad.psl", "closed ev(ent).\n???\n");
    auto exitCode = [&](const std::string& args) {
        std::string cmd = std::string(PSL_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null";
        int rc = std::system(cmd.c_str());
        return rc == -1 || !WIFEXITED(rc) ? -1 : WEXITSTATUS(rc);
    };
    if (exitCode("infer -p " + dir + "/prog.psl -d " + dir + "/facts.tsv -o " + dir +
                 "/out.tsv") != 0) {
        return {false, "well-formed inference run did not exit zero"};
    }
    if (exitCode("infer -p " + dir + "/bad.psl -d " + dir + "/facts.tsv") != 1) {
        return {false, "parse failure did not exit with one"};
    }
    if (exitCode("infer -p " + dir + "/prog.psl -d " + dir + "/missing.tsv") != 1) {
        return {false, "missing data file did not exit with one"};
    }
    if (exitCode("") == 0) return {false, "bare invocation did not fail"};
    return {true, "programs, facts and exit codes"};
}

} // namespace

int main() {
    Outcome (*criteria[])() = {criterion1, criterion2, criterion3, criterion4,
                               criterion5, criterion6, criterion7, criterion8,
                               criterion9, criterion10, criterion11};
    bool allPass = true;
    for (size_t i = 0; i < std::size(criteria); ++i) {
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("unexpected exception: ") + e.what()};
        }
        allPass = allPass && o.pass;
        std::printf("criterion %zu: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL",
                    o.note.c_str());
        std::fflush(stdout);
    }
    return allPass ? 0 : 1;
}
