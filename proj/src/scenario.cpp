#include "psl/scenario.hpp"

#include <cstdio>
#include <random>
#include <string>

#include "psl/infer.hpp"
#include "psl/noise.hpp"
#include "psl/parser.hpp"

namespace psl {

namespace {

double unitReal(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string randomName(std::mt19937_64& rng, size_t len) {
    std::string s(len, 'a');
    for (char& c : s) c = static_cast<char>('a' + rng() % 26);
    return s;
}

std::string entityName(const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03d", prefix, i);
    return buf;
}

} // namespace

ClassifyInstance makeClassifyInstance(uint64_t seed, int entities, int classes, double attrWeight,
                                      double linkWeight) {
    ClassifyInstance inst;
    inst.prog = parseProgram(
        "open sim(ent, ent).\n"
        "closed attr(ent, ent).\n"
        "closed link(ent, ent).\n"
        "1.0 : attr(A, B) => sim(A, B) .\n"
        "1.0 : link(A, B) => sim(A, B) .\n"
        "1.0 : ~sim(A, B) .\n");
    inst.prog.softRules[0].weight = attrWeight;
    inst.prog.softRules[0].weightText.clear();
    inst.prog.softRules[1].weight = linkWeight;
    inst.prog.softRules[1].weightText.clear();

    std::mt19937_64 rng(seed);
    PredId simP = inst.prog.predId("sim");
    PredId attrP = inst.prog.predId("attr");
    PredId linkP = inst.prog.predId("link");
    std::vector<Sym> ent(static_cast<size_t>(entities));
    std::vector<int> cls(static_cast<size_t>(entities));
    int perClass = entities / classes;
    for (int i = 0; i < entities; ++i) {
        ent[static_cast<size_t>(i)] = inst.prog.symbols.intern(entityName("e", i));
        cls[static_cast<size_t>(i)] = std::min(i / perClass, classes - 1);
    }

    inst.facts = FactSet(static_cast<int>(inst.prog.schema.size()));
    for (int i = 0; i < entities; ++i) {
        for (int j = 0; j < entities; ++j) {
            if (i == j) continue;
            bool same = cls[static_cast<size_t>(i)] == cls[static_cast<size_t>(j)];
            if (same) {
                double a = 0.7 + 0.25 * unitReal(rng);
                inst.facts.addRow(inst.prog, attrP,
                                  {ent[static_cast<size_t>(i)], ent[static_cast<size_t>(j)]}, a,
                                  "generated");
                if (unitReal(rng) < 0.8) {
                    inst.facts.addRow(inst.prog, linkP,
                                      {ent[static_cast<size_t>(i)], ent[static_cast<size_t>(j)]},
                                      1.0, "generated");
                }
            } else {
                if (unitReal(rng) < 0.06) {
                    double a = 0.05 + 0.25 * unitReal(rng);
                    inst.facts.addRow(inst.prog, attrP,
                                      {ent[static_cast<size_t>(i)], ent[static_cast<size_t>(j)]}, a,
                                      "generated");
                }
                if (unitReal(rng) < 0.03) {
                    inst.facts.addRow(inst.prog, linkP,
                                      {ent[static_cast<size_t>(i)], ent[static_cast<size_t>(j)]},
                                      1.0, "generated");
                }
            }
            if (same) {
                inst.goldPositives.push_back(
                    GroundAtom{simP, {ent[static_cast<size_t>(i)], ent[static_cast<size_t>(j)]}});
            }
        }
    }
    inst.facts.finalize(inst.prog);

    // Training labels are the model state at the generating weights, so those
    // weights are a fixed point of the learning update. The evidence ranges
    // keep that state above 0.5 exactly on same-class pairs.
    SimilarityRegistry sims = SimilarityRegistry::builtins();
    Grounder g(inst.prog, inst.facts, sims);
    Interpretation interp = evidenceInterpretation(inst.prog, inst.facts);
    mapInference(g, interp, InferenceConfig{});
    inst.labels = std::move(interp);
    return inst;
}

AlignmentInstance makeAlignmentInstance(uint64_t seed, double attrNoise, double structNoise,
                                        int branching, int depth) {
    AlignmentInstance inst;
    inst.prog = parseProgram(
        "open align(ca, cb).\n"
        "closed childa(ca, ca).\n"
        "closed childb(cb, cb).\n"
        "closed namea(ca, label).\n"
        "closed nameb(cb, label).\n"
        "1.5 : fn[dice](A.namea, B.nameb) => align(A, B) .\n"
        "1.0 : setsim[align]({A.childa}, {B.childb}) => align(A, B) .\n"
        "0.4 : ~align(A, B) .\n");

    std::mt19937_64 rng(seed);
    PredId alignP = inst.prog.predId("align");
    PredId childaP = inst.prog.predId("childa");
    PredId childbP = inst.prog.predId("childb");
    PredId nameaP = inst.prog.predId("namea");
    PredId namebP = inst.prog.predId("nameb");

    // Complete tree, level order: node i at depth d has children while
    // d < depth.
    std::vector<int> parent{-1};
    int levelStart = 0;
    for (int d = 0; d < depth; ++d) {
        int levelEnd = static_cast<int>(parent.size());
        for (int p = levelStart; p < levelEnd; ++p) {
            for (int b = 0; b < branching; ++b) parent.push_back(p);
        }
        levelStart = levelEnd;
    }
    int n = static_cast<int>(parent.size());
    inst.concepts = n;

    std::vector<Sym> aSym(static_cast<size_t>(n)), bSym(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        aSym[static_cast<size_t>(i)] = inst.prog.symbols.intern(entityName("a", i));
        bSym[static_cast<size_t>(i)] = inst.prog.symbols.intern(entityName("b", i));
    }

    inst.facts = FactSet(static_cast<int>(inst.prog.schema.size()));
    for (int i = 0; i < n; ++i) {
        std::string name = randomName(rng, 8);
        Sym nameSym = inst.prog.symbols.intern(name);
        inst.facts.addRow(inst.prog, nameaP, {aSym[static_cast<size_t>(i)], nameSym}, 1.0, "gen");
        inst.facts.addRow(inst.prog, namebP, {bSym[static_cast<size_t>(i)], nameSym}, 1.0, "gen");
        if (parent[static_cast<size_t>(i)] >= 0) {
            Sym pa = aSym[static_cast<size_t>(parent[static_cast<size_t>(i)])];
            Sym pb = bSym[static_cast<size_t>(parent[static_cast<size_t>(i)])];
            inst.facts.addRow(inst.prog, childaP, {pa, aSym[static_cast<size_t>(i)]}, 1.0, "gen");
            inst.facts.addRow(inst.prog, childbP, {pb, bSym[static_cast<size_t>(i)]}, 1.0, "gen");
        }
    }
    inst.facts.finalize(inst.prog);

    NoiseSpec spec;
    spec.attributeNoise = attrNoise;
    spec.structuralNoise = structNoise;
    spec.seed = seed ^ 0x9e3779b97f4a7c15ull;
    spec.attributePreds = {namebP};
    spec.relationPreds = {childbP};
    inst.facts = generateNoise(inst.prog, inst.facts, spec);

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            GroundAtom atom{alignP, {aSym[static_cast<size_t>(i)], bSym[static_cast<size_t>(j)]}};
            AtomId id = inst.labels.registerQuery(atom);
            inst.labels.setValue(id, i == j ? 1.0 : 0.0);
            if (i == j) inst.goldPositives.push_back(atom);
        }
    }
    return inst;
}

ChainInstance makeChainInstance(int entities, uint64_t seed) {
    ChainInstance inst;
    inst.prog = parseProgram(
        "open score(ent).\n"
        "closed seed(ent).\n"
        "closed link(ent, ent).\n"
        "2.0 : seed(A) => score(A) .\n"
        "1.0 : link(A, B) & score(A) => score(B) .\n"
        "0.5 : ~score(A) .\n");

    std::mt19937_64 rng(seed);
    PredId seedP = inst.prog.predId("seed");
    PredId linkP = inst.prog.predId("link");
    inst.facts = FactSet(static_cast<int>(inst.prog.schema.size()));
    Sym prev = -1;
    for (int i = 0; i < entities; ++i) {
        Sym e = inst.prog.symbols.intern(entityName("n", i));
        inst.facts.addRow(inst.prog, seedP, {e}, 0.7 + 0.25 * unitReal(rng), "gen");
        if (prev >= 0) inst.facts.addRow(inst.prog, linkP, {prev, e}, 1.0, "gen");
        prev = e;
    }
    inst.facts.finalize(inst.prog);
    return inst;
}

} // namespace psl
