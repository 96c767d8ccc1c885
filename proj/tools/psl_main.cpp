#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "psl/desugar.hpp"
#include "psl/error.hpp"
#include "psl/infer.hpp"
#include "psl/io.hpp"
#include "psl/learn.hpp"
#include "psl/metrics.hpp"
#include "psl/noise.hpp"
#include "psl/oracle.hpp"
#include "psl/parser.hpp"

namespace {

struct CommonOpts {
    std::string programPath;
    std::string dataPath;
    std::string metric = "l2";
    std::string weightForm = "squared";
    std::string setNorm = "sizesum";
    double activation = 0.01;
    double tolerance = 1e-6;
    int maxOuter = 100;
    bool serial = false;
};

void addCommon(CLI::App* cmd, CommonOpts& o, bool needData) {
    cmd->add_option("-p,--program", o.programPath, "rule program file")->required();
    auto* d = cmd->add_option("-d,--data", o.dataPath, "fact TSV file");
    if (needData) d->required();
    cmd->add_option("--metric", o.metric, "distance metric: l1 or l2")
        ->check(CLI::IsMember({"l1", "l2"}));
    cmd->add_option("--weight-form", o.weightForm, "l2 penalty scale: squared or plain")
        ->check(CLI::IsMember({"squared", "plain"}));
    cmd->add_option("--set-norm", o.setNorm, "set similarity normalizer: sizesum or paircount")
        ->check(CLI::IsMember({"sizesum", "paircount"}));
    cmd->add_option("--activation", o.activation, "lazy activation threshold");
    cmd->add_option("--tolerance", o.tolerance, "solver convergence tolerance");
    cmd->add_option("--max-outer", o.maxOuter, "activation sweep limit");
    cmd->add_flag("--serial", o.serial, "disable parallel kernels");
}

psl::InferenceConfig toConfig(const CommonOpts& o) {
    psl::InferenceConfig cfg;
    cfg.metric = o.metric == "l1" ? psl::DistanceMetric::L1 : psl::DistanceMetric::SquaredL2;
    cfg.weightForm = o.weightForm == "plain" ? psl::WeightForm::PlainWeight
                                             : psl::WeightForm::SquaredWeight;
    cfg.setNormalizer = o.setNorm == "paircount" ? psl::SetNormalizer::PairCount
                                                 : psl::SetNormalizer::SizeSum;
    cfg.activationThreshold = o.activation;
    cfg.tolerance = o.tolerance;
    cfg.maxOuterIterations = o.maxOuter;
    cfg.execMode = o.serial ? psl::ExecMode::Serial : psl::ExecMode::Auto;
    return cfg;
}

psl::Program loadProgram(const std::string& path) {
    psl::Program prog = psl::parseProgram(psl::readTextFile(path));
    psl::validateProgram(prog);
    return prog;
}

std::vector<psl::PredId> resolvePreds(const psl::Program& prog,
                                      const std::vector<std::string>& names, const char* what) {
    std::vector<psl::PredId> out;
    for (const std::string& n : names) {
        psl::PredId p = prog.predId(n);
        if (p < 0) throw psl::DomainError(std::string(what) + " predicate '" + n + "' not declared");
        out.push_back(p);
    }
    return out;
}

int runInfer(const CommonOpts& common, const std::string& outPath, const std::string& weightsPath,
             bool printReport) {
    psl::Program prog = loadProgram(common.programPath);
    if (!weightsPath.empty()) {
        std::ifstream in(weightsPath);
        if (!in) throw psl::Error("cannot open '" + weightsPath + "'");
        psl::applyWeights(prog, psl::loadWeights(in, weightsPath));
    }
    psl::FactSet facts = psl::loadFactsFile(prog, common.dataPath);
    psl::SimilarityRegistry sims = psl::SimilarityRegistry::builtins();
    psl::Grounder grounder(prog, facts, sims, {toConfig(common).setNormalizer});
    psl::Interpretation interp = psl::evidenceInterpretation(prog, facts);
    psl::RunReport rep = psl::mapInference(grounder, interp, toConfig(common));
    std::string text = psl::interpretationToText(prog, interp);
    if (outPath.empty() || outPath == "-") {
        std::cout << text;
    } else {
        psl::writeTextFile(outPath, text);
    }
    if (printReport) {
        std::cerr << "objective\t" << rep.objective << "\n"
                  << "converged\t" << (rep.converged ? "yes" : "no") << "\n"
                  << "sweeps\t" << rep.outerIterations << "\n"
                  << "solver_iterations\t" << rep.solverIterations << "\n"
                  << "active_rules\t" << rep.activeRuleCount << "\n"
                  << "query_atoms\t" << rep.atomCount << "\n"
                  << "ground_seconds\t" << rep.groundSeconds << "\n"
                  << "solve_seconds\t" << rep.solveSeconds << "\n";
    }
    return 0;
}

int runLearn(const CommonOpts& common, const std::string& labelsPath, const std::string& outPath,
             double rate, int iters, double minWeight, bool noAverage) {
    psl::Program prog = loadProgram(common.programPath);
    psl::FactSet facts = psl::loadFactsFile(prog, common.dataPath);
    psl::SimilarityRegistry sims = psl::SimilarityRegistry::builtins();

    psl::Interpretation observed = psl::evidenceInterpretation(prog, facts);
    std::ifstream in(labelsPath);
    if (!in) throw psl::Error("cannot open '" + labelsPath + "'");
    psl::loadLabels(prog, in, labelsPath, observed);

    psl::LearningConfig cfg;
    cfg.learningRate = rate;
    cfg.iterations = iters;
    cfg.minWeight = minWeight;
    cfg.averaging = !noAverage;
    cfg.inference = toConfig(common);
    psl::LearnReport rep = psl::learnWeights(prog, facts, sims, observed, cfg);

    std::string text = psl::weightsToText(rep.weights);
    if (outPath.empty() || outPath == "-") {
        std::cout << text;
    } else {
        psl::writeTextFile(outPath, text);
    }
    return 0;
}

int runEval(const std::string& programPath, const std::string& predPath,
            const std::string& goldPath, double threshold) {
    psl::Program prog = loadProgram(programPath);
    psl::Interpretation pred, gold;
    {
        std::ifstream in(predPath);
        if (!in) throw psl::Error("cannot open '" + predPath + "'");
        psl::loadLabels(prog, in, predPath, pred);
    }
    {
        std::ifstream in(goldPath);
        if (!in) throw psl::Error("cannot open '" + goldPath + "'");
        psl::loadLabels(prog, in, goldPath, gold);
    }
    psl::Metrics m = psl::f1Score(psl::thresholdDecisions(prog, pred, threshold),
                                  psl::thresholdDecisions(prog, gold, threshold));
    std::cout << psl::formatMetrics(m) << "\n";
    return 0;
}

int runGenNoise(const std::string& programPath, const std::string& dataPath,
                const std::string& outPath, double attrNoise, double structNoise, uint64_t seed,
                const std::vector<std::string>& attrPreds,
                const std::vector<std::string>& relPreds) {
    psl::Program prog = loadProgram(programPath);
    psl::FactSet facts = psl::loadFactsFile(prog, dataPath);
    psl::NoiseSpec spec;
    spec.attributeNoise = attrNoise;
    spec.structuralNoise = structNoise;
    spec.seed = seed;
    spec.attributePreds = resolvePreds(prog, attrPreds, "attribute");
    spec.relationPreds = resolvePreds(prog, relPreds, "relation");
    psl::FactSet noisy = psl::generateNoise(prog, facts, spec);
    std::string text = psl::factsToText(prog, noisy);
    if (outPath.empty() || outPath == "-") {
        std::cout << text;
    } else {
        psl::writeTextFile(outPath, text);
    }
    return 0;
}

int runOracle(const CommonOpts& common, const std::string& outPath, double gridStep) {
    psl::Program prog = loadProgram(common.programPath);
    psl::FactSet facts = psl::loadFactsFile(prog, common.dataPath);
    psl::SimilarityRegistry sims = psl::SimilarityRegistry::builtins();
    psl::Grounder grounder(prog, facts, sims, {toConfig(common).setNormalizer});
    psl::Interpretation evidence = psl::evidenceInterpretation(prog, facts);
    psl::OracleResult res = psl::bruteForceMAP(grounder, evidence, gridStep, toConfig(common));
    std::cerr << "objective\t" << res.objective << "\n"
              << "query_atoms\t" << res.queryAtoms << "\n"
              << "grid_points\t" << res.evaluated << "\n";
    std::string text = psl::interpretationToText(prog, res.interp);
    if (outPath.empty() || outPath == "-") {
        std::cout << text;
    } else {
        psl::writeTextFile(outPath, text);
    }
    return 0;
}

int runDesugar(const std::string& programPath, const std::string& outPath) {
    psl::Program prog = loadProgram(programPath);
    psl::Program flat = psl::desugarSets(prog);
    psl::validateProgram(flat);
    std::string text = psl::printProgram(flat);
    if (outPath.empty() || outPath == "-") {
        std::cout << text;
    } else {
        psl::writeTextFile(outPath, text);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"similarity-rule reasoning engine"};
    app.require_subcommand(1);

    CommonOpts inferOpts;
    std::string inferOut, inferWeights;
    bool inferReport = false;
    CLI::App* infer = app.add_subcommand("infer", "most probable values for the query atoms");
    addCommon(infer, inferOpts, true);
    infer->add_option("-o,--output", inferOut, "interpretation output file, '-' for stdout");
    infer->add_option("--weights", inferWeights, "weights file overriding program weights");
    infer->add_flag("--report", inferReport, "print a run report to stderr");

    CommonOpts learnOpts;
    std::string learnLabels, learnOut;
    double learnRate = 0.1, learnMinWeight = 1e-3;
    int learnIters = 50;
    bool learnNoAvg = false;
    CLI::App* learn = app.add_subcommand("learn", "fit rule weights to labeled atoms");
    addCommon(learn, learnOpts, true);
    learn->add_option("-l,--labels", learnLabels, "labeled query atoms TSV")->required();
    learn->add_option("-o,--output", learnOut, "weights output file, '-' for stdout");
    learn->add_option("--rate", learnRate, "gradient step size");
    learn->add_option("--iters", learnIters, "gradient passes");
    learn->add_option("--min-weight", learnMinWeight, "weight floor");
    learn->add_flag("--no-average", learnNoAvg, "report final weights instead of the mean");

    std::string evalProgram, evalPred, evalGold;
    double evalThreshold = 0.5;
    CLI::App* eval = app.add_subcommand("eval", "precision, recall and F1 of predictions");
    eval->add_option("-p,--program", evalProgram, "rule program file")->required();
    eval->add_option("--predictions", evalPred, "predicted atom values TSV")->required();
    eval->add_option("--gold", evalGold, "gold atom TSV")->required();
    eval->add_option("--threshold", evalThreshold, "decision threshold");

    std::string noiseProgram, noiseData, noiseOut;
    double noiseAttr = 0.0, noiseStruct = 0.0;
    uint64_t noiseSeed = 0;
    std::vector<std::string> noiseAttrPreds, noiseRelPreds;
    CLI::App* genNoise = app.add_subcommand("gen-noise", "perturb a fact file");
    genNoise->add_option("-p,--program", noiseProgram, "rule program file")->required();
    genNoise->add_option("-d,--data", noiseData, "fact TSV file")->required();
    genNoise->add_option("-o,--output", noiseOut, "noisy fact output, '-' for stdout");
    genNoise->add_option("--attr-noise", noiseAttr, "fraction of attribute strings replaced");
    genNoise->add_option("--struct-noise", noiseStruct, "fraction of relation rows dropped");
    genNoise->add_option("--seed", noiseSeed, "random seed");
    genNoise->add_option("--attr-pred", noiseAttrPreds, "attribute predicate, repeatable");
    genNoise->add_option("--rel-pred", noiseRelPreds, "relation predicate, repeatable");

    CommonOpts oracleOpts;
    std::string oracleOut;
    double oracleStep = 0.05;
    CLI::App* oracle = app.add_subcommand("oracle", "exhaustive grid search on tiny instances");
    addCommon(oracle, oracleOpts, true);
    oracle->add_option("-o,--output", oracleOut, "interpretation output, '-' for stdout");
    oracle->add_option("--grid-step", oracleStep, "grid resolution, must divide 1");

    std::string desugarProgram, desugarOut;
    CLI::App* desugar = app.add_subcommand("desugar", "rewrite set similarities element-wise");
    desugar->add_option("-p,--program", desugarProgram, "rule program file")->required();
    desugar->add_option("-o,--output", desugarOut, "program output, '-' for stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (infer->parsed()) return runInfer(inferOpts, inferOut, inferWeights, inferReport);
        if (learn->parsed()) {
            return runLearn(learnOpts, learnLabels, learnOut, learnRate, learnIters,
                            learnMinWeight, learnNoAvg);
        }
        if (eval->parsed()) return runEval(evalProgram, evalPred, evalGold, evalThreshold);
        if (genNoise->parsed()) {
            return runGenNoise(noiseProgram, noiseData, noiseOut, noiseAttr, noiseStruct,
                               noiseSeed, noiseAttrPreds, noiseRelPreds);
        }
        if (oracle->parsed()) return runOracle(oracleOpts, oracleOut, oracleStep);
        if (desugar->parsed()) return runDesugar(desugarProgram, desugarOut);
    } catch (const psl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
