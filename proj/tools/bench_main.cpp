#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psl/grounding.hpp"
#include "psl/infer.hpp"
#include "psl/kernels.hpp"
#include "psl/scenario.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double secondsSince(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double unitReal(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// End-to-end inference time against active ground rule count, with a
/// log-log slope estimate across the instance sizes.
int runScaling(const std::vector<int>& entities, bool serial) {
    std::printf("%10s %14s %12s %10s\n", "entities", "active_rules", "seconds", "objective");
    std::vector<double> logN, logT;
    for (int n : entities) {
        psl::ChainInstance inst = psl::makeChainInstance(n, 7);
        psl::SimilarityRegistry sims = psl::SimilarityRegistry::builtins();
        psl::Grounder grounder(inst.prog, inst.facts, sims, {});
        psl::Interpretation interp = psl::evidenceInterpretation(inst.prog, inst.facts);
        psl::InferenceConfig cfg;
        cfg.execMode = serial ? psl::ExecMode::Serial : psl::ExecMode::Auto;
        auto t0 = clock_type::now();
        psl::RunReport rep = psl::mapInference(grounder, interp, cfg);
        double dt = secondsSince(t0);
        std::printf("%10d %14d %12.3f %10.3f\n", n, rep.activeRuleCount, dt, rep.objective);
        logN.push_back(std::log(static_cast<double>(rep.activeRuleCount)));
        logT.push_back(std::log(std::max(dt, 1e-4)));
    }
    if (logN.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < logN.size(); ++i) {
            mx += logN[i];
            my += logT[i];
        }
        mx /= static_cast<double>(logN.size());
        my /= static_cast<double>(logN.size());
        double num = 0, den = 0;
        for (size_t i = 0; i < logN.size(); ++i) {
            num += (logN[i] - mx) * (logT[i] - my);
            den += (logN[i] - mx) * (logN[i] - mx);
        }
        std::printf("log-log slope: %.2f\n", num / den);
    }
    return 0;
}

/// Serial and parallel numeric kernels on the same inputs: timing ratio
/// and the largest absolute difference, which block-ordered reduction
/// keeps at exactly zero.
int runKernels(int64_t n, int reps) {
    std::mt19937_64 rng(11);
    std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        a[static_cast<size_t>(i)] = unitReal(rng) * 2.0 - 1.0;
        b[static_cast<size_t>(i)] = unitReal(rng) * 2.0 - 1.0;
    }
    // Band matrix, 5 entries per row.
    std::vector<int32_t> rowPtr{0};
    std::vector<int32_t> col;
    std::vector<double> val;
    for (int64_t r = 0; r < n; ++r) {
        for (int64_t c = std::max<int64_t>(0, r - 2); c <= std::min<int64_t>(n - 1, r + 2); ++c) {
            col.push_back(static_cast<int32_t>(c));
            val.push_back(unitReal(rng));
        }
        rowPtr.push_back(static_cast<int32_t>(col.size()));
    }
    std::vector<double> out(static_cast<size_t>(n));

    struct Case {
        const char* name;
        std::function<double(psl::ExecMode)> run;
    };
    std::vector<Case> cases;
    cases.push_back({"sum", [&](psl::ExecMode m) { return psl::kernels::sum(a, m); }});
    cases.push_back({"dot", [&](psl::ExecMode m) { return psl::kernels::dot(a, b, m); }});
    cases.push_back({"maxAbs", [&](psl::ExecMode m) { return psl::kernels::maxAbs(a, m); }});
    cases.push_back({"spmv", [&](psl::ExecMode m) {
                         psl::kernels::spmv(rowPtr, col, val, a, out, m);
                         return out[out.size() / 2];
                     }});
    cases.push_back({"stepLimit", [&](psl::ExecMode m) {
                         return psl::kernels::stepLimit(a, b, 0.995, 1.0, m);
                     }});

    std::printf("parallel kernels %s\n",
                psl::kernels::parallelEnabled() ? "enabled" : "unavailable, serial fallback");
    std::printf("%12s %12s %12s %10s %12s\n", "kernel", "serial_s", "parallel_s", "speedup",
                "max_diff");
    for (const Case& c : cases) {
        double serialVal = 0, parallelVal = 0;
        auto t0 = clock_type::now();
        for (int r = 0; r < reps; ++r) serialVal = c.run(psl::ExecMode::Serial);
        double ts = secondsSince(t0);
        t0 = clock_type::now();
        for (int r = 0; r < reps; ++r) parallelVal = c.run(psl::ExecMode::Parallel);
        double tp = secondsSince(t0);
        std::printf("%12s %12.4f %12.4f %10.2f %12g\n", c.name, ts, tp, ts / std::max(tp, 1e-9),
                    std::fabs(serialVal - parallelVal));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"inference scaling and kernel benchmarks"};
    app.require_subcommand(1);

    std::vector<int> entities{350, 1700, 3400, 6700};
    bool serial = false;
    CLI::App* scaling = app.add_subcommand("scaling", "inference time vs active rule count");
    scaling->add_option("--entities", entities, "chain sizes to run");
    scaling->add_flag("--serial", serial, "disable parallel kernels");

    int64_t n = 1 << 20;
    int reps = 50;
    CLI::App* kern = app.add_subcommand("kernels", "serial vs parallel kernel comparison");
    kern->add_option("--size", n, "vector length");
    kern->add_option("--reps", reps, "repetitions per kernel");

    CLI11_PARSE(app, argc, argv);
    if (scaling->parsed()) return runScaling(entities, serial);
    if (kern->parsed()) return runKernels(n, reps);
    return 0;
}
