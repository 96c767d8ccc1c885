#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "psl/io.hpp"
#include "psl/parser.hpp"

using namespace psl;

namespace {

/// Scratch directory with the fixture files every subcommand reads.
class Workdir {
public:
    Workdir() {
        dir_ = "/tmp/psl_cli_" + std::to_string(::getpid());
        std::filesystem::create_directories(dir_);
        writeTextFile(path("prog.psl"),
                      "closed ev(ent).\nopen q(ent).\n"
                      "1.0 : ev(A) => q(A) .\n0.5 : ~q(A) .\n");
        writeTextFile(path("facts.tsv"), "ev\ta\t0.8\nev\tb\t0.4\n");
        writeTextFile(path("labels.tsv"), "q\ta\t1.0\nq\tb\t0.0\n");
        writeTextFile(path("pred.tsv"), "q\ta\t0.9\nq\tb\t0.1\n");
        writeTextFile(path("gold.tsv"), "q\ta\t1.0\n");
        writeTextFile(path("sets.psl"),
                      "closed childa(n, n).\nclosed childb(n, n).\nopen align(n, n).\n"
                      "1.0 : setsim[align]({A.childa}, {B.childb}) => align(A, B) .\n");
        writeTextFile(path("graph.psl"),
                      "closed name(node, str).\nclosed edge(node, node).\n"
                      "open align(node, node).\n"
                      "1.0 : edge(A, B) => align(A, B) .\n");
        std::string rows;
        for (int i = 0; i < 10; ++i) {
            rows += "name\tn" + std::to_string(i) + "\tlabel" + std::to_string(i) + "x\n";
        }
        for (int i = 0; i < 8; ++i) {
            rows += "edge\tn" + std::to_string(i) + "\tn" + std::to_string(i + 1) + "\n";
        }
        writeTextFile(path("graph.tsv"), rows);
        writeTextFile(path("bad.psl"), "closed ev(ent).\n???\n");
        writeTextFile(path("short.weights"), "0\t1.0\n");
    }

    std::string path(const std::string& name) const { return dir_ + "/" + name; }

    /// Runs the binary, captures both streams, returns the exit status.
    int run(const std::string& args) {
        std::string cmd = std::string(PSL_CLI_PATH) + " " + args + " > " + path("stdout.txt") +
                          " 2> " + path("stderr.txt");
        int rc = std::system(cmd.c_str());
        if (rc == -1 || !WIFEXITED(rc)) return -1;
        return WEXITSTATUS(rc);
    }

    std::string out() const { return readTextFile(path("stdout.txt")); }
    std::string err() const { return readTextFile(path("stderr.txt")); }

private:
    std::string dir_;
};

Workdir& wd() {
    static Workdir w;
    return w;
}

double valueOfLine(const std::string& text, const std::string& prefix) {
    size_t at = text.find(prefix);
    REQUIRE(at != std::string::npos);
    return std::strtod(text.c_str() + at + prefix.size(), nullptr);
}

} // namespace

TEST_CASE("infer writes query values and an optional report") {
    Workdir& w = wd();
    int rc = w.run("infer -p " + w.path("prog.psl") + " -d " + w.path("facts.tsv") +
                   " -o - --report");
    CHECK(rc == 0);
    std::string out = w.out();
    CHECK(valueOfLine(out, "q\ta\t") == doctest::Approx(0.64).epsilon(1e-4));
    CHECK(valueOfLine(out, "q\tb\t") == doctest::Approx(0.32).epsilon(1e-4));
    std::string err = w.err();
    CHECK(err.find("objective\t") != std::string::npos);
    CHECK(err.find("converged\tyes") != std::string::npos);
}

TEST_CASE("infer honors a weights override file") {
    Workdir& w = wd();
    writeTextFile(w.path("override.weights"), "0\t2.0\n1\t0.5\n");
    int rc = w.run("infer -p " + w.path("prog.psl") + " -d " + w.path("facts.tsv") +
                   " --weights " + w.path("override.weights") + " -o -");
    CHECK(rc == 0);
    // The heavier push rule moves the value above the default 0.64.
    CHECK(valueOfLine(w.out(), "q\ta\t") > 0.7);

    rc = w.run("infer -p " + w.path("prog.psl") + " -d " + w.path("facts.tsv") +
               " --weights " + w.path("short.weights") + " -o -");
    CHECK(rc == 1);
    CHECK(w.err().find("error:") != std::string::npos);
}

TEST_CASE("learn emits a loadable weights file") {
    Workdir& w = wd();
    int rc = w.run("learn -p " + w.path("prog.psl") + " -d " + w.path("facts.tsv") +
                   " -l " + w.path("labels.tsv") + " --iters 5 -o -");
    CHECK(rc == 0);
    std::istringstream in(w.out());
    std::vector<double> learned = loadWeights(in, "cli");
    REQUIRE(learned.size() == 2);
    CHECK(learned[0] > 0.0);
    CHECK(learned[1] > 0.0);
}

TEST_CASE("eval prints one tab separated metric line") {
    Workdir& w = wd();
    int rc = w.run("eval -p " + w.path("prog.psl") + " --predictions " + w.path("pred.tsv") +
                   " --gold " + w.path("gold.tsv"));
    CHECK(rc == 0);
    CHECK(w.out() == "1.0000\t1.0000\t1.0000\n");
}

TEST_CASE("oracle reports the grid optimum") {
    Workdir& w = wd();
    int rc = w.run("oracle -p " + w.path("prog.psl") + " -d " + w.path("facts.tsv") +
                   " --grid-step 0.05 -o -");
    CHECK(rc == 0);
    std::string out = w.out();
    CHECK(out.find("q\ta\t0.65") != std::string::npos);
    CHECK(out.find("q\tb\t0.30") != std::string::npos);
    CHECK(w.err().find("grid_points\t") != std::string::npos);
}

TEST_CASE("desugar prints the rewritten program") {
    Workdir& w = wd();
    int rc = w.run("desugar -p " + w.path("sets.psl") + " -o -");
    CHECK(rc == 0);
    std::string out = w.out();
    CHECK(out.find("setsim") == std::string::npos);
    CHECK(out.find("=> align(A, B).") != std::string::npos);
}

TEST_CASE("gen-noise emits a loadable fact file with the expected rows") {
    Workdir& w = wd();
    int rc = w.run("gen-noise -p " + w.path("graph.psl") + " -d " + w.path("graph.tsv") +
                   " --attr-noise 0.35 --struct-noise 0.25 --seed 3" +
                   " --attr-pred name --rel-pred edge -o -");
    CHECK(rc == 0);
    Program prog = parseProgram(readTextFile(w.path("graph.psl")));
    std::istringstream in(w.out());
    FactSet facts(static_cast<int>(prog.schema.size()));
    loadFacts(prog, in, "cli", facts);
    CHECK(facts.rows(prog.predId("name")).size() == 10);
    CHECK(facts.rows(prog.predId("edge")).size() == 6);
}

TEST_CASE("program errors name the failing position and exit with one") {
    Workdir& w = wd();
    int rc = w.run("infer -p " + w.path("bad.psl") + " -d " + w.path("facts.tsv"));
    CHECK(rc == 1);
    std::string err = w.err();
    CHECK(err.find("error:") != std::string::npos);
    CHECK(err.find("line 2") != std::string::npos);
}

TEST_CASE("missing inputs fail fast") {
    Workdir& w = wd();
    CHECK(w.run("infer -p " + w.path("prog.psl") + " -d /nonexistent.tsv") == 1);
    CHECK(w.err().find("error:") != std::string::npos);
    // Required flag omitted entirely, rejected by the argument parser.
    CHECK(w.run("learn -p " + w.path("prog.psl") + " -d " + w.path("facts.tsv")) != 0);
    CHECK(w.run("") != 0);
}
