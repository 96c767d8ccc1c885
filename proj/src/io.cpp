#include "psl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "psl/error.hpp"

namespace psl {

namespace {

std::vector<std::string_view> splitTabs(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

double parseValue(std::string_view text, const std::string& origin, int lineNo) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
        throw StoreError(origin + ":" + std::to_string(lineNo) + ": bad truth value '" +
                         std::string(text) + "'");
    }
    return v;
}

struct ParsedFactLine {
    PredId pred = -1;
    std::vector<Sym> args;
    double value = 1.0;
};

bool parseFactLine(Program& prog, std::string_view raw, const std::string& origin, int lineNo,
                   ParsedFactLine& out) {
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') return false;
    std::vector<std::string_view> fields = splitTabs(line);
    PredId pred = prog.predId(fields[0]);
    if (pred < 0) {
        throw StoreError(origin + ":" + std::to_string(lineNo) + ": unknown predicate '" +
                         std::string(fields[0]) + "'");
    }
    int arity = prog.schema[static_cast<size_t>(pred)].arity;
    size_t nFields = fields.size() - 1;
    double value = 1.0;
    if (nFields == static_cast<size_t>(arity) + 1) {
        value = parseValue(fields.back(), origin, lineNo);
        --nFields;
    } else if (nFields != static_cast<size_t>(arity)) {
        throw StoreError(origin + ":" + std::to_string(lineNo) + ": predicate '" +
                         std::string(fields[0]) + "' expects " + std::to_string(arity) +
                         " arguments, line has " + std::to_string(fields.size() - 1) + " fields");
    }
    out.pred = pred;
    out.args.clear();
    for (size_t i = 1; i <= nFields; ++i) {
        out.args.push_back(prog.symbols.intern(std::string(fields[i])));
    }
    out.value = value;
    return true;
}

} // namespace

void loadFacts(Program& prog, std::istream& in, const std::string& origin, FactSet& out) {
    std::string line;
    int lineNo = 0;
    ParsedFactLine parsed;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!parseFactLine(prog, line, origin, lineNo, parsed)) continue;
        out.addRow(prog, parsed.pred, std::move(parsed.args), parsed.value,
                   origin + ":" + std::to_string(lineNo));
    }
    out.finalize(prog);
}

FactSet loadFactsFile(Program& prog, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StoreError("cannot open fact file '" + path + "'");
    FactSet facts(static_cast<int>(prog.schema.size()));
    loadFacts(prog, in, path, facts);
    return facts;
}

std::string factsToText(const Program& prog, const FactSet& facts) {
    std::string out;
    char val[32];
    std::vector<std::string> lines;
    for (PredId p = 0; p < static_cast<PredId>(prog.schema.size()); ++p) {
        lines.clear();
        for (const FactRow& row : facts.rows(p)) {
            std::string line = prog.schema[static_cast<size_t>(p)].name;
            for (Sym a : row.args) {
                line += '\t';
                line += prog.symbols.name(a);
            }
            std::snprintf(val, sizeof val, "%.6f", row.value);
            line += '\t';
            line += val;
            lines.push_back(std::move(line));
        }
        // Name order, not intern order, so a reload into a fresh symbol
        // table renders identically.
        std::sort(lines.begin(), lines.end());
        for (const std::string& l : lines) {
            out += l;
            out += '\n';
        }
    }
    return out;
}

std::string interpretationToText(const Program& prog, const Interpretation& interp) {
    std::vector<AtomId> ids = interp.queryAtoms();
    std::vector<std::string> lines;
    lines.reserve(ids.size());
    char val[32];
    for (AtomId id : ids) {
        const GroundAtom& atom = interp.atom(id);
        std::string line = prog.schema[static_cast<size_t>(atom.pred)].name;
        for (Sym a : atom.args) {
            line += '\t';
            line += prog.symbols.name(a);
        }
        std::snprintf(val, sizeof val, "%.6f", interp.value(id));
        line += '\t';
        line += val;
        lines.push_back(std::move(line));
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

void loadLabels(Program& prog, std::istream& in, const std::string& origin,
                Interpretation& interp) {
    std::string line;
    int lineNo = 0;
    ParsedFactLine parsed;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!parseFactLine(prog, line, origin, lineNo, parsed)) continue;
        if (prog.schema[static_cast<size_t>(parsed.pred)].closed) {
            throw StoreError(origin + ":" + std::to_string(lineNo) +
                             ": labels must use open predicates");
        }
        AtomId id = interp.registerQuery({parsed.pred, parsed.args});
        if (parsed.value < 0.0 || parsed.value > 1.0) {
            throw StoreError(origin + ":" + std::to_string(lineNo) + ": truth value " +
                             std::to_string(parsed.value) + " outside [0, 1]");
        }
        interp.setValue(id, parsed.value);
    }
}

std::string weightsToText(std::span<const double> weights) {
    std::ostringstream out;
    for (size_t i = 0; i < weights.size(); ++i) {
        out << i << '\t' << weights[i] << '\n';
    }
    return out.str();
}

std::vector<double> loadWeights(std::istream& in, const std::string& origin) {
    std::vector<double> weights;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string_view> fields = splitTabs(line);
        if (fields.size() != 2) {
            throw StoreError(origin + ":" + std::to_string(lineNo) + ": expected index<TAB>weight");
        }
        size_t index = 0;
        auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), index);
        if (ec != std::errc{} || p != fields[0].data() + fields[0].size() ||
            index != weights.size()) {
            throw StoreError(origin + ":" + std::to_string(lineNo) + ": weight lines must be " +
                             "numbered consecutively from 0");
        }
        weights.push_back(parseValue(fields[1], origin, lineNo));
    }
    return weights;
}

void applyWeights(Program& prog, std::span<const double> weights) {
    if (weights.size() != prog.softRules.size()) {
        throw StoreError("weight count " + std::to_string(weights.size()) +
                         " does not match soft rule count " +
                         std::to_string(prog.softRules.size()));
    }
    for (size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) throw StoreError("weights must be positive");
        prog.softRules[i].weight = weights[i];
        prog.softRules[i].weightText.clear();
    }
}

std::string readTextFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void writeTextFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw Error("write failed on '" + path + "'");
}

} // namespace psl
