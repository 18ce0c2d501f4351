#include "cap/driver.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cap/anf.hpp"
#include "cap/effects.hpp"

namespace cap::driver {

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const std::vector<std::pair<std::string, std::string>>& preludeSources() {
    static const std::vector<std::pair<std::string, std::string>> units = [] {
        std::string dir = CAP_PRELUDE_DIR;
        if (const char* env = std::getenv("CAPC_PRELUDE_DIR")) dir = env;
        std::vector<std::pair<std::string, std::string>> out;
        for (const char* name : {"core.cap", "file.cap", "lock.cap", "dom.cap", "chan.cap"}) {
            std::string path = dir + "/" + name;
            out.emplace_back("<prelude>/" + std::string(name), readFile(path));
        }
        return out;
    }();
    return units;
}

Compilation compile(const std::string& file, const std::string& source, const Options& opts) {
    Compilation c;
    c.sources[file] = source;
    std::vector<desugar::Unit> units;
    for (const auto& [name, text] : preludeSources()) {
        c.sources[name] = text;
        try {
            units.push_back(desugar::Unit{syntax::parseSource(text, name), true});
        } catch (const CompileError& e) {
            throw std::runtime_error("prelude does not parse: " + e.diagnostic().message);
        }
    }
    try {
        units.push_back(desugar::Unit{syntax::parseSource(source, file), false});
    } catch (const CompileError& e) {
        c.diagnostics.push_back(e.diagnostic());
        return c;
    }
    c.program = desugar::desugarProgram(units);
    for (const auto& d : c.program.diagnostics) {
        if (d.span.file.rfind("<prelude>", 0) == 0)
            throw std::runtime_error("prelude does not desugar: " + d.message);
        c.diagnostics.push_back(d);
    }
    c.typed = typer::typeProgram(c.program, typer::Options{opts.scalaCompat});
    for (const auto& d : c.typed.diagnostics) {
        if (d.span.file.rfind("<prelude>", 0) == 0)
            throw std::runtime_error("prelude does not type-check: " + d.message);
        c.diagnostics.push_back(d);
    }
    if (!opts.noEffectCheck) {
        auto eff = effects::checkProgram(c.typed.program, c.typed.failedDefs);
        c.diagnostics.insert(c.diagnostics.end(), eff.begin(), eff.end());
    }
    sortDiagnostics(c.diagnostics);
    if (c.diagnostics.empty() || opts.noEffectCheck) {
        bool typedOk = c.typed.diagnostics.empty() && c.program.diagnostics.empty();
        if (typedOk) c.anf = anf::transformProgram(c.typed.program);
    }
    return c;
}

}  // namespace cap::driver
