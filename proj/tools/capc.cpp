#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cap/corpus.hpp"
#include "cap/driver.hpp"
#include "cap/interp.hpp"

namespace {

struct Config {
    std::vector<std::string> files;
    std::string phase = "anf";
    std::string format = "human";
    bool explain = false;
    bool scalaCompat = false;
    bool noEffectCheck = false;
    std::string inputScript;
    std::uint64_t seed = 0;
    long stepLimit = 100000;
    std::string tracePath;
};

bool colorFor(FILE* stream) {
    const char* env = std::getenv("CAPC_COLOR");
    if (env && std::string(env) == "0") return false;
    return isatty(fileno(stream));
}

cap::RenderOptions renderOptions(const Config& cfg, FILE* stream) {
    cap::RenderOptions o;
    o.mode = cfg.format == "json" ? cap::RenderMode::Json : cap::RenderMode::Human;
    o.color = o.mode == cap::RenderMode::Human && colorFor(stream);
    o.explain = cfg.explain;
    return o;
}

cap::driver::Compilation compileFile(const std::string& path, const Config& cfg) {
    cap::driver::Options o;
    o.scalaCompat = cfg.scalaCompat;
    o.noEffectCheck = cfg.noEffectCheck;
    return cap::driver::compile(path, cap::driver::readFile(path), o);
}

void report(const cap::driver::Compilation& c, const Config& cfg, std::ostream& os, FILE* stream) {
    auto ro = renderOptions(cfg, stream);
    for (const auto& d : c.diagnostics) os << cap::render(d, ro, &c.sources);
}

int check(const Config& cfg) {
    std::vector<cap::driver::Compilation> results(cfg.files.size());
    for (size_t i = 0; i < cfg.files.size(); ++i) results[i] = compileFile(cfg.files[i], cfg);
    bool clean = true;
    for (const auto& c : results) {
        report(c, cfg, std::cout, stdout);
        clean = clean && c.ok();
    }
    return clean ? 0 : 1;
}

std::vector<std::string> readLines(const std::string& path) {
    std::vector<std::string> lines;
    std::istringstream in(cap::driver::readFile(path));
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

int run(const Config& cfg) {
    const std::string& file = cfg.files.at(0);
    auto c = compileFile(file, cfg);
    report(c, cfg, std::cerr, stderr);
    if (!c.ok()) return 1;
    if (!c.anf.find("main")) {
        std::cerr << file << ": no main to run\n";
        return 2;
    }
    cap::interp::Options io;
    if (!cfg.inputScript.empty()) io.input = readLines(cfg.inputScript);
    io.seed = cfg.seed;
    io.stepLimit = cfg.stepLimit;
    io.out = &std::cout;
    auto r = cap::interp::run(c.anf, io);
    if (!cfg.tracePath.empty()) {
        std::ofstream out(cfg.tracePath, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + cfg.tracePath);
        out << r.traceJsonl();
    }
    if (!r.error) return 0;
    const auto& e = *r.error;
    if (cfg.format == "json") {
        std::cerr << nlohmann::ordered_json{{"code", e.code},         {"file", e.span.file},
                                            {"startLine", e.span.startLine}, {"startCol", e.span.startCol},
                                            {"endLine", e.span.endLine},     {"endCol", e.span.endCol},
                                            {"message", e.message}}
                         .dump()
                  << "\n";
    } else {
        std::cerr << e.span.file << ":" << e.span.startLine << ":" << e.span.startCol << ": runtime error[" << e.code
                  << "]: " << e.message << "\n";
    }
    return e.code == "R_UNBOUND" ? 2 : 1;
}

int dump(const Config& cfg) {
    const std::string& file = cfg.files.at(0);
    auto c = compileFile(file, cfg);
    if (cfg.phase == "desugar") {
        if (c.program.diagnostics.empty()) std::cout << cap::desugar::dump(c.program);
    } else if (cfg.phase == "types") {
        for (const auto& d : c.typed.program.defs)
            if (!d.prelude) std::cout << "def " << d.key << ": " << cap::typeToString(d.type) << "\n";
    } else if (cfg.phase == "elab") {
        std::cout << cap::elab::printProgram(c.typed.program);
    } else {
        std::cout << cap::elab::printProgram(c.anf);
    }
    report(c, cfg, std::cerr, stderr);
    return c.ok() ? 0 : 1;
}

int test(const Config& cfg) {
    int failed = 0, total = 0;
    for (const auto& dir : cfg.files) {
        auto rep = cap::corpus::runCorpus(dir);
        for (const auto& cs : rep.cases) {
            ++total;
            if (cs.passed) {
                std::cout << "PASS " << cs.path << (cs.ran ? "  trace " + cs.detail : "") << "\n";
            } else {
                ++failed;
                std::cout << "FAIL " << cs.path << ": " << cs.detail << "\n";
            }
        }
    }
    std::cout << (total - failed) << "/" << total << " cases passed\n";
    return failed == 0 && total > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capc: checker and interpreter for Cap"};
    app.require_subcommand(1);
    Config cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--format", cfg.format, "Diagnostic format")->check(CLI::IsMember({"human", "json"}));
        sub->add_flag("--explain", cfg.explain, "Print witness notes for each diagnostic");
        sub->add_flag("--scala-compat", cfg.scalaCompat, "Resolve implicits without filtering killed candidates");
    };

    auto* checkCmd = app.add_subcommand("check", "Type and effect check files");
    checkCmd->add_option("files", cfg.files, "Source files")->required()->check(CLI::ExistingFile);
    common(checkCmd);

    auto* runCmd = app.add_subcommand("run", "Check and run a program's main");
    runCmd->add_option("file", cfg.files, "Source file")->required()->expected(1)->check(CLI::ExistingFile);
    common(runCmd);
    runCmd->add_flag("--no-effect-check", cfg.noEffectCheck, "Skip the effect checker (differential testing)");
    runCmd->add_option("--input", cfg.inputScript, "Lines answered by readLine")->check(CLI::ExistingFile);
    runCmd->add_option("--seed", cfg.seed, "Run seed");
    runCmd->add_option("--step-limit", cfg.stepLimit, "Scheduler step limit")->check(CLI::PositiveNumber);
    runCmd->add_option("--trace", cfg.tracePath, "Write the JSONL trace here");

    auto* dumpCmd = app.add_subcommand("dump", "Print an intermediate form");
    dumpCmd->add_option("file", cfg.files, "Source file")->required()->expected(1)->check(CLI::ExistingFile);
    dumpCmd->add_option("--phase", cfg.phase, "desugar, types, elab or anf")
        ->check(CLI::IsMember({"desugar", "types", "anf", "elab"}));
    common(dumpCmd);

    auto* testCmd = app.add_subcommand("test", "Run a corpus directory of .cap/.expect pairs");
    testCmd->add_option("dirs", cfg.files, "Corpus directories")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*checkCmd) return check(cfg);
        if (*runCmd) return run(cfg);
        if (*dumpCmd) return dump(cfg);
        if (*testCmd) return test(cfg);
    } catch (const std::exception& e) {
        std::cerr << "capc: internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
