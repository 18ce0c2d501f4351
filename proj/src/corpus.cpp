#include "cap/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "cap/driver.hpp"
#include "cap/interp.hpp"

namespace cap::corpus {

namespace fs = std::filesystem;

Expectation parseExpect(const std::string& text) {
    Expectation ex;
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (auto hash = line.find('#'); hash != std::string::npos && line.rfind("input ", 0) != 0) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        auto bad = [&](const std::string& why) {
            throw std::runtime_error("line " + std::to_string(lineNo) + ": " + why);
        };
        if (word == "input") {
            std::string rest = line.size() > 6 ? line.substr(6) : "";
            ex.input.push_back(rest);
        } else if (word == "digest") {
            if (!(ls >> ex.digest)) bad("digest needs a value");
        } else if (word == "option") {
            std::string opt;
            ls >> opt;
            if (opt != "scala-compat") bad("unknown option " + opt);
            ex.scalaCompat = true;
        } else if (auto code = codeFromName(word)) {
            int at = 0;
            if (!(ls >> at) || at < 1) bad("expected a line number after " + word);
            ex.errors.emplace_back(*code, at);
        } else {
            bad("unknown directive " + word);
        }
    }
    return ex;
}

bool Report::ok() const {
    return std::all_of(cases.begin(), cases.end(), [](const CaseResult& c) { return c.passed; });
}

int Report::passed() const {
    return static_cast<int>(std::count_if(cases.begin(), cases.end(), [](const CaseResult& c) { return c.passed; }));
}

std::vector<std::string> discover(const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".cap") continue;
        fs::path expect = entry.path();
        expect.replace_extension(".expect");
        if (fs::exists(expect)) out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::string showList(const std::vector<std::pair<Code, int>>& xs) {
    std::string out = "[";
    for (size_t i = 0; i < xs.size(); ++i)
        out += (i ? ", " : "") + std::string(codeName(xs[i].first)) + "@" + std::to_string(xs[i].second);
    return out + "]";
}

}  // namespace

CaseResult runCase(const std::string& capPath) {
    CaseResult r;
    r.path = capPath;
    fs::path expectPath = capPath;
    expectPath.replace_extension(".expect");
    Expectation ex;
    try {
        ex = parseExpect(driver::readFile(expectPath.string()));
    } catch (const std::exception& e) {
        r.detail = expectPath.string() + ": " + e.what();
        return r;
    }
    r.negative = ex.negative();
    driver::Options opts;
    opts.scalaCompat = ex.scalaCompat;
    auto c = driver::compile(capPath, driver::readFile(capPath), opts);
    std::vector<std::pair<Code, int>> got;
    for (const auto& d : c.diagnostics) got.emplace_back(d.code, d.span.startLine);
    if (got != ex.errors) {
        r.detail = "expected " + showList(ex.errors) + ", got " + showList(got);
        if (!c.diagnostics.empty()) r.detail += ": " + c.diagnostics[0].message;
        return r;
    }
    if (r.negative || !c.anf.find("main")) {
        r.passed = true;
        return r;
    }
    r.ran = true;
    interp::Options io;
    io.input = ex.input;
    auto run = interp::run(c.anf, io);
    if (run.error) {
        r.detail = run.error->code + ": " + run.error->message;
        return r;
    }
    std::string digest = run.digest();
    if (!ex.digest.empty() && digest != ex.digest) {
        r.detail = "trace digest " + digest + ", expected " + ex.digest;
        return r;
    }
    r.passed = true;
    r.detail = digest;
    return r;
}

Report runCorpus(const std::string& dir) {
    Report rep;
    for (const auto& p : discover(dir)) {
        try {
            rep.cases.push_back(runCase(p));
        } catch (const std::exception& e) {
            rep.cases.push_back(CaseResult{p, false, false, false, e.what()});
        }
    }
    return rep;
}

}  // namespace cap::corpus
