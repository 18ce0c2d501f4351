#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cap/diagnostics.hpp"

namespace cap::corpus {

/// Sidecar `.expect` file. One directive per line, `#` starts a comment:
///   E_CODE <line>     expected diagnostic, in order (any such line makes the case negative)
///   digest <hex>      trace digest of running `main` (positive cases)
///   input <text>      one readLine answer
///   option scala-compat
struct Expectation {
    std::vector<std::pair<Code, int>> errors;
    std::string digest;
    std::vector<std::string> input;
    bool scalaCompat = false;

    bool negative() const { return !errors.empty(); }
};

/// Throws std::runtime_error on a malformed line.
Expectation parseExpect(const std::string& text);

struct CaseResult {
    std::string path;
    bool negative = false;
    bool ran = false;  // positive case with `main`
    bool passed = false;
    std::string detail;  // mismatch description, or the trace digest of a passing run
};

struct Report {
    std::vector<CaseResult> cases;
    bool ok() const;
    int passed() const;
};

/// `*.cap` files that have a sidecar `.expect`, sorted by path.
std::vector<std::string> discover(const std::string& dir);

CaseResult runCase(const std::string& capPath);
Report runCorpus(const std::string& dir);

}  // namespace cap::corpus
