#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cap/diagnostics.hpp"
#include "cap/elab.hpp"

namespace cap::interp {

struct Options {
    std::vector<std::string> input;  // lines returned by readLine, in order
    std::uint64_t seed = 0;
    long stepLimit = 100000;
    std::ostream* out = nullptr;  // println and DOM output; nothing is printed when null
};

struct TraceEvent {
    std::string event;  // call, guard, switch, spawn, output
    int task = 0;
    std::string resource;  // empty when the event has no resource
    std::string detail;
};

struct RuntimeError {
    std::string code;  // R_GUARD, R_DEADLOCK, R_UNBOUND
    std::string message;
    SourceSpan span;
};

struct RunResult {
    std::string exitValue;
    std::vector<TraceEvent> trace;
    std::optional<RuntimeError> error;

    int guardEvents() const;
    std::string traceJsonl() const;
    std::string digest() const;  // FNV-1a 64 of the JSONL trace, 16 hex digits
};

/// Runs `entry` (a definition taking no arguments, or a single Unit parameter).
/// Accepts both the elaborated form with Σ sites and the form after ANF.
RunResult run(const elab::ElabProgram& prog, const Options& opts = {}, const std::string& entry = "main");

std::string fnv1a64Hex(const std::string& text);

}  // namespace cap::interp
