#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cap/desugar.hpp"
#include "cap/diagnostics.hpp"
#include "cap/elab.hpp"
#include "cap/typer.hpp"

namespace cap::driver {

struct Options {
    bool scalaCompat = false;
    bool noEffectCheck = false;
};

struct Compilation {
    SourceFiles sources;
    desugar::Program program;
    typer::Result typed;
    elab::ElabProgram anf;  // typed program after ANF; empty when there are diagnostics
    std::vector<Diagnostic> diagnostics;  // sorted by position
    bool ok() const { return diagnostics.empty(); }
};

/// Prelude units as (file name, text), in load order.
const std::vector<std::pair<std::string, std::string>>& preludeSources();

Compilation compile(const std::string& file, const std::string& source, const Options& opts = {});

/// Reads a whole file; throws std::runtime_error when it cannot be read.
std::string readFile(const std::string& path);

}  // namespace cap::driver
