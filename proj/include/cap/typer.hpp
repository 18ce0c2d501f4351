#pragma once

#include <set>
#include <string>
#include <vector>

#include "cap/desugar.hpp"
#include "cap/elab.hpp"
#include "cap/typesys.hpp"

namespace cap::typer {

struct Options {
    bool scalaCompat = false;  // resolution ignores kills and reports same-depth ambiguities
};

struct Result {
    elab::ElabProgram program;
    std::vector<Diagnostic> diagnostics;
    std::set<std::string> failedDefs;  // keys of definitions that did not type-check
};

/// Types every definition; each failing definition contributes exactly one diagnostic.
Result typeProgram(const desugar::Program& prog, const Options& opts = {});

// ---------------------------------------------------------------- implicit resolution

struct Candidate {
    std::string name;
    TypeRef type;
    int depth = 0;   // scope depth; larger is more inner
    bool killed = false;
};

enum class ResolveStatus { Found, FoundKilled, None, Ambiguous };

struct Resolution {
    ResolveStatus status = ResolveStatus::None;
    std::string name;
    std::vector<std::string> ambiguous;  // sorted
};

struct ResolveMode {
    bool scalaCompat = false;
    bool killedFallback = true;  // with no live match, pick the innermost killed one (default mode only)
};

/// Chooses among candidates whose type unifies with `required`. Default mode drops killed candidates
/// before looking for the innermost depth; compat mode keeps them. The outcome does not depend on the
/// order of `candidates`. On success the unifier holds the solution for the chosen candidate.
Resolution resolveImplicit(const TypeRef& required, const std::vector<Candidate>& candidates, const ResolveMode& mode,
                           Unifier& unifier);

}  // namespace cap::typer
