#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cap/elab.hpp"
#include "cap/typesys.hpp"

namespace cap::effects {

/// Flow-sensitive kill state: the names killed so far and where.
struct KillState {
    std::map<std::string, SourceSpan> killed;

    bool empty() const { return killed.empty(); }
    void add(const std::string& name, const SourceSpan& at) { killed.emplace(name, at); }
    void join(const KillState& other);
    std::set<std::string> names() const;
};

/// Names killed by applying an arrow: kill vars with the binder replaced by the argument's qualifier,
/// and FUN replaced by the function's qualifier.
std::set<std::string> latentKill(const TypeRef& fnType, const Qualifier& fnQual, const Qualifier& argQual);

/// The killed name reachable from `name`, or empty when `name` is usable.
std::string killedWitness(const std::string& name, const std::set<std::string>& killed, const QualEnv& env);

/// Saturation path from `from` to `to` through binding qualifiers (inclusive).
std::vector<std::string> reachPath(const std::string& from, const std::string& to, const QualEnv& env);

/// Re-checks uses and latent kills of one elaborated definition. Returns the first violation.
std::vector<Diagnostic> checkDef(const elab::ElabDef& def);

std::vector<Diagnostic> checkProgram(const elab::ElabProgram& prog, const std::set<std::string>& skip);

}  // namespace cap::effects
