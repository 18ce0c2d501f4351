#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cap/diagnostics.hpp"
#include "cap/kernel.hpp"
#include "cap/syntax.hpp"
#include "cap/typesys.hpp"

namespace cap::desugar {

struct DefParam {
    std::string name;
    TypeRef type;  // by-name parameters already have the thunk type `=> T`
    bool byName = false;
    SourceSpan span;
};

struct DefGroup {
    bool isUsing = false;
    std::vector<DefParam> params;
};

struct DefInfo {
    std::string name;
    std::vector<TypeParamSig> typeParams;
    std::vector<DefGroup> groups;
    TypeRef result;        // declared result; nullptr when inferred
    KillSet resultKill;    // attached to the innermost arrow
    TypeRef type;          // curried kernel type; nullptr until the result is known
    bool isExtern = false;
    bool failed = false;   // desugaring reported a diagnostic; uses are not re-reported
    bool prelude = false;
    syntax::NodePtr body;  // desugared body; null for externs
    SourceSpan span;
    std::string firstParamClass;  // overload key
};

/// Folds parameter groups and the result into one curried dependent function type.
TypeRef curriedType(const std::vector<DefGroup>& groups, const TypeRef& result, const KillSet& resultKill);

struct AliasDef {
    std::vector<std::string> params;
    syntax::STypePtr rhs;
    SourceSpan span;
};

struct Program {
    ClassTable classes;
    std::vector<DefInfo> defs;
    std::vector<Diagnostic> diagnostics;
    std::map<std::string, AliasDef> aliases;
    std::set<std::string> typefunNames;

    std::vector<const DefInfo*> lookup(const std::string& name) const;
    bool hasDef(const std::string& name) const;
};

struct Unit {
    syntax::NodePtr ast;
    bool prelude = false;
};

/// Desugars the prelude and user programs together (prelude units first).
Program desugarProgram(const std::vector<Unit>& units);

/// Converts a surface type in the global scope of `prog`; `values` are value names assumed bound.
TypeRef expandArrows(const syntax::STypePtr& t, const Program& prog, const std::set<std::string>& values = {});

/// Rewrites method calls `x.m(a)` to `m(x, a)` against the definitions of `prog`.
syntax::NodePtr desugarUfcs(const syntax::NodePtr& node, const Program& prog);

/// Stable text form of the kernel program (`dump --phase=desugar`).
std::string dump(const Program& prog, bool includePrelude = false);

}  // namespace cap::desugar
