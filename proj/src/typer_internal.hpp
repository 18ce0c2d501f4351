#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cap/effects.hpp"
#include "cap/typer.hpp"

namespace cap::typer::detail {

using elab::EKind;
using elab::ENode;
using elab::EPtr;
using syntax::NodeKind;
using syntax::NodePtr;

/// Raised when a definition depends on another definition that already failed; the dependent
/// definition is dropped without a diagnostic of its own.
struct DependencyFailed {};

class ProgramTyper;

struct LParam {
    std::string name;
    TypeRef type;  // null when it must come from the expected type
    bool implicit = false;
    SourceSpan span;
};

class DefTyper {
public:
    DefTyper(ProgramTyper& owner, const desugar::DefInfo& def);
    elab::ElabDef run();

    // typer.cpp
    EPtr elab(const NodePtr& n, const TypeRef& expected, bool allowSigma);
    EPtr elabCore(const NodePtr& n, const TypeRef& expected, bool allowSigma);
    EPtr coerce(EPtr e, const TypeRef& expected, bool allowSigma, const SourceSpan& span);
    EPtr block(const NodePtr& n, const TypeRef& expected, bool allowSigma);
    EPtr statement(const NodePtr& n);
    EPtr valBind(const NodePtr& n);
    EPtr tupleBind(const NodePtr& n);
    EPtr localDef(const NodePtr& n);
    EPtr lambda(const NodePtr& n, const TypeRef& expected);
    EPtr lambdaChain(const std::vector<LParam>& ps, size_t i, const NodePtr& body, const TypeRef& ex,
                     const SourceSpan& span, bool byName);
    EPtr ifExpr(const NodePtr& n, const TypeRef& expected, bool allowSigma);
    EPtr binOp(const NodePtr& n);
    EPtr unary(const NodePtr& n);
    EPtr tuple(const NodePtr& n, const TypeRef& expected);
    EPtr select(const NodePtr& n);
    EPtr summon(const NodePtr& n);
    EPtr sigmaIntro(const NodePtr& n, const TypeRef& expected);
    EPtr literal(const NodePtr& n);
    EPtr makeSite(EPtr e);
    EPtr sigmaLift(EPtr e, const TypeRef& sigma, const SourceSpan& span);

    // typer_apply.cpp
    EPtr var(const NodePtr& n);
    EPtr apply(const NodePtr& n, const TypeRef& expected);
    EPtr global(const desugar::DefInfo& d, const SourceSpan& span, const std::vector<TypeRef>& typeArgs,
                size_t& pendingFrom);
    EPtr applyStep(EPtr fn, const TypeRef& fnType, EPtr arg, const SourceSpan& span);
    EPtr argument(const NodePtr& arg, const TypeRef& paramType);
    EPtr resolveArg(const TypeRef& required, const SourceSpan& span, bool fallback);
    EPtr resolveTrailing(EPtr node, const TypeRef& expected, const SourceSpan& span);
    void requireConforms(const TypeRef& actual, const TypeRef& expected, const SourceSpan& span);
    TypeRef instantiate(const TypeRef& t, const std::vector<TypeParamSig>& tps, const SourceSpan& span,
                        const std::vector<TypeRef>& explicitArgs);
    void checkPending(size_t from);

    // helpers
    std::optional<Path> pathOf(const EPtr& e) const;
    TypeRef pathType(const Path& p, const SourceSpan& span) const;
    TypeRef widen(const TypeRef& t, const SourceSpan& span) const;
    TypeRef current(const TypeRef& t) const;  // substitution applied and normalized
    Qualifier exitScope(const Qualifier& q, int depth) const;
    Binding& bindLocal(Binding b);
    bool isKilled(const std::string& name) const;
    std::vector<Candidate> candidates() const;
    std::string show(const TypeRef& t) const;
    void noteKills(const std::set<std::string>& names);
    void collectFree(const EPtr& e, int beforeOrder, std::set<std::string>& out) const;
    int orderOf(const std::string& name) const;
    std::string freshName(const std::string& prefix);
    EPtr zonk(const EPtr& e);
    TypeRef zonk(const TypeRef& t) const;

    ProgramTyper& owner_;
    const desugar::DefInfo& def_;
    const desugar::Program& prog_;
    TypingContext ctx_;
    Unifier u_;
    std::set<std::string> killed_;
    std::map<std::string, int> order_;
    int nextOrder_ = 0;
    int sigmaCounter_ = 0;
    int metaCounter_ = 0;
    int freshCounter_ = 0;

    struct PendingMeta {
        std::string meta;
        std::string param;
        std::string owner;
        TypeRef bound;
        SourceSpan span;
    };
    std::vector<PendingMeta> pending_;
    std::map<std::string, elab::BindingInfo> info_;
};

class ProgramTyper {
public:
    ProgramTyper(const desugar::Program& prog, const Options& opts);
    Result run();

    /// Declared type, or the type inferred by typing the definition first.
    TypeRef signature(const desugar::DefInfo& d, const SourceSpan& use);
    std::string keyOf(const desugar::DefInfo& d) const;

    const desugar::Program& prog;
    Options opts;

private:
    void typeDef(const desugar::DefInfo& d);

    std::map<const desugar::DefInfo*, elab::ElabDef> done_;
    std::set<const desugar::DefInfo*> failed_;
    std::set<const desugar::DefInfo*> inProgress_;
    std::vector<Diagnostic> diags_;
};

}  // namespace cap::typer::detail
