#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cap/desugar.hpp"
#include "cap/kernel.hpp"
#include "cap/syntax.hpp"
#include "cap/typesys.hpp"

namespace cap::elab {

enum class EKind {
    Literal,
    Var,         // local binding
    Global,      // top-level definition
    Let,         // {init}; name
    ImplicitLet, // {init}; name
    LocalDef,    // {lambda}; name, recursive
    TupleLet,    // {init}; names
    Block,       // statements; the last child is the result
    If,          // {cond, then, else?}
    Lambda,      // {body}; param, paramType
    Apply,       // {fn, arg}; fnType is the arrow being applied
    SigmaIntro,  // {a, b}
    SigmaProjA,  // {sigma}
    SigmaProjB,  // {sigma}
    SigmaSite,   // {expr}; a Σ-typed expression in non-tail position (before ANF)
    Tuple,       // elements
    TupleProj,   // {tuple}; index
    Ascribe,     // {expr}
    Ctor,        // class instance without fields
    BinOp,       // {lhs, rhs}; name = operator
    Unary,       // {operand}
};

std::string_view ekindName(EKind k);

struct ENode;
using EPtr = std::shared_ptr<ENode>;

struct ENode {
    EKind kind = EKind::Literal;
    SourceSpan span;
    TypeRef type;
    Qualifier qual;
    std::string name;
    std::vector<std::string> names;
    std::vector<EPtr> children;

    // Literal
    syntax::LitKind lit = syntax::LitKind::Unit;
    long long intValue = 0;
    std::string strValue;

    // Apply
    TypeRef fnType;
    bool implicitArg = false;  // the argument was found by implicit resolution
    bool usingArg = false;     // the argument was written in a `(using ...)` list

    // Lambda
    std::string param;
    TypeRef paramType;
    bool implicit = false;
    bool byName = false;
    KillSet declaredKill;  // latent kill of the arrow this lambda implements (binder = param)
    bool isDefBody = false;

    // Let / ImplicitLet
    Origin origin = Origin::User;
    bool sigmaAscribed = false;  // `val s: Sigma {...} = e` keeps the Σ value

    // SigmaSite
    int siteId = -1;
    std::vector<bool> tupleSigma;  // for a tuple of Σ: which elements are Σ

    int index = 0;  // TupleProj
};

EPtr makeENode(EKind k, const SourceSpan& span);
EPtr cloneTree(const EPtr& n);

/// Names of the bindings a Σ site introduces.
std::string sigmaName(int site);
std::string sigmaImpName(int site, int element = -1);  // element ≥ 0 for tuples of Σ (1-based)

struct BindingInfo {
    SourceSpan span;
    std::string typeText;  // rendered with user-facing paths
    bool anf = false;      // introduced by Σ-site elaboration
    bool implicit = false;
};

struct ElabDef {
    std::string name;
    std::string key;  // name, or name:Class for overloads
    TypeRef type;
    EPtr body;  // Lambda chain for parameters; null for externs
    bool isExtern = false;
    bool prelude = false;
    std::string firstParamClass;
    int arity = 0;  // total number of parameters across groups (externs)
    SourceSpan span;
    QualEnv quals;  // binding qualifiers of every local name
    std::map<std::string, BindingInfo> bindings;
};

struct ElabProgram {
    std::vector<ElabDef> defs;
    const ElabDef* find(const std::string& key) const;
};

/// Text form used by `dump --phase=elab` / `--phase=anf`.
std::string printNode(const EPtr& n, int indent = 0);
std::string printProgram(const ElabProgram& p, bool includePrelude = false);

}  // namespace cap::elab
