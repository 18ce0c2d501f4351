#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cap/diagnostics.hpp"
#include "cap/kernel.hpp"

namespace cap::syntax {

enum class Tok {
    Ident,
    Int,
    String,
    // keywords
    KwClass,
    KwTrait,
    KwExtends,
    KwType,
    KwTypefun,
    KwMatch,
    KwCase,
    KwDef,
    KwExtern,
    KwExtension,
    KwVal,
    KwImplicit,
    KwUsing,
    KwSummon,
    KwNew,
    KwIf,
    KwElse,
    KwTrue,
    KwFalse,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    Eq,
    Hat,
    At,
    Hash,
    Subtype,    // <:
    Cons,       // ::
    Arrow,      // =>
    ImpArrow,   // ?=>
    KillArrow,  // =!>
    QKillArrow, // ?=!>
    TransArrow, // ?=!>?
    SigmaArrow, // ?<=
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Eof,
};

std::string_view tokName(Tok t);

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
    bool newlineBefore = false;
};

std::vector<Token> tokenize(const std::string& source, const std::string& file);

// ---------------------------------------------------------------- types

enum class TypeKind {
    Named,              // Int, File, TNil, T (type variables are resolved later)
    AppliedCon,         // Send[T, P]
    NatLit,             // 0, 1 in type position
    Qualified,          // T^, T^{x,y}, T^q
    FunArrow,           // =>
    ImplicitArrow,      // ?=>
    KillArrow,          // =!>
    ImplicitKillArrow,  // ?=!>
    SigmaArrow,         // B ?<= A
    TransitionArrow,    // S1 ?=!>? S2
    KillAnnot,          // T @kill(x, FUN)
    PathMember,         // f.IsOpen, tree.Elems[L]
    Projection,         // Table#Row
    Singleton,          // p.type
    Refinement,         // Sigma { type A = ...; type B = ... }
    Tuple,              // (A, B); the empty tuple is Unit
    ByName,             // => T
};

struct SType;
using STypePtr = std::shared_ptr<SType>;

struct SType {
    TypeKind kind = TypeKind::Named;
    SourceSpan span;
    std::string name;                // Named/AppliedCon name, member name, arrow binder ("" if none)
    std::vector<std::string> path;   // PathMember/Singleton prefix, Projection owner
    std::vector<STypePtr> args;      // type args; arrows: {param, result}; wrappers: {inner}
    std::vector<std::string> names;  // qualifier or kill variables
    bool flag = false;               // Qualified: fresh marker; KillAnnot: FUN
    std::string qualVar;             // Qualified: `T^q` qualifier variable
    int nat = 0;
    std::vector<std::pair<std::string, STypePtr>> members;  // Refinement
};

// ---------------------------------------------------------------- terms

enum class NodeKind {
    Program,
    ClassDecl,
    TypeMemberDecl,
    TypeAliasDecl,
    TypeFunDecl,
    DefDecl,
    ExternDefDecl,
    ExtensionDecl,
    ValBind,
    ImplicitValBind,
    TupleBind,
    Block,
    If,
    Lambda,
    Apply,
    MethodCall,
    Select,
    Summon,
    Var,
    Literal,
    TypeAscription,
    SigmaIntro,
    Tuple,
    BinOp,
    Unary,
};

std::string_view nodeKindName(NodeKind k);

enum class LitKind { Unit, Int, Bool, String };

struct TypeParam {
    std::string name;
    std::string qualVar;  // `[T^q]`
    STypePtr bound;       // nullptr when unbounded
    std::vector<TypeParam> params;  // higher-kinded members such as `type Elems[T <: TList]`
    SourceSpan span;
};

struct Param {
    std::string name;
    STypePtr type;  // may be null for lambda params
    bool byName = false;
    SourceSpan span;
    TypeRef ktype;  // filled by desugaring
};

struct ParamList {
    bool isUsing = false;
    std::vector<Param> params;
};

struct TypeCase {
    STypePtr pattern;
    STypePtr rhs;
    SourceSpan span;
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    NodeKind kind;
    SourceSpan span;
    std::string name;
    std::vector<TypeParam> typeParams;
    std::vector<ParamList> paramLists;
    std::vector<STypePtr> typeArgs;
    STypePtr type;
    std::vector<std::string> parents;
    std::vector<std::string> names;  // TupleBind targets
    std::vector<NodePtr> children;   // see parser for the per-kind layout
    std::vector<TypeCase> cases;
    bool isImplicit = false;  // Lambda `?=>`, Apply `(using ...)`
    bool isTrait = false;
    bool typeOnly = false;  // Apply written `f[T]` without an argument list
    LitKind lit = LitKind::Unit;
    long long intValue = 0;
    std::string strValue;
    std::vector<std::pair<std::string, STypePtr>> sigmaTypes;  // SigmaIntro `type A = ...`
    // filled by desugaring
    TypeRef ktype;
    std::vector<TypeRef> kTypeArgs;
};

// Layout of `children` per kind:
//   Program, Block, ClassDecl, ExtensionDecl: members / statements in order
//   DefDecl: {body}; ExternDefDecl: {}
//   ValBind, ImplicitValBind, TupleBind: {init}
//   If: {cond, then, else?}; Lambda: {body}
//   Apply: {fn, args...}; MethodCall: {receiver, args...} (name = method)
//   Select: {receiver}; TypeAscription: {expr}; SigmaIntro: {a, b}
//   Tuple: elements; BinOp: {lhs, rhs}; Unary: {operand}
// ExtensionDecl keeps the receiver in paramLists[0].

NodePtr makeNode(NodeKind k, SourceSpan span);

NodePtr parseProgram(const std::vector<Token>& tokens);
NodePtr parseSource(const std::string& source, const std::string& file);
STypePtr parseTypeText(const std::string& text, const std::string& file = "<type>");

std::string printProgram(const NodePtr& program);
std::string printType(const STypePtr& t);
std::string printExpr(const NodePtr& e);

}  // namespace cap::syntax
