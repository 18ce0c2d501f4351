#include "cap/elab.hpp"

#include <sstream>

namespace cap::elab {

std::string_view ekindName(EKind k) {
    switch (k) {
    case EKind::Literal: return "Literal";
    case EKind::Var: return "Var";
    case EKind::Global: return "Global";
    case EKind::Let: return "Let";
    case EKind::ImplicitLet: return "ImplicitLet";
    case EKind::LocalDef: return "LocalDef";
    case EKind::TupleLet: return "TupleLet";
    case EKind::Block: return "Block";
    case EKind::If: return "If";
    case EKind::Lambda: return "Lambda";
    case EKind::Apply: return "Apply";
    case EKind::SigmaIntro: return "SigmaIntro";
    case EKind::SigmaProjA: return "SigmaProjA";
    case EKind::SigmaProjB: return "SigmaProjB";
    case EKind::SigmaSite: return "SigmaSite";
    case EKind::Tuple: return "Tuple";
    case EKind::TupleProj: return "TupleProj";
    case EKind::Ascribe: return "Ascribe";
    case EKind::Ctor: return "Ctor";
    case EKind::BinOp: return "BinOp";
    case EKind::Unary: return "Unary";
    }
    return "?";
}

EPtr makeENode(EKind k, const SourceSpan& span) {
    auto n = std::make_shared<ENode>();
    n->kind = k;
    n->span = span;
    return n;
}

EPtr cloneTree(const EPtr& n) {
    if (!n) return nullptr;
    auto c = std::make_shared<ENode>(*n);
    for (auto& ch : c->children) ch = cloneTree(ch);
    return c;
}

std::string sigmaName(int site) { return "$sigma_" + std::to_string(site); }

std::string sigmaImpName(int site, int element) {
    if (element < 0) return sigmaName(site) + "_imp";
    return sigmaName(site) + "_" + std::to_string(element) + "_imp";
}

const ElabDef* ElabProgram::find(const std::string& key) const {
    for (const auto& d : defs)
        if (d.key == key) return &d;
    return nullptr;
}

namespace {

std::string literalText(const ENode& n) {
    switch (n.lit) {
    case syntax::LitKind::Unit: return "()";
    case syntax::LitKind::Int: return std::to_string(n.intValue);
    case syntax::LitKind::Bool: return n.intValue ? "true" : "false";
    case syntax::LitKind::String: {
        std::string s = "\"";
        for (char c : n.strValue) {
            if (c == '"' || c == '\\') s += '\\';
            if (c == '\n') {
                s += "\\n";
                continue;
            }
            s += c;
        }
        return s + "\"";
    }
    }
    return "?";
}

void print(std::ostringstream& os, const EPtr& n, int indent) {
    std::string pad(indent * 2, ' ');
    os << pad << ekindName(n->kind);
    switch (n->kind) {
    case EKind::Literal: os << " " << literalText(*n); break;
    case EKind::Var:
    case EKind::Global:
    case EKind::Ctor: os << " " << n->name; break;
    case EKind::Let:
    case EKind::ImplicitLet:
    case EKind::LocalDef: os << " " << n->name; break;
    case EKind::TupleLet:
        os << " (";
        for (size_t i = 0; i < n->names.size(); ++i) os << (i ? ", " : "") << n->names[i];
        os << ")";
        break;
    case EKind::Lambda:
        os << " " << n->param << (n->implicit ? " ?=>" : (n->byName ? " (by-name)" : ""));
        if (n->paramType) os << " : " << typeToString(n->paramType);
        if (!n->declaredKill.empty()) os << " @kill" << n->declaredKill.str();
        break;
    case EKind::Apply:
        if (n->implicitArg) os << " (implicit)";
        else if (n->usingArg) os << " (using)";
        break;
    case EKind::SigmaSite: os << " #" << n->siteId; break;
    case EKind::TupleProj: os << " _" << n->index; break;
    case EKind::BinOp:
    case EKind::Unary: os << " " << n->name; break;
    default: break;
    }
    if (n->type) os << " : " << typeToString(n->type);
    os << "\n";
    for (const auto& c : n->children) print(os, c, indent + 1);
}

}  // namespace

std::string printNode(const EPtr& n, int indent) {
    std::ostringstream os;
    print(os, n, indent);
    return os.str();
}

std::string printProgram(const ElabProgram& p, bool includePrelude) {
    std::ostringstream os;
    for (const auto& d : p.defs) {
        if (d.prelude && !includePrelude) continue;
        os << (d.isExtern ? "extern def " : "def ") << d.name << ": " << (d.type ? typeToString(d.type) : "?")
           << "\n";
        if (d.body) print(os, d.body, 1);
    }
    return os.str();
}

}  // namespace cap::elab
