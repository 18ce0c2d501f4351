#include <sstream>

#include "cap/syntax.hpp"

namespace cap::syntax {

namespace {

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

bool isArrow(TypeKind k) {
    return k == TypeKind::FunArrow || k == TypeKind::ImplicitArrow || k == TypeKind::KillArrow ||
           k == TypeKind::ImplicitKillArrow || k == TypeKind::SigmaArrow || k == TypeKind::TransitionArrow;
}

std::string_view arrowText(TypeKind k) {
    switch (k) {
    case TypeKind::FunArrow: return "=>";
    case TypeKind::ImplicitArrow: return "?=>";
    case TypeKind::KillArrow: return "=!>";
    case TypeKind::ImplicitKillArrow: return "?=!>";
    case TypeKind::SigmaArrow: return "?<=";
    default: return "?=!>?";
    }
}

bool needsTypeParens(const STypePtr& t) {
    return isArrow(t->kind) || t->kind == TypeKind::KillAnnot || t->kind == TypeKind::ByName ||
           (t->kind == TypeKind::AppliedCon && t->name == "::");
}

std::string paren(const STypePtr& t) {
    std::string s = printType(t);
    return needsTypeParens(t) ? "(" + s + ")" : s;
}

std::string typeArgsText(const std::vector<STypePtr>& args) {
    std::vector<std::string> parts;
    for (const auto& a : args) parts.push_back(printType(a));
    return "[" + join(parts, ", ") + "]";
}

std::string typeParamsText(const std::vector<TypeParam>& tps) {
    if (tps.empty()) return "";
    std::vector<std::string> parts;
    for (const auto& tp : tps) {
        std::string s = tp.name;
        if (!tp.qualVar.empty()) s += "^" + tp.qualVar;
        s += typeParamsText(tp.params);
        if (tp.bound) s += " <: " + printType(tp.bound);
        parts.push_back(s);
    }
    return "[" + join(parts, ", ") + "]";
}

std::string paramText(const Param& p) {
    if (!p.type) return p.name;
    return p.name + ": " + (p.byName ? "=> " : "") + printType(p.type);
}

std::string paramListsText(const std::vector<ParamList>& pls) {
    std::string out;
    for (const auto& pl : pls) {
        std::vector<std::string> parts;
        for (const auto& p : pl.params) parts.push_back(paramText(p));
        out += "(" + std::string(pl.isUsing ? "using " : "") + join(parts, ", ") + ")";
    }
    return out;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

class Printer {
public:
    std::string program(const NodePtr& prog) {
        std::vector<std::string> decls;
        for (const auto& d : prog->children) decls.push_back(decl(d, 0));
        return join(decls, "\n\n") + (decls.empty() ? "" : "\n");
    }

    std::string decl(const NodePtr& n, int ind) {
        std::string pad(ind * 2, ' ');
        switch (n->kind) {
        case NodeKind::ClassDecl: {
            std::string s = pad + (n->isTrait ? "trait " : "class ") + n->name + typeParamsText(n->typeParams);
            if (!n->parents.empty()) s += " extends " + join(n->parents, ", ");
            if (!n->children.empty()) {
                s += " {\n";
                for (const auto& m : n->children) s += decl(m, ind + 1) + "\n";
                s += pad + "}";
            }
            return s;
        }
        case NodeKind::TypeMemberDecl: return pad + "type " + n->name + typeParamsText(n->typeParams);
        case NodeKind::TypeAliasDecl:
            return pad + "type " + n->name + typeParamsText(n->typeParams) + " = " + printType(n->type);
        case NodeKind::TypeFunDecl: {
            std::string s = pad + "typefun " + n->name + typeParamsText(n->typeParams);
            if (n->type) s += " <: " + printType(n->type);
            s += " = match " + n->strValue + " {\n";
            for (const auto& c : n->cases)
                s += pad + "  case " + printType(c.pattern) + " => " + printType(c.rhs) + "\n";
            return s + pad + "}";
        }
        case NodeKind::DefDecl:
        case NodeKind::ExternDefDecl: {
            std::string s = pad + (n->kind == NodeKind::ExternDefDecl ? "extern def " : "def ") + n->name +
                            typeParamsText(n->typeParams) + paramListsText(n->paramLists);
            if (n->type) s += ": " + printType(n->type);
            if (n->kind == NodeKind::DefDecl) s += " = " + expr(n->children[0], ind);
            return s;
        }
        case NodeKind::ExtensionDecl: {
            std::string s = pad + "extension ";
            if (!n->typeParams.empty()) s += typeParamsText(n->typeParams) + " ";
            s += paramListsText(n->paramLists) + " {\n";
            for (const auto& m : n->children) s += decl(m, ind + 1) + "\n";
            return s + pad + "}";
        }
        default: return pad + stmt(n, ind);
        }
    }

    std::string stmt(const NodePtr& n, int ind) {
        switch (n->kind) {
        case NodeKind::ValBind:
            return "val " + n->name + (n->type ? ": " + printType(n->type) : "") + " = " + expr(n->children[0], ind);
        case NodeKind::ImplicitValBind:
            return "implicit val " + n->name + (n->type ? ": " + printType(n->type) : "") + " = " +
                   expr(n->children[0], ind);
        case NodeKind::TupleBind: return "val (" + join(n->names, ", ") + ") = " + expr(n->children[0], ind);
        case NodeKind::DefDecl: return decl(n, ind).substr(ind * 2);
        default: return expr(n, ind);
        }
    }

    static bool needsExprParens(const NodePtr& e) {
        return e->kind == NodeKind::BinOp || e->kind == NodeKind::If || e->kind == NodeKind::Lambda ||
               e->kind == NodeKind::Unary;
    }

    std::string operand(const NodePtr& e, int ind) {
        std::string s = expr(e, ind);
        return needsExprParens(e) ? "(" + s + ")" : s;
    }

    std::string args(const NodePtr& call, size_t first, int ind) {
        std::vector<std::string> parts;
        for (size_t i = first; i < call->children.size(); ++i) parts.push_back(expr(call->children[i], ind));
        return "(" + std::string(call->isImplicit ? "using " : "") + join(parts, ", ") + ")";
    }

    std::string block(const NodePtr& b, int ind) {
        if (b->children.empty()) return "{}";
        std::string pad((ind + 1) * 2, ' ');
        std::string s = "{\n";
        for (size_t i = 0; i < b->children.size(); ++i) {
            const auto& c = b->children[i];
            std::string line = stmt(c, ind + 1);
            if (c->kind == NodeKind::Lambda && b->children.size() > 1) line = "(" + line + ")";
            s += pad + line + "\n";
        }
        return s + std::string(ind * 2, ' ') + "}";
    }

    std::string expr(const NodePtr& e, int ind) {
        switch (e->kind) {
        case NodeKind::Var: return e->name;
        case NodeKind::Literal:
            switch (e->lit) {
            case LitKind::Unit: return "()";
            case LitKind::Int: return std::to_string(e->intValue);
            case LitKind::Bool: return e->intValue ? "true" : "false";
            case LitKind::String: return quote(e->strValue);
            }
            return "()";
        case NodeKind::Apply: {
            std::string f = e->children[0]->kind == NodeKind::Var || e->children[0]->kind == NodeKind::Apply ||
                                    e->children[0]->kind == NodeKind::MethodCall ||
                                    e->children[0]->kind == NodeKind::Select
                                ? expr(e->children[0], ind)
                                : "(" + expr(e->children[0], ind) + ")";
            if (!e->typeArgs.empty()) f += typeArgsText(e->typeArgs);
            if (e->typeOnly) return f;
            if (e->children.size() == 2 && !e->isImplicit && e->children[1]->kind == NodeKind::Block)
                return f + " " + block(e->children[1], ind);
            return f + args(e, 1, ind);
        }
        case NodeKind::MethodCall: {
            std::string r = postfixOperand(e->children[0], ind);
            return r + "." + e->name + (e->typeArgs.empty() ? "" : typeArgsText(e->typeArgs)) + args(e, 1, ind);
        }
        case NodeKind::Select: return postfixOperand(e->children[0], ind) + "." + e->name;
        case NodeKind::Summon: return "summon[" + printType(e->type) + "]";
        case NodeKind::TypeAscription: return "(" + expr(e->children[0], ind) + ": " + printType(e->type) + ")";
        case NodeKind::Tuple: {
            std::vector<std::string> parts;
            for (const auto& c : e->children) parts.push_back(expr(c, ind));
            return "(" + join(parts, ", ") + ")";
        }
        case NodeKind::BinOp:
            return operand(e->children[0], ind) + " " + e->name + " " + operand(e->children[1], ind);
        case NodeKind::Unary: return e->name + operand(e->children[0], ind);
        case NodeKind::If: {
            std::string thenPart = expr(e->children[1], ind);
            if (e->children[1]->kind == NodeKind::If || e->children[1]->kind == NodeKind::Lambda)
                thenPart = "(" + thenPart + ")";
            std::string s = "if (" + expr(e->children[0], ind) + ") " + thenPart;
            if (e->children.size() > 2) s += " else " + expr(e->children[2], ind);
            return s;
        }
        case NodeKind::Lambda: {
            const auto& ps = e->paramLists[0].params;
            std::string head;
            if (ps.size() == 1 && !ps[0].type) {
                head = ps[0].name;
            } else {
                std::vector<std::string> parts;
                for (const auto& p : ps) parts.push_back(paramText(p));
                head = "(" + join(parts, ", ") + ")";
            }
            return head + (e->isImplicit ? " ?=> " : " => ") + expr(e->children[0], ind);
        }
        case NodeKind::Block: return block(e, ind);
        case NodeKind::SigmaIntro: {
            std::string pad((ind + 1) * 2, ' ');
            std::string s = "new Sigma {\n";
            for (const auto& [m, t] : e->sigmaTypes) s += pad + "type " + m + " = " + printType(t) + "\n";
            s += pad + "val a = " + expr(e->children[0], ind + 1) + "\n";
            s += pad + "val b = " + expr(e->children[1], ind + 1) + "\n";
            return s + std::string(ind * 2, ' ') + "}";
        }
        default: return stmt(e, ind);
        }
    }

    std::string postfixOperand(const NodePtr& e, int ind) {
        switch (e->kind) {
        case NodeKind::Var:
        case NodeKind::Apply:
        case NodeKind::MethodCall:
        case NodeKind::Select:
        case NodeKind::Summon:
        case NodeKind::Tuple:
        case NodeKind::TypeAscription:
        case NodeKind::Block: return expr(e, ind);
        case NodeKind::Literal:
            if (e->lit != LitKind::Int) return expr(e, ind);
            [[fallthrough]];
        default: return "(" + expr(e, ind) + ")";
        }
    }
};

}  // namespace

std::string printType(const STypePtr& t) {
    switch (t->kind) {
    case TypeKind::Named: return t->name;
    case TypeKind::AppliedCon:
        if (t->name == "::" && t->args.size() == 2) return paren(t->args[0]) + " :: " + printType(t->args[1]);
        return t->name + typeArgsText(t->args);
    case TypeKind::NatLit: return std::to_string(t->nat);
    case TypeKind::Qualified: {
        std::string s = paren(t->args[0]) + "^";
        if (!t->qualVar.empty()) return s + t->qualVar;
        if (!t->names.empty()) return s + "{" + join(t->names, ", ") + "}";
        return s;
    }
    case TypeKind::FunArrow:
    case TypeKind::ImplicitArrow:
    case TypeKind::KillArrow:
    case TypeKind::ImplicitKillArrow:
    case TypeKind::SigmaArrow:
    case TypeKind::TransitionArrow: {
        std::string lhs = t->name.empty() ? paren(t->args[0]) : "(" + t->name + ": " + printType(t->args[0]) + ")";
        const STypePtr& r = t->args[1];
        bool wrap = r->kind == TypeKind::ByName ||
                    (r->kind == TypeKind::KillAnnot && !isArrow(r->args[0]->kind));
        std::string rhs = printType(r);
        return lhs + " " + std::string(arrowText(t->kind)) + " " + (wrap ? "(" + rhs + ")" : rhs);
    }
    case TypeKind::KillAnnot: {
        std::vector<std::string> names = t->names;
        if (t->flag) names.push_back("FUN");
        const STypePtr& in = t->args[0];
        std::string inner = in->kind == TypeKind::KillAnnot || in->kind == TypeKind::ByName ? "(" + printType(in) + ")"
                                                                                             : printType(in);
        return inner + " @kill(" + join(names, ", ") + ")";
    }
    case TypeKind::PathMember:
        return join(t->path, ".") + "." + t->name + (t->args.empty() ? "" : typeArgsText(t->args));
    case TypeKind::Projection: return t->path[0] + "#" + t->name;
    case TypeKind::Singleton: return join(t->path, ".") + ".type";
    case TypeKind::Refinement: {
        std::vector<std::string> parts;
        for (const auto& [m, ty] : t->members) parts.push_back("type " + m + " = " + printType(ty));
        return "Sigma { " + join(parts, "; ") + " }";
    }
    case TypeKind::Tuple: {
        std::vector<std::string> parts;
        for (const auto& a : t->args) parts.push_back(printType(a));
        return "(" + join(parts, ", ") + ")";
    }
    case TypeKind::ByName: return "=> " + printType(t->args[0]);
    }
    return "?";
}

std::string printProgram(const NodePtr& program) { return Printer().program(program); }

std::string printExpr(const NodePtr& e) { return Printer().expr(e, 0); }

}  // namespace cap::syntax
