#include <set>

#include "cap/syntax.hpp"

namespace cap::syntax {

std::string_view nodeKindName(NodeKind k) {
    switch (k) {
    case NodeKind::Program: return "Program";
    case NodeKind::ClassDecl: return "ClassDecl";
    case NodeKind::TypeMemberDecl: return "TypeMemberDecl";
    case NodeKind::TypeAliasDecl: return "TypeAliasDecl";
    case NodeKind::TypeFunDecl: return "TypeFunDecl";
    case NodeKind::DefDecl: return "DefDecl";
    case NodeKind::ExternDefDecl: return "ExternDefDecl";
    case NodeKind::ExtensionDecl: return "ExtensionDecl";
    case NodeKind::ValBind: return "ValBind";
    case NodeKind::ImplicitValBind: return "ImplicitValBind";
    case NodeKind::TupleBind: return "TupleBind";
    case NodeKind::Block: return "Block";
    case NodeKind::If: return "If";
    case NodeKind::Lambda: return "Lambda";
    case NodeKind::Apply: return "Apply";
    case NodeKind::MethodCall: return "MethodCall";
    case NodeKind::Select: return "Select";
    case NodeKind::Summon: return "Summon";
    case NodeKind::Var: return "Var";
    case NodeKind::Literal: return "Literal";
    case NodeKind::TypeAscription: return "TypeAscription";
    case NodeKind::SigmaIntro: return "SigmaIntro";
    case NodeKind::Tuple: return "Tuple";
    case NodeKind::BinOp: return "BinOp";
    case NodeKind::Unary: return "Unary";
    }
    return "?";
}

NodePtr makeNode(NodeKind k, SourceSpan span) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->span = std::move(span);
    return n;
}

namespace {

STypePtr makeType(TypeKind k, SourceSpan span) {
    auto t = std::make_shared<SType>();
    t->kind = k;
    t->span = std::move(span);
    return t;
}

bool isArrowTok(Tok t) {
    return t == Tok::Arrow || t == Tok::ImpArrow || t == Tok::KillArrow || t == Tok::QKillArrow ||
           t == Tok::TransArrow || t == Tok::SigmaArrow;
}

TypeKind arrowKind(Tok t) {
    switch (t) {
    case Tok::Arrow: return TypeKind::FunArrow;
    case Tok::ImpArrow: return TypeKind::ImplicitArrow;
    case Tok::KillArrow: return TypeKind::KillArrow;
    case Tok::QKillArrow: return TypeKind::ImplicitKillArrow;
    case Tok::TransArrow: return TypeKind::TransitionArrow;
    default: return TypeKind::SigmaArrow;
    }
}

int binaryPrec(Tok t) {
    switch (t) {
    case Tok::OrOr: return 1;
    case Tok::AndAnd: return 2;
    case Tok::EqEq:
    case Tok::NotEq: return 3;
    case Tok::Lt:
    case Tok::Le:
    case Tok::Gt:
    case Tok::Ge: return 4;
    case Tok::Plus:
    case Tok::Minus: return 5;
    case Tok::Star:
    case Tok::Slash:
    case Tok::Percent: return 6;
    default: return 0;
    }
}

class Parser {
public:
    explicit Parser(const std::vector<Token>& toks) : t_(toks) {}

    NodePtr program() {
        auto prog = makeNode(NodeKind::Program, cur().span);
        while (!at(Tok::Eof)) {
            if (accept(Tok::Semi)) continue;
            prog->children.push_back(topDecl());
        }
        if (!prog->children.empty()) prog->span = SourceSpan::cover(prog->children.front()->span, prev().span);
        return prog;
    }

    STypePtr typeOnly() {
        auto ty = type();
        if (!at(Tok::Eof)) unexpected({"end of type"});
        return ty;
    }

private:
    const std::vector<Token>& t_;
    size_t p_ = 0;

    const Token& cur() const { return t_[p_]; }
    const Token& peekTok(size_t n = 1) const { return t_[std::min(p_ + n, t_.size() - 1)]; }
    const Token& prev() const { return t_[p_ == 0 ? 0 : p_ - 1]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool atSameLine(Tok k) const { return at(k) && !cur().newlineBefore; }
    bool atIdent(std::string_view text) const { return at(Tok::Ident) && cur().text == text; }

    const Token& advance() {
        const Token& tok = t_[p_];
        if (p_ + 1 < t_.size()) ++p_;
        return tok;
    }

    bool accept(Tok k) {
        if (!at(k)) return false;
        advance();
        return true;
    }

    [[noreturn]] void unexpected(std::vector<std::string> expected) {
        std::string msg = "expected ";
        for (size_t i = 0; i < expected.size(); ++i) {
            if (i) msg += i + 1 == expected.size() ? " or " : ", ";
            msg += expected[i];
        }
        msg += ", found ";
        msg += at(Tok::Eof) ? std::string("end of input") : "'" + cur().text + "'";
        fail(Code::E_PARSE, cur().span, msg);
    }

    const Token& expect(Tok k) {
        if (!at(k)) unexpected({std::string(tokName(k))});
        return advance();
    }

    std::string ident() { return expect(Tok::Ident).text; }

    SourceSpan from(const SourceSpan& start) const { return SourceSpan::cover(start, prev().span); }

    // ------------------------------------------------------------ declarations

    NodePtr topDecl() {
        switch (cur().kind) {
        case Tok::KwClass:
        case Tok::KwTrait: return classDecl();
        case Tok::KwType: return typeDecl(false);
        case Tok::KwTypefun: return typefunDecl();
        case Tok::KwDef: return defDecl(false);
        case Tok::KwExtern: return defDecl(true);
        case Tok::KwExtension: return extensionDecl();
        default: unexpected({"'class'", "'trait'", "'type'", "'typefun'", "'def'", "'extern'", "'extension'"});
        }
    }

    std::vector<TypeParam> typeParams() {
        std::vector<TypeParam> out;
        if (!accept(Tok::LBracket)) return out;
        std::set<std::string> seen;
        do {
            TypeParam tp;
            SourceSpan start = cur().span;
            tp.name = ident();
            if (!seen.insert(tp.name).second) fail(Code::E_PARSE, prev().span, "duplicate type parameter " + tp.name);
            if (atSameLine(Tok::Hat)) {
                advance();
                tp.qualVar = ident();
            }
            if (at(Tok::LBracket)) tp.params = typeParams();
            if (accept(Tok::Subtype)) tp.bound = type();
            tp.span = from(start);
            out.push_back(std::move(tp));
        } while (accept(Tok::Comma));
        expect(Tok::RBracket);
        return out;
    }

    void separator() {
        if (accept(Tok::Semi)) {
            while (accept(Tok::Semi)) {}
            return;
        }
        if (at(Tok::RBrace) || at(Tok::Eof) || cur().newlineBefore) return;
        unexpected({"';'", "newline", "'}'"});
    }

    NodePtr classDecl() {
        SourceSpan start = cur().span;
        bool trait = advance().kind == Tok::KwTrait;
        auto n = makeNode(NodeKind::ClassDecl, start);
        n->isTrait = trait;
        if (at(Tok::Cons)) n->name = advance().text;
        else n->name = ident();
        n->typeParams = typeParams();
        if (accept(Tok::KwExtends)) {
            do n->parents.push_back(ident());
            while (accept(Tok::Comma));
        }
        if (atSameLine(Tok::LBrace)) {
            advance();
            while (!at(Tok::RBrace)) {
                if (accept(Tok::Semi)) continue;
                if (at(Tok::KwClass) || at(Tok::KwTrait)) n->children.push_back(classDecl());
                else if (at(Tok::KwType)) n->children.push_back(typeDecl(true));
                else unexpected({"'type'", "'class'", "'}'"});
                separator();
            }
            expect(Tok::RBrace);
        }
        n->span = from(start);
        return n;
    }

    NodePtr typeDecl(bool inClass) {
        SourceSpan start = expect(Tok::KwType).span;
        std::string name = ident();
        auto tps = typeParams();
        if (accept(Tok::Eq)) {
            auto n = makeNode(NodeKind::TypeAliasDecl, start);
            n->name = name;
            n->typeParams = std::move(tps);
            n->type = type();
            n->span = from(start);
            return n;
        }
        if (!inClass) unexpected({"'='"});
        auto n = makeNode(NodeKind::TypeMemberDecl, start);
        n->name = name;
        n->typeParams = std::move(tps);
        n->span = from(start);
        return n;
    }

    NodePtr typefunDecl() {
        SourceSpan start = expect(Tok::KwTypefun).span;
        auto n = makeNode(NodeKind::TypeFunDecl, start);
        n->name = ident();
        n->typeParams = typeParams();
        if (n->typeParams.empty()) unexpected({"'['"});
        if (accept(Tok::Subtype)) n->type = type();
        expect(Tok::Eq);
        expect(Tok::KwMatch);
        n->strValue = ident();
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            if (accept(Tok::Semi)) continue;
            SourceSpan cs = expect(Tok::KwCase).span;
            TypeCase c;
            c.pattern = infixType();
            expect(Tok::Arrow);
            c.rhs = type();
            c.span = from(cs);
            n->cases.push_back(std::move(c));
            separator();
        }
        expect(Tok::RBrace);
        n->span = from(start);
        return n;
    }

    Param param(bool requireType) {
        Param p;
        SourceSpan start = cur().span;
        p.name = ident();
        if (requireType || at(Tok::Colon)) {
            expect(Tok::Colon);
            if (at(Tok::Arrow)) {
                advance();
                p.byName = true;
            }
            p.type = type();
        }
        p.span = from(start);
        return p;
    }

    ParamList paramList() {
        ParamList pl;
        expect(Tok::LParen);
        if (accept(Tok::KwUsing)) pl.isUsing = true;
        std::set<std::string> seen;
        if (!at(Tok::RParen)) {
            do {
                Param p = param(true);
                if (!seen.insert(p.name).second) fail(Code::E_PARSE, p.span, "duplicate parameter " + p.name);
                pl.params.push_back(std::move(p));
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
        return pl;
    }

    NodePtr defDecl(bool isExtern) {
        SourceSpan start = cur().span;
        if (isExtern) expect(Tok::KwExtern);
        expect(Tok::KwDef);
        auto n = makeNode(isExtern ? NodeKind::ExternDefDecl : NodeKind::DefDecl, start);
        n->name = ident();
        n->typeParams = typeParams();
        while (at(Tok::LParen)) n->paramLists.push_back(paramList());
        if (accept(Tok::Colon)) n->type = type();
        if (isExtern) {
            if (!n->type) unexpected({"':'"});
        } else {
            expect(Tok::Eq);
            n->children.push_back(expr());
        }
        n->span = from(start);
        return n;
    }

    NodePtr extensionDecl() {
        SourceSpan start = expect(Tok::KwExtension).span;
        auto n = makeNode(NodeKind::ExtensionDecl, start);
        n->typeParams = typeParams();
        expect(Tok::LParen);
        ParamList recv;
        recv.params.push_back(param(true));
        expect(Tok::RParen);
        n->paramLists.push_back(std::move(recv));
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            if (accept(Tok::Semi)) continue;
            if (at(Tok::KwDef)) n->children.push_back(defDecl(false));
            else if (at(Tok::KwExtern)) n->children.push_back(defDecl(true));
            else unexpected({"'def'", "'extern'", "'}'"});
            separator();
        }
        expect(Tok::RBrace);
        n->span = from(start);
        return n;
    }

    // ------------------------------------------------------------ types

    STypePtr type() {
        SourceSpan start = cur().span;
        STypePtr result;
        if (at(Tok::Arrow)) {
            advance();
            auto bn = makeType(TypeKind::ByName, start);
            bn->args.push_back(type());
            bn->span = from(start);
            return bn;
        }
        std::string binder;
        STypePtr lhs;
        if (at(Tok::LParen) && peekTok().kind == Tok::Ident && peekTok(2).kind == Tok::Colon) {
            advance();
            binder = ident();
            expect(Tok::Colon);
            lhs = type();
            expect(Tok::RParen);
            if (!isArrowTok(cur().kind) || at(Tok::SigmaArrow)) unexpected({"'=>'", "'?=>'", "'=!>'", "'?=!>'", "'?=!>?'"});
        } else {
            lhs = infixType();
        }
        if (isArrowTok(cur().kind)) {
            Tok arrow = advance().kind;
            auto fn = makeType(arrowKind(arrow), start);
            fn->name = binder;
            fn->args = {lhs, type()};
            fn->span = from(start);
            result = fn;
        } else {
            result = lhs;
        }
        if (at(Tok::At)) {
            auto ka = makeType(TypeKind::KillAnnot, start);
            advance();
            if (!atIdent("kill")) unexpected({"'kill'"});
            advance();
            expect(Tok::LParen);
            std::set<std::string> seen;
            if (!at(Tok::RParen)) {
                do {
                    std::string v = ident();
                    if (v == "FUN") ka->flag = true;
                    else if (seen.insert(v).second) ka->names.push_back(v);
                } while (accept(Tok::Comma));
            }
            expect(Tok::RParen);
            ka->args.push_back(result);
            ka->span = from(start);
            result = ka;
        }
        return result;
    }

    STypePtr infixType() {
        SourceSpan start = cur().span;
        STypePtr lhs = postfixType();
        if (at(Tok::Cons)) {
            advance();
            auto cons = makeType(TypeKind::AppliedCon, start);
            cons->name = "::";
            cons->args = {lhs, infixType()};
            cons->span = from(start);
            return cons;
        }
        return lhs;
    }

    STypePtr postfixType() {
        SourceSpan start = cur().span;
        STypePtr base = atomType();
        if (atSameLine(Tok::Hat)) {
            advance();
            auto q = makeType(TypeKind::Qualified, start);
            q->args.push_back(base);
            if (atSameLine(Tok::LBrace)) {
                advance();
                if (!at(Tok::RBrace)) {
                    do q->names.push_back(ident());
                    while (accept(Tok::Comma));
                }
                expect(Tok::RBrace);
                if (q->names.empty()) q->flag = true;
            } else if (atSameLine(Tok::Ident)) {
                q->qualVar = advance().text;
            } else {
                q->flag = true;
            }
            q->span = from(start);
            return q;
        }
        return base;
    }

    std::vector<STypePtr> typeArgs() {
        std::vector<STypePtr> out;
        expect(Tok::LBracket);
        do out.push_back(type());
        while (accept(Tok::Comma));
        expect(Tok::RBracket);
        return out;
    }

    STypePtr atomType() {
        SourceSpan start = cur().span;
        if (at(Tok::Int)) {
            auto n = makeType(TypeKind::NatLit, start);
            n->nat = std::stoi(advance().text);
            return n;
        }
        if (at(Tok::LParen)) {
            advance();
            std::vector<STypePtr> elems;
            if (!at(Tok::RParen)) {
                do elems.push_back(type());
                while (accept(Tok::Comma));
            }
            expect(Tok::RParen);
            if (elems.size() == 1) return elems[0];
            auto tup = makeType(TypeKind::Tuple, from(start));
            tup->args = std::move(elems);
            return tup;
        }
        if (!at(Tok::Ident)) unexpected({"type"});
        std::vector<std::string> segs{advance().text};
        bool singleton = false;
        while (at(Tok::Dot)) {
            advance();
            if (accept(Tok::KwType)) {
                singleton = true;
                break;
            }
            segs.push_back(ident());
        }
        if (singleton) {
            auto s = makeType(TypeKind::Singleton, from(start));
            s->path = segs;
            return s;
        }
        if (segs.size() == 1 && at(Tok::Hash)) {
            advance();
            auto pr = makeType(TypeKind::Projection, start);
            pr->path = segs;
            pr->name = ident();
            pr->span = from(start);
            return pr;
        }
        if (segs.size() == 1 && segs[0] == "Sigma" && atSameLine(Tok::LBrace)) return refinement(start);
        STypePtr t;
        if (segs.size() == 1) {
            t = makeType(TypeKind::Named, start);
            t->name = segs[0];
        } else {
            t = makeType(TypeKind::PathMember, start);
            t->name = segs.back();
            segs.pop_back();
            t->path = segs;
        }
        if (atSameLine(Tok::LBracket)) {
            t->args = typeArgs();
            if (t->kind == TypeKind::Named) t->kind = TypeKind::AppliedCon;
        }
        t->span = from(start);
        return t;
    }

    STypePtr refinement(const SourceSpan& start) {
        auto r = makeType(TypeKind::Refinement, start);
        r->name = "Sigma";
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            if (accept(Tok::Semi)) continue;
            expect(Tok::KwType);
            std::string m = ident();
            if (m != "A" && m != "B") fail(Code::E_PARSE, prev().span, "Sigma refinement only defines A and B");
            expect(Tok::Eq);
            r->members.emplace_back(m, type());
            separator();
        }
        expect(Tok::RBrace);
        r->span = from(start);
        return r;
    }

    // ------------------------------------------------------------ expressions

    // Detects `x =>`, `x ?=>`, `(x: T, y) =>` at the current position.
    bool lambdaStart() const {
        if (at(Tok::Ident)) return peekTok().kind == Tok::Arrow || peekTok().kind == Tok::ImpArrow;
        if (!at(Tok::LParen)) return false;
        size_t i = p_ + 1;
        int depth = 1;
        while (i < t_.size() && depth > 0) {
            Tok k = t_[i].kind;
            if (k == Tok::LParen || k == Tok::LBracket || k == Tok::LBrace) ++depth;
            else if (k == Tok::RParen || k == Tok::RBracket || k == Tok::RBrace) --depth;
            else if (k == Tok::Eof) return false;
            ++i;
        }
        if (i >= t_.size()) return false;
        // `(x)` followed by `=>` must be a parameter list of identifiers
        if (t_[i].kind != Tok::Arrow && t_[i].kind != Tok::ImpArrow) return false;
        return t_[p_ + 1].kind == Tok::Ident || t_[p_ + 1].kind == Tok::RParen;
    }

    NodePtr lambdaHeader(SourceSpan start) {
        auto lam = makeNode(NodeKind::Lambda, start);
        ParamList pl;
        if (at(Tok::Ident)) {
            Param p;
            p.span = cur().span;
            p.name = advance().text;
            pl.params.push_back(p);
        } else {
            expect(Tok::LParen);
            std::set<std::string> seen;
            if (!at(Tok::RParen)) {
                do {
                    Param p = param(false);
                    if (!seen.insert(p.name).second) fail(Code::E_PARSE, p.span, "duplicate parameter " + p.name);
                    pl.params.push_back(std::move(p));
                } while (accept(Tok::Comma));
            }
            expect(Tok::RParen);
        }
        lam->isImplicit = advance().kind == Tok::ImpArrow;
        lam->paramLists.push_back(std::move(pl));
        return lam;
    }

    NodePtr lambda() {
        SourceSpan start = cur().span;
        auto lam = lambdaHeader(start);
        lam->children.push_back(expr());
        lam->span = from(start);
        return lam;
    }

    // Lambda at the head of a block: the remaining statements form its body.
    NodePtr blockHeadLambda() {
        SourceSpan start = cur().span;
        auto lam = lambdaHeader(start);
        if (lambdaStart()) {
            lam->children.push_back(blockHeadLambda());
        } else {
            auto body = makeNode(NodeKind::Block, cur().span);
            statements(body);
            if (body->children.size() == 1 && isExprKind(body->children[0]->kind)) {
                lam->children.push_back(body->children[0]);
            } else {
                if (!body->children.empty())
                    body->span = SourceSpan::cover(body->children.front()->span, body->children.back()->span);
                lam->children.push_back(body);
            }
        }
        lam->span = from(start);
        return lam;
    }

    static bool isExprKind(NodeKind k) {
        switch (k) {
        case NodeKind::ValBind:
        case NodeKind::ImplicitValBind:
        case NodeKind::TupleBind:
        case NodeKind::DefDecl:
        case NodeKind::ExternDefDecl: return false;
        default: return true;
        }
    }

    void statements(const NodePtr& block) {
        while (!at(Tok::RBrace)) {
            if (accept(Tok::Semi)) continue;
            if (at(Tok::Eof)) unexpected({"'}'"});
            block->children.push_back(statement());
            separator();
        }
    }

    NodePtr block() {
        SourceSpan start = expect(Tok::LBrace).span;
        auto b = makeNode(NodeKind::Block, start);
        if (lambdaStart()) {
            b->children.push_back(blockHeadLambda());
            while (accept(Tok::Semi)) {}
        } else {
            statements(b);
        }
        expect(Tok::RBrace);
        b->span = from(start);
        return b;
    }

    NodePtr statement() {
        SourceSpan start = cur().span;
        if (at(Tok::KwVal)) {
            advance();
            if (at(Tok::LParen)) {
                auto tb = makeNode(NodeKind::TupleBind, start);
                advance();
                std::set<std::string> seen;
                do {
                    std::string nm = ident();
                    if (!seen.insert(nm).second) fail(Code::E_PARSE, prev().span, "duplicate binder " + nm);
                    tb->names.push_back(nm);
                } while (accept(Tok::Comma));
                expect(Tok::RParen);
                expect(Tok::Eq);
                tb->children.push_back(expr());
                tb->span = from(start);
                return tb;
            }
            auto vb = makeNode(NodeKind::ValBind, start);
            vb->name = ident();
            if (accept(Tok::Colon)) vb->type = type();
            expect(Tok::Eq);
            vb->children.push_back(expr());
            vb->span = from(start);
            return vb;
        }
        if (at(Tok::KwImplicit)) {
            advance();
            expect(Tok::KwVal);
            auto vb = makeNode(NodeKind::ImplicitValBind, start);
            vb->name = ident();
            if (accept(Tok::Colon)) vb->type = type();
            expect(Tok::Eq);
            vb->children.push_back(expr());
            vb->span = from(start);
            return vb;
        }
        if (at(Tok::KwDef)) return defDecl(false);
        return expr();
    }

    NodePtr expr() {
        if (lambdaStart()) return lambda();
        if (at(Tok::KwIf)) return ifExpr();
        return binary(1);
    }

    NodePtr ifExpr() {
        SourceSpan start = expect(Tok::KwIf).span;
        auto n = makeNode(NodeKind::If, start);
        expect(Tok::LParen);
        n->children.push_back(expr());
        expect(Tok::RParen);
        n->children.push_back(expr());
        // `else` may sit on the next line
        size_t save = p_;
        while (accept(Tok::Semi)) {}
        if (accept(Tok::KwElse)) n->children.push_back(expr());
        else p_ = save;
        n->span = from(start);
        return n;
    }

    NodePtr binary(int minPrec) {
        SourceSpan start = cur().span;
        NodePtr lhs = unary();
        while (true) {
            int prec = binaryPrec(cur().kind);
            if (prec == 0 || prec < minPrec || cur().newlineBefore) break;
            std::string op = advance().text;
            NodePtr rhs = binary(prec + 1);
            auto b = makeNode(NodeKind::BinOp, from(start));
            b->name = op;
            b->children = {lhs, rhs};
            lhs = b;
        }
        return lhs;
    }

    NodePtr unary() {
        if (at(Tok::Bang) || at(Tok::Minus)) {
            SourceSpan start = cur().span;
            auto n = makeNode(NodeKind::Unary, start);
            n->name = advance().text;
            n->children.push_back(unary());
            n->span = from(start);
            return n;
        }
        return postfix();
    }

    void argList(const NodePtr& call) {
        expect(Tok::LParen);
        if (accept(Tok::KwUsing)) call->isImplicit = true;
        if (!at(Tok::RParen)) {
            do call->children.push_back(expr());
            while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
    }

    NodePtr postfix() {
        SourceSpan start = cur().span;
        NodePtr e = primary();
        while (true) {
            if (atSameLine(Tok::Dot)) {
                advance();
                std::string name = ident();
                std::vector<STypePtr> targs;
                if (atSameLine(Tok::LBracket)) targs = typeArgs();
                if (atSameLine(Tok::LParen)) {
                    auto mc = makeNode(NodeKind::MethodCall, start);
                    mc->name = name;
                    mc->typeArgs = std::move(targs);
                    mc->children.push_back(e);
                    argList(mc);
                    mc->span = from(start);
                    e = mc;
                } else {
                    if (!targs.empty()) unexpected({"'('"});
                    auto sel = makeNode(NodeKind::Select, from(start));
                    sel->name = name;
                    sel->children.push_back(e);
                    e = sel;
                }
            } else if (atSameLine(Tok::LBracket)) {
                auto ap = makeNode(NodeKind::Apply, start);
                ap->typeArgs = typeArgs();
                ap->children.push_back(e);
                if (atSameLine(Tok::LParen)) argList(ap);
                else ap->typeOnly = true;
                ap->span = from(start);
                e = ap;
            } else if (atSameLine(Tok::LParen)) {
                auto ap = makeNode(NodeKind::Apply, start);
                ap->children.push_back(e);
                argList(ap);
                ap->span = from(start);
                e = ap;
            } else if (atSameLine(Tok::LBrace)) {
                auto ap = makeNode(NodeKind::Apply, start);
                ap->children.push_back(e);
                ap->children.push_back(block());
                ap->span = from(start);
                e = ap;
            } else {
                break;
            }
        }
        return e;
    }

    NodePtr literal(LitKind k, const SourceSpan& span) {
        auto n = makeNode(NodeKind::Literal, span);
        n->lit = k;
        return n;
    }

    NodePtr primary() {
        SourceSpan start = cur().span;
        switch (cur().kind) {
        case Tok::Int: {
            auto n = literal(LitKind::Int, start);
            try {
                n->intValue = std::stoll(cur().text);
            } catch (const std::exception&) {
                fail(Code::E_PARSE, start, "integer literal out of range");
            }
            advance();
            return n;
        }
        case Tok::String: {
            auto n = literal(LitKind::String, start);
            n->strValue = advance().text;
            return n;
        }
        case Tok::KwTrue:
        case Tok::KwFalse: {
            auto n = literal(LitKind::Bool, start);
            n->intValue = advance().kind == Tok::KwTrue;
            return n;
        }
        case Tok::Ident: {
            auto n = makeNode(NodeKind::Var, start);
            n->name = advance().text;
            return n;
        }
        case Tok::LBrace: return block();
        case Tok::KwIf: return ifExpr();
        case Tok::KwSummon: {
            advance();
            auto n = makeNode(NodeKind::Summon, start);
            expect(Tok::LBracket);
            n->type = type();
            expect(Tok::RBracket);
            n->span = from(start);
            return n;
        }
        case Tok::KwNew: return sigmaIntro();
        case Tok::LParen: {
            advance();
            if (accept(Tok::RParen)) return literal(LitKind::Unit, from(start));
            NodePtr first = expr();
            if (accept(Tok::Colon)) {
                auto asc = makeNode(NodeKind::TypeAscription, start);
                asc->type = type();
                asc->children.push_back(first);
                expect(Tok::RParen);
                asc->span = from(start);
                return asc;
            }
            if (at(Tok::Comma)) {
                auto tup = makeNode(NodeKind::Tuple, start);
                tup->children.push_back(first);
                while (accept(Tok::Comma)) tup->children.push_back(expr());
                expect(Tok::RParen);
                tup->span = from(start);
                return tup;
            }
            expect(Tok::RParen);
            return first;
        }
        default: unexpected({"expression"});
        }
    }

    NodePtr sigmaIntro() {
        SourceSpan start = expect(Tok::KwNew).span;
        if (!atIdent("Sigma")) unexpected({"'Sigma'"});
        advance();
        auto n = makeNode(NodeKind::SigmaIntro, start);
        NodePtr a, b;
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            if (accept(Tok::Semi)) continue;
            if (accept(Tok::KwType)) {
                std::string m = ident();
                if (m != "A" && m != "B") fail(Code::E_PARSE, prev().span, "Sigma only defines type members A and B");
                expect(Tok::Eq);
                n->sigmaTypes.emplace_back(m, type());
            } else {
                SourceSpan vs = expect(Tok::KwVal).span;
                std::string m = ident();
                if (m != "a" && m != "b") fail(Code::E_PARSE, prev().span, "Sigma only defines fields a and b");
                STypePtr asc;
                if (accept(Tok::Colon)) asc = type();
                expect(Tok::Eq);
                NodePtr init = expr();
                if (asc) {
                    auto wrap = makeNode(NodeKind::TypeAscription, from(vs));
                    wrap->type = asc;
                    wrap->children.push_back(init);
                    init = wrap;
                }
                (m == "a" ? a : b) = init;
            }
            separator();
        }
        expect(Tok::RBrace);
        if (!a || !b) fail(Code::E_PARSE, from(start), "Sigma requires both fields a and b");
        n->children = {a, b};
        n->span = from(start);
        return n;
    }
};

}  // namespace

NodePtr parseProgram(const std::vector<Token>& tokens) { return Parser(tokens).program(); }

NodePtr parseSource(const std::string& source, const std::string& file) {
    return parseProgram(tokenize(source, file));
}

STypePtr parseTypeText(const std::string& text, const std::string& file) {
    auto toks = tokenize(text, file);
    return Parser(toks).typeOnly();
}

}  // namespace cap::syntax
