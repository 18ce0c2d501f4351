#include <algorithm>

#include "typer_internal.hpp"

namespace cap::typer {

namespace detail {

namespace {

EPtr unitLiteral(const SourceSpan& span) {
    auto n = elab::makeENode(EKind::Literal, span);
    n->lit = syntax::LitKind::Unit;
    n->type = unitType();
    return n;
}

bool isStatement(const NodePtr& n) {
    return n->kind == NodeKind::ValBind || n->kind == NodeKind::ImplicitValBind || n->kind == NodeKind::TupleBind ||
           n->kind == NodeKind::DefDecl;
}

bool liftable(const EPtr& e) { return e->kind == EKind::Apply || e->kind == EKind::SigmaIntro; }

TypeRef stripQualMetas(const TypeRef& t) {
    auto c = std::make_shared<Type>(*t);
    for (auto it = c->qual.vars.begin(); it != c->qual.vars.end();)
        it = (!it->empty() && (*it)[0] == '?') ? c->qual.vars.erase(it) : std::next(it);
    for (auto& a : c->args) a = stripQualMetas(a);
    return c;
}

}  // namespace

// ---------------------------------------------------------------- definitions

DefTyper::DefTyper(ProgramTyper& owner, const desugar::DefInfo& def)
    : owner_(owner), def_(def), prog_(owner.prog), u_(ctx_) {
    ctx_.classes = &prog_.classes;
    u_.checkKills = true;
}

elab::ElabDef DefTyper::run() {
    elab::ElabDef out;
    out.name = def_.name;
    out.key = owner_.keyOf(def_);
    out.isExtern = def_.isExtern;
    out.prelude = def_.prelude;
    out.firstParamClass = def_.firstParamClass;
    out.span = def_.span;
    for (const auto& g : def_.groups) out.arity += g.params.empty() ? 1 : static_cast<int>(g.params.size());
    if (def_.isExtern) {
        out.type = def_.type;
        return out;
    }
    std::vector<LParam> ps;
    for (const auto& g : def_.groups) {
        if (g.params.empty()) ps.push_back(LParam{"_", unitType(), g.isUsing, def_.span});
        for (const auto& p : g.params) ps.push_back(LParam{p.name, p.type, g.isUsing, p.span});
    }
    ctx_.push();
    EPtr body;
    if (ps.empty()) {
        body = elab(def_.body, def_.result, true);
    } else {
        body = lambdaChain(ps, 0, def_.body, def_.type, def_.span, false);
        body->isDefBody = true;
    }
    checkPending(0);
    body = zonk(body);
    out.type = def_.type ? def_.type : body->type;
    out.body = body;
    out.quals = ctx_.env;
    out.bindings = info_;
    return out;
}

// ---------------------------------------------------------------- expressions

EPtr DefTyper::elab(const NodePtr& n, const TypeRef& expected, bool allowSigma) {
    if (expected) {
        TypeRef ex = current(expected);
        if (ex->kind == TypeKind::DepFun && ex->implicit && !(n->kind == NodeKind::Lambda && n->isImplicit)) {
            std::vector<LParam> ps{LParam{freshName("$i"), nullptr, true, n->span}};
            return lambdaChain(ps, 0, n, ex, n->span, false);
        }
    }
    EPtr e = elabCore(n, expected, allowSigma);
    return coerce(e, expected, allowSigma, n->span);
}

EPtr DefTyper::elabCore(const NodePtr& n, const TypeRef& expected, bool allowSigma) {
    switch (n->kind) {
    case NodeKind::Literal: return literal(n);
    case NodeKind::Var: return var(n);
    case NodeKind::Apply: return apply(n, expected);
    case NodeKind::Block: return block(n, expected, allowSigma);
    case NodeKind::If: return ifExpr(n, expected, allowSigma);
    case NodeKind::Lambda: return lambda(n, expected);
    case NodeKind::BinOp: return binOp(n);
    case NodeKind::Unary: return unary(n);
    case NodeKind::Tuple: return tuple(n, expected);
    case NodeKind::Select: return select(n);
    case NodeKind::Summon: return summon(n);
    case NodeKind::SigmaIntro: return sigmaIntro(n, expected);
    case NodeKind::TypeAscription: {
        TypeRef t = n->ktype;
        EPtr inner = elab(n->children[0], t, isSigmaLike(current(t)));
        auto e = elab::makeENode(EKind::Ascribe, n->span);
        e->children = {inner};
        e->type = t;
        e->qual = inner->qual;
        return e;
    }
    case NodeKind::ValBind:
    case NodeKind::ImplicitValBind:
    case NodeKind::TupleBind:
    case NodeKind::DefDecl: {
        // a definition used as an expression evaluates to ()
        auto b = elab::makeENode(EKind::Block, n->span);
        int d0 = ctx_.depth();
        ctx_.push();
        b->children = {statement(n), unitLiteral(n->span)};
        ctx_.popTo(d0);
        b->type = unitType();
        return b;
    }
    default: fail(Code::E_TYPE_MISMATCH, n->span, "unexpected expression");
    }
}

EPtr DefTyper::coerce(EPtr e, const TypeRef& expected, bool allowSigma, const SourceSpan& span) {
    TypeRef t = current(e->type);
    TypeRef ex = expected ? current(expected) : nullptr;
    if (isSigmaLike(t) && liftable(e)) {
        bool keep = allowSigma && (!ex || isSigmaLike(ex));
        if (!keep) {
            e = makeSite(e);
            t = current(e->type);
        }
    }
    if (!ex) return e;
    if (ex->kind == TypeKind::Sigma && t->kind != TypeKind::Sigma) return sigmaLift(e, ex, span);
    if (ex->kind == TypeKind::Singleton) {
        auto p = pathOf(e);
        if (!p || !(ctx_.canonical(*p) == ctx_.canonical(ex->path)))
            fail(Code::E_PATH_MISMATCH, span, "expected " + show(ex) + ", found " + show(t));
        return e;
    }
    requireConforms(t, ex, span);
    return e;
}

EPtr DefTyper::literal(const NodePtr& n) {
    auto e = elab::makeENode(EKind::Literal, n->span);
    e->lit = n->lit;
    e->intValue = n->intValue;
    e->strValue = n->strValue;
    switch (n->lit) {
    case syntax::LitKind::Unit: e->type = unitType(); break;
    case syntax::LitKind::Int: e->type = intType(); break;
    case syntax::LitKind::Bool: e->type = boolType(); break;
    case syntax::LitKind::String: e->type = stringType(); break;
    }
    return e;
}

EPtr DefTyper::block(const NodePtr& n, const TypeRef& expected, bool allowSigma) {
    if (n->children.empty()) return unitLiteral(n->span);
    int d0 = ctx_.depth();
    ctx_.push();
    auto b = elab::makeENode(EKind::Block, n->span);
    for (size_t i = 0; i + 1 < n->children.size(); ++i) b->children.push_back(statement(n->children[i]));
    const NodePtr& last = n->children.back();
    EPtr r;
    if (isStatement(last)) {
        b->children.push_back(statement(last));
        r = unitLiteral(last->span);
    } else {
        r = elab(last, expected, allowSigma);
    }
    b->children.push_back(r);
    b->type = r->type;
    b->qual = exitScope(r->qual, d0);
    ctx_.popTo(d0);
    return b;
}

EPtr DefTyper::statement(const NodePtr& n) {
    switch (n->kind) {
    case NodeKind::ValBind:
    case NodeKind::ImplicitValBind: return valBind(n);
    case NodeKind::TupleBind: return tupleBind(n);
    case NodeKind::DefDecl: return localDef(n);
    default: return elab(n, nullptr, false);
    }
}

EPtr DefTyper::valBind(const NodePtr& n) {
    TypeRef asc = n->ktype;
    EPtr init;
    std::optional<Path> alias;
    if (asc && asc->kind == TypeKind::Singleton) {
        init = elab(n->children[0], pathType(asc->path, n->span), false);
        auto p = pathOf(init);
        if (!p || !(ctx_.canonical(*p) == ctx_.canonical(asc->path)))
            fail(Code::E_PATH_MISMATCH, n->children[0]->span,
                 "expected " + show(asc) + ", found " + show(current(init->type)));
        alias = ctx_.canonical(asc->path);
    } else {
        init = elab(n->children[0], asc, asc && isSigmaLike(current(asc)));
        if (init->kind == EKind::SigmaSite && init->tupleSigma.empty())
            alias = ctx_.canonical(Path{elab::sigmaName(init->siteId), {"a"}});
    }
    Binding b;
    b.name = n->name;
    b.type = asc ? asc : init->type;
    b.qual = init->qual;
    b.implicit = n->kind == NodeKind::ImplicitValBind;
    b.span = n->span;
    bindLocal(b);
    if (alias) ctx_.aliases[n->name] = *alias;
    auto e = elab::makeENode(b.implicit ? EKind::ImplicitLet : EKind::Let, n->span);
    e->name = n->name;
    e->children = {init};
    e->type = unitType();
    e->sigmaAscribed = asc && isSigmaLike(current(asc));
    return e;
}

EPtr DefTyper::tupleBind(const NodePtr& n) {
    EPtr init = elab(n->children[0], nullptr, false);
    TypeRef t = current(init->type);
    if (t->kind != TypeKind::Tuple || t->args.size() != n->names.size())
        fail(Code::E_TYPE_MISMATCH, n->span,
             "cannot bind " + std::to_string(n->names.size()) + " names to a value of type " + show(t));
    bool site = init->kind == EKind::SigmaSite;
    for (size_t k = 0; k < n->names.size(); ++k) {
        Binding b;
        b.name = n->names[k];
        b.type = t->args[k];
        // the endpoints of a Σ tuple are independent roots
        b.qual = site ? Qualifier::freshOnly() : init->qual;
        b.span = n->span;
        bindLocal(b);
        if (site && init->tupleSigma[k])
            ctx_.aliases[b.name] = Path{elab::sigmaName(init->siteId), {"_" + std::to_string(k + 1), "a"}};
    }
    auto e = elab::makeENode(EKind::TupleLet, n->span);
    e->names = n->names;
    e->children = {init};
    e->type = unitType();
    return e;
}

EPtr DefTyper::localDef(const NodePtr& n) {
    if (n->paramLists.empty()) {
        // a parameterless local definition is an ordinary value
        auto v = std::make_shared<syntax::Node>(*n);
        v->kind = NodeKind::ValBind;
        v->ktype = n->ktype;
        return valBind(v);
    }
    std::vector<LParam> ps;
    for (const auto& pl : n->paramLists) {
        if (pl.params.empty()) ps.push_back(LParam{"_", unitType(), pl.isUsing, n->span});
        for (const auto& p : pl.params) ps.push_back(LParam{p.name, p.ktype, pl.isUsing, p.span});
    }
    std::vector<std::string> generics;
    for (const auto& tp : n->typeParams) generics.push_back(tp.name);
    if (n->ktype) {
        Binding b;
        b.name = n->name;
        b.type = n->ktype;
        b.isLocalDef = true;
        b.generics = generics;
        b.span = n->span;
        bindLocal(b);
    }
    EPtr lam = lambdaChain(ps, 0, n->children[0], n->ktype, n->span, false);
    if (n->ktype) {
        ctx_.env.quals[n->name] = lam->qual;
    } else {
        Binding b;
        b.name = n->name;
        b.type = lam->type;
        b.qual = lam->qual;
        b.isLocalDef = true;
        b.generics = generics;
        b.span = n->span;
        bindLocal(b);
    }
    auto e = elab::makeENode(EKind::LocalDef, n->span);
    e->name = n->name;
    e->children = {lam};
    e->type = unitType();
    return e;
}

EPtr DefTyper::lambda(const NodePtr& n, const TypeRef& expected) {
    std::vector<LParam> ps;
    if (!n->paramLists.empty())
        for (const auto& p : n->paramLists[0].params) ps.push_back(LParam{p.name, p.ktype, n->isImplicit, p.span});
    return lambdaChain(ps, 0, n->children[0], expected, n->span, false);
}

EPtr DefTyper::lambdaChain(const std::vector<LParam>& ps, size_t i, const NodePtr& body, const TypeRef& ex0,
                           const SourceSpan& span, bool byName) {
    TypeRef ex = ex0 ? current(ex0) : nullptr;
    if (ex && ex->isMeta()) ex = nullptr;  // inferred, then unified by the caller
    const LParam* p = i < ps.size() ? &ps[i] : nullptr;
    std::string pname = p ? p->name : "_";
    TypeRef ptype = p ? p->type : unitType();
    bool imp = p && p->implicit;
    TypeRef resultEx;
    KillSet declared;
    bool hasEx = false;
    if (ex) {
        if (ex->kind != TypeKind::DepFun) fail(Code::E_TYPE_MISMATCH, span, "expected " + show(ex) + ", found a function");
        hasEx = true;
        if (ptype) requireConforms(ex->param(), ptype, p ? p->span : span);
        else ptype = current(ex->param());
        imp = imp || ex->implicit;
        resultEx = ex->result();
        declared = ex->kill;
        if (!ex->binder.empty() && ex->binder != "_" && ex->binder != pname) {
            resultEx = renameValue(resultEx, ex->binder, Path{pname, {}});
            if (declared.vars.erase(ex->binder)) declared.vars.insert(pname);
        }
    } else if (!ptype) {
        fail(Code::E_TYPE_MISMATCH, p->span, "missing type for lambda parameter " + displayName(pname));
    }
    int outer = ctx_.depth();
    int startOrder = nextOrder_;
    ctx_.push();
    if (pname != "_") {
        Binding b;
        b.name = pname;
        b.type = ptype;
        b.qual = ptype->qual;
        b.implicit = imp;
        b.isParam = true;
        b.span = p ? p->span : span;
        bindLocal(b);
    }
    // only what the expected result names before the body is checked may escape into it
    Qualifier allowedQ = hasEx ? u_.apply(current(resultEx)->qual) : Qualifier{};
    // a curried continuation may close over earlier parameters
    bool continuation = hasEx && current(resultEx)->kind == TypeKind::DepFun;
    std::set<std::string> savedKilled = killed_;
    EPtr inner = (p && i + 1 < ps.size()) ? lambdaChain(ps, i + 1, body, resultEx, span, false)
                                          : elab(body, resultEx, true);
    std::set<std::string> newKills;
    for (const auto& k : killed_)
        if (!savedKilled.count(k) && (k == pname || orderOf(k) < startOrder)) newKills.insert(k);
    killed_ = savedKilled;

    Qualifier rq = exitScope(inner->qual, outer + 1);
    if (pname != "_" && rq.vars.count(pname) && !continuation) {
        bool allowed = !hasEx || allowedQ.vars.count(pname);
        if (!allowed) {
            std::string who = pname[0] == '$' ? "the implicit parameter of type " + show(ptype) : displayName(pname);
            fail(Code::E_ESCAPE, body->span, who + " escapes: the result of this function reaches it");
        }
    }
    std::set<std::string> free;
    collectFree(inner, startOrder, free);
    ctx_.popTo(outer);

    KillSet kill = hasEx ? declared : KillSet{newKills, false};
    auto fnT = std::make_shared<Type>(*mkFun(pname, ptype, withQual(inner->type, rq), imp, kill));
    fnT->byName = byName || (hasEx && ex->byName);
    auto e = elab::makeENode(EKind::Lambda, span);
    e->param = pname;
    e->paramType = ptype;
    e->implicit = imp;
    e->byName = fnT->byName;
    e->declaredKill = kill;
    e->children = {inner};
    e->type = fnT;
    e->qual.vars = free;
    return e;
}

EPtr DefTyper::ifExpr(const NodePtr& n, const TypeRef& expected, bool allowSigma) {
    EPtr cond = elab(n->children[0], boolType(), false);
    std::set<std::string> saved = killed_;
    int d0 = ctx_.depth();
    bool hasElse = n->children.size() > 2;
    EPtr thenN = elab(n->children[1], hasElse ? expected : nullptr, allowSigma && hasElse);
    ctx_.popTo(d0);
    std::set<std::string> afterThen = killed_;
    killed_ = saved;
    EPtr elseN;
    if (hasElse) {
        elseN = elab(n->children[2], expected ? expected : thenN->type, allowSigma);
        ctx_.popTo(d0);
    }
    killed_.insert(afterThen.begin(), afterThen.end());
    auto e = elab::makeENode(EKind::If, n->span);
    e->children = {cond, thenN};
    if (elseN) e->children.push_back(elseN);
    e->type = !hasElse ? unitType() : (expected ? expected : thenN->type);
    e->qual = elseN ? thenN->qual.join(elseN->qual) : Qualifier{};
    e->type = withQual(e->type, e->qual);
    return e;
}

EPtr DefTyper::binOp(const NodePtr& n) {
    const std::string& op = n->name;
    auto e = elab::makeENode(EKind::BinOp, n->span);
    e->name = op;
    EPtr l, r;
    if (op == "+") {
        l = elab(n->children[0], nullptr, false);
        TypeRef lt = current(l->type);
        if (isBase(lt, "String")) {
            r = elab(n->children[1], nullptr, false);
            TypeRef rt = current(r->type);
            if (!isBase(rt, "String") && !isBase(rt, "Int") && !isBase(rt, "Bool"))
                fail(Code::E_TYPE_MISMATCH, n->children[1]->span, "cannot append a value of type " + show(rt));
            e->type = stringType();
        } else {
            requireConforms(lt, intType(), n->children[0]->span);
            r = elab(n->children[1], intType(), false);
            e->type = intType();
        }
    } else if (op == "-" || op == "*" || op == "/" || op == "%") {
        l = elab(n->children[0], intType(), false);
        r = elab(n->children[1], intType(), false);
        e->type = intType();
    } else if (op == "<" || op == "<=" || op == ">" || op == ">=") {
        l = elab(n->children[0], intType(), false);
        r = elab(n->children[1], intType(), false);
        e->type = boolType();
    } else if (op == "&&" || op == "||") {
        l = elab(n->children[0], boolType(), false);
        r = elab(n->children[1], boolType(), false);
        e->type = boolType();
    } else {
        l = elab(n->children[0], nullptr, false);
        r = elab(n->children[1], withQual(current(l->type), Qualifier{}), false);
        e->type = boolType();
    }
    e->children = {l, r};
    return e;
}

EPtr DefTyper::unary(const NodePtr& n) {
    auto e = elab::makeENode(EKind::Unary, n->span);
    e->name = n->name;
    TypeRef t = n->name == "!" ? boolType() : intType();
    e->children = {elab(n->children[0], t, false)};
    e->type = t;
    return e;
}

EPtr DefTyper::tuple(const NodePtr& n, const TypeRef& expected) {
    TypeRef ex = expected ? current(expected) : nullptr;
    if (ex && (ex->kind != TypeKind::Tuple || ex->args.size() != n->children.size())) ex = nullptr;
    auto e = elab::makeENode(EKind::Tuple, n->span);
    std::vector<TypeRef> elems;
    for (size_t i = 0; i < n->children.size(); ++i) {
        EPtr c = elab(n->children[i], ex ? ex->args[i] : nullptr, false);
        elems.push_back(c->type);
        e->qual = e->qual.join(c->qual);
        e->children.push_back(c);
    }
    e->type = withQual(mkTuple(elems), e->qual);
    return e;
}

EPtr DefTyper::select(const NodePtr& n) {
    EPtr recv = elab(n->children[0], nullptr, false);
    TypeRef t = current(widen(current(recv->type), n->span));
    const std::string& f = n->name;
    if (t->kind == TypeKind::Sigma && (f == "a" || f == "b")) {
        auto e = elab::makeENode(f == "a" ? EKind::SigmaProjA : EKind::SigmaProjB, n->span);
        e->children = {recv};
        if (f == "a") {
            e->type = t->sigmaA();
            e->qual = recv->qual;
            return e;
        }
        TypeRef b = t->sigmaB();
        if (mentionsPathRoot(b, t->binder)) {
            auto p = pathOf(recv);
            if (!p) fail(Code::E_SUBST_PATH, n->span, "the capability of a Σ value needs a named receiver");
            Path self = ctx_.canonical(*p);
            self.fields.push_back("a");
            b = renameValue(b, t->binder, self);
        }
        e->type = b;
        e->qual = Qualifier::freshOnly();
        return e;
    }
    if (t->kind == TypeKind::Tuple && f.size() > 1 && f[0] == '_') {
        size_t k = std::stoul(f.substr(1));
        if (k >= 1 && k <= t->args.size()) {
            auto e = elab::makeENode(EKind::TupleProj, n->span);
            e->children = {recv};
            e->index = static_cast<int>(k);
            e->type = t->args[k - 1];
            e->qual = recv->qual;
            return e;
        }
    }
    fail(Code::E_TYPE_MISMATCH, n->span, "a value of type " + show(t) + " has no field " + f);
}

EPtr DefTyper::summon(const NodePtr& n) { return resolveArg(n->ktype, n->span, true); }

EPtr DefTyper::sigmaIntro(const NodePtr& n, const TypeRef& expected) {
    TypeRef st = n->ktype ? current(n->ktype) : (expected ? current(expected) : nullptr);
    if (!st || st->kind != TypeKind::Sigma)
        fail(Code::E_TYPE_MISMATCH, n->span, "cannot infer the type of this Σ value; add `type A` and `type B`");
    EPtr a = elab(n->children[0], st->sigmaA(), false);
    TypeRef b = st->sigmaB();
    if (mentionsPathRoot(b, st->binder)) {
        auto p = pathOf(a);
        if (!p) fail(Code::E_SUBST_PATH, n->children[0]->span, "the first component of this Σ value must be a path");
        b = renameValue(b, st->binder, ctx_.canonical(*p));
    }
    EPtr bn = elab(n->children[1], b, false);
    auto e = elab::makeENode(EKind::SigmaIntro, n->span);
    e->children = {a, bn};
    e->type = st;
    e->qual = a->qual;
    return e;
}

EPtr DefTyper::makeSite(EPtr e) {
    TypeRef t = current(e->type);
    int id = sigmaCounter_++;
    std::string name = elab::sigmaName(id);
    ctx_.push();
    Binding sb;
    sb.name = name;
    sb.type = t;
    sb.qual = e->qual;
    sb.origin = Origin::Anf;
    sb.span = e->span;
    bindLocal(sb);
    auto site = elab::makeENode(EKind::SigmaSite, e->span);
    site->siteId = id;
    site->children = {e};
    auto bindCap = [&](const TypeRef& sig, Path self, int element) {
        Binding cb;
        cb.name = elab::sigmaImpName(id, element);
        cb.type = current(renameValue(sig->sigmaB(), sig->binder, self));
        cb.qual = Qualifier::freshOnly();
        cb.implicit = true;
        cb.origin = Origin::Anf;
        cb.span = e->span;
        bindLocal(cb);
    };
    if (t->kind == TypeKind::Sigma) {
        bindCap(t, Path{name, {"a"}}, -1);
        site->type = t->sigmaA();
        site->qual = Qualifier::of({name});
        return site;
    }
    std::vector<TypeRef> residual;
    for (size_t k = 0; k < t->args.size(); ++k) {
        const TypeRef& el = t->args[k];
        bool sig = el->kind == TypeKind::Sigma;
        site->tupleSigma.push_back(sig);
        if (sig) {
            std::string idx = "_" + std::to_string(k + 1);
            bindCap(el, Path{name, {idx, "a"}}, static_cast<int>(k + 1));
            residual.push_back(el->sigmaA());
        } else {
            residual.push_back(el);
        }
    }
    site->type = mkTuple(residual);
    site->qual = Qualifier::of({name});
    return site;
}

EPtr DefTyper::sigmaLift(EPtr e, const TypeRef& sigma, const SourceSpan& span) {
    requireConforms(current(e->type), sigma->sigmaA(), span);
    TypeRef b = sigma->sigmaB();
    if (mentionsPathRoot(b, sigma->binder)) {
        auto p = pathOf(e);
        if (!p) fail(Code::E_SUBST_PATH, span, "a Σ result with a dependent capability needs a path as its value");
        b = renameValue(b, sigma->binder, ctx_.canonical(*p));
    }
    EPtr cap = resolveArg(b, span, false);
    auto s = elab::makeENode(EKind::SigmaIntro, span);
    s->children = {e, cap};
    s->type = sigma;
    s->qual = e->qual;
    return s;
}

// ---------------------------------------------------------------- helpers

std::optional<Path> DefTyper::pathOf(const EPtr& e) const {
    switch (e->kind) {
    case EKind::Var: return Path{e->name, {}};
    case EKind::SigmaSite:
        if (e->tupleSigma.empty()) return Path{elab::sigmaName(e->siteId), {"a"}};
        return std::nullopt;
    case EKind::SigmaProjA:
    case EKind::TupleProj: {
        auto p = pathOf(e->children[0]);
        if (!p) return std::nullopt;
        p->fields.push_back(e->kind == EKind::SigmaProjA ? "a" : "_" + std::to_string(e->index));
        return p;
    }
    case EKind::Ascribe: return pathOf(e->children[0]);
    default: return std::nullopt;
    }
}

TypeRef DefTyper::pathType(const Path& p0, const SourceSpan& span) const {
    Path p = ctx_.canonical(p0);
    const Binding* b = ctx_.lookup(p.root);
    if (!b) fail(Code::E_UNBOUND, span, "unbound identifier " + displayName(p.root));
    TypeRef t = b->type;
    Path prefix{p.root, {}};
    for (const auto& f : p.fields) {
        t = current(widen(t, span));
        if (t->kind == TypeKind::Sigma && f == "a") {
            t = t->sigmaA();
        } else if (t->kind == TypeKind::Sigma && f == "b") {
            Path self = prefix;
            self.fields.push_back("a");
            t = renameValue(t->sigmaB(), t->binder, self);
        } else if (t->kind == TypeKind::Tuple && f.size() > 1 && f[0] == '_') {
            size_t k = std::stoul(f.substr(1));
            if (k < 1 || k > t->args.size()) fail(Code::E_TYPE_MISMATCH, span, "no field " + f);
            t = t->args[k - 1];
        } else {
            fail(Code::E_TYPE_MISMATCH, span, "a value of type " + show(t) + " has no field " + f);
        }
        prefix.fields.push_back(f);
    }
    return t;
}

TypeRef DefTyper::widen(const TypeRef& t, const SourceSpan& span) const {
    if (t->kind == TypeKind::Singleton) return pathType(t->path, span);
    return t;
}

TypeRef DefTyper::current(const TypeRef& t) const { return normalize(u_.apply(t), ctx_); }

Qualifier DefTyper::exitScope(const Qualifier& q, int depth) const {
    Qualifier out;
    out.fresh = q.fresh;
    std::set<std::string> seen;
    std::vector<std::string> work(q.vars.begin(), q.vars.end());
    while (!work.empty()) {
        std::string v = work.back();
        work.pop_back();
        if (!seen.insert(v).second) continue;
        const Binding* b = ctx_.lookup(v);
        if (b && b->depth > depth) {
            out.fresh = out.fresh || b->qual.fresh;
            for (const auto& w : b->qual.vars) work.push_back(w);
        } else {
            out.vars.insert(v);
        }
    }
    return out;
}

Binding& DefTyper::bindLocal(Binding b) {
    order_[b.name] = nextOrder_++;
    elab::BindingInfo info;
    info.span = b.span;
    info.anf = b.origin == Origin::Anf;
    info.implicit = b.implicit;
    info.typeText = b.type ? typeText(withQual(stripQualMetas(u_.apply(b.type)), {}), ctx_) : "";
    info_[b.name] = info;
    return ctx_.bind(std::move(b));
}

bool DefTyper::isKilled(const std::string& name) const {
    return !effects::killedWitness(name, killed_, ctx_.env).empty();
}

std::vector<Candidate> DefTyper::candidates() const {
    std::vector<Candidate> out;
    const auto& scopes = ctx_.scopes();
    for (size_t s = 0; s < scopes.size(); ++s)
        for (const auto& b : scopes[s])
            if (b.implicit) out.push_back(Candidate{b.name, current(b.type), static_cast<int>(s + 1), isKilled(b.name)});
    return out;
}

std::string DefTyper::show(const TypeRef& t) const {
    TypeRef z = u_.apply(t);
    std::set<std::string> vars;
    collectTypeVars(z, vars);
    TypeSubst s;
    for (const auto& v : vars)
        if (!v.empty() && v[0] == '?') s.types[v] = mkTypeVar("_");
    return typeText(stripQualMetas(applySubst(z, s)), ctx_);
}

void DefTyper::noteKills(const std::set<std::string>& names) { killed_.insert(names.begin(), names.end()); }

void DefTyper::collectFree(const EPtr& e, int beforeOrder, std::set<std::string>& out) const {
    if (e->kind == EKind::Var) {
        int o = orderOf(e->name);
        if (o >= 0 && o < beforeOrder) out.insert(e->name);
    }
    for (const auto& c : e->children) collectFree(c, beforeOrder, out);
}

int DefTyper::orderOf(const std::string& name) const {
    auto it = order_.find(name);
    return it == order_.end() ? -1 : it->second;
}

std::string DefTyper::freshName(const std::string& prefix) { return prefix + std::to_string(freshCounter_++); }

TypeRef DefTyper::zonk(const TypeRef& t) const {
    if (!t) return t;
    return stripQualMetas(u_.apply(t));
}

EPtr DefTyper::zonk(const EPtr& e) {
    e->type = zonk(e->type);
    e->fnType = zonk(e->fnType);
    e->paramType = zonk(e->paramType);
    Qualifier q = u_.apply(e->qual);
    for (auto it = q.vars.begin(); it != q.vars.end();)
        it = (!it->empty() && (*it)[0] == '?') ? q.vars.erase(it) : std::next(it);
    e->qual = q;
    for (auto& c : e->children) c = zonk(c);
    return e;
}

// ---------------------------------------------------------------- program

ProgramTyper::ProgramTyper(const desugar::Program& p, const Options& o) : prog(p), opts(o) {}

std::string ProgramTyper::keyOf(const desugar::DefInfo& d) const {
    if (prog.lookup(d.name).size() > 1) return d.name + ":" + d.firstParamClass;
    return d.name;
}

void ProgramTyper::typeDef(const desugar::DefInfo& d) {
    inProgress_.insert(&d);
    try {
        DefTyper t(*this, d);
        done_[&d] = t.run();
    } catch (const CompileError& e) {
        diags_.push_back(e.diagnostic());
        // synthesized types carry no position
        if (diags_.back().span.file.empty()) diags_.back().span = d.span;
        failed_.insert(&d);
    } catch (const DependencyFailed&) {
        failed_.insert(&d);
    }
    inProgress_.erase(&d);
}

TypeRef ProgramTyper::signature(const desugar::DefInfo& d, const SourceSpan& use) {
    if (d.type) return d.type;
    if (d.failed || failed_.count(&d)) throw DependencyFailed{};
    auto it = done_.find(&d);
    if (it != done_.end()) return it->second.type;
    if (inProgress_.count(&d))
        fail(Code::E_TYPE_MISMATCH, use, "recursive use of " + d.name + " needs a declared result type");
    typeDef(d);
    if (failed_.count(&d)) throw DependencyFailed{};
    return done_.at(&d).type;
}

Result ProgramTyper::run() {
    for (const auto& d : prog.defs) {
        if (d.failed) {
            failed_.insert(&d);
            continue;
        }
        if (!done_.count(&d) && !failed_.count(&d)) typeDef(d);
    }
    Result r;
    for (const auto& d : prog.defs) {
        auto it = done_.find(&d);
        if (it != done_.end()) r.program.defs.push_back(it->second);
        if (failed_.count(&d)) r.failedDefs.insert(keyOf(d));
    }
    r.diagnostics = diags_;
    return r;
}

}  // namespace detail

Result typeProgram(const desugar::Program& prog, const Options& opts) {
    detail::ProgramTyper t(prog, opts);
    return t.run();
}

}  // namespace cap::typer
