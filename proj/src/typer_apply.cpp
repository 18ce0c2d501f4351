#include <algorithm>
#include <deque>

#include "typer_internal.hpp"

namespace cap::typer::detail {

namespace {

EPtr unitArg(const SourceSpan& span) {
    auto n = elab::makeENode(EKind::Literal, span);
    n->lit = syntax::LitKind::Unit;
    n->type = unitType();
    return n;
}

bool isPathMemberMismatch(const TypeRef& a, const TypeRef& b) {
    return a->kind == TypeKind::PathMember && b->kind == TypeKind::PathMember && a->name == b->name &&
           !(a->path == b->path);
}

}  // namespace

EPtr DefTyper::var(const NodePtr& n) {
    const std::string& name = n->name;
    if (const Binding* b = ctx_.lookup(name)) {
        TypeRef t = b->type;
        if (!b->generics.empty()) {
            std::vector<TypeParamSig> tps;
            for (const auto& g : b->generics) tps.push_back(TypeParamSig{g, "", nullptr, 0, {}});
            t = instantiate(t, tps, n->span, n->kTypeArgs);
        }
        t = widen(t, n->span);
        auto e = elab::makeENode(EKind::Var, n->span);
        e->name = name;
        e->type = t;
        e->qual = Qualifier::of({name});
        TypeRef ct = current(t);
        if (b->isParam && ct->kind == TypeKind::DepFun && ct->byName) return applyStep(e, ct, unitArg(n->span), n->span);
        return e;
    }
    auto defs = prog_.lookup(name);
    if (!defs.empty()) {
        if (defs.size() > 1)
            fail(Code::E_TYPE_MISMATCH, n->span, "overloaded definition " + name + " must be applied to an argument");
        size_t from = 0;
        return global(*defs[0], n->span, n->kTypeArgs, from);
    }
    if (const ClassSig* c = prog_.classes.find(name); c && c->typeParams.empty() && !c->isTrait) {
        auto e = elab::makeENode(EKind::Ctor, n->span);
        e->name = name;
        e->type = mkBase(name);
        return e;
    }
    fail(Code::E_UNBOUND, n->span, "unbound identifier " + displayName(name));
}

EPtr DefTyper::global(const desugar::DefInfo& d, const SourceSpan& span, const std::vector<TypeRef>& typeArgs,
                      size_t& pendingFrom) {
    TypeRef t = owner_.signature(d, span);
    if (typeArgs.size() > d.typeParams.size())
        fail(Code::E_TYPE_MISMATCH, span,
             d.name + " takes " + std::to_string(d.typeParams.size()) + " type arguments, got " +
                 std::to_string(typeArgs.size()));
    pendingFrom = pending_.size();
    t = instantiate(t, d.typeParams, span, typeArgs);
    for (size_t i = pendingFrom; i < pending_.size(); ++i) pending_[i].owner = d.name;
    auto e = elab::makeENode(EKind::Global, span);
    e->name = owner_.keyOf(d);
    e->type = t;
    return e;
}

TypeRef DefTyper::instantiate(const TypeRef& t, const std::vector<TypeParamSig>& tps, const SourceSpan& span,
                              const std::vector<TypeRef>& explicitArgs) {
    if (tps.empty()) return t;
    TypeSubst s;
    std::vector<std::string> metas;
    for (const auto& tp : tps) {
        int id = metaCounter_++;
        std::string meta = "?" + tp.name + "#" + std::to_string(id);
        s.types[tp.name] = mkTypeVar(meta);
        if (!tp.qualVar.empty()) s.quals[tp.qualVar] = Qualifier::of({"?" + tp.qualVar + "#" + std::to_string(id)});
        metas.push_back(meta);
    }
    for (size_t i = 0; i < tps.size(); ++i) {
        if (i < explicitArgs.size()) u_.subst.types[metas[i]] = explicitArgs[i];
        TypeRef bound = tps[i].bound ? applySubst(tps[i].bound, s) : nullptr;
        pending_.push_back(PendingMeta{metas[i], tps[i].name, "", bound, span});
    }
    return applySubst(t, s);
}

void DefTyper::checkPending(size_t from) {
    for (size_t i = from; i < pending_.size(); ++i) {
        const PendingMeta& pm = pending_[i];
        TypeRef v = current(mkTypeVar(pm.meta));
        if (v->isMeta())
            fail(Code::E_UNRESOLVED_TYPEPARAM, pm.span,
                 "cannot infer type parameter " + pm.param + (pm.owner.empty() ? "" : " of " + pm.owner));
        if (!pm.bound || containsMeta(v)) continue;
        TypeRef bound = current(pm.bound);
        if (v->kind == TypeKind::TypeVar) {
            // a rigid type parameter satisfies the bound through its own declared bound
            const TypeParamSig* own = nullptr;
            for (const auto& tp : def_.typeParams)
                if (tp.name == v->name) own = &tp;
            if (!own || !own->bound) continue;
            v = current(own->bound);
        }
        if (v->kind == TypeKind::TypeFunApp) continue;
        if (!conforms(v, bound, ctx_))
            fail(Code::E_BOUND, pm.span,
                 "type argument " + show(v) + " does not conform to the bound " + show(bound) + " of " + pm.param);
    }
    pending_.resize(from);
}

void DefTyper::requireConforms(const TypeRef& actual0, const TypeRef& expected, const SourceSpan& span) {
    TypeRef actual = widen(current(actual0), span);
    TypeSubst saved = u_.subst;
    u_.captured.clear();
    if (u_.unify(expected, actual, true)) return;
    std::string captured = u_.captured;
    u_.subst = saved;
    TypeRef na = current(actual), ne = current(expected);
    if (!captured.empty())
        fail(Code::E_SUBQUAL, span,
             "the value reaches " + displayName(captured) + ", which " + show(ne) + " does not allow");
    if (isPathMemberMismatch(na, ne))
        fail(Code::E_PATH_MISMATCH, span,
             "expect " + show(withQual(ne, {})) + ", got " + show(withQual(na, {})));
    fail(Code::E_TYPE_MISMATCH, span, "expected " + show(ne) + ", found " + show(na));
}

EPtr DefTyper::applyStep(EPtr fn, const TypeRef& fnType, EPtr arg, const SourceSpan& span) {
    TypeRef cur = current(fnType);
    TypeRef result = cur->result();
    const std::string& binder = cur->binder;
    if (!binder.empty() && binder != "_") {
        if (mentionsPathRoot(result, binder)) {
            if (auto p = pathOf(arg))
                result = renameValue(substQualifierVar(result, binder, arg->qual), binder, ctx_.canonical(*p));
            else
                result = substQual(result, binder, arg->qual, span, &ctx_);
        } else {
            result = substQualifierVar(result, binder, arg->qual);
        }
    }
    noteKills(effects::latentKill(cur, fn->qual, arg->qual));
    auto e = elab::makeENode(EKind::Apply, span);
    e->children = {fn, arg};
    e->fnType = cur;
    e->type = result;
    TypeRef r = current(result);
    e->qual = r->kind == TypeKind::DepFun ? fn->qual.join(arg->qual) : r->qual;
    return e;
}

EPtr DefTyper::argument(const NodePtr& arg, const TypeRef& paramType) {
    TypeRef pt = current(paramType);
    if (pt->kind == TypeKind::DepFun && pt->byName) return lambdaChain({}, 0, arg, pt, arg->span, true);
    return elab(arg, pt, false);
}

EPtr DefTyper::resolveArg(const TypeRef& required, const SourceSpan& span, bool fallback) {
    TypeRef req = current(required);
    ResolveMode mode{owner_.opts.scalaCompat, fallback};
    Resolution r = resolveImplicit(req, candidates(), mode, u_);
    if (r.status == ResolveStatus::None) fail(Code::E_NO_IMPLICIT, span, "no implicit found of type " + show(withQual(req, {})));
    if (r.status == ResolveStatus::Ambiguous) {
        std::string names;
        for (const auto& a : r.ambiguous) names += (names.empty() ? "" : ", ") + displayName(a);
        fail(Code::E_AMBIGUOUS_IMPLICIT, span, "ambiguous implicits of type " + show(withQual(req, {})) + ": " + names);
    }
    const Binding* b = ctx_.lookup(r.name);
    auto e = elab::makeENode(EKind::Var, span);
    e->name = r.name;
    e->type = b->type;
    e->qual = Qualifier::of({r.name});
    return e;
}

EPtr DefTyper::resolveTrailing(EPtr node, const TypeRef& expected, const SourceSpan& span) {
    TypeRef ex = expected ? current(expected) : nullptr;
    while (true) {
        TypeRef cur = current(node->type);
        if (cur->kind != TypeKind::DepFun || !cur->implicit) break;
        if (ex && ex->kind == TypeKind::DepFun && ex->implicit) break;
        EPtr arg = resolveArg(cur->param(), span, true);
        node = applyStep(node, cur, arg, span);
        node->implicitArg = true;
    }
    return node;
}

EPtr DefTyper::apply(const NodePtr& n, const TypeRef& expected) {
    std::deque<const syntax::Node*> groups;
    const syntax::Node* h = n.get();
    NodePtr headNode;
    while (h->kind == NodeKind::Apply) {
        groups.push_front(h);
        headNode = h->children[0];
        h = h->children[0].get();
    }
    std::vector<TypeRef> typeArgs;
    for (const auto* g : groups)
        if (!g->kTypeArgs.empty()) {
            typeArgs = g->kTypeArgs;
            break;
        }
    auto argsOf = [](const syntax::Node* g) {
        return std::vector<NodePtr>(g->children.begin() + 1, g->children.end());
    };

    EPtr head;
    EPtr firstArg;
    size_t pendingFrom = pending_.size();
    if (headNode->kind == NodeKind::Var && !ctx_.lookup(headNode->name)) {
        const std::string& name = headNode->name;
        auto defs = prog_.lookup(name);
        if (defs.empty()) {
            const ClassSig* c = prog_.classes.find(name);
            if (c && !c->isTrait && c->typeParams.empty() && groups.size() == 1 && argsOf(groups[0]).empty()) {
                auto e = elab::makeENode(EKind::Ctor, n->span);
                e->name = name;
                e->type = mkBase(name);
                return e;
            }
            if (c) fail(Code::E_TYPE_MISMATCH, n->span, "class " + name + " cannot be constructed with arguments");
            fail(Code::E_UNBOUND, headNode->span, "unbound identifier " + displayName(name));
        }
        const desugar::DefInfo* d = defs[0];
        if (defs.size() > 1) {
            const syntax::Node* g0 = groups[0];
            if (g0->isImplicit || g0->typeOnly || argsOf(g0).empty())
                fail(Code::E_TYPE_MISMATCH, n->span, "overloaded definition " + name + " must be applied to an argument");
            firstArg = elab(g0->children[1], nullptr, false);
            std::string cls = classOf(current(widen(current(firstArg->type), n->span)), prog_.classes);
            d = nullptr;
            for (const auto* cand : defs)
                if (cand->firstParamClass == cls) d = cand;
            if (!d && !cls.empty())
                for (const auto* cand : defs)
                    if (!cand->firstParamClass.empty() && prog_.classes.isSubclass(cls, cand->firstParamClass)) d = cand;
            if (!d)
                fail(Code::E_TYPE_MISMATCH, g0->children[1]->span,
                     "no overload of " + name + " accepts " + show(firstArg->type));
        }
        head = global(*d, headNode->span, typeArgs, pendingFrom);
    } else if (headNode->kind == NodeKind::Var) {
        auto v = std::make_shared<syntax::Node>(*headNode);
        v->kTypeArgs = typeArgs;
        head = var(v);
    } else {
        head = elab(headNode, nullptr, false);
    }

    EPtr node = head;
    for (const auto* g : groups) {
        if (g->typeOnly) continue;
        auto args = argsOf(g);
        if (g->isImplicit) {
            for (const auto& a : args) {
                TypeRef cur = current(node->type);
                if (cur->kind != TypeKind::DepFun || !cur->implicit)
                    fail(Code::E_TYPE_MISMATCH, a->span, "no using parameter left for this argument");
                EPtr arg = elab(a, cur->param(), false);
                node = applyStep(node, cur, arg, n->span);
                node->usingArg = true;
            }
            continue;
        }
        node = resolveTrailing(node, nullptr, n->span);
        if (args.empty()) {
            TypeRef cur = current(node->type);
            if (cur->kind != TypeKind::DepFun || !isBase(current(cur->param()), "Unit"))
                fail(Code::E_TYPE_MISMATCH, g->span, "this application needs arguments");
            node = applyStep(node, cur, unitArg(g->span), n->span);
            continue;
        }
        for (size_t j = 0; j < args.size(); ++j) {
            TypeRef cur = current(node->type);
            if (cur->kind != TypeKind::DepFun || cur->implicit)
                fail(Code::E_TYPE_MISMATCH, args[j]->span, "too many arguments");
            EPtr arg;
            if (firstArg && g == groups[0] && j == 0) arg = coerce(firstArg, cur->param(), false, args[j]->span);
            else arg = argument(args[j], cur->param());
            node = applyStep(node, cur, arg, n->span);
        }
    }
    node = resolveTrailing(node, expected, n->span);
    checkPending(pendingFrom);
    return node;
}

}  // namespace cap::typer::detail
