#include <algorithm>

#include "cap/typesys.hpp"

namespace cap {

namespace {

bool isQualMeta(const std::string& v) { return !v.empty() && v[0] == '?'; }

bool occurs(const std::string& meta, const TypeRef& t) {
    if (t->kind == TypeKind::TypeVar && t->name == meta) return true;
    for (const auto& a : t->args)
        if (occurs(meta, a)) return true;
    return false;
}

}  // namespace

TypeRef Unifier::apply(const TypeRef& t) const {
    // metas can be bound to types mentioning other metas; iterate to a fixpoint
    TypeRef cur = t;
    for (int i = 0; i < 32; ++i) {
        TypeRef next = applySubst(cur, subst);
        if (structurallyEqual(next, cur, true)) return next;
        cur = next;
    }
    return cur;
}

Qualifier Unifier::apply(const Qualifier& q) const {
    Qualifier cur = q;
    for (int i = 0; i < 8; ++i) {
        Qualifier next = applySubst(cur, subst);
        if (next == cur) break;
        cur = next;
    }
    return cur;
}

bool Unifier::solved(const std::string& meta) const { return subst.types.count(meta) || subst.quals.count(meta); }

bool Unifier::bindQual(const std::string& meta, const Qualifier& q) {
    Qualifier clean;
    clean.fresh = q.fresh;
    for (const auto& v : q.vars)
        if (v != meta) clean.vars.insert(v);
    auto it = subst.quals.find(meta);
    if (it == subst.quals.end()) subst.quals[meta] = clean;
    else it->second = it->second.join(clean);
    return true;
}

bool Unifier::unifyQual(const Qualifier& expected, const Qualifier& actual) {
    Qualifier e = apply(expected);
    std::vector<std::string> metas;
    for (const auto& v : expected.vars)
        if (isQualMeta(v) && !subst.quals.count(v)) metas.push_back(v);
    if (metas.empty()) return true;
    // the first unsolved meta absorbs what the known part does not already cover
    Qualifier rest;
    rest.fresh = actual.fresh;
    for (const auto& v : actual.vars)
        if (!e.vars.count(v)) rest.vars.insert(v);
    return bindQual(metas.front(), rest);
}

bool Unifier::unify(const TypeRef& expected, const TypeRef& actual, bool solveQuals) {
    std::map<std::string, std::string> binders;
    return unifyRec(normalize(apply(expected), ctx_), normalize(apply(actual), ctx_), solveQuals, binders);
}

bool Unifier::unifyRec(const TypeRef& e0, const TypeRef& a0, bool solveQuals,
                       std::map<std::string, std::string>& binders) {
    TypeRef e = e0, a = a0;
    if (e->isMeta() && subst.types.count(e->name)) e = withQual(apply(e), e->qual);
    if (a->isMeta() && subst.types.count(a->name)) a = withQual(apply(a), a->qual);

    if (solveQuals && !e->qual.untracked()) {
        Qualifier aq = a->qual;
        bool hasMeta = false;
        for (const auto& v : e->qual.vars) hasMeta = hasMeta || (isQualMeta(v) && !subst.quals.count(v));
        if (hasMeta) {
            for (const auto& f : forbidden) {
                if (aq.vars.count(f)) {
                    captured = f;
                    return false;
                }
            }
        }
        // actual qualifiers under a binder are expressed in the actual's binder names
        for (const auto& [eb, ab] : binders)
            if (aq.vars.erase(ab)) aq.vars.insert(eb);
        if (!unifyQual(e->qual, aq)) return false;
    }

    if (e->isMeta()) {
        if (a->isMeta() && a->name == e->name) return true;
        if (occurs(e->name, a)) return false;
        subst.types[e->name] = withQual(a, Qualifier{});
        return true;
    }
    if (a->isMeta()) {
        if (occurs(a->name, e)) return false;
        subst.types[a->name] = withQual(e, Qualifier{});
        return true;
    }

    const ClassTable* classes = ctx_.classes;
    auto sameArgs = [&](const TypeRef& x, const TypeRef& y) {
        if (x->args.size() != y->args.size()) return false;
        for (size_t i = 0; i < x->args.size(); ++i)
            if (!unifyRec(x->args[i], y->args[i], solveQuals, binders)) return false;
        return true;
    };

    switch (e->kind) {
    case TypeKind::Base:
        if (a->kind == TypeKind::Base && a->name == e->name) return sameArgs(e, a);
        if (!classes) return false;
        {
            std::string ac = classOf(a, *classes);
            if (!ac.empty() && e->args.empty() && ac != e->name && classes->isSubclass(ac, e->name)) return true;
        }
        return false;
    case TypeKind::TypeVar: return a->kind == TypeKind::TypeVar && a->name == e->name;
    case TypeKind::PathMember: {
        if (a->kind != TypeKind::PathMember || a->name != e->name) return false;
        Path ap = a->path;
        auto it = std::find_if(binders.begin(), binders.end(), [&](const auto& kv) { return kv.second == ap.root; });
        if (it != binders.end()) ap.root = it->first;
        if (!(ap == e->path)) return false;
        return sameArgs(e, a);
    }
    case TypeKind::Projection:
        if (a->kind == TypeKind::Projection) return a->owner == e->owner && a->name == e->name;
        if (a->kind == TypeKind::PathMember && a->name == e->name && classes) {
            const ClassSig* c = classes->find(a->name);
            return c && c->owner == e->owner;
        }
        return false;
    case TypeKind::Singleton: {
        if (a->kind != TypeKind::Singleton) return false;
        Path ap = a->path;
        auto it = std::find_if(binders.begin(), binders.end(), [&](const auto& kv) { return kv.second == ap.root; });
        if (it != binders.end()) ap.root = it->first;
        return ap == e->path;
    }
    case TypeKind::Tuple: return a->kind == TypeKind::Tuple && sameArgs(e, a);
    case TypeKind::TypeFunApp: return a->kind == TypeKind::TypeFunApp && a->name == e->name && sameArgs(e, a);
    case TypeKind::DepFun:
    case TypeKind::Sigma: {
        if (a->kind != e->kind) return false;
        if (e->kind == TypeKind::DepFun && (e->implicit != a->implicit || e->byName != a->byName)) return false;
        if (!unifyRec(e->args[0], a->args[0], solveQuals, binders)) return false;
        auto saved = binders;
        binders[e->binder] = a->binder;
        // binder-mentioning qualifiers cannot flow into metas of the enclosing scope
        bool pushed = false;
        if (a->binder != "_" && !a->binder.empty()) {
            forbidden.push_back(a->binder);
            pushed = true;
        }
        bool ok = unifyRec(e->args[1], a->args[1], solveQuals, binders);
        if (pushed) forbidden.pop_back();
        binders = saved;
        if (!ok) return false;
        if (e->kind == TypeKind::DepFun && checkKills) {
            KillSet ak = a->kill;
            if (ak.vars.erase(a->binder)) ak.vars.insert(e->binder);
            for (const auto& v : ak.vars)
                if (!e->kill.vars.count(v)) return false;
            if (ak.funSelf && !e->kill.funSelf) return false;
        }
        return true;
    }
    }
    return false;
}

}  // namespace cap
