#include "cap/typesys.hpp"

#include <array>
#include <regex>
#include <unordered_set>

namespace cap {

const ClassSig* ClassTable::find(const std::string& name) const {
    auto it = classes.find(name);
    return it == classes.end() ? nullptr : &it->second;
}

const TypeMemberSig* ClassTable::member(const std::string& cls, const std::string& name) const {
    const ClassSig* c = find(cls);
    if (!c) return nullptr;
    for (const auto& m : c->members)
        if (m.name == name) return &m;
    for (const auto& p : c->parents)
        if (auto* m = member(p, name)) return m;
    return nullptr;
}

bool ClassTable::isSubclass(const std::string& sub, const std::string& super) const {
    if (sub == super) return true;
    const ClassSig* c = find(sub);
    if (!c) return false;
    for (const auto& p : c->parents)
        if (isSubclass(p, super)) return true;
    return false;
}

namespace {

void collectFunApps(const TypeRef& t, const std::string& fn, std::vector<TypeRef>& out) {
    if (t->kind == TypeKind::TypeFunApp && t->name == fn) out.push_back(t);
    for (const auto& a : t->args) collectFunApps(a, fn, out);
}

}  // namespace

void ClassTable::checkTypeFun(const TypeFunDef& def) const {
    std::set<std::string> heads;
    for (const auto& c : def.cases) {
        const TypeRef& pat = c.pattern;
        if (pat->kind != TypeKind::Base || !find(pat->name))
            fail(Code::E_TYPEFUN_STUCK, c.span, "typefun " + def.name + ": case pattern must be headed by a class");
        if (!heads.insert(pat->name).second)
            fail(Code::E_TYPEFUN_STUCK, c.span, "typefun " + def.name + ": overlapping cases for " + pat->name);
        std::set<std::string> vars;
        for (const auto& a : pat->args) {
            if (a->kind != TypeKind::TypeVar || !vars.insert(a->name).second)
                fail(Code::E_TYPEFUN_STUCK, c.span,
                     "typefun " + def.name + ": pattern arguments must be distinct variables");
        }
        std::vector<TypeRef> calls;
        collectFunApps(c.rhs, def.name, calls);
        for (const auto& call : calls) {
            if (call->args.size() != 1 || call->args[0]->kind != TypeKind::TypeVar ||
                !vars.count(call->args[0]->name))
                fail(Code::E_TYPEFUN_STUCK, c.span,
                     "typefun " + def.name + ": recursive call must be on a pattern variable");
        }
    }
}

Binding& TypingContext::bind(Binding b) {
    if (scopes_.empty()) push();
    b.depth = depth();
    env.quals[b.name] = b.qual;
    scopes_.back().push_back(std::move(b));
    return scopes_.back().back();
}

const Binding* TypingContext::lookup(const std::string& name) const {
    for (auto s = scopes_.rbegin(); s != scopes_.rend(); ++s)
        for (auto b = s->rbegin(); b != s->rend(); ++b)
            if (b->name == name) return &*b;
    return nullptr;
}

Path TypingContext::canonical(const Path& p) const {
    Path cur = p;
    for (int guard = 0; guard < 64; ++guard) {
        auto it = aliases.find(cur.root);
        if (it == aliases.end()) break;
        Path next = it->second;
        next.fields.insert(next.fields.end(), cur.fields.begin(), cur.fields.end());
        cur = next;
    }
    return cur;
}

std::string displayName(const std::string& name) {
    static const std::regex suffix("~[0-9]+");
    return std::regex_replace(name, suffix, "");
}

std::string TypingContext::displayPath(const Path& p) const {
    Path c = canonical(p);
    std::string best;
    for (const auto& [name, target] : aliases) {
        if (canonical(target) == c && (best.empty() || (best[0] == '$' && name[0] != '$'))) best = name;
    }
    if (!best.empty() && best[0] != '$') return displayName(best);
    return displayName(p.str());
}

PathNamer TypingContext::namer() const {
    return [this](const Path& p) { return displayPath(p); };
}

std::string typeText(const TypeRef& t, const TypingContext& ctx) {
    return displayName(typeToString(t, ctx.namer()));
}

Qualifier saturate(const Qualifier& q, const QualEnv& env) {
    Qualifier out = q;
    std::vector<std::string> work(q.vars.begin(), q.vars.end());
    while (!work.empty()) {
        std::string x = work.back();
        work.pop_back();
        const Qualifier* qx = env.find(x);
        if (!qx) continue;
        out.fresh = out.fresh || qx->fresh;
        for (const auto& y : qx->vars)
            if (out.vars.insert(y).second) work.push_back(y);
    }
    return out;
}

Qualifier saturate(const Qualifier& q, const TypingContext& ctx) { return saturate(q, ctx.env); }

bool subqual(const Qualifier& q1, const Qualifier& q2, const QualEnv& env) {
    Qualifier s2 = saturate(q2, env);
    for (const auto& v : q1.vars)
        if (!s2.vars.count(v)) return false;
    return !q1.fresh || q2.fresh;
}

bool subqual(const Qualifier& q1, const Qualifier& q2, const TypingContext& ctx) { return subqual(q1, q2, ctx.env); }

TypeRef substQual(const TypeRef& t, const std::string& binder, const Qualifier& q, const SourceSpan& span,
                  const TypingContext* ctx) {
    if (mentionsPathRoot(t, binder)) {
        if (q.vars.size() != 1) {
            std::string shown = q.vars.empty() ? (q.fresh ? "{◆}" : "{}") : q.str().substr(1);
            fail(Code::E_SUBST_PATH, span,
                 "cannot substitute " + displayName(binder) + " by " + displayName(shown) +
                     " in a path: a path needs exactly one variable");
        }
        Path target{*q.vars.begin(), {}};
        if (ctx) target = ctx->canonical(target);
        // qualifiers and kill sets first; afterwards only path roots still mention the binder
        return renameValue(substQualifierVar(t, binder, q), binder, target);
    }
    return substQualifierVar(t, binder, q);
}

namespace {

// Pattern variables of one case; constructors take few arguments, so this stays off the heap.
struct CaseBindings {
    std::array<std::pair<const std::string*, TypeRef>, 4> small;
    std::vector<std::pair<const std::string*, TypeRef>> rest;
    size_t n = 0;

    void emplace_back(const std::string* k, const TypeRef& v) {
        if (n < small.size())
            small[n] = {k, v};
        else
            rest.emplace_back(k, v);
        ++n;
    }
    const TypeRef* find(const std::string& name) const {
        for (size_t i = 0; i < n && i < small.size(); ++i)
            if (*small[i].first == name) return &small[i].second;
        for (const auto& [k, v] : rest)
            if (*k == name) return &v;
        return nullptr;
    }
};

const TypeRef* lookupBinding(const CaseBindings& m, const std::string& name) { return m.find(name); }

TypeRef bindValue(const TypeRef& var, const TypeRef& value) {
    return var->qual.untracked() ? value : withQual(value, var->qual.join(value->qual));
}

// The case of `def` matching `arg`, with its pattern variables bound; nullptr when the argument is
// not yet a constructor application.
const TypeFunCase* matchCase(const TypeFunDef& def, const TypeRef& arg, const SourceSpan& span, CaseBindings& m) {
    if (arg->kind == TypeKind::TypeVar || arg->kind == TypeKind::TypeFunApp) return nullptr;
    if (arg->kind == TypeKind::Base) {
        for (const auto& c : def.cases) {
            if (c.pattern->name != arg->name || c.pattern->args.size() != arg->args.size()) continue;
            for (size_t i = 0; i < arg->args.size(); ++i) m.emplace_back(&c.pattern->args[i]->name, arg->args[i]);
            return &c;
        }
    }
    fail(Code::E_TYPEFUN_STUCK, span,
         "type function " + def.name + "[" + typeToString(arg) + "] matches no case");
}

// Simultaneous: substituted values are not revisited, so argument type variables that share a
// pattern variable's name stay put. Unchanged subtrees are shared.
TypeRef substTypeVars(const TypeRef& t, const CaseBindings& m) {
    if (t->kind == TypeKind::TypeVar)
        if (auto* v = lookupBinding(m, t->name)) return bindValue(t, *v);
    std::vector<TypeRef> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) args.push_back(substTypeVars(a, m));
    if (args == t->args) return t;
    return withArgs(t, std::move(args));
}

// Results computed outside any binder are remembered in the cache, so reducing a type function
// does not re-walk arguments that are already normal.
class Normalizer {
public:
    Normalizer(const TypingContext& ctx, const SourceSpan& span, NormalCache& cache)
        : ctx_(ctx), span_(span), cache_(cache) {}

    TypeRef run(const TypeRef& t, const std::set<std::string>& bound, int fuel) {
        if (bound.empty() && cache_.normal.count(t)) return t;
        TypeRef r = step(t, bound, fuel);
        if (bound.empty()) cache_.normal.insert(r);
        return r;
    }

private:
    using Memo = std::unordered_map<TypeRef, TypeRef, NormalCache::PtrHash>;
    const TypingContext& ctx_;
    const SourceSpan& span_;
    NormalCache& cache_;
    // Fills `out` only when some argument changed.
    bool args(const std::vector<TypeRef>& in, const std::set<std::string>& bound, int fuel,
              std::vector<TypeRef>& out) {
        for (size_t i = 0; i < in.size(); ++i) {
            TypeRef n = run(in[i], bound, fuel);
            if (out.empty() && n == in[i]) continue;
            if (out.empty()) {
                out.reserve(in.size());
                out.assign(in.begin(), in.begin() + static_cast<long>(i));
            }
            out.push_back(std::move(n));
        }
        return !out.empty();
    }

    // A case right-hand side with normal bindings, outside binders. Nested type-function calls on
    // already reduced arguments come straight from the memo; class applications over normal
    // arguments are normal as built.
    TypeRef instantiate(const TypeRef& t, const CaseBindings& m, int fuel) {
        if (t->kind == TypeKind::TypeVar) {
            if (auto* v = lookupBinding(m, t->name)) return run(bindValue(t, *v), {}, fuel);
            return run(t, {}, fuel);
        }
        if (t->kind == TypeKind::TypeFunApp && t->args.size() == 1 && t->qual.untracked()) {
            TypeRef a = instantiate(t->args[0], m, fuel);
            auto fn = cache_.reduced.find(t->name);
            if (fn != cache_.reduced.end())
                if (auto hit = fn->second.find(a); hit != fn->second.end()) return hit->second;
            return run(a == t->args[0] ? t : withArgs(t, {a}), {}, fuel);
        }
        if (t->kind != TypeKind::Base) return run(substTypeVars(t, m), {}, fuel);
        std::vector<TypeRef> as;
        as.reserve(t->args.size());
        for (const auto& a : t->args) as.push_back(instantiate(a, m, fuel));
        TypeRef r = as == t->args ? t : withArgs(t, std::move(as));
        cache_.normal.insert(r);
        return r;
    }

    TypeRef step(const TypeRef& t, const std::set<std::string>& bound, int fuel) {
        if (fuel <= 0) fail(Code::E_TYPEFUN_STUCK, span_, "type function reduction does not terminate");
        std::vector<TypeRef> as;
        switch (t->kind) {
        case TypeKind::PathMember:
        case TypeKind::Singleton: {
            auto c = std::make_shared<Type>(*t);
            if (!bound.count(t->path.root)) c->path = ctx_.canonical(t->path);
            if (args(t->args, bound, fuel, as)) c->args = std::move(as);
            return c;
        }
        case TypeKind::TypeFunApp: {
            if (args(t->args, bound, fuel, as)) return step(withArgs(t, std::move(as)), bound, fuel);
            if (!ctx_.classes) return t;
            auto it = ctx_.classes->typefuns.find(t->name);
            if (it == ctx_.classes->typefuns.end() || t->args.size() != 1) return t;
            const TypeFunDef& def = it->second;
            const TypeRef& arg = t->args[0];
            Memo* memo = nullptr;
            if (bound.empty() && t->qual.untracked()) {
                memo = &cache_.reduced[t->name];
                if (auto hit = memo->find(arg); hit != memo->end()) return hit->second;
            }
            CaseBindings m;
            const TypeFunCase* c = matchCase(def, arg, span_, m);
            TypeRef out = t;
            if (c) {
                TypeRef r = bound.empty() ? instantiate(c->rhs, m, fuel - 1)
                                          : run(substTypeVars(c->rhs, m), bound, fuel - 1);
                out = t->qual.untracked() ? r : withQual(r, t->qual);
            }
            if (memo) memo->emplace(arg, out);
            return out;
        }
        case TypeKind::DepFun:
        case TypeKind::Sigma: {
            auto c = std::make_shared<Type>(*t);
            std::set<std::string> inner = bound;
            inner.insert(t->binder);
            c->args = {run(t->args[0], bound, fuel), run(t->args[1], inner, fuel)};
            return c;
        }
        default:
            if (args(t->args, bound, fuel, as)) return withArgs(t, std::move(as));
            return t;
        }
    }
};

}  // namespace

TypeRef reduceTypeFun(const TypeFunDef& def, const TypeRef& arg, const ClassTable& classes, const SourceSpan& span) {
    CaseBindings m;
    const TypeFunCase* c = matchCase(def, arg, span, m);
    if (!c) return mkTypeFunApp(def.name, {arg});
    return substTypeVars(c->rhs, m);
}

size_t NormalCache::size() const {
    size_t n = normal.size();
    for (const auto& [_, m] : reduced) n += m.size();
    return n;
}

TypeRef normalize(const TypeRef& t, const TypingContext& ctx, const SourceSpan& span, NormalCache* cache) {
    if (!cache) {
        NormalCache local;
        return Normalizer(ctx, span, local).run(t, {}, 10000);
    }
    if (cache->size() > cache->limit) cache->clear();
    return Normalizer(ctx, span, *cache).run(t, {}, 10000);
}

bool typeEqual(const TypeRef& a, const TypeRef& b, const TypingContext& ctx) {
    return structurallyEqual(normalize(a, ctx), normalize(b, ctx), false);
}

bool conforms(const TypeRef& sub, const TypeRef& super, const TypingContext& ctx) {
    Unifier u(ctx);
    u.checkKills = true;
    return u.unify(super, sub, false);
}

std::string classOf(const TypeRef& t, const ClassTable& classes) {
    switch (t->kind) {
    case TypeKind::Base: return classes.find(t->name) ? t->name : "";
    case TypeKind::PathMember:
    case TypeKind::Projection: {
        const ClassSig* c = classes.find(t->name);
        return c && !c->owner.empty() ? t->name : "";
    }
    default: return "";
    }
}

}  // namespace cap
