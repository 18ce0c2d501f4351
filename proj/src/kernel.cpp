#include "cap/kernel.hpp"

#include <sstream>

namespace cap {

std::string Path::str() const {
    std::string s = root;
    for (const auto& f : fields) s += "." + f;
    return s;
}

Qualifier Qualifier::join(const Qualifier& other) const {
    Qualifier q = *this;
    q.vars.insert(other.vars.begin(), other.vars.end());
    q.fresh = q.fresh || other.fresh;
    return q;
}

std::string Qualifier::str() const {
    if (untracked()) return "";
    if (vars.empty()) return "^";
    std::string s = "^{";
    bool first = true;
    for (const auto& v : vars) {
        if (!first) s += ",";
        s += v;
        first = false;
    }
    if (fresh) s += ",◆";
    return s + "}";
}

std::string KillSet::str() const {
    std::string s = "@kill(";
    bool first = true;
    for (const auto& v : vars) {
        if (!first) s += ", ";
        s += v;
        first = false;
    }
    if (funSelf) s += first ? "FUN" : ", FUN";
    return s + ")";
}

namespace {

std::shared_ptr<Type> make(TypeKind k) {
    auto t = std::make_shared<Type>();
    t->kind = k;
    return t;
}

}  // namespace

TypeRef mkBase(std::string name, std::vector<TypeRef> args) {
    auto t = make(TypeKind::Base);
    t->name = std::move(name);
    t->args = std::move(args);
    return t;
}

TypeRef mkTypeVar(std::string name) {
    auto t = make(TypeKind::TypeVar);
    t->name = std::move(name);
    return t;
}

TypeRef mkPathMember(Path path, std::string member, std::vector<TypeRef> args) {
    auto t = make(TypeKind::PathMember);
    t->path = std::move(path);
    t->name = std::move(member);
    t->args = std::move(args);
    return t;
}

TypeRef mkProjection(std::string owner, std::string member) {
    auto t = make(TypeKind::Projection);
    t->owner = std::move(owner);
    t->name = std::move(member);
    return t;
}

TypeRef mkFun(std::string binder, TypeRef param, TypeRef result, bool implicit, KillSet kill) {
    auto t = make(TypeKind::DepFun);
    t->binder = std::move(binder);
    t->args = {std::move(param), std::move(result)};
    t->implicit = implicit;
    t->kill = std::move(kill);
    return t;
}

TypeRef mkSigma(std::string self, TypeRef a, TypeRef b) {
    auto t = make(TypeKind::Sigma);
    t->binder = std::move(self);
    t->args = {std::move(a), std::move(b)};
    return t;
}

TypeRef mkSingleton(Path path) {
    auto t = make(TypeKind::Singleton);
    t->path = std::move(path);
    return t;
}

TypeRef mkTuple(std::vector<TypeRef> elems) {
    auto t = make(TypeKind::Tuple);
    t->args = std::move(elems);
    return t;
}

TypeRef mkTypeFunApp(std::string name, std::vector<TypeRef> args) {
    auto t = make(TypeKind::TypeFunApp);
    t->name = std::move(name);
    t->args = std::move(args);
    return t;
}

TypeRef mkNat(int n) {
    TypeRef t = mkBase("Z");
    for (int i = 0; i < n; ++i) t = mkBase("S", {t});
    return t;
}

TypeRef withQual(const TypeRef& t, Qualifier q) {
    if (t->qual == q) return t;
    auto c = std::make_shared<Type>(*t);
    c->qual = std::move(q);
    return c;
}

TypeRef withKill(const TypeRef& t, KillSet k) {
    auto c = std::make_shared<Type>(*t);
    c->kill = std::move(k);
    return c;
}

TypeRef withArgs(const TypeRef& t, std::vector<TypeRef> args) {
    auto c = std::make_shared<Type>(*t);
    c->args = std::move(args);
    return c;
}

TypeRef unitType() {
    static const TypeRef t = mkBase("Unit");
    return t;
}
TypeRef intType() {
    static const TypeRef t = mkBase("Int");
    return t;
}
TypeRef boolType() {
    static const TypeRef t = mkBase("Bool");
    return t;
}
TypeRef stringType() {
    static const TypeRef t = mkBase("String");
    return t;
}

bool isBase(const TypeRef& t, const std::string& name) {
    return t && t->kind == TypeKind::Base && t->name == name && t->args.empty();
}

bool isSigmaLike(const TypeRef& t) {
    if (!t) return false;
    if (t->kind == TypeKind::Sigma) return true;
    if (t->kind == TypeKind::Tuple)
        for (const auto& e : t->args)
            if (e->kind == TypeKind::Sigma) return true;
    return false;
}

int natValue(const TypeRef& t) {
    int n = 0;
    const Type* cur = t.get();
    while (cur->kind == TypeKind::Base && cur->name == "S" && cur->args.size() == 1) {
        ++n;
        cur = cur->args[0].get();
    }
    if (cur->kind == TypeKind::Base && cur->name == "Z" && cur->args.empty()) return n;
    return -1;
}

namespace {

std::string pathStr(const Path& p, const PathNamer& namer) { return namer ? namer(p) : p.str(); }

std::string printArgs(const std::vector<TypeRef>& args, const PathNamer& namer) {
    std::string s = "[";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) s += ", ";
        s += typeToString(args[i], namer);
    }
    return s + "]";
}

bool needsParens(const TypeRef& t) {
    return t->kind == TypeKind::DepFun || t->kind == TypeKind::Sigma ||
           (t->kind == TypeKind::Base && t->name == "::" && t->args.size() == 2);
}

std::string core(const TypeRef& t, const PathNamer& namer) {
    switch (t->kind) {
    case TypeKind::Base: {
        if (t->name == "::" && t->args.size() == 2) {
            std::string lhs = typeToString(t->args[0], namer);
            if (needsParens(t->args[0])) lhs = "(" + lhs + ")";
            return lhs + " :: " + typeToString(t->args[1], namer);
        }
        int n = natValue(t);
        if (n >= 0) return std::to_string(n);
        return t->args.empty() ? t->name : t->name + printArgs(t->args, namer);
    }
    case TypeKind::TypeVar:
        return t->name;
    case TypeKind::PathMember:
        return pathStr(t->path, namer) + "." + t->name + (t->args.empty() ? "" : printArgs(t->args, namer));
    case TypeKind::Projection:
        return t->owner + "#" + t->name;
    case TypeKind::Singleton:
        return pathStr(t->path, namer) + ".type";
    case TypeKind::Tuple: {
        std::string s = "(";
        for (size_t i = 0; i < t->args.size(); ++i) {
            if (i) s += ", ";
            s += typeToString(t->args[i], namer);
        }
        return s + ")";
    }
    case TypeKind::TypeFunApp:
        return t->name + (t->args.empty() ? "" : printArgs(t->args, namer));
    case TypeKind::Sigma:
        return "Sigma[" + t->binder + ": " + typeToString(t->sigmaA(), namer) + ", " +
               typeToString(t->sigmaB(), namer) + "]";
    case TypeKind::DepFun: {
        std::string arrow = t->implicit ? " ?=> " : " => ";
        std::string dom;
        if (t->byName) {
            dom = "";
            arrow = "=> ";
        } else if (t->binder == "_" || t->binder.empty()) {
            dom = typeToString(t->param(), namer);
            if (isBase(t->param(), "Unit") && t->param()->qual.untracked() && !t->implicit) dom = "()";
            else if (needsParens(t->param())) dom = "(" + dom + ")";
        } else {
            dom = "(" + t->binder + ": " + typeToString(t->param(), namer) + ")";
        }
        std::string s = dom + arrow + typeToString(t->result(), namer);
        if (!t->kill.empty()) s += " " + t->kill.str();
        return s;
    }
    }
    return "?";
}

}  // namespace

std::string typeToStringNoQual(const TypeRef& t, const PathNamer& pathName) { return core(t, pathName); }

std::string typeToString(const TypeRef& t, const PathNamer& pathName) {
    if (!t) return "<null>";
    std::string c = core(t, pathName);
    if (t->qual.untracked()) return c;
    if (needsParens(t)) c = "(" + c + ")";
    return c + t->qual.str();
}

Qualifier applySubst(const Qualifier& q, const TypeSubst& s) {
    Qualifier out;
    out.fresh = q.fresh;
    for (const auto& v : q.vars) {
        auto it = s.quals.find(v);
        if (it != s.quals.end()) {
            out.vars.insert(it->second.vars.begin(), it->second.vars.end());
            out.fresh = out.fresh || it->second.fresh;
        } else {
            out.vars.insert(v);
        }
    }
    return out;
}

TypeRef applySubst(const TypeRef& t, const TypeSubst& s) {
    if (s.empty()) return t;
    if (t->kind == TypeKind::TypeVar) {
        auto it = s.types.find(t->name);
        if (it != s.types.end()) {
            TypeRef r = applySubst(it->second, s);
            if (!t->qual.untracked()) return withQual(r, applySubst(t->qual, s).join(r->qual));
            return r;
        }
    }
    Qualifier q = applySubst(t->qual, s);
    std::vector<TypeRef> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) args.push_back(applySubst(a, s));
    if (q == t->qual && args == t->args) return t;
    auto c = std::make_shared<Type>(*t);
    c->qual = std::move(q);
    c->args = std::move(args);
    // kill sets never mention qualifier metas, only value names
    return c;
}

namespace {

template <typename F>
TypeRef mapValueNames(const TypeRef& t, const std::string& from, F&& onNode) {
    auto c = std::make_shared<Type>(*t);
    onNode(*c);
    if (t->kind == TypeKind::DepFun) {
        c->args[0] = mapValueNames(t->args[0], from, onNode);
        if (t->binder != from) c->args[1] = mapValueNames(t->args[1], from, onNode);
        else c->kill = t->kill;  // kill set is under the binder too
        return c;
    }
    if (t->kind == TypeKind::Sigma) {
        c->args[0] = mapValueNames(t->args[0], from, onNode);
        if (t->binder != from) c->args[1] = mapValueNames(t->args[1], from, onNode);
        return c;
    }
    for (auto& a : c->args) a = mapValueNames(a, from, onNode);
    return c;
}

}  // namespace

TypeRef renameValue(const TypeRef& t, const std::string& from, const Path& to) {
    return mapValueNames(t, from, [&](Type& n) {
        if ((n.kind == TypeKind::PathMember || n.kind == TypeKind::Singleton) && n.path.root == from) {
            Path p = to;
            p.fields.insert(p.fields.end(), n.path.fields.begin(), n.path.fields.end());
            n.path = p;
        }
        if (n.qual.vars.erase(from)) n.qual.vars.insert(to.root);
        if (n.kill.vars.erase(from)) n.kill.vars.insert(to.root);
    });
}

TypeRef substQualifierVar(const TypeRef& t, const std::string& from, const Qualifier& q) {
    return mapValueNames(t, from, [&](Type& n) {
        if (n.qual.vars.erase(from)) {
            n.qual.vars.insert(q.vars.begin(), q.vars.end());
            n.qual.fresh = n.qual.fresh || q.fresh;
        }
        if (n.kill.vars.erase(from)) n.kill.vars.insert(q.vars.begin(), q.vars.end());
    });
}

void collectFreeValueNames(const TypeRef& t, std::set<std::string>& out) {
    std::set<std::string> inner;
    if (t->kind == TypeKind::PathMember || t->kind == TypeKind::Singleton) inner.insert(t->path.root);
    inner.insert(t->qual.vars.begin(), t->qual.vars.end());
    if (t->kind == TypeKind::DepFun || t->kind == TypeKind::Sigma) {
        collectFreeValueNames(t->args[0], out);
        std::set<std::string> body;
        collectFreeValueNames(t->args[1], body);
        body.insert(t->kill.vars.begin(), t->kill.vars.end());
        body.erase(t->binder);
        out.insert(body.begin(), body.end());
    } else {
        for (const auto& a : t->args) collectFreeValueNames(a, out);
    }
    out.insert(inner.begin(), inner.end());
}

bool mentionsPathRoot(const TypeRef& t, const std::string& name) {
    if ((t->kind == TypeKind::PathMember || t->kind == TypeKind::Singleton) && t->path.root == name) return true;
    if ((t->kind == TypeKind::DepFun || t->kind == TypeKind::Sigma) && t->binder == name)
        return mentionsPathRoot(t->args[0], name);
    for (const auto& a : t->args)
        if (mentionsPathRoot(a, name)) return true;
    return false;
}

bool containsMeta(const TypeRef& t) {
    if (t->isMeta()) return true;
    for (const auto& v : t->qual.vars)
        if (!v.empty() && v[0] == '?') return true;
    for (const auto& a : t->args)
        if (containsMeta(a)) return true;
    return false;
}

void collectTypeVars(const TypeRef& t, std::set<std::string>& out) {
    if (t->kind == TypeKind::TypeVar) out.insert(t->name);
    for (const auto& a : t->args) collectTypeVars(a, out);
}

bool structurallyEqual(const TypeRef& a, const TypeRef& b, bool compareQuals) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    if (compareQuals && !(a->qual == b->qual)) return false;
    switch (a->kind) {
    case TypeKind::DepFun:
    case TypeKind::Sigma: {
        if (a->implicit != b->implicit || a->byName != b->byName) return false;
        if (!structurallyEqual(a->args[0], b->args[0], compareQuals)) return false;
        TypeRef rb = b->args[1];
        KillSet kb = b->kill;
        if (a->binder != b->binder) {
            rb = renameValue(rb, b->binder, Path{a->binder, {}});
            if (kb.vars.erase(b->binder)) kb.vars.insert(a->binder);
        }
        if (compareQuals && a->kind == TypeKind::DepFun && !(a->kill == kb)) return false;
        return structurallyEqual(a->args[1], rb, compareQuals);
    }
    default:
        break;
    }
    if (a->name != b->name || a->owner != b->owner || !(a->path == b->path) || a->args.size() != b->args.size())
        return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!structurallyEqual(a->args[i], b->args[i], compareQuals)) return false;
    return true;
}

}  // namespace cap
