#include "cap/effects.hpp"

#include <deque>

namespace cap::effects {

using elab::EKind;
using elab::EPtr;

void KillState::join(const KillState& other) {
    for (const auto& [k, v] : other.killed) killed.emplace(k, v);
}

std::set<std::string> KillState::names() const {
    std::set<std::string> out;
    for (const auto& [k, v] : killed) out.insert(k);
    return out;
}

std::set<std::string> latentKill(const TypeRef& fnType, const Qualifier& fnQual, const Qualifier& argQual) {
    std::set<std::string> out;
    if (!fnType || fnType->kind != TypeKind::DepFun) return out;
    for (const auto& v : fnType->kill.vars) {
        if (v == fnType->binder) {
            for (const auto& a : argQual.vars)
                if (a[0] != '?') out.insert(a);
        } else if (v[0] != '?') {
            out.insert(v);
        }
    }
    if (fnType->kill.funSelf)
        for (const auto& f : fnQual.vars) out.insert(f);
    return out;
}

std::string killedWitness(const std::string& name, const std::set<std::string>& killed, const QualEnv& env) {
    if (killed.empty()) return "";
    Qualifier sat = saturate(Qualifier::of({name}), env);
    for (const auto& k : killed) {
        Qualifier sk = saturate(Qualifier::of({k}), env);
        for (const auto& v : sk.vars)
            if (sat.vars.count(v)) return k;
    }
    return "";
}

std::vector<std::string> reachPath(const std::string& from, const std::string& to, const QualEnv& env) {
    std::map<std::string, std::string> parent;
    std::deque<std::string> work{from};
    parent[from] = "";
    while (!work.empty()) {
        std::string x = work.front();
        work.pop_front();
        if (x == to) {
            std::vector<std::string> path;
            for (std::string c = to; !c.empty(); c = parent[c]) path.insert(path.begin(), c);
            return path;
        }
        const Qualifier* q = env.find(x);
        if (!q) continue;
        for (const auto& y : q->vars)
            if (!parent.count(y)) {
                parent[y] = x;
                work.push_back(y);
            }
    }
    return {};
}

namespace {

void boundNames(const EPtr& e, std::set<std::string>& out) {
    switch (e->kind) {
    case EKind::Lambda: out.insert(e->param); break;
    case EKind::Let:
    case EKind::ImplicitLet:
    case EKind::LocalDef: out.insert(e->name); break;
    case EKind::TupleLet: out.insert(e->names.begin(), e->names.end()); break;
    case EKind::SigmaSite:
        out.insert(elab::sigmaName(e->siteId));
        out.insert(elab::sigmaImpName(e->siteId));
        for (size_t k = 0; k < e->tupleSigma.size(); ++k)
            out.insert(elab::sigmaImpName(e->siteId, static_cast<int>(k + 1)));
        break;
    default: break;
    }
    for (const auto& c : e->children) boundNames(c, out);
}

class Walker {
public:
    explicit Walker(const elab::ElabDef& def) : def_(def) {}

    std::set<std::string> killed;
    std::map<std::string, SourceSpan> where;

    void walk(const EPtr& e) {
        switch (e->kind) {
        case EKind::Var: use(e->name, e->span); return;
        case EKind::Apply: {
            walk(e->children[0]);
            walk(e->children[1]);
            for (const auto& k : latentKill(e->fnType, e->children[0]->qual, e->children[1]->qual))
                if (killed.insert(k).second) where[k] = e->span;
            return;
        }
        case EKind::If: {
            walk(e->children[0]);
            auto savedK = killed;
            auto savedW = where;
            walk(e->children[1]);
            auto thenK = killed;
            auto thenW = where;
            killed = savedK;
            where = savedW;
            if (e->children.size() > 2) walk(e->children[2]);
            killed.insert(thenK.begin(), thenK.end());
            for (const auto& [k, s] : thenW) where.emplace(k, s);
            return;
        }
        case EKind::Lambda: lambda(e); return;
        default:
            for (const auto& c : e->children) walk(c);
        }
    }

private:
    const elab::ElabDef& def_;

    std::string shown(const std::string& name) const {
        auto it = def_.bindings.find(name);
        if (name[0] == '$' && it != def_.bindings.end()) return "the capability of type " + it->second.typeText;
        return displayName(name);
    }

    void use(const std::string& name, const SourceSpan& span) {
        std::string w = killedWitness(name, killed, def_.quals);
        if (w.empty()) return;
        auto info = def_.bindings.find(name);
        bool anon = name[0] == '$' || (info != def_.bindings.end() && info->second.anf);
        std::string msg;
        if (anon) msg = "use of killed variable with type " + (info != def_.bindings.end() ? info->second.typeText : "?");
        else if (w == name) msg = "found using killed var " + shown(name);
        else msg = "found using killed var " + shown(w) + " through " + shown(name);
        std::vector<RelatedNote> notes;
        // witness: the saturation path from the use to a name shared with the killed one
        Qualifier sw = saturate(Qualifier::of({w}), def_.quals);
        std::vector<std::string> path;
        for (const auto& m : saturate(Qualifier::of({name}), def_.quals).vars)
            if (sw.vars.count(m)) {
                path = reachPath(name, m, def_.quals);
                break;
            }
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            auto bi = def_.bindings.find(path[i]);
            notes.push_back(RelatedNote{bi != def_.bindings.end() ? bi->second.span : span,
                                        shown(path[i]) + " reaches " + shown(path[i + 1])});
        }
        notes.push_back(RelatedNote{where.count(w) ? where[w] : span, shown(w) + " is killed here"});
        fail(Code::E_KILLED_USE, span, msg, notes);
    }

    void lambda(const EPtr& e) {
        std::set<std::string> inside;
        boundNames(e, inside);
        Walker inner(def_);
        inner.killed = killed;
        inner.where = where;
        inner.walk(e->children[0]);
        for (const auto& k : inner.killed) {
            if (killed.count(k) || (inside.count(k) && k != e->param)) continue;
            const KillSet& d = e->declaredKill;
            bool ok = k == e->param ? d.vars.count(k) > 0 : (d.funSelf || d.vars.count(k) > 0);
            if (!ok)
                fail(Code::E_KILL_UNDECLARED, inner.where[k],
                     "this function kills " + shown(k) + ", but its type does not declare that kill");
        }
    }
};

}  // namespace

std::vector<Diagnostic> checkDef(const elab::ElabDef& def) {
    if (!def.body) return {};
    try {
        Walker w(def);
        w.walk(def.body);
    } catch (const CompileError& e) {
        return {e.diagnostic()};
    }
    return {};
}

std::vector<Diagnostic> checkProgram(const elab::ElabProgram& prog, const std::set<std::string>& skip) {
    std::vector<Diagnostic> out;
    for (const auto& d : prog.defs) {
        if (d.isExtern || skip.count(d.key)) continue;
        auto ds = checkDef(d);
        out.insert(out.end(), ds.begin(), ds.end());
    }
    return out;
}

}  // namespace cap::effects
