#include "cap/anf.hpp"

#include <functional>

namespace cap::anf {

using elab::EKind;
using elab::EPtr;
using elab::makeENode;

namespace {

bool opaque(const EPtr& e) { return e->kind == EKind::Lambda || e->kind == EKind::Block || e->kind == EKind::LocalDef; }

bool pure(const EPtr& e) {
    switch (e->kind) {
    case EKind::Literal:
    case EKind::Var:
    case EKind::Global:
    case EKind::Ctor:
    case EKind::Lambda: return true;
    default: return false;
    }
}

EPtr var(const std::string& name, const TypeRef& type, const SourceSpan& span) {
    auto v = makeENode(EKind::Var, span);
    v->name = name;
    v->type = type;
    v->qual = Qualifier::of({name});
    return v;
}

class Transformer {
public:
    EPtr body(const EPtr& e) {
        EPtr r = walk(e);
        if (!containsSite(r)) return r;
        auto b = makeENode(EKind::Block, r->span);
        b->type = r->type;
        b->qual = r->qual;
        b->children = {r};
        return block(b);
    }

private:
    int temp_ = 0;

    // rewrites nested bodies without hoisting anything out of `e` itself
    EPtr walk(const EPtr& e0) {
        EPtr e = std::make_shared<elab::ENode>(*e0);
        switch (e->kind) {
        case EKind::Block: return block(e);
        case EKind::Lambda: e->children[0] = body(e->children[0]); return e;
        case EKind::If:
            e->children[0] = walk(e->children[0]);
            for (size_t i = 1; i < e->children.size(); ++i) e->children[i] = body(e->children[i]);
            return e;
        default:
            for (auto& c : e->children) c = walk(c);
            return e;
        }
    }

    EPtr block(const EPtr& b0) {
        EPtr b = std::make_shared<elab::ENode>(*b0);
        std::vector<EPtr> out;
        for (const auto& s0 : b0->children) {
            EPtr s = walk(s0);
            if (containsSite(s)) {
                std::vector<EPtr> pre;
                EPtr s2 = hoist(s, pre);
                out.insert(out.end(), pre.begin(), pre.end());
                out.push_back(s2);
            } else {
                out.push_back(s);
            }
        }
        b->children = out;
        return b;
    }

    EPtr preBind(const EPtr& e, std::vector<EPtr>& out) {
        if (pure(e)) return e;
        std::string name = "$t" + std::to_string(temp_++);
        auto let = makeENode(EKind::Let, e->span);
        let->name = name;
        let->children = {e};
        let->type = unitType();
        out.push_back(let);
        auto v = var(name, e->type, e->span);
        v->qual = e->qual;
        return v;
    }

    EPtr hoist(const EPtr& e0, std::vector<EPtr>& out) {
        if (!containsSite(e0)) return e0;
        EPtr e = std::make_shared<elab::ENode>(*e0);
        if (e->kind == EKind::SigmaSite) return unpack(e, out);
        // children evaluated before the last site-bearing child are pre-bound to keep their order
        size_t last = 0;
        size_t limit = e->kind == EKind::If ? 1 : e->children.size();
        for (size_t i = 0; i < limit; ++i)
            if (containsSite(e->children[i])) last = i;
        for (size_t i = 0; i < last; ++i) e->children[i] = preBind(hoist(e->children[i], out), out);
        e->children[last] = hoist(e->children[last], out);
        return e;
    }

    EPtr unpack(const EPtr& site, std::vector<EPtr>& out) {
        EPtr inner = hoist(site->children[0], out);
        std::string name = elab::sigmaName(site->siteId);
        const TypeRef& st = inner->type;
        auto let = makeENode(EKind::Let, site->span);
        let->name = name;
        let->children = {inner};
        let->type = unitType();
        let->origin = Origin::Anf;
        out.push_back(let);
        auto sv = [&]() {
            auto v = var(name, st, site->span);
            v->qual = inner->qual;
            return v;
        };
        auto proj = [&](EKind k, EPtr of, const TypeRef& t) {
            auto p = makeENode(k, site->span);
            p->children = {of};
            p->type = t;
            return p;
        };
        auto tupleProj = [&](EPtr of, int k, const TypeRef& t) {
            auto p = proj(EKind::TupleProj, of, t);
            p->index = k;
            return p;
        };
        auto capLet = [&](const std::string& impName, EPtr b) {
            auto il = makeENode(EKind::ImplicitLet, site->span);
            il->name = impName;
            il->children = {b};
            il->type = unitType();
            il->origin = Origin::Anf;
            out.push_back(il);
        };
        if (site->tupleSigma.empty()) {
            capLet(elab::sigmaImpName(site->siteId), proj(EKind::SigmaProjB, sv(), nullptr));
            auto a = proj(EKind::SigmaProjA, sv(), site->type);
            a->qual = site->qual;
            return a;
        }
        auto tup = makeENode(EKind::Tuple, site->span);
        tup->type = site->type;
        tup->qual = site->qual;
        for (size_t k = 0; k < site->tupleSigma.size(); ++k) {
            int idx = static_cast<int>(k + 1);
            TypeRef elemT = site->type->args[k];
            if (site->tupleSigma[k]) {
                capLet(elab::sigmaImpName(site->siteId, idx),
                       proj(EKind::SigmaProjB, tupleProj(sv(), idx, st->args[k]), nullptr));
                tup->children.push_back(proj(EKind::SigmaProjA, tupleProj(sv(), idx, st->args[k]), elemT));
            } else {
                tup->children.push_back(tupleProj(sv(), idx, elemT));
            }
        }
        return tup;
    }
};

}  // namespace

bool containsSite(const EPtr& e) {
    if (e->kind == EKind::SigmaSite) return true;
    if (opaque(e)) return false;
    size_t limit = e->kind == EKind::If ? 1 : e->children.size();
    for (size_t i = 0; i < limit; ++i)
        if (containsSite(e->children[i])) return true;
    return false;
}

bool anySite(const EPtr& e) {
    if (e->kind == EKind::SigmaSite) return true;
    for (const auto& c : e->children)
        if (anySite(c)) return true;
    return false;
}

EPtr transform(const EPtr& b) {
    if (!b) return b;
    Transformer t;
    return t.body(b);
}

elab::ElabProgram transformProgram(const elab::ElabProgram& prog) {
    elab::ElabProgram out = prog;
    for (auto& d : out.defs) d.body = transform(d.body);
    return out;
}

}  // namespace cap::anf
