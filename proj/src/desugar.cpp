#include "cap/desugar.hpp"

#include <sstream>

namespace cap::desugar {

using syntax::NodeKind;
using syntax::NodePtr;
using syntax::STypePtr;
using SKind = syntax::TypeKind;

std::vector<const DefInfo*> Program::lookup(const std::string& name) const {
    std::vector<const DefInfo*> out;
    for (const auto& d : defs)
        if (d.name == name) out.push_back(&d);
    return out;
}

bool Program::hasDef(const std::string& name) const {
    for (const auto& d : defs)
        if (d.name == name) return true;
    return false;
}

namespace {

TypeRef byNameFun(const TypeRef& result, const KillSet& kill) {
    auto f = std::make_shared<Type>(*mkFun("_", unitType(), result, false, kill));
    f->byName = true;
    return f;
}

bool isField(const std::string& name) { return name == "a" || name == "b" || name == "_1" || name == "_2"; }

class Desugarer {
public:
    explicit Desugarer(Program& prog) : prog_(prog) {}

    Program& prog_;
    std::set<std::string> defNames_;
    int fresh_ = 0;
    std::vector<std::map<std::string, std::string>> values_;
    std::vector<std::set<std::string>> typeVars_;
    std::set<std::string> used_;
    int aliasDepth_ = 0;

    // ------------------------------------------------------------ scopes

    void resetScopes() {
        values_.assign(1, {});
        typeVars_.assign(1, {});
        used_.clear();
    }

    std::string unique(const std::string& name) {
        if (used_.insert(name).second) return name;
        for (int k = 1;; ++k) {
            std::string cand = name + "~" + std::to_string(k);
            if (used_.insert(cand).second) return cand;
        }
    }

    std::string bindValue(const std::string& name) {
        std::string u = unique(name);
        values_.back()[name] = u;
        return u;
    }

    const std::string* findValue(const std::string& name) const {
        for (auto it = values_.rbegin(); it != values_.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end()) return &f->second;
        }
        return nullptr;
    }

    bool isTypeVar(const std::string& name) const {
        for (const auto& s : typeVars_)
            if (s.count(name)) return true;
        return false;
    }

    std::string valueRef(const std::string& name, const SourceSpan& span, Code code, const std::string& what) {
        if (const std::string* u = findValue(name)) return *u;
        if (defNames_.count(name)) return name;
        fail(code, span, what + " names unbound variable " + name);
    }

    std::string freshBinder(const char* prefix) { return std::string("$") + prefix + std::to_string(fresh_++); }

    // ------------------------------------------------------------ types

    TypeRef named(const std::string& name, std::vector<TypeRef> args, const SourceSpan& span) {
        if (isTypeVar(name)) {
            if (!args.empty()) fail(Code::E_DESUGAR, span, "type parameter " + name + " takes no arguments");
            return mkTypeVar(name);
        }
        auto al = prog_.aliases.find(name);
        if (al != prog_.aliases.end()) {
            const AliasDef& a = al->second;
            if (a.params.size() != args.size())
                fail(Code::E_DESUGAR, span, "type alias " + name + " expects " + std::to_string(a.params.size()) +
                                                " arguments");
            if (++aliasDepth_ > 64) fail(Code::E_DESUGAR, span, "cyclic type alias " + name);
            auto savedValues = values_;
            auto savedTypes = typeVars_;
            values_.assign(1, {});
            typeVars_.assign(1, std::set<std::string>(a.params.begin(), a.params.end()));
            TypeRef body = convert(a.rhs, nullptr);
            values_ = savedValues;
            typeVars_ = savedTypes;
            --aliasDepth_;
            TypeSubst s;
            for (size_t i = 0; i < args.size(); ++i) s.types[a.params[i]] = args[i];
            return applySubst(body, s);
        }
        if (prog_.typefunNames.count(name)) {
            if (args.size() != 1) fail(Code::E_DESUGAR, span, "type function " + name + " takes one argument");
            return mkTypeFunApp(name, std::move(args));
        }
        if (const ClassSig* c = prog_.classes.find(name)) {
            if (c->typeParams.size() != args.size())
                fail(Code::E_DESUGAR, span, "class " + name + " expects " + std::to_string(c->typeParams.size()) +
                                                " type arguments, got " + std::to_string(args.size()));
            return mkBase(name, std::move(args));
        }
        fail(Code::E_UNBOUND, span, "unknown type " + name);
    }

    Path valuePath(const std::vector<std::string>& segs, const SourceSpan& span) {
        Path p;
        p.root = valueRef(segs[0], span, Code::E_UNBOUND, "path");
        p.fields.assign(segs.begin() + 1, segs.end());
        return p;
    }

    // `pending` receives a `@kill` that annotates a non-function type; the enclosing arrow owns it.
    TypeRef convert(const STypePtr& t, KillSet* pending) {
        switch (t->kind) {
        case SKind::Named: return named(t->name, {}, t->span);
        case SKind::AppliedCon: {
            std::vector<TypeRef> args;
            for (const auto& a : t->args) args.push_back(convert(a, nullptr));
            if (t->name == "::") return mkBase("::", std::move(args));
            return named(t->name, std::move(args), t->span);
        }
        case SKind::NatLit: return mkNat(t->nat);
        case SKind::Qualified: {
            TypeRef inner = convert(t->args[0], nullptr);
            Qualifier q;
            q.fresh = t->flag;
            for (const auto& n : t->names) q.vars.insert(valueRef(n, t->span, Code::E_DESUGAR, "qualifier"));
            if (!t->qualVar.empty()) {
                if (!isTypeVar("^" + t->qualVar))
                    fail(Code::E_DESUGAR, t->span, "unknown qualifier variable " + t->qualVar);
                q.vars.insert(t->qualVar);
            }
            return withQual(inner, inner->qual.join(q));
        }
        case SKind::FunArrow:
        case SKind::ImplicitArrow:
        case SKind::KillArrow:
        case SKind::ImplicitKillArrow:
        case SKind::TransitionArrow: return arrow(t);
        case SKind::SigmaArrow: {
            std::string self = freshBinder("a");
            TypeRef a = convert(t->args[1], nullptr);
            TypeRef b = convert(t->args[0], nullptr);
            return mkSigma(self, a, b);
        }
        case SKind::KillAnnot: {
            KillSet k;
            k.funSelf = t->flag;
            for (const auto& n : t->names) k.vars.insert(valueRef(n, t->span, Code::E_DESUGAR, "@kill"));
            TypeRef inner = convert(t->args[0], pending);
            if (inner->kind == TypeKind::DepFun) {
                KillSet merged = inner->kill;
                merged.vars.insert(k.vars.begin(), k.vars.end());
                merged.funSelf = merged.funSelf || k.funSelf;
                return withKill(inner, merged);
            }
            if (!pending) fail(Code::E_DESUGAR, t->span, "@kill must annotate a function result");
            pending->vars.insert(k.vars.begin(), k.vars.end());
            pending->funSelf = pending->funSelf || k.funSelf;
            return inner;
        }
        case SKind::PathMember: {
            std::vector<TypeRef> args;
            for (const auto& a : t->args) args.push_back(convert(a, nullptr));
            return mkPathMember(valuePath(t->path, t->span), t->name, std::move(args));
        }
        case SKind::Projection:
            if (!prog_.classes.find(t->path[0])) fail(Code::E_UNBOUND, t->span, "unknown type " + t->path[0]);
            if (!prog_.classes.find(t->name) || prog_.classes.find(t->name)->owner != t->path[0])
                fail(Code::E_UNBOUND, t->span, t->path[0] + " has no nested class " + t->name);
            return mkProjection(t->path[0], t->name);
        case SKind::Singleton: return mkSingleton(valuePath(t->path, t->span));
        case SKind::Refinement: {
            STypePtr sa, sb;
            for (const auto& [m, ty] : t->members) (m == "A" ? sa : sb) = ty;
            if (!sa || !sb) fail(Code::E_DESUGAR, t->span, "Sigma refinement needs both A and B");
            std::string self = freshBinder("a");
            TypeRef a = convert(sa, nullptr);
            values_.push_back({{"a", self}});
            TypeRef b;
            try {
                b = convert(sb, nullptr);
            } catch (...) {
                values_.pop_back();
                throw;
            }
            values_.pop_back();
            return mkSigma(self, a, b);
        }
        case SKind::Tuple: {
            if (t->args.empty()) return unitType();
            std::vector<TypeRef> elems;
            for (const auto& a : t->args) elems.push_back(convert(a, nullptr));
            return mkTuple(std::move(elems));
        }
        case SKind::ByName: {
            KillSet k;
            TypeRef inner = convert(t->args[0], &k);
            return byNameFun(inner, k);
        }
        }
        fail(Code::E_DESUGAR, t->span, "unsupported type form");
    }

    TypeRef arrow(const STypePtr& t) {
        SKind kind = t->kind;
        bool implicit = kind == SKind::ImplicitArrow || kind == SKind::ImplicitKillArrow || kind == SKind::TransitionArrow;
        bool kills = kind == SKind::KillArrow || kind == SKind::ImplicitKillArrow || kind == SKind::TransitionArrow;
        const STypePtr& ps = t->args[0];
        // `(A, B) => C` is curried
        if (kind == SKind::FunArrow && t->name.empty() && ps->kind == SKind::Tuple && ps->args.size() >= 2) {
            std::vector<TypeRef> params;
            for (const auto& a : ps->args) params.push_back(convert(a, nullptr));
            KillSet k;
            TypeRef r = convert(t->args[1], &k);
            for (size_t i = params.size(); i-- > 0;) {
                r = mkFun("_", params[i], r, false, k);
                k = {};
            }
            return r;
        }
        std::string binder = t->name;
        if (binder.empty()) binder = (kind == SKind::FunArrow) ? "_" : freshBinder("c");
        TypeRef param = convert(ps, nullptr);
        if (kind == SKind::TransitionArrow) param = withQual(param, param->qual.join(Qualifier::freshOnly()));
        values_.push_back({});
        if (binder != "_") values_.back()[binder] = binder;
        KillSet k;
        TypeRef result;
        try {
            result = convert(t->args[1], &k);
        } catch (...) {
            values_.pop_back();
            throw;
        }
        values_.pop_back();
        if (kills) k.vars.insert(binder);
        if (kind == SKind::TransitionArrow)
            result = mkSigma(freshBinder("a"), unitType(), withQual(result, result->qual.join(Qualifier::freshOnly())));
        return mkFun(binder, param, result, implicit, k);
    }

    // Renames value names inside a surface type so the printed program stays consistent with binders.
    STypePtr renameSType(const STypePtr& t) {
        if (!t) return t;
        auto c = std::make_shared<syntax::SType>(*t);
        auto ref = [&](const std::string& n) {
            const std::string* u = findValue(n);
            return u ? *u : n;
        };
        switch (t->kind) {
        case SKind::PathMember:
        case SKind::Singleton:
            if (!c->path.empty()) c->path[0] = ref(c->path[0]);
            break;
        case SKind::Qualified:
        case SKind::KillAnnot:
            for (auto& n : c->names) n = ref(n);
            break;
        default: break;
        }
        bool binderScope = !t->name.empty() && (t->kind == SKind::FunArrow || t->kind == SKind::ImplicitArrow ||
                                                t->kind == SKind::KillArrow || t->kind == SKind::ImplicitKillArrow ||
                                                t->kind == SKind::TransitionArrow);
        for (size_t i = 0; i < c->args.size(); ++i) {
            bool scoped = binderScope && i == 1;
            if (scoped) values_.push_back({{t->name, t->name}});
            c->args[i] = renameSType(c->args[i]);
            if (scoped) values_.pop_back();
        }
        if (t->kind == SKind::Refinement) {
            for (auto& [m, ty] : c->members) {
                if (m == "B") values_.push_back({{"a", "a"}});
                ty = renameSType(ty);
                if (m == "B") values_.pop_back();
            }
        }
        return c;
    }

    // ------------------------------------------------------------ type parameters

    TypeParamSig typeParamSig(const syntax::TypeParam& tp) {
        TypeParamSig s;
        s.name = tp.name;
        s.qualVar = tp.qualVar;
        s.arity = static_cast<int>(tp.params.size());
        if (tp.bound) s.bound = convert(tp.bound, nullptr);
        for (const auto& inner : tp.params) {
            typeVars_.push_back({inner.name});
            s.paramBounds.push_back(inner.bound ? convert(inner.bound, nullptr) : nullptr);
            typeVars_.pop_back();
        }
        return s;
    }

    void declareTypeParams(const std::vector<syntax::TypeParam>& tps) {
        for (const auto& tp : tps) {
            typeVars_.back().insert(tp.name);
            // qualifier variables live in the same scope, marked with '^'
            if (!tp.qualVar.empty()) typeVars_.back().insert("^" + tp.qualVar);
        }
    }

    std::vector<TypeParamSig> typeParamSigs(const std::vector<syntax::TypeParam>& tps) {
        std::vector<TypeParamSig> out;
        for (const auto& tp : tps) out.push_back(typeParamSig(tp));
        return out;
    }

    // ------------------------------------------------------------ declarations

    void collectClass(const NodePtr& decl, const std::string& owner);
    void buildClass(const NodePtr& decl);
    void buildTypeFun(const NodePtr& decl);
    DefInfo definition(const NodePtr& def, const syntax::Node* ext, bool prelude);

    NodePtr expr(const NodePtr& n);
    NodePtr methodCall(const NodePtr& n, const NodePtr& recv, const std::vector<NodePtr>& args);
    std::vector<DefGroup> paramGroups(std::vector<syntax::ParamList>& lists);
};

void Desugarer::collectClass(const NodePtr& decl, const std::string& owner) {
    if (prog_.classes.find(decl->name)) fail(Code::E_DESUGAR, decl->span, "duplicate class " + decl->name);
    ClassSig c;
    c.name = decl->name;
    c.isTrait = decl->isTrait;
    c.parents = decl->parents;
    c.owner = owner;
    c.span = decl->span;
    prog_.classes.classes[c.name] = c;
    for (const auto& m : decl->children) {
        if (m->kind != NodeKind::ClassDecl) continue;
        collectClass(m, decl->name);
        prog_.classes.classes[decl->name].nested.push_back(m->name);
    }
}

void Desugarer::buildClass(const NodePtr& decl) {
    resetScopes();
    declareTypeParams(decl->typeParams);
    ClassSig& c = prog_.classes.classes[decl->name];
    c.typeParams = typeParamSigs(decl->typeParams);
    for (const auto& p : decl->parents)
        if (!prog_.classes.find(p)) fail(Code::E_UNBOUND, decl->span, "unknown parent class " + p);
    std::set<std::string> names;
    for (const auto& m : decl->children) {
        if (m->kind == NodeKind::ClassDecl) {
            buildClass(m);
            continue;
        }
        if (!names.insert(m->name).second) fail(Code::E_DESUGAR, m->span, "duplicate type member " + m->name);
        TypeMemberSig ms;
        ms.name = m->name;
        typeVars_.emplace_back();
        declareTypeParams(m->typeParams);
        ms.params = typeParamSigs(m->typeParams);
        typeVars_.pop_back();
        prog_.classes.classes[decl->name].members.push_back(ms);
    }
}

void Desugarer::buildTypeFun(const NodePtr& decl) {
    resetScopes();
    TypeFunDef def;
    def.name = decl->name;
    def.span = decl->span;
    if (decl->typeParams.size() != 1) fail(Code::E_DESUGAR, decl->span, "typefun takes exactly one parameter");
    def.param = decl->typeParams[0].name;
    if (decl->strValue != def.param)
        fail(Code::E_DESUGAR, decl->span, "typefun must match on its parameter " + def.param);
    declareTypeParams(decl->typeParams);
    if (decl->typeParams[0].bound) def.bound = convert(decl->typeParams[0].bound, nullptr);
    for (const auto& c : decl->cases) {
        TypeFunCase tc;
        tc.span = c.span;
        const STypePtr& pat = c.pattern;
        std::vector<TypeRef> args;
        std::set<std::string> vars;
        if (pat->kind == SKind::NatLit) {
            tc.pattern = mkNat(pat->nat);
        } else {
            if (pat->kind != SKind::Named && pat->kind != SKind::AppliedCon)
                fail(Code::E_TYPEFUN_STUCK, c.span, "typefun " + def.name + ": case pattern must be headed by a class");
            for (const auto& a : pat->args) {
                if (a->kind != SKind::Named || !a->args.empty())
                    fail(Code::E_TYPEFUN_STUCK, a->span,
                         "typefun " + def.name + ": pattern arguments must be distinct variables");
                args.push_back(mkTypeVar(a->name));
                vars.insert(a->name);
            }
            tc.pattern = mkBase(pat->name, args);
        }
        typeVars_.push_back(vars);
        tc.rhs = convert(c.rhs, nullptr);
        typeVars_.pop_back();
        def.cases.push_back(tc);
    }
    prog_.classes.checkTypeFun(def);
    prog_.classes.typefuns[def.name] = def;
}

std::vector<DefGroup> Desugarer::paramGroups(std::vector<syntax::ParamList>& lists) {
    std::vector<DefGroup> out;
    for (auto& pl : lists) {
        DefGroup g;
        g.isUsing = pl.isUsing;
        for (auto& p : pl.params) {
            DefParam dp;
            dp.span = p.span;
            dp.byName = p.byName;
            if (p.byName) {
                KillSet k;
                TypeRef inner = convert(p.type, &k);
                dp.type = byNameFun(inner, k);
            } else {
                dp.type = convert(p.type, nullptr);
            }
            p.type = renameSType(p.type);
            p.ktype = dp.type;
            p.name = bindValue(p.name);
            dp.name = p.name;
            g.params.push_back(dp);
        }
        out.push_back(g);
    }
    return out;
}

DefInfo Desugarer::definition(const NodePtr& def, const syntax::Node* ext, bool prelude) {
    resetScopes();
    DefInfo d;
    d.name = def->name;
    d.span = def->span;
    d.isExtern = def->kind == NodeKind::ExternDefDecl;
    d.prelude = prelude;
    std::vector<syntax::TypeParam> tps;
    if (ext) tps = ext->typeParams;
    tps.insert(tps.end(), def->typeParams.begin(), def->typeParams.end());
    std::set<std::string> seen;
    for (const auto& tp : tps)
        if (!seen.insert(tp.name).second) fail(Code::E_DESUGAR, tp.span, "duplicate type parameter " + tp.name);
    declareTypeParams(tps);
    d.typeParams = typeParamSigs(tps);
    std::vector<syntax::ParamList> lists = def->paramLists;
    if (ext) {
        const syntax::Param& recv = ext->paramLists[0].params[0];
        if (lists.empty() || lists[0].isUsing) lists.insert(lists.begin(), syntax::ParamList{false, {recv}});
        else lists[0].params.insert(lists[0].params.begin(), recv);
        for (size_t i = 1; i < lists[0].params.size(); ++i)
            if (lists[0].params[i].name == recv.name)
                fail(Code::E_DESUGAR, lists[0].params[i].span, "parameter " + recv.name + " shadows the receiver");
    }
    d.groups = paramGroups(lists);
    if (def->type) {
        KillSet k;
        d.result = convert(def->type, &k);
        if (!k.empty() && d.groups.empty())
            fail(Code::E_DESUGAR, def->type->span, "@kill on the result of a definition without parameters");
        d.resultKill = k;
        d.type = curriedType(d.groups, d.result, d.resultKill);
    }
    if (!d.groups.empty() && !d.groups[0].params.empty())
        d.firstParamClass = classOf(d.groups[0].params[0].type, prog_.classes);
    if (!d.isExtern) d.body = expr(def->children[0]);
    return d;
}

NodePtr Desugarer::methodCall(const NodePtr& n, const NodePtr& recv, const std::vector<NodePtr>& args) {
    std::string target;
    if (const std::string* u = findValue(n->name)) target = *u;
    else if (defNames_.count(n->name)) target = n->name;
    else fail(Code::E_UNKNOWN_METHOD, n->span, "no method or extension named " + n->name);
    auto fn = syntax::makeNode(NodeKind::Var, n->span);
    fn->name = target;
    auto ap = syntax::makeNode(NodeKind::Apply, n->span);
    ap->children.push_back(fn);
    ap->children.push_back(recv);
    ap->children.insert(ap->children.end(), args.begin(), args.end());
    for (const auto& ta : n->typeArgs) {
        ap->kTypeArgs.push_back(convert(ta, nullptr));
        ap->typeArgs.push_back(renameSType(ta));
    }
    return ap;
}

NodePtr Desugarer::expr(const NodePtr& n) {
    auto c = std::make_shared<syntax::Node>(*n);
    auto recurse = [&]() {
        for (auto& ch : c->children) ch = expr(ch);
    };
    switch (n->kind) {
    case NodeKind::Literal: return c;
    case NodeKind::Var:
        if (const std::string* u = findValue(n->name)) c->name = *u;
        return c;
    case NodeKind::Select: {
        NodePtr recv = expr(n->children[0]);
        if (isField(n->name)) {
            c->children = {recv};
            return c;
        }
        return methodCall(n, recv, {});
    }
    case NodeKind::MethodCall: {
        if (n->isImplicit) fail(Code::E_DESUGAR, n->span, "a method receiver cannot be passed in a using clause");
        NodePtr recv = expr(n->children[0]);
        std::vector<NodePtr> args;
        for (size_t i = 1; i < n->children.size(); ++i) args.push_back(expr(n->children[i]));
        return methodCall(n, recv, args);
    }
    case NodeKind::Apply:
        recurse();
        c->kTypeArgs.clear();
        c->typeArgs.clear();
        for (const auto& ta : n->typeArgs) {
            c->kTypeArgs.push_back(convert(ta, nullptr));
            c->typeArgs.push_back(renameSType(ta));
        }
        return c;
    case NodeKind::Lambda: {
        values_.emplace_back();
        for (auto& p : c->paramLists[0].params) {
            if (p.type) {
                p.ktype = convert(p.type, nullptr);
                p.type = renameSType(p.type);
            }
            p.name = bindValue(p.name);
        }
        recurse();
        values_.pop_back();
        return c;
    }
    case NodeKind::Block:
        values_.emplace_back();
        recurse();
        values_.pop_back();
        return c;
    case NodeKind::ValBind:
    case NodeKind::ImplicitValBind:
        recurse();
        if (n->type) {
            c->ktype = convert(n->type, nullptr);
            c->type = renameSType(n->type);
        }
        c->name = bindValue(n->name);
        return c;
    case NodeKind::TupleBind:
        recurse();
        for (auto& nm : c->names) nm = bindValue(nm);
        return c;
    case NodeKind::DefDecl: {
        c->name = bindValue(n->name);
        values_.emplace_back();
        typeVars_.emplace_back();
        declareTypeParams(n->typeParams);
        for (const auto& tp : n->typeParams)
            if (tp.bound) convert(tp.bound, nullptr);
        std::vector<DefGroup> groups = paramGroups(c->paramLists);
        if (n->type) {
            KillSet k;
            TypeRef r = convert(n->type, &k);
            if (!k.empty() && groups.empty())
                fail(Code::E_DESUGAR, n->type->span, "@kill on the result of a definition without parameters");
            c->ktype = curriedType(groups, r, k);
            c->type = renameSType(n->type);
        }
        recurse();
        typeVars_.pop_back();
        values_.pop_back();
        return c;
    }
    case NodeKind::If:
    case NodeKind::BinOp:
    case NodeKind::Unary:
    case NodeKind::Tuple: recurse(); return c;
    case NodeKind::Summon:
    case NodeKind::TypeAscription:
        recurse();
        c->ktype = convert(n->type, nullptr);
        c->type = renameSType(n->type);
        return c;
    case NodeKind::SigmaIntro: {
        recurse();
        STypePtr sa, sb;
        for (const auto& [m, ty] : n->sigmaTypes) (m == "A" ? sa : sb) = ty;
        if (sa && sb) {
            std::string self = freshBinder("a");
            TypeRef a = convert(sa, nullptr);
            values_.push_back({{"a", self}});
            TypeRef b = convert(sb, nullptr);
            values_.pop_back();
            c->ktype = mkSigma(self, a, b);
        }
        for (auto& [m, ty] : c->sigmaTypes) {
            if (m == "B") values_.push_back({{"a", "a"}});
            ty = renameSType(ty);
            if (m == "B") values_.pop_back();
        }
        return c;
    }
    default: fail(Code::E_DESUGAR, n->span, std::string("unexpected ") + std::string(syntax::nodeKindName(n->kind)));
    }
}

void addBuiltins(ClassTable& ct) {
    for (const char* b : {"Unit", "Int", "Bool", "String"}) {
        ClassSig c;
        c.name = b;
        c.externTag = "builtin";
        ct.classes[b] = c;
    }
    ClassSig z;
    z.name = "Z";
    z.parents = {"Int"};
    z.externTag = "builtin";
    ct.classes["Z"] = z;
    ClassSig s;
    s.name = "S";
    s.parents = {"Int"};
    s.externTag = "builtin";
    TypeParamSig n;
    n.name = "N";
    n.bound = intType();
    s.typeParams = {n};
    ct.classes["S"] = s;
}

void collectDefNames(const Program& prog, std::set<std::string>& out) {
    for (const auto& d : prog.defs) out.insert(d.name);
}

}  // namespace

TypeRef curriedType(const std::vector<DefGroup>& groups, const TypeRef& result, const KillSet& resultKill) {
    if (!result) return nullptr;
    TypeRef cur = result;
    bool innermost = true;
    for (size_t g = groups.size(); g-- > 0;) {
        const DefGroup& grp = groups[g];
        KillSet k = innermost ? resultKill : KillSet{};
        if (grp.params.empty()) {
            cur = mkFun("_", unitType(), cur, grp.isUsing, k);
            innermost = false;
            continue;
        }
        for (size_t i = grp.params.size(); i-- > 0;) {
            cur = mkFun(grp.params[i].name, grp.params[i].type, cur, grp.isUsing, innermost ? resultKill : KillSet{});
            innermost = false;
        }
    }
    return cur;
}

Program desugarProgram(const std::vector<Unit>& units) {
    Program prog;
    addBuiltins(prog.classes);
    Desugarer ds(prog);
    struct PendingDef {
        NodePtr def;
        const syntax::Node* ext;
        bool prelude;
    };
    std::vector<PendingDef> pending;
    std::vector<NodePtr> classes, typefuns;
    auto record = [&](const CompileError& e) { prog.diagnostics.push_back(e.diagnostic()); };

    for (const auto& u : units) {
        for (const auto& decl : u.ast->children) {
            try {
                switch (decl->kind) {
                case NodeKind::ClassDecl:
                    ds.collectClass(decl, "");
                    classes.push_back(decl);
                    break;
                case NodeKind::TypeAliasDecl: {
                    if (prog.aliases.count(decl->name) || prog.classes.find(decl->name))
                        fail(Code::E_DESUGAR, decl->span, "duplicate type name " + decl->name);
                    AliasDef a;
                    for (const auto& tp : decl->typeParams) a.params.push_back(tp.name);
                    a.rhs = decl->type;
                    a.span = decl->span;
                    prog.aliases[decl->name] = a;
                    break;
                }
                case NodeKind::TypeFunDecl:
                    prog.typefunNames.insert(decl->name);
                    typefuns.push_back(decl);
                    break;
                case NodeKind::DefDecl:
                case NodeKind::ExternDefDecl:
                    pending.push_back({decl, nullptr, u.prelude});
                    ds.defNames_.insert(decl->name);
                    break;
                case NodeKind::ExtensionDecl:
                    for (const auto& m : decl->children) {
                        pending.push_back({m, decl.get(), u.prelude});
                        ds.defNames_.insert(m->name);
                    }
                    break;
                default: fail(Code::E_DESUGAR, decl->span, "unexpected top-level declaration");
                }
            } catch (const CompileError& e) {
                record(e);
            }
        }
    }
    for (const auto& c : classes) {
        try {
            ds.buildClass(c);
        } catch (const CompileError& e) {
            record(e);
        }
    }
    for (const auto& tf : typefuns) {
        try {
            ds.buildTypeFun(tf);
        } catch (const CompileError& e) {
            record(e);
        }
    }
    for (const auto& p : pending) {
        DefInfo d;
        try {
            d = ds.definition(p.def, p.ext, p.prelude);
            for (const auto& other : prog.defs) {
                if (other.name == d.name && other.firstParamClass == d.firstParamClass)
                    fail(Code::E_DESUGAR, d.span, "duplicate definition of " + d.name);
            }
        } catch (const CompileError& e) {
            record(e);
            d = DefInfo{};
            d.name = p.def->name;
            d.span = p.def->span;
            d.prelude = p.prelude;
            d.failed = true;
        }
        prog.defs.push_back(std::move(d));
    }
    return prog;
}

TypeRef expandArrows(const STypePtr& t, const Program& prog, const std::set<std::string>& values) {
    Program copy = prog;
    Desugarer ds(copy);
    collectDefNames(prog, ds.defNames_);
    ds.resetScopes();
    for (const auto& v : values) ds.values_.back()[v] = v;
    return ds.convert(t, nullptr);
}

NodePtr desugarUfcs(const NodePtr& node, const Program& prog) {
    Program copy = prog;
    Desugarer ds(copy);
    collectDefNames(prog, ds.defNames_);
    ds.resetScopes();
    return ds.expr(node);
}

namespace {

std::string indent(const std::string& text, const std::string& pad) {
    std::ostringstream out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out << pad << line << "\n";
    return out.str();
}

std::string typeParamText(const std::vector<TypeParamSig>& tps) {
    if (tps.empty()) return "";
    std::string s = "[";
    for (size_t i = 0; i < tps.size(); ++i) {
        if (i) s += ", ";
        s += tps[i].name;
        if (!tps[i].qualVar.empty()) s += "^" + tps[i].qualVar;
        if (tps[i].bound) s += " <: " + typeToString(tps[i].bound);
    }
    return s + "]";
}

}  // namespace

std::string dump(const Program& prog, bool includePrelude) {
    std::ostringstream out;
    for (const auto& d : prog.defs) {
        if (d.prelude && !includePrelude) continue;
        out << (d.isExtern ? "extern def " : "def ") << d.name << typeParamText(d.typeParams) << ": ";
        if (d.failed) {
            out << "<error>\n";
            continue;
        }
        if (d.type) {
            out << typeToString(d.type);
        } else {
            TypeRef shape = curriedType(d.groups, mkTypeVar("?"), {});
            out << typeToString(shape);
        }
        out << "\n";
        if (d.body) out << indent(syntax::printExpr(d.body), "  ");
    }
    return out.str();
}

}  // namespace cap::desugar
