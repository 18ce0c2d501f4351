#include <json.hpp>

#include <cstdio>
#include <ostream>

#include "interp_internal.hpp"

namespace cap::interp {

using elab::EKind;
using elab::EPtr;

int RunResult::guardEvents() const {
    int n = 0;
    for (const auto& e : trace)
        if (e.event == "guard") ++n;
    return n;
}

std::string RunResult::traceJsonl() const {
    std::string out;
    for (const auto& e : trace) {
        nlohmann::ordered_json j;
        j["event"] = e.event;
        j["task"] = e.task;
        if (e.resource.empty()) j["resource"] = nullptr;
        else j["resource"] = e.resource;
        j["detail"] = e.detail;
        out += j.dump() + "\n";
    }
    return out;
}

std::string fnv1a64Hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunResult::digest() const { return fnv1a64Hex(traceJsonl()); }

namespace detail {

VPtr unitV() {
    static const VPtr u = std::make_shared<Value>();
    return u;
}

VPtr boolV(bool b) {
    auto v = std::make_shared<Value>();
    v->kind = VKind::Bool;
    v->b = b;
    return v;
}

VPtr intV(long long i) {
    auto v = std::make_shared<Value>();
    v->kind = VKind::Int;
    v->i = i;
    return v;
}

VPtr strV(std::string s) {
    auto v = std::make_shared<Value>();
    v->kind = VKind::Str;
    v->s = std::move(s);
    return v;
}

VPtr sigmaV(VPtr a, VPtr b) {
    auto v = std::make_shared<Value>();
    v->kind = VKind::Sigma;
    v->elems = {std::move(a), std::move(b)};
    return v;
}

VPtr tupleV(std::vector<VPtr> elems) {
    auto v = std::make_shared<Value>();
    v->kind = VKind::Tuple;
    v->elems = std::move(elems);
    return v;
}

VPtr resourceV(std::shared_ptr<Resource> r) {
    auto v = std::make_shared<Value>();
    v->kind = VKind::Resource;
    v->res = std::move(r);
    return v;
}

std::string showValue(const VPtr& v) {
    switch (v->kind) {
    case VKind::Unit: return "()";
    case VKind::Bool: return v->b ? "true" : "false";
    case VKind::Int: return std::to_string(v->i);
    case VKind::Str: return v->s;
    case VKind::Closure:
    case VKind::Prim: return "<function>";
    case VKind::Resource: return v->res->label();
    case VKind::Object: return v->s + "()";
    case VKind::Sigma:
    case VKind::Tuple: {
        std::string out = v->kind == VKind::Sigma ? "Sigma(" : "(";
        for (size_t i = 0; i < v->elems.size(); ++i) out += (i ? ", " : "") + showValue(v->elems[i]);
        return out + ")";
    }
    }
    return "?";
}

VPtr* Env::find(const std::string& name) {
    for (Env* e = this; e; e = e->parent.get()) {
        auto it = e->vars.find(name);
        if (it != e->vars.end()) return &it->second;
    }
    return nullptr;
}

namespace {

constexpr int kMaxDepth = 20000;

int arityOf(TypeRef t) {
    int n = 0;
    while (t && t->kind == TypeKind::DepFun) {
        ++n;
        t = t->result();
    }
    return n;
}

bool isSigmaName(const std::string& n) { return n.rfind("$sigma_", 0) == 0; }

}  // namespace

Interp::Interp(const elab::ElabProgram& prog, const Options& opts) : prog_(prog), opts_(opts) {}

void Interp::emit(const std::string& event, const std::string& resource, const std::string& detail) {
    trace_.push_back(TraceEvent{event, sched_.current() < 0 ? 0 : sched_.current(), resource, detail});
}

void Interp::raise(const std::string& code, const std::string& message, const SourceSpan& span) {
    throw Failure{RuntimeError{code, message, span}};
}

void Interp::guardFail(const Resource& r, const std::string& expected, const std::string& actual,
                       const SourceSpan& span) {
    emit("guard", r.label(), "expected " + expected + ", actual " + actual);
    raise("R_GUARD", r.label() + ": expected " + expected + ", actual " + actual, span);
}

void Interp::guardState(Resource& r, const std::string& expected, const SourceSpan& span) {
    if (r.state != expected) guardFail(r, expected, r.state, span);
}

void Interp::tick(const SourceSpan& span) {
    if (++steps_ > opts_.stepLimit)
        raise("R_DEADLOCK", "step limit of " + std::to_string(opts_.stepLimit) + " exceeded", span);
}

VPtr Interp::global(const std::string& key, const SourceSpan& span) {
    auto cached = globals_.find(key);
    if (cached != globals_.end()) return cached->second;
    const elab::ElabDef* d = prog_.find(key);
    if (!d) raise("R_UNBOUND", "no definition " + key, span);
    if (d->isExtern) {
        auto v = std::make_shared<Value>();
        v->kind = VKind::Prim;
        v->s = key;
        v->arity = arityOf(d->type);
        if (v->arity == 0) return prim(key, {}, span);
        globals_[key] = v;
        return v;
    }
    if (!d->body) raise("R_UNBOUND", "definition " + key + " has no body", span);
    if (d->body->kind == EKind::Lambda) {
        auto v = std::make_shared<Value>();
        v->kind = VKind::Closure;
        v->lambda = d->body.get();
        globals_[key] = v;
        return v;
    }
    return eval(d->body, std::make_shared<Env>());
}

VPtr Interp::call(const VPtr& fn, const VPtr& arg, const SourceSpan& span) {
    tick(span);
    if (fn->kind == VKind::Closure) {
        if (++depth_ > kMaxDepth) raise("R_DEADLOCK", "call depth limit exceeded", span);
        auto frame = std::make_shared<Env>();
        frame->parent = fn->env;
        frame->vars[fn->lambda->param] = arg;
        VPtr r = eval(fn->lambda->children[0], frame);
        --depth_;
        return r;
    }
    if (fn->kind == VKind::Prim) {
        std::vector<VPtr> args = fn->elems;
        args.push_back(arg);
        if (static_cast<int>(args.size()) == fn->arity) return prim(fn->s, args, span);
        auto v = std::make_shared<Value>(*fn);
        v->elems = std::move(args);
        return v;
    }
    raise("R_UNBOUND", "applying a value that is not a function: " + showValue(fn), span);
}

void Interp::bindSite(const elab::ENode& site, const VPtr& v, const EnvPtr& env) {
    env->vars[elab::sigmaName(site.siteId)] = v;
    if (site.tupleSigma.empty()) {
        if (v->kind != VKind::Sigma) raise("R_UNBOUND", "Σ site produced " + showValue(v), site.span);
        env->vars[elab::sigmaImpName(site.siteId)] = v->elems[1];
        return;
    }
    for (size_t k = 0; k < site.tupleSigma.size(); ++k)
        if (site.tupleSigma[k])
            env->vars[elab::sigmaImpName(site.siteId, static_cast<int>(k + 1))] = v->elems[k]->elems[1];
}

VPtr Interp::block(const EPtr& e, const EnvPtr& env) {
    auto frame = std::make_shared<Env>();
    frame->parent = env;
    VPtr last = unitV();
    for (const auto& c : e->children) last = eval(c, frame);
    return last;
}

VPtr Interp::eval(const EPtr& e, const EnvPtr& env) {
    tick(e->span);
    switch (e->kind) {
    case EKind::Literal:
        switch (e->lit) {
        case syntax::LitKind::Unit: return unitV();
        case syntax::LitKind::Int: return intV(e->intValue);
        case syntax::LitKind::Bool: return boolV(e->intValue != 0);
        case syntax::LitKind::String: return strV(e->strValue);
        }
        return unitV();
    case EKind::Var: {
        VPtr* v = env->find(e->name);
        if (!v) raise("R_UNBOUND", "unbound variable " + e->name, e->span);
        return *v;
    }
    case EKind::Global: return global(e->name, e->span);
    case EKind::Let:
    case EKind::ImplicitLet: {
        VPtr v = eval(e->children[0], env);
        if (v->kind == VKind::Sigma && !isSigmaName(e->name) && !e->sigmaAscribed)
            raise("R_UNBOUND", "Σ value stored in " + e->name, e->span);
        env->vars[e->name] = v;
        return unitV();
    }
    case EKind::LocalDef: {
        auto v = std::make_shared<Value>();
        v->kind = VKind::Closure;
        v->lambda = e->children[0].get();
        v->env = env;
        env->vars[e->name] = v;
        return unitV();
    }
    case EKind::TupleLet: {
        VPtr v = eval(e->children[0], env);
        if (v->kind != VKind::Tuple || v->elems.size() != e->names.size())
            raise("R_UNBOUND", "tuple pattern does not match " + showValue(v), e->span);
        for (size_t k = 0; k < e->names.size(); ++k) env->vars[e->names[k]] = v->elems[k];
        return unitV();
    }
    case EKind::Block: return block(e, env);
    case EKind::If: {
        VPtr c = eval(e->children[0], env);
        if (c->b) return eval(e->children[1], env);
        return e->children.size() > 2 ? eval(e->children[2], env) : unitV();
    }
    case EKind::Lambda: {
        auto v = std::make_shared<Value>();
        v->kind = VKind::Closure;
        v->lambda = e.get();
        v->env = env;
        return v;
    }
    case EKind::Apply: {
        VPtr f = eval(e->children[0], env);
        VPtr a = eval(e->children[1], env);
        return call(f, a, e->span);
    }
    case EKind::SigmaIntro: {
        VPtr a = eval(e->children[0], env);
        return sigmaV(a, eval(e->children[1], env));
    }
    case EKind::SigmaProjA:
    case EKind::SigmaProjB: {
        VPtr v = eval(e->children[0], env);
        if (v->kind != VKind::Sigma) raise("R_UNBOUND", "projecting from " + showValue(v), e->span);
        return v->elems[e->kind == EKind::SigmaProjA ? 0 : 1];
    }
    case EKind::SigmaSite: {
        VPtr v = eval(e->children[0], env);
        bindSite(*e, v, env);
        if (e->tupleSigma.empty()) return v->elems[0];
        std::vector<VPtr> out;
        for (size_t k = 0; k < e->tupleSigma.size(); ++k)
            out.push_back(e->tupleSigma[k] ? v->elems[k]->elems[0] : v->elems[k]);
        return tupleV(std::move(out));
    }
    case EKind::Tuple: {
        std::vector<VPtr> out;
        for (const auto& c : e->children) out.push_back(eval(c, env));
        return tupleV(std::move(out));
    }
    case EKind::TupleProj: {
        VPtr v = eval(e->children[0], env);
        if (v->kind != VKind::Tuple || e->index < 1 || e->index > static_cast<int>(v->elems.size()))
            raise("R_UNBOUND", "no element _" + std::to_string(e->index) + " in " + showValue(v), e->span);
        return v->elems[e->index - 1];
    }
    case EKind::Ascribe: return eval(e->children[0], env);
    case EKind::Ctor: {
        auto v = std::make_shared<Value>();
        v->kind = VKind::Object;
        v->s = e->name;
        return v;
    }
    case EKind::BinOp: {
        const std::string& op = e->name;
        VPtr l = eval(e->children[0], env);
        if (op == "&&" && !l->b) return boolV(false);
        if (op == "||" && l->b) return boolV(true);
        VPtr r = eval(e->children[1], env);
        if (op == "&&" || op == "||") return boolV(r->b);
        if (op == "+" && l->kind == VKind::Str) return strV(l->s + showValue(r));
        if (op == "+") return intV(l->i + r->i);
        if (op == "-") return intV(l->i - r->i);
        if (op == "*") return intV(l->i * r->i);
        if (op == "/" || op == "%") {
            if (r->i == 0) raise("R_GUARD", "division by zero", e->span);
            return intV(op == "/" ? l->i / r->i : l->i % r->i);
        }
        if (op == "<") return boolV(l->i < r->i);
        if (op == "<=") return boolV(l->i <= r->i);
        if (op == ">") return boolV(l->i > r->i);
        if (op == ">=") return boolV(l->i >= r->i);
        bool eq = showValue(l) == showValue(r);
        return boolV(op == "==" ? eq : !eq);
    }
    case EKind::Unary: {
        VPtr v = eval(e->children[0], env);
        return e->name == "!" ? boolV(!v->b) : intV(-v->i);
    }
    }
    raise("R_UNBOUND", "cannot evaluate this expression", e->span);
}

RunResult Interp::run(const std::string& entry) {
    RunResult result;
    VPtr exitValue = unitV();
    const elab::ElabDef* d = prog_.find(entry);
    if (!d) {
        result.error = RuntimeError{"R_UNBOUND", "no definition " + entry, {}};
        return result;
    }
    sched_.spawn([&] {
        VPtr v = global(entry, d->span);
        if (v->kind == VKind::Closure || v->kind == VKind::Prim) v = call(v, unitV(), d->span);
        exitValue = v;
    });
    result.error = sched_.runAll([&](int task) { trace_.push_back(TraceEvent{"switch", task, "", ""}); });
    result.exitValue = showValue(exitValue);
    result.trace = std::move(trace_);
    return result;
}

}  // namespace detail

RunResult run(const elab::ElabProgram& prog, const Options& opts, const std::string& entry) {
    detail::Interp interp(prog, opts);
    return interp.run(entry);
}

}  // namespace cap::interp
