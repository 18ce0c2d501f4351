#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cap/driver.hpp"
#include "cap/kernel.hpp"
#include "cap/typer.hpp"
#include "cap/typesys.hpp"

namespace captest {

// ---------------------------------------------------------------- File API fuzz programs

/// Straight-line program over newFile/open/close/read/write with at most `maxCalls` API calls,
/// at most three files and an optional aliasing `if`. Every program is well-typed up to kills.
inline std::string fileProgram(std::mt19937& rng, int maxCalls = 6) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
    struct Handle {
        std::string name;
        bool open;
    };
    std::vector<Handle> handles;
    std::string body;
    int files = 0, calls = 0, fresh = 0, aliases = 0;
    int budget = 1 + pick(maxCalls);
    auto name = [&] { return "v" + std::to_string(fresh++); };
    auto withState = [&](bool open) {
        std::vector<int> idx;
        for (size_t i = 0; i < handles.size(); ++i)
            if (handles[i].open == open) idx.push_back(static_cast<int>(i));
        return idx;
    };
    while (calls < budget) {
        int choice = pick(10);
        auto closed = withState(false), opened = withState(true);
        if ((choice == 0 || handles.empty()) && files < 3) {
            auto n = name();
            body += "  val " + n + " = newFile(\"f" + std::to_string(files++) + ".txt\")\n";
            handles.push_back({n, false});
            ++calls;
        } else if (choice <= 2 && !closed.empty()) {
            auto& h = handles[closed[pick(static_cast<int>(closed.size()))]];
            auto n = name();
            body += "  val " + n + " = open(" + h.name + ")\n";
            handles.push_back({n, true});
            ++calls;
        } else if (choice <= 4 && !opened.empty()) {
            auto& h = handles[opened[pick(static_cast<int>(opened.size()))]];
            auto n = name();
            body += "  val " + n + " = close(" + h.name + ")\n";
            handles.push_back({n, false});
            ++calls;
        } else if (choice <= 6 && !opened.empty()) {
            body += "  write(" + handles[opened[pick(static_cast<int>(opened.size()))]].name + ", \"x\")\n";
            ++calls;
        } else if (choice == 7 && !opened.empty()) {
            body += "  val " + name() + " = read(" + handles[opened[pick(static_cast<int>(opened.size()))]].name + ")\n";
            ++calls;
        } else if (choice >= 8 && aliases == 0) {
            bool open = pick(2) == 1;
            auto same = withState(open);
            if (same.empty()) continue;
            auto& a = handles[same[pick(static_cast<int>(same.size()))]];
            auto& b = handles[same[pick(static_cast<int>(same.size()))]];
            auto n = name();
            body += "  val " + n + " = if (readLine() == \"a\") " + a.name + " else " + b.name + "\n";
            handles.push_back({n, open});
            ++aliases;
        } else if (files >= 3 && closed.empty() && opened.empty()) {
            break;
        }
    }
    return "def main(): Unit = {\n" + body + "  ()\n}\n";
}

// ---------------------------------------------------------------- qualifier contexts

struct QualContext {
    cap::QualEnv env;
    std::vector<std::string> names;  // declaration order
};

/// Up to `maxBindings` bindings; each qualifier mentions at most `fanOut` earlier bindings, and
/// occasionally the binding itself is fresh.
inline QualContext qualContext(std::mt19937& rng, int maxBindings = 12, int fanOut = 3) {
    QualContext c;
    int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(maxBindings));
    for (int i = 0; i < n; ++i) {
        std::string x = "x" + std::to_string(i);
        cap::Qualifier q;
        q.fresh = rng() % 3 == 0;
        int k = i == 0 ? 0 : static_cast<int>(rng() % static_cast<unsigned>(fanOut + 1));
        for (int j = 0; j < k; ++j) q.vars.insert(c.names[rng() % static_cast<unsigned>(i)]);
        c.env.quals[x] = q;
        c.names.push_back(x);
    }
    return c;
}

inline cap::Qualifier randomQual(std::mt19937& rng, const QualContext& c, int maxSize = 4) {
    cap::Qualifier q;
    int k = static_cast<int>(rng() % static_cast<unsigned>(maxSize + 1));
    for (int j = 0; j < k; ++j) q.vars.insert(c.names[rng() % c.names.size()]);
    q.fresh = rng() % 4 == 0;
    return q;
}

/// Reference saturation: depth-first closure over binding qualifiers.
inline std::set<std::string> reachOracle(const cap::Qualifier& q, const cap::QualEnv& env) {
    std::set<std::string> seen;
    std::vector<std::string> work(q.vars.begin(), q.vars.end());
    while (!work.empty()) {
        auto x = work.back();
        work.pop_back();
        if (!seen.insert(x).second) continue;
        if (auto* b = env.find(x))
            for (const auto& y : b->vars) work.push_back(y);
    }
    return seen;
}

// ---------------------------------------------------------------- session terms

/// Every session term whose immediate subterms come from `below`.
template <typename F>
void sessionLayer(const std::vector<cap::TypeRef>& below, F&& visit) {
    using namespace cap;
    for (const auto& p : below) {
        visit(mkBase("Send", {intType(), p}));
        visit(mkBase("Recv", {intType(), p}));
        visit(mkBase("Rec", {p}));
    }
    for (const auto& l : below)
        for (const auto& r : below) {
            visit(mkBase("Branch", {l, r}));
            visit(mkBase("Select", {l, r}));
        }
}

/// Visits every session term of depth at most `depth` (a leaf has depth 1) exactly once. Subterms
/// are shared; only the terms of depth below `depth` are kept in memory.
template <typename F>
void forEachSessionTerm(int depth, F&& visit) {
    using namespace cap;
    const std::vector<TypeRef> leaves = {mkBase("End"), mkBase("Var", {mkNat(0)}), mkBase("Var", {mkNat(1)})};
    std::vector<TypeRef> below = leaves;  // all terms of depth <= d
    for (int d = 2; d < depth; ++d) {
        std::vector<TypeRef> next = leaves;
        sessionLayer(below, [&](const TypeRef& t) { next.push_back(t); });
        below = std::move(next);
    }
    for (const auto& t : leaves) visit(t);
    if (depth >= 2) sessionLayer(below, visit);
}

inline std::vector<cap::TypeRef> sessionTerms(int depth) {
    std::vector<cap::TypeRef> out;
    forEachSessionTerm(depth, [&](const cap::TypeRef& t) { out.push_back(t); });
    return out;
}

/// Structural duality: constructors swapped pairwise at every node, payloads and leaves kept.
inline bool isDualOf(const cap::TypeRef& d, const cap::TypeRef& p) {
    if (d->kind != cap::TypeKind::Base || d->args.size() != p->args.size()) return false;
    const std::string& n = p->name;
    if (n == "Var") return cap::structurallyEqual(d, p);
    if (n == "Send" || n == "Recv") {
        if (d->name != (n == "Send" ? "Recv" : "Send")) return false;
        return cap::structurallyEqual(d->args[0], p->args[0]) && isDualOf(d->args[1], p->args[1]);
    }
    if (n == "Select" || n == "Branch") {
        if (d->name != (n == "Select" ? "Branch" : "Select")) return false;
    } else if (n != "End" && n != "Rec") {
        return false;
    } else if (d->name != n) {
        return false;
    }
    for (size_t i = 0; i < p->args.size(); ++i)
        if (!isDualOf(d->args[i], p->args[i])) return false;
    return true;
}

/// Class table holding the prelude declarations (for `Dual` and friends).
inline const cap::ClassTable& preludeClasses() {
    static const cap::driver::Compilation c = cap::driver::compile("empty.cap", "");
    return c.program.classes;
}

// ---------------------------------------------------------------- implicit scopes

struct Scope {
    std::vector<cap::typer::Candidate> candidates;
    cap::TypeRef required;
};

/// Candidates of capability types over files f and g at depths 1..3, some killed.
inline Scope implicitScope(std::mt19937& rng) {
    using namespace cap;
    const char* roots[] = {"f", "g"};
    const char* members[] = {"IsClosed", "IsOpen"};
    auto capType = [&] { return mkPathMember(Path{roots[rng() % 2], {}}, members[rng() % 2]); };
    Scope s;
    int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
        typer::Candidate c;
        c.name = "c" + std::to_string(i);
        c.type = capType();
        c.depth = 1 + static_cast<int>(rng() % 3);
        c.killed = rng() % 3 == 0;
        s.candidates.push_back(c);
    }
    s.required = capType();
    return s;
}

/// Brute-force reading of the resolution rule, used as the reference outcome.
inline cap::typer::Resolution resolveOracle(const Scope& s, bool compat) {
    using namespace cap::typer;
    auto same = [&](const Candidate& c) { return cap::structurallyEqual(c.type, s.required); };
    auto innermost = [&](bool includeKilled) {
        int best = -1;
        for (const auto& c : s.candidates)
            if (same(c) && (includeKilled || !c.killed)) best = std::max(best, c.depth);
        std::vector<const Candidate*> at;
        for (const auto& c : s.candidates)
            if (same(c) && (includeKilled || !c.killed) && c.depth == best) at.push_back(&c);
        return at;
    };
    Resolution r;
    auto at = innermost(compat);
    bool killedOnly = false;
    if (at.empty() && !compat) {
        at = innermost(true);
        killedOnly = true;
    }
    if (at.empty()) return r;
    std::sort(at.begin(), at.end(), [](const Candidate* a, const Candidate* b) { return a->name < b->name; });
    if (killedOnly) {
        // every match is dead: the first innermost one is reported, never an ambiguity
        r.status = ResolveStatus::FoundKilled;
        r.name = at[0]->name;
        return r;
    }
    if (at.size() > 1) {
        r.status = ResolveStatus::Ambiguous;
        for (auto* c : at) r.ambiguous.push_back(c->name);
        return r;
    }
    r.status = at[0]->killed ? ResolveStatus::FoundKilled : ResolveStatus::Found;
    r.name = at[0]->name;
    return r;
}

}  // namespace captest
