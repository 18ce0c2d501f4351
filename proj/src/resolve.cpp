#include <algorithm>

#include "cap/typer.hpp"

namespace cap::typer {

namespace {

std::vector<const Candidate*> innermost(const std::vector<const Candidate*>& pool) {
    int best = -1;
    for (const auto* c : pool) best = std::max(best, c->depth);
    std::vector<const Candidate*> out;
    for (const auto* c : pool)
        if (c->depth == best) out.push_back(c);
    std::sort(out.begin(), out.end(), [](const Candidate* a, const Candidate* b) { return a->name < b->name; });
    return out;
}

}  // namespace

Resolution resolveImplicit(const TypeRef& required, const std::vector<Candidate>& candidates, const ResolveMode& mode,
                           Unifier& unifier) {
    std::vector<const Candidate*> matches;
    for (const auto& c : candidates) {
        TypeSubst saved = unifier.subst;
        if (unifier.unify(required, c.type, false)) matches.push_back(&c);
        unifier.subst = saved;
    }

    Resolution r;
    auto choose = [&](const std::vector<const Candidate*>& pool) {
        auto top = innermost(pool);
        if (top.size() > 1) {
            r.status = ResolveStatus::Ambiguous;
            for (const auto* c : top) r.ambiguous.push_back(c->name);
            return;
        }
        r.status = top[0]->killed ? ResolveStatus::FoundKilled : ResolveStatus::Found;
        r.name = top[0]->name;
        unifier.unify(required, top[0]->type, false);
    };

    if (matches.empty()) return r;
    if (mode.scalaCompat) {
        choose(matches);
        return r;
    }
    std::vector<const Candidate*> live;
    for (const auto* c : matches)
        if (!c->killed) live.push_back(c);
    if (!live.empty()) {
        choose(live);
        return r;
    }
    if (!mode.killedFallback) return r;
    // every match is dead: report the use so the effect pass can name the killed capability
    auto top = innermost(matches);
    r.status = ResolveStatus::FoundKilled;
    r.name = top[0]->name;
    unifier.unify(required, top[0]->type, false);
    return r;
}

}  // namespace cap::typer
