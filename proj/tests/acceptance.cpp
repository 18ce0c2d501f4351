// One line per acceptance criterion; exit status is nonzero if any fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "cap/anf.hpp"
#include "cap/corpus.hpp"
#include "cap/driver.hpp"
#include "cap/interp.hpp"
#include "support.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double secondsSince(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fs", s);
    return buf;
}

const char* kCoverage[] = {
    "leak_direct",   "leak_tuple",         "leak_alias",         "leak_closure",  "leak_summon",
    "leak_file",     "stale_write",        "alias_kill",         "alias_unaffected",
    "ensure_closed_missing", "cross_file", "locks_hoh",          "dom_double_close",
    "dom_wrong_close", "dom_table",        "echo",
};

Outcome goldenCorpus() {
    auto t0 = Clock::now();
    auto rep = cap::corpus::runCorpus(CAP_CORPUS_DIR);
    double took = secondsSince(t0);
    int pos = 0, neg = 0;
    std::string firstFail;
    for (const auto& c : rep.cases) {
        (c.negative ? neg : pos) += 1;
        if (!c.passed && firstFail.empty()) firstFail = c.path + ": " + c.detail;
    }
    std::string missing;
    for (const char* name : kCoverage)
        if (!fs::exists(fs::path(CAP_CORPUS_DIR) / (std::string(name) + ".cap"))) missing += std::string(" ") + name;
    Outcome o;
    o.pass = rep.ok() && pos >= 10 && neg >= 12 && missing.empty() && took < 30.0;
    o.detail = std::to_string(rep.passed()) + "/" + std::to_string(rep.cases.size()) + " cases (" +
               std::to_string(pos) + " positive, " + std::to_string(neg) + " negative) in " + fmt(took);
    if (!firstFail.empty()) o.detail += "; first failure " + firstFail;
    if (!missing.empty()) o.detail += "; missing coverage:" + missing;
    return o;
}

bool tripsGuard(const cap::elab::ElabProgram& prog) {
    for (const char* answer : {"a", "b"}) {
        cap::interp::Options io;
        io.input = {answer};
        auto r = cap::interp::run(prog, io);
        if (r.guardEvents() > 0) return true;
    }
    return false;
}

Outcome fuzz() {
    auto t0 = Clock::now();
    std::mt19937 rng(20260415);
    int accepted = 0, acceptedGuard = 0, killed = 0, killedJustified = 0, killedGuard = 0, other = 0;
    std::string example;
    for (int i = 0; i < 1000; ++i) {
        std::string src = captest::fileProgram(rng);
        auto c = cap::driver::compile("fuzz.cap", src);
        if (c.ok()) {
            ++accepted;
            if (tripsGuard(c.anf)) {
                ++acceptedGuard;
                if (example.empty()) example = src;
            }
            continue;
        }
        if (c.diagnostics[0].code != cap::Code::E_KILLED_USE) {
            ++other;
            continue;
        }
        ++killed;
        cap::driver::Options raw;
        raw.noEffectCheck = true;
        auto unchecked = cap::driver::compile("fuzz.cap", src, raw);
        if (unchecked.ok() && tripsGuard(unchecked.anf)) {
            ++killedGuard;
            ++killedJustified;
        } else if (!c.diagnostics[0].related.empty()) {
            ++killedJustified;
        }
    }
    double took = secondsSince(t0);
    Outcome o;
    bool ratio = killed == 0 || killedJustified * 100 >= killed * 95;
    o.pass = acceptedGuard == 0 && ratio && killed > 0 && accepted > 0 && took < 60.0;
    o.detail = std::to_string(accepted) + " accepted (" + std::to_string(acceptedGuard) + " with guard events), " +
               std::to_string(killed) + " killed-use rejections (" + std::to_string(killedGuard) + " trip a guard, " +
               std::to_string(killedJustified) + " justified), " + std::to_string(other) + " other rejections in " +
               fmt(took);
    if (!example.empty()) o.detail += "\n" + example;
    return o;
}

Outcome qualifierAlgebra() {
    std::mt19937 rng(7);
    int failures = 0;
    for (int i = 0; i < 500; ++i) {
        auto ctx = captest::qualContext(rng);
        auto q1 = captest::randomQual(rng, ctx);
        auto q2 = q1;
        for (const auto& x : captest::randomQual(rng, ctx).vars) q2.vars.insert(x);
        auto q3 = captest::randomQual(rng, ctx);
        auto s1 = cap::saturate(q1, ctx.env);
        auto s2 = cap::saturate(q2, ctx.env);
        if (cap::saturate(s1, ctx.env) != s1) ++failures;
        if (s1.vars != captest::reachOracle(q1, ctx.env)) ++failures;
        if (!std::includes(s2.vars.begin(), s2.vars.end(), s1.vars.begin(), s1.vars.end())) ++failures;
        if (!cap::subqual(q1, q1, ctx.env)) ++failures;
        if (!cap::subqual(q1, q2, ctx.env)) ++failures;
        bool ab = cap::subqual(q1, q3, ctx.env), bc = cap::subqual(q3, q2, ctx.env);
        if (ab && bc && !cap::subqual(q1, q2, ctx.env)) ++failures;
        // transitivity through a reachable middle
        cap::Qualifier mid{s1.vars, s1.fresh};
        if (cap::subqual(q1, mid, ctx.env) && cap::subqual(mid, q2, ctx.env) && !cap::subqual(q1, q2, ctx.env))
            ++failures;
    }
    return {failures == 0, "500 contexts, " + std::to_string(failures) + " failures"};
}

Outcome dualInvolution() {
    auto t0 = Clock::now();
    cap::TypingContext ctx;
    ctx.classes = &captest::preludeClasses();
    cap::NormalCache cache;
    cache.limit = 1 << 17;
    long terms = 0, bad = 0, badSwap = 0;
    captest::forEachSessionTerm(4, [&](const cap::TypeRef& p) {
        ++terms;
        auto once = cap::normalize(cap::mkTypeFunApp("Dual", {p}), ctx, {}, &cache);
        auto twice = cap::normalize(cap::mkTypeFunApp("Dual", {once}), ctx, {}, &cache);
        if (!cap::structurallyEqual(twice, cap::normalize(p, ctx, {}, &cache))) ++bad;
        if (!captest::isDualOf(once, p)) ++badSwap;
    });
    double took = secondsSince(t0);
    return {bad == 0 && badSwap == 0 && took < 10.0,
            std::to_string(terms) + " terms, " + std::to_string(bad) + " involution failures, " +
                std::to_string(badSwap) + " swap failures in " + fmt(took)};
}

Outcome anfPreservation() {
    int runs = 0, idempotent = 0, files = 0;
    std::string firstFail;
    for (const auto& path : cap::corpus::discover(CAP_CORPUS_DIR)) {
        ++files;
        fs::path expectPath = path;
        expectPath.replace_extension(".expect");
        auto ex = cap::corpus::parseExpect(cap::driver::readFile(expectPath.string()));
        cap::driver::Options opts;
        opts.scalaCompat = ex.scalaCompat;
        auto c = cap::driver::compile(path, cap::driver::readFile(path), opts);
        auto once = cap::anf::transformProgram(c.typed.program);
        auto twice = cap::anf::transformProgram(once);
        if (cap::elab::printProgram(once, true) == cap::elab::printProgram(twice, true))
            ++idempotent;
        else if (firstFail.empty())
            firstFail = path + " not idempotent";
        if (!c.ok() || !c.anf.find("main")) continue;
        ++runs;
        cap::interp::Options io;
        io.input = ex.input;
        auto pre = cap::interp::run(c.typed.program, io);
        auto post = cap::interp::run(c.anf, io);
        if (pre.traceJsonl() != post.traceJsonl() && firstFail.empty()) firstFail = path + " traces differ";
    }
    return {firstFail.empty() && runs > 0,
            std::to_string(runs) + " traces compared, " + std::to_string(idempotent) + "/" + std::to_string(files) +
                " idempotent" + (firstFail.empty() ? "" : "; " + firstFail)};
}

bool sameResolution(const cap::typer::Resolution& a, const cap::typer::Resolution& b) {
    return a.status == b.status && a.name == b.name && a.ambiguous == b.ambiguous;
}

Outcome resolutionDeterminism() {
    std::mt19937 rng(99);
    cap::TypingContext ctx;
    ctx.classes = &captest::preludeClasses();
    int variance = 0, oracleMismatch = 0;
    for (int i = 0; i < 200; ++i) {
        auto scope = captest::implicitScope(rng);
        auto shuffled = scope;
        std::shuffle(shuffled.candidates.begin(), shuffled.candidates.end(), rng);
        for (bool compat : {false, true}) {
            cap::typer::ResolveMode mode;
            mode.scalaCompat = compat;
            cap::Unifier u1(ctx), u2(ctx);
            auto a = cap::typer::resolveImplicit(scope.required, scope.candidates, mode, u1);
            auto b = cap::typer::resolveImplicit(shuffled.required, shuffled.candidates, mode, u2);
            if (!sameResolution(a, b)) ++variance;
            if (!sameResolution(a, captest::resolveOracle(scope, compat))) ++oracleMismatch;
        }
    }
    return {variance == 0 && oracleMismatch == 0, "200 permutations, " + std::to_string(variance) +
                                                       " order-dependent outcomes, " + std::to_string(oracleMismatch) +
                                                       " disagreements with the reference rule"};
}

Outcome compatMode() {
    auto file = [](const char* name) { return (fs::path(CAP_CORPUS_DIR) / name).string(); };
    auto codes = [&](const char* name, bool compat) {
        cap::driver::Options o;
        o.scalaCompat = compat;
        auto c = cap::driver::compile(file(name), cap::driver::readFile(file(name)), o);
        std::string out;
        for (const auto& d : c.diagnostics) out += std::string(cap::codeName(d.code)) + " ";
        return out.empty() ? std::string("ok") : out.substr(0, out.size() - 1);
    };
    auto unscopedCompat = codes("compat_ambiguous.cap", true);
    auto unscopedDefault = codes("compat_ambiguous.cap", false);
    auto scopedCompat = codes("compat_scoped.cap", true);
    auto scopedDefault = codes("compat_scoped.cap", false);
    bool pass = unscopedCompat == "E_AMBIGUOUS_IMPLICIT" && unscopedDefault == "ok" && scopedCompat == "ok" &&
                scopedDefault == "ok";
    return {pass, "unscoped: compat " + unscopedCompat + ", default " + unscopedDefault + "; scoped: compat " +
                      scopedCompat + ", default " + scopedDefault};
}

}  // namespace

// With arguments, only the listed criterion numbers run.
int main(int argc, char** argv) {
    std::set<size_t> only;
    for (int i = 1; i < argc; ++i) only.insert(std::strtoul(argv[i], nullptr, 10));
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"golden corpus", goldenCorpus},
        {"differential soundness fuzz", fuzz},
        {"qualifier algebra", qualifierAlgebra},
        {"dual involution", dualInvolution},
        {"ANF preservation", anfPreservation},
        {"resolution determinism", resolutionDeterminism},
        {"flow-sensitive vs compat resolution", compatMode},
    };
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first
                  << "): " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
