#include <doctest.h>

#include "cap/driver.hpp"
#include "cap/typer.hpp"
#include "cap/typesys.hpp"
#include "support.hpp"

using namespace cap;

namespace {

TypingContext preludeContext() {
    TypingContext ctx;
    ctx.classes = &captest::preludeClasses();
    return ctx;
}

TypeRef dual(TypeRef p) { return mkTypeFunApp("Dual", {std::move(p)}); }

}  // namespace

TEST_CASE("saturate follows binding qualifiers") {
    QualEnv env;
    env.quals["fA"] = Qualifier::freshOnly();
    env.quals["fB"] = Qualifier::freshOnly();
    env.quals["fC"] = Qualifier::of({"fA", "fB"});
    auto s = saturate(Qualifier::of({"fC"}), env);
    CHECK(s.vars == std::set<std::string>{"fA", "fB", "fC"});
    CHECK(s.fresh);
    CHECK(saturate(s, env) == s);
}

TEST_CASE("subqual") {
    QualEnv env;
    env.quals["a"] = Qualifier::freshOnly();
    env.quals["b"] = Qualifier::of({"a"});
    CHECK(subqual(Qualifier::of({"a"}), Qualifier::of({"b"}), env));
    CHECK_FALSE(subqual(Qualifier::of({"b"}), Qualifier::of({"a"}), env));
    CHECK(subqual(Qualifier{}, Qualifier::of({"a"}), env));
    // the fresh marker is a flag, not a wildcard
    CHECK_FALSE(subqual(Qualifier::of({"a"}), Qualifier::freshOnly(), env));
    CHECK(subqual(Qualifier::freshOnly(), Qualifier{{"a"}, true}, env));
    CHECK_FALSE(subqual(Qualifier::freshOnly(), Qualifier::of({"a"}), env));
}

TEST_CASE("substituting a binder in a path needs one variable") {
    auto t = mkPathMember(Path{"f", {}}, "IsOpen");
    auto ok = substQual(t, "f", Qualifier::of({"g"}), {});
    CHECK(typeToString(ok) == "g.IsOpen");
    CHECK_THROWS_AS(substQual(t, "f", Qualifier::of({"g", "h"}), {}), CompileError);
    try {
        substQual(t, "f", Qualifier::of({"g", "h"}), {});
    } catch (const CompileError& e) {
        CHECK(e.diagnostic().code == Code::E_SUBST_PATH);
    }
    // without a path the qualifier is simply replaced
    auto q = withQual(mkBase("File"), Qualifier::of({"f"}));
    CHECK(substQual(q, "f", Qualifier::of({"g", "h"}), {})->qual == Qualifier::of({"g", "h"}));
}

TEST_CASE("Dual reduces by cases") {
    auto ctx = preludeContext();
    auto sendEnd = mkBase("Send", {stringType(), mkBase("End")});
    CHECK(typeToString(normalize(dual(sendEnd), ctx)) == "Recv[String, End]");
    CHECK(typeToString(normalize(dual(mkBase("End")), ctx)) == "End");
    auto rec = mkBase("Rec", {mkBase("Recv", {intType(), mkBase("Var", {mkNat(0)})})});
    CHECK(structurallyEqual(normalize(dual(dual(rec)), ctx), rec));
    auto sel = mkBase("Select", {sendEnd, mkBase("End")});
    CHECK(typeToString(normalize(dual(sel), ctx)) == "Branch[Recv[String, End], End]");
}

TEST_CASE("Dual on a rigid variable stays put") {
    auto ctx = preludeContext();
    auto stuck = dual(mkTypeVar("P"));
    CHECK(structurallyEqual(normalize(stuck, ctx), stuck));
    // a rigid variable named like the case's pattern variable is not captured
    auto t = normalize(dual(mkBase("Send", {mkTypeVar("P"), mkBase("End")})), ctx);
    CHECK(typeToString(t) == "Recv[P, End]");
    auto u = normalize(dual(mkBase("Send", {mkTypeVar("T"), mkTypeVar("T")})), ctx);
    CHECK(typeToString(u) == "Recv[T, Dual[T]]");
}

TEST_CASE("normalize is idempotent and agrees with a shared cache") {
    auto ctx = preludeContext();
    NormalCache cache;
    for (const auto& p : captest::sessionTerms(3)) {
        auto once = normalize(dual(p), ctx);
        CHECK(structurallyEqual(normalize(once, ctx), once));
        CHECK(structurallyEqual(normalize(dual(p), ctx, {}, &cache), once));
    }
}

TEST_CASE("session term enumeration counts") {
    CHECK(captest::sessionTerms(1).size() == 3);
    CHECK(captest::sessionTerms(2).size() == 30);
    CHECK(captest::sessionTerms(3).size() == 1893);
}

TEST_CASE("path-member types compare by canonical prefix") {
    auto ctx = preludeContext();
    auto f1 = mkPathMember(Path{"f1", {}}, "IsClosed");
    auto f2 = mkPathMember(Path{"f2", {}}, "IsClosed");
    CHECK_FALSE(typeEqual(f1, f2, ctx));
    CHECK(typeEqual(f1, mkPathMember(Path{"f1", {}}, "IsClosed"), ctx));
    CHECK_FALSE(typeEqual(f1, mkPathMember(Path{"f1", {}}, "IsOpen"), ctx));
    ctx.aliases["f2"] = Path{"f1", {}};
    CHECK(typeEqual(f1, f2, ctx));
}

TEST_CASE("implicit resolution") {
    auto ctx = preludeContext();
    auto closed = [](const char* f) { return mkPathMember(Path{f, {}}, "IsClosed"); };
    auto resolve = [&](std::vector<typer::Candidate> cs, bool compat) {
        typer::ResolveMode mode;
        mode.scalaCompat = compat;
        Unifier u(ctx);
        return typer::resolveImplicit(closed("f"), cs, mode, u);
    };
    SUBCASE("none") {
        auto r = resolve({{"c", closed("g"), 1, false}}, false);
        CHECK(r.status == typer::ResolveStatus::None);
    }
    SUBCASE("innermost wins") {
        auto r = resolve({{"outer", closed("f"), 1, false}, {"inner", closed("f"), 2, false}}, false);
        CHECK(r.status == typer::ResolveStatus::Found);
        CHECK(r.name == "inner");
    }
    SUBCASE("same depth is ambiguous") {
        auto r = resolve({{"b", closed("f"), 1, false}, {"a", closed("f"), 1, false}}, false);
        CHECK(r.status == typer::ResolveStatus::Ambiguous);
        CHECK(r.ambiguous == std::vector<std::string>{"a", "b"});
    }
    SUBCASE("killed candidates are filtered by default, kept in compat mode") {
        std::vector<typer::Candidate> cs = {{"dead", closed("f"), 1, true}, {"live", closed("f"), 1, false}};
        auto r = resolve(cs, false);
        CHECK(r.status == typer::ResolveStatus::Found);
        CHECK(r.name == "live");
        CHECK(resolve(cs, true).status == typer::ResolveStatus::Ambiguous);
    }
    SUBCASE("only killed matches") {
        auto r = resolve({{"dead", closed("f"), 1, true}}, false);
        CHECK(r.status == typer::ResolveStatus::FoundKilled);
        CHECK(r.name == "dead");
    }
}
