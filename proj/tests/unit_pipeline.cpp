#include <doctest.h>
#include <json.hpp>

#include "cap/corpus.hpp"
#include "cap/driver.hpp"
#include "cap/effects.hpp"
#include "cap/interp.hpp"

using namespace cap;

namespace {

driver::Compilation compileText(const std::string& src, bool noEffects = false) {
    driver::Options o;
    o.noEffectCheck = noEffects;
    return driver::compile("t.cap", src, o);
}

std::vector<std::pair<Code, int>> codes(const driver::Compilation& c) {
    std::vector<std::pair<Code, int>> out;
    for (const auto& d : c.diagnostics) out.emplace_back(d.code, d.span.startLine);
    return out;
}

const char* kStale =
    "def main(): Unit = {\n"
    "  val fNew = newFile(\"a.txt\")\n"
    "  val fOpen = open(fNew)\n"
    "  val fClosed = close(fOpen)\n"
    "  write(fOpen, \"Hello\")\n"
    "}\n";

}  // namespace

TEST_CASE("write after close is a killed use with the kill site as witness") {
    auto c = compileText(kStale);
    REQUIRE(codes(c) == std::vector<std::pair<Code, int>>{{Code::E_KILLED_USE, 5}});
    const auto& d = c.diagnostics[0];
    REQUIRE_FALSE(d.related.empty());
    bool killSite = false;
    for (const auto& r : d.related) killSite = killSite || r.span.startLine == 4;
    CHECK(killSite);
}

TEST_CASE("the same program without effect checking trips the runtime guard") {
    auto c = compileText(kStale, true);
    REQUIRE(c.ok());
    auto r = interp::run(c.anf);
    CHECK(r.guardEvents() > 0);
    REQUIRE(r.error);
    CHECK(r.error->code == "R_GUARD");
    CHECK(r.error->span.startLine == 5);
}

TEST_CASE("naive API passes the checker and fails at run time") {
    auto c = driver::compile(CAP_CORPUS_DIR "/naive_stale.cap",
                             driver::readFile(CAP_CORPUS_DIR "/naive_stale.cap"));
    REQUIRE(c.ok());
    auto r = interp::run(c.anf, {}, "staleWrite");
    REQUIRE(r.error);
    CHECK(r.error->code == "R_GUARD");
}

TEST_CASE("a task waiting on a message nobody sends deadlocks") {
    auto c = compileText(
        "type Proto = Send[Int, End]\n"
        "def main(): Unit = {\n"
        "  val (a, b) = Chan[Proto]()\n"
        "  val n = b.recv()\n"
        "  a.send(n)\n"
        "  a.close()\n"
        "  b.close()\n"
        "}\n");
    REQUIRE(c.ok());
    auto r = interp::run(c.anf);
    REQUIRE(r.error);
    CHECK(r.error->code == "R_DEADLOCK");
    CHECK(r.error->span.startLine == 4);
}

TEST_CASE("the step limit stops runaway recursion") {
    auto c = compileText("def loop(n: Int): Int = loop(n + 1)\ndef main(): Unit = println(intToString(loop(0)))\n");
    REQUIRE(c.ok());
    interp::Options io;
    io.stepLimit = 1000;
    auto r = interp::run(c.anf, io);
    REQUIRE(r.error);
    CHECK(r.error->code == "R_DEADLOCK");
}

TEST_CASE("readLine answers come from the input script") {
    auto c = compileText("def main(): Unit = {\n  println(readLine())\n  println(readLine())\n}\n");
    REQUIRE(c.ok());
    std::ostringstream out;
    interp::Options io;
    io.input = {"one", "two"};
    io.out = &out;
    auto r = interp::run(c.anf, io);
    CHECK_FALSE(r.error);
    CHECK(out.str() == "one\ntwo\n");
}

TEST_CASE("trace digest is FNV-1a 64 of the JSONL trace") {
    CHECK(interp::fnv1a64Hex("") == "cbf29ce484222325");
    CHECK(interp::fnv1a64Hex("a") == "af63dc4c8601ec8c");
    CHECK(interp::fnv1a64Hex("foobar") == "85944171f73967e8");
    auto c = compileText("def main(): Unit = println(\"hi\")\n");
    auto r = interp::run(c.anf);
    CHECK(r.digest() == interp::fnv1a64Hex(r.traceJsonl()));
    CHECK(r.digest() == interp::run(c.anf).digest());
    for (std::size_t at = 0, next; at < r.traceJsonl().size(); at = next + 1) {
        next = r.traceJsonl().find('\n', at);
        REQUIRE(next != std::string::npos);
        auto line = nlohmann::json::parse(r.traceJsonl().substr(at, next - at));
        CHECK(line.contains("event"));
    }
}

TEST_CASE("latent kill of an arrow") {
    auto fn = mkFun("f", mkBase("File"), unitType(), false, KillSet{{"f"}, false});
    CHECK(effects::latentKill(fn, Qualifier{}, Qualifier::of({"h"})) == std::set<std::string>{"h"});
    auto self = mkFun("x", intType(), unitType(), false, KillSet{{}, true});
    CHECK(effects::latentKill(self, Qualifier::of({"g"}), Qualifier{}) == std::set<std::string>{"g"});
}

TEST_CASE("killed witness through an alias") {
    QualEnv env;
    env.quals["f"] = Qualifier::freshOnly();
    env.quals["g"] = Qualifier::of({"f"});
    CHECK(effects::killedWitness("g", {"f"}, env) == "f");
    env.quals["h"] = Qualifier::freshOnly();
    // killing an alias kills what it shares
    CHECK(effects::killedWitness("f", {"g"}, env) == "g");
    CHECK(effects::killedWitness("h", {"g"}, env).empty());
    CHECK(effects::reachPath("g", "f", env) == std::vector<std::string>{"g", "f"});
}

TEST_CASE("json diagnostics") {
    Diagnostic d{Code::E_KILLED_USE, SourceSpan{"a.cap", 3, 5, 3, 9}, "found using killed var f",
                 {{SourceSpan{"a.cap", 2, 1, 2, 4}, "killed here"}}};
    RenderOptions o;
    o.mode = RenderMode::Json;
    auto j = nlohmann::json::parse(render(d, o));
    CHECK(j["code"] == "E_KILLED_USE");
    CHECK(j["file"] == "a.cap");
    CHECK(j["startLine"] == 3);
    CHECK(j["endCol"] == 9);
    CHECK_FALSE(j.contains("related"));
    o.explain = true;
    j = nlohmann::json::parse(render(d, o));
    REQUIRE(j["related"].size() == 1);
    CHECK(j["related"][0]["startLine"] == 2);
}

TEST_CASE("human diagnostics show the source line") {
    Diagnostic d{Code::E_UNBOUND, SourceSpan{"a.cap", 2, 3, 2, 6}, "unknown name zzz", {}};
    SourceFiles src{{"a.cap", "line one\n  zzz\n"}};
    auto text = render(d, RenderOptions{}, &src);
    CHECK(text.find("a.cap:2:3: error[E_UNBOUND]: unknown name zzz") == 0);
    CHECK(text.find("  zzz") != std::string::npos);
    CHECK(text.find("^^^") != std::string::npos);
}

TEST_CASE("code names round-trip") {
    for (Code c : allCodes()) CHECK(codeFromName(codeName(c)) == c);
    CHECK_FALSE(codeFromName("E_NOPE"));
}

TEST_CASE("expect files") {
    auto ex = corpus::parseExpect("# comment\nE_KILLED_USE 6\nE_ESCAPE 9 # trailing\n");
    CHECK(ex.negative());
    CHECK(ex.errors == std::vector<std::pair<Code, int>>{{Code::E_KILLED_USE, 6}, {Code::E_ESCAPE, 9}});
    auto pos = corpus::parseExpect("input a # b\ndigest 0123456789abcdef\noption scala-compat\n");
    CHECK_FALSE(pos.negative());
    CHECK(pos.input == std::vector<std::string>{"a # b"});
    CHECK(pos.digest == "0123456789abcdef");
    CHECK(pos.scalaCompat);
    CHECK_THROWS(corpus::parseExpect("E_KILLED_USE\n"));
    CHECK_THROWS(corpus::parseExpect("frobnicate 3\n"));
}

TEST_CASE("one diagnostic per failing definition, sorted by position") {
    auto c = compileText(
        "def a(): Int = \"no\"\n"
        "def b(): Unit = {\n  val x = nothere\n  val y = alsoMissing\n}\n");
    CHECK(codes(c) == std::vector<std::pair<Code, int>>{{Code::E_TYPE_MISMATCH, 1}, {Code::E_UNBOUND, 3}});
}
