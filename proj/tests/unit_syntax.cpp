#include <doctest.h>

#include "cap/driver.hpp"
#include "cap/syntax.hpp"

using namespace cap;

namespace {

std::vector<Code> codesOf(const std::string& src) {
    auto c = driver::compile("t.cap", src);
    std::vector<Code> out;
    for (const auto& d : c.diagnostics) out.push_back(d.code);
    return out;
}

}  // namespace

TEST_CASE("lexer splits arrows greedily") {
    auto toks = syntax::tokenize("a =!> b ?=!>? c ?<= d ?=> e :: f <: g", "t.cap");
    std::vector<syntax::Tok> kinds;
    for (const auto& t : toks) kinds.push_back(t.kind);
    using syntax::Tok;
    std::vector<Tok> want = {Tok::Ident, Tok::KillArrow,  Tok::Ident, Tok::TransArrow, Tok::Ident,
                             Tok::SigmaArrow, Tok::Ident, Tok::ImpArrow, Tok::Ident,   Tok::Cons,
                             Tok::Ident, Tok::Subtype,    Tok::Ident, Tok::Eof};
    CHECK(kinds == want);
}

TEST_CASE("lexer tracks positions and newlines") {
    auto toks = syntax::tokenize("val x = 1\n  val y = \"s\"", "t.cap");
    REQUIRE(toks.size() >= 9);
    CHECK(toks[4].text == "val");
    CHECK(toks[4].span.startLine == 2);
    CHECK(toks[4].span.startCol == 3);
    CHECK(toks[4].newlineBefore);
    CHECK(toks[7].kind == syntax::Tok::String);
    CHECK(toks[7].text == "s");
}

TEST_CASE("unterminated string is a parse error") {
    CHECK(codesOf("def main(): Unit = println(\"abc)\n") == std::vector<Code>{Code::E_PARSE});
}

TEST_CASE("parse errors carry the offending position") {
    auto c = driver::compile("t.cap", "def main(): Unit = {\n  val = 3\n}\n");
    REQUIRE(c.diagnostics.size() == 1);
    CHECK(c.diagnostics[0].code == Code::E_PARSE);
    CHECK(c.diagnostics[0].span.startLine == 2);
}

TEST_CASE("printer round-trips a program") {
    const char* src =
        "class Box[T]\n"
        "def twice(f: Int => Int)(x: Int): Int = f(f(x))\n"
        "def main(): Unit = println(intToString(twice(y => y + 1)(40)))\n";
    auto once = syntax::printProgram(syntax::parseSource(src, "t.cap"));
    auto again = syntax::printProgram(syntax::parseSource(once, "t.cap"));
    CHECK(once == again);
}

TEST_CASE("type syntax covers qualifiers, kills and refinements") {
    for (const char* t : {"File^", "File^{x, y}", "(f: File) =!> Unit", "A ?=!>? B", "B ?<= A", "f.IsOpen",
                          "Table#Row", "x.type", "Sigma { type A = File; type B = a.IsOpen^ }",
                          "Unit @kill(f, FUN)", "(Int, String)", "=> Int"}) {
        CAPTURE(t);
        auto parsed = syntax::parseTypeText(t);
        REQUIRE(parsed);
        CHECK(syntax::printType(syntax::parseTypeText(syntax::printType(parsed))) == syntax::printType(parsed));
    }
}

TEST_CASE("method calls are rewritten to the first-parameter function") {
    auto c = driver::compile("t.cap",
                             "def bump(x: Int, by: Int): Int = x + by\n"
                             "def main(): Unit = println(intToString(1.bump(2)))\n");
    CHECK(c.ok());
    CHECK(desugar::dump(c.program).find("bump(1, 2)") != std::string::npos);
}

TEST_CASE("unknown method") {
    CHECK(codesOf("def main(): Unit = {\n  val n = 3\n  n.frobnicate()\n}\n") ==
          std::vector<Code>{Code::E_UNKNOWN_METHOD});
}

TEST_CASE("unbound name") {
    CHECK(codesOf("def main(): Unit = println(nothere)\n") == std::vector<Code>{Code::E_UNBOUND});
}

TEST_CASE("transition arrows expand to a dependent kill arrow") {
    auto c = driver::compile("t.cap", "");
    auto t = desugar::expandArrows(syntax::parseTypeText("(f: File) => f.IsClosed ?=!>? f.IsOpen"), c.program);
    std::string s = typeToString(t);
    CHECK(s.find("f.IsClosed") != std::string::npos);
    CHECK(s.find("f.IsOpen") != std::string::npos);
    CHECK(s.find("?=>") != std::string::npos);
    CHECK(s.find("@kill(") != std::string::npos);
}
