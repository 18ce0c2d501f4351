#include <cctype>
#include <cstdio>
#include <unordered_map>

#include "cap/syntax.hpp"

namespace cap::syntax {

std::string_view tokName(Tok t) {
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::KwClass: return "'class'";
    case Tok::KwTrait: return "'trait'";
    case Tok::KwExtends: return "'extends'";
    case Tok::KwType: return "'type'";
    case Tok::KwTypefun: return "'typefun'";
    case Tok::KwMatch: return "'match'";
    case Tok::KwCase: return "'case'";
    case Tok::KwDef: return "'def'";
    case Tok::KwExtern: return "'extern'";
    case Tok::KwExtension: return "'extension'";
    case Tok::KwVal: return "'val'";
    case Tok::KwImplicit: return "'implicit'";
    case Tok::KwUsing: return "'using'";
    case Tok::KwSummon: return "'summon'";
    case Tok::KwNew: return "'new'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Eq: return "'='";
    case Tok::Hat: return "'^'";
    case Tok::At: return "'@'";
    case Tok::Hash: return "'#'";
    case Tok::Subtype: return "'<:'";
    case Tok::Cons: return "'::'";
    case Tok::Arrow: return "'=>'";
    case Tok::ImpArrow: return "'?=>'";
    case Tok::KillArrow: return "'=!>'";
    case Tok::QKillArrow: return "'?=!>'";
    case Tok::TransArrow: return "'?=!>?'";
    case Tok::SigmaArrow: return "'?<='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Bang: return "'!'";
    case Tok::Eof: return "end of input";
    }
    return "?";
}

namespace {

const std::unordered_map<std::string, Tok>& keywords() {
    static const std::unordered_map<std::string, Tok> kw = {
        {"class", Tok::KwClass},     {"trait", Tok::KwTrait},       {"extends", Tok::KwExtends},
        {"type", Tok::KwType},       {"typefun", Tok::KwTypefun},   {"match", Tok::KwMatch},
        {"case", Tok::KwCase},       {"def", Tok::KwDef},           {"extern", Tok::KwExtern},
        {"extension", Tok::KwExtension}, {"val", Tok::KwVal},       {"implicit", Tok::KwImplicit},
        {"using", Tok::KwUsing},     {"summon", Tok::KwSummon},     {"new", Tok::KwNew},
        {"if", Tok::KwIf},           {"else", Tok::KwElse},         {"true", Tok::KwTrue},
        {"false", Tok::KwFalse},
    };
    return kw;
}

// Longest match first.
const std::vector<std::pair<std::string_view, Tok>>& operators() {
    static const std::vector<std::pair<std::string_view, Tok>> ops = {
        {"?=!>?", Tok::TransArrow}, {"?=!>", Tok::QKillArrow}, {"?=>", Tok::ImpArrow}, {"?<=", Tok::SigmaArrow},
        {"=!>", Tok::KillArrow},    {"=>", Tok::Arrow},        {"==", Tok::EqEq},      {"!=", Tok::NotEq},
        {"<:", Tok::Subtype},       {"<=", Tok::Le},           {">=", Tok::Ge},        {"::", Tok::Cons},
        {"&&", Tok::AndAnd},        {"||", Tok::OrOr},         {"(", Tok::LParen},     {")", Tok::RParen},
        {"[", Tok::LBracket},       {"]", Tok::RBracket},      {"{", Tok::LBrace},     {"}", Tok::RBrace},
        {",", Tok::Comma},          {";", Tok::Semi},          {":", Tok::Colon},      {".", Tok::Dot},
        {"=", Tok::Eq},             {"^", Tok::Hat},           {"@", Tok::At},         {"#", Tok::Hash},
        {"+", Tok::Plus},           {"-", Tok::Minus},         {"*", Tok::Star},       {"/", Tok::Slash},
        {"%", Tok::Percent},        {"<", Tok::Lt},            {">", Tok::Gt},         {"!", Tok::Bang},
    };
    return ops;
}

class Lexer {
public:
    Lexer(const std::string& src, const std::string& file) : src_(src), file_(file) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        bool newline = true;
        while (true) {
            newline = skipTrivia() || newline;
            if (pos_ >= src_.size()) break;
            Token t = next();
            t.newlineBefore = newline;
            newline = false;
            out.push_back(std::move(t));
        }
        Token eof{Tok::Eof, "", spanHere(0), true};
        out.push_back(eof);
        return out;
    }

private:
    const std::string& src_;
    std::string file_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    char peek(size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    SourceSpan spanHere(int width) const { return SourceSpan{file_, line_, col_, line_, col_ + width}; }

    // Returns true when a newline was crossed.
    bool skipTrivia() {
        bool nl = false;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                nl = true;
                advance();
            } else if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
        return nl;
    }

    Token next() {
        int startLine = line_, startCol = col_;
        auto finish = [&](Tok k, std::string text) {
            return Token{k, std::move(text), SourceSpan{file_, startLine, startCol, line_, col_}, false};
        };
        unsigned char c = static_cast<unsigned char>(src_[pos_]);
        if (std::isalpha(c) || c == '_') {
            std::string id;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
                id += peek();
                advance();
            }
            auto it = keywords().find(id);
            return finish(it != keywords().end() ? it->second : Tok::Ident, id);
        }
        if (std::isdigit(c)) {
            std::string num;
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                num += peek();
                advance();
            }
            return finish(Tok::Int, num);
        }
        if (c == '"') return stringLit(startLine, startCol);
        for (const auto& [text, kind] : operators()) {
            if (src_.compare(pos_, text.size(), text) == 0) {
                for (size_t i = 0; i < text.size(); ++i) advance();
                return finish(kind, std::string(text));
            }
        }
        std::string shown;
        if (c < 0x20 || c == 0x7f) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%02x", c);
            shown = buf;
        } else {
            shown = std::string(1, static_cast<char>(c));
        }
        fail(Code::E_PARSE, spanHere(1), "illegal character '" + shown + "'");
    }

    Token stringLit(int startLine, int startCol) {
        advance();
        std::string value;
        while (true) {
            if (pos_ >= src_.size() || peek() == '\n')
                fail(Code::E_PARSE, SourceSpan{file_, startLine, startCol, line_, col_}, "unterminated string literal");
            char c = peek();
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                char e = peek();
                switch (e) {
                case 'n': value += '\n'; break;
                case 't': value += '\t'; break;
                case '"': value += '"'; break;
                case '\\': value += '\\'; break;
                default: fail(Code::E_PARSE, spanHere(1), std::string("unknown escape '\\") + e + "'");
                }
                advance();
                continue;
            }
            value += c;
            advance();
        }
        return Token{Tok::String, value, SourceSpan{file_, startLine, startCol, line_, col_}, false};
    }
};

}  // namespace

std::vector<Token> tokenize(const std::string& source, const std::string& file) {
    return Lexer(source, file).run();
}

}  // namespace cap::syntax
