#include "cap/diagnostics.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace cap {

SourceSpan SourceSpan::cover(const SourceSpan& a, const SourceSpan& b) {
    SourceSpan s = a;
    if (std::tie(b.startLine, b.startCol) < std::tie(s.startLine, s.startCol)) {
        s.startLine = b.startLine;
        s.startCol = b.startCol;
    }
    if (std::tie(b.endLine, b.endCol) > std::tie(s.endLine, s.endCol)) {
        s.endLine = b.endLine;
        s.endCol = b.endCol;
    }
    return s;
}

bool SourceSpan::contains(const SourceSpan& inner) const {
    return std::tie(startLine, startCol) <= std::tie(inner.startLine, inner.startCol) &&
           std::tie(inner.endLine, inner.endCol) <= std::tie(endLine, endCol);
}

bool spanBefore(const SourceSpan& a, const SourceSpan& b) {
    return std::tie(a.file, a.startLine, a.startCol, a.endLine, a.endCol) <
           std::tie(b.file, b.startLine, b.startCol, b.endLine, b.endCol);
}

namespace {

struct CodeEntry {
    Code code;
    std::string_view name;
};

constexpr CodeEntry kCodes[] = {
    {Code::E_PARSE, "E_PARSE"},
    {Code::E_DESUGAR, "E_DESUGAR"},
    {Code::E_UNKNOWN_METHOD, "E_UNKNOWN_METHOD"},
    {Code::E_UNBOUND, "E_UNBOUND"},
    {Code::E_TYPE_MISMATCH, "E_TYPE_MISMATCH"},
    {Code::E_PATH_MISMATCH, "E_PATH_MISMATCH"},
    {Code::E_NO_IMPLICIT, "E_NO_IMPLICIT"},
    {Code::E_AMBIGUOUS_IMPLICIT, "E_AMBIGUOUS_IMPLICIT"},
    {Code::E_KILLED_USE, "E_KILLED_USE"},
    {Code::E_KILL_UNDECLARED, "E_KILL_UNDECLARED"},
    {Code::E_ESCAPE, "E_ESCAPE"},
    {Code::E_SUBQUAL, "E_SUBQUAL"},
    {Code::E_SUBST_PATH, "E_SUBST_PATH"},
    {Code::E_UNRESOLVED_TYPEPARAM, "E_UNRESOLVED_TYPEPARAM"},
    {Code::E_BOUND, "E_BOUND"},
    {Code::E_TYPEFUN_STUCK, "E_TYPEFUN_STUCK"},
};

}  // namespace

std::string_view codeName(Code c) {
    for (const auto& e : kCodes)
        if (e.code == c) return e.name;
    return "E_UNKNOWN";
}

std::optional<Code> codeFromName(std::string_view name) {
    for (const auto& e : kCodes)
        if (e.name == name) return e.code;
    return std::nullopt;
}

const std::vector<Code>& allCodes() {
    static const std::vector<Code> codes = [] {
        std::vector<Code> v;
        for (const auto& e : kCodes) v.push_back(e.code);
        return v;
    }();
    return codes;
}

CompileError::CompileError(Diagnostic d)
    : std::runtime_error(std::string(codeName(d.code)) + ": " + d.message), diag_(std::move(d)) {}

void fail(Code code, const SourceSpan& span, std::string message, std::vector<RelatedNote> related) {
    throw CompileError(Diagnostic{code, span, std::move(message), std::move(related)});
}

namespace {

std::string sourceLine(const std::string& text, int line) {
    std::istringstream in(text);
    std::string l;
    for (int i = 1; std::getline(in, l); ++i) {
        if (i == line) {
            if (!l.empty() && l.back() == '\r') l.pop_back();
            return l;
        }
    }
    return {};
}

std::string location(const SourceSpan& s) {
    std::ostringstream os;
    os << (s.file.empty() ? "<input>" : s.file) << ":" << s.startLine << ":" << s.startCol;
    return os.str();
}

}  // namespace

std::string render(const Diagnostic& d, const RenderOptions& opts, const SourceFiles* sources) {
    if (opts.mode == RenderMode::Json) {
        nlohmann::ordered_json j;
        j["code"] = codeName(d.code);
        j["file"] = d.span.file;
        j["startLine"] = d.span.startLine;
        j["startCol"] = d.span.startCol;
        j["endLine"] = d.span.endLine;
        j["endCol"] = d.span.endCol;
        j["message"] = d.message;
        if (opts.explain && !d.related.empty()) {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& r : d.related)
                arr.push_back({{"startLine", r.span.startLine}, {"startCol", r.span.startCol}, {"note", r.note}});
            j["related"] = arr;
        }
        return j.dump();
    }

    const char* red = opts.color ? "\x1b[31m" : "";
    const char* bold = opts.color ? "\x1b[1m" : "";
    const char* reset = opts.color ? "\x1b[0m" : "";

    std::ostringstream os;
    os << bold << location(d.span) << ": " << red << "error[" << codeName(d.code) << "]" << reset << bold << ": "
       << d.message << reset << "\n";
    if (sources) {
        auto it = sources->find(d.span.file);
        if (it != sources->end()) {
            std::string line = sourceLine(it->second, d.span.startLine);
            std::string num = std::to_string(d.span.startLine);
            os << " " << num << " | " << line << "\n";
            int width = d.span.endLine == d.span.startLine ? std::max(1, d.span.endCol - d.span.startCol) : 1;
            os << " " << std::string(num.size(), ' ') << " | " << std::string(std::max(0, d.span.startCol - 1), ' ')
               << red << std::string(width, '^') << reset << "\n";
        }
    }
    if (!d.related.empty()) {
        os << "notes:\n";
        for (const auto& r : d.related) os << "  " << location(r.span) << ": " << r.note << "\n";
    }
    return os.str();
}

void sortDiagnostics(std::vector<Diagnostic>& diags) {
    std::stable_sort(diags.begin(), diags.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return spanBefore(a.span, b.span); });
}

}  // namespace cap
