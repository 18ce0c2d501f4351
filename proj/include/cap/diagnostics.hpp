#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cap {

/// 1-based, inclusive-start source range. `file` may be empty for synthesized nodes.
struct SourceSpan {
    std::string file;
    int startLine = 1;
    int startCol = 1;
    int endLine = 1;
    int endCol = 1;

    static SourceSpan cover(const SourceSpan& a, const SourceSpan& b);
    bool contains(const SourceSpan& inner) const;
    bool operator==(const SourceSpan&) const = default;
};

bool spanBefore(const SourceSpan& a, const SourceSpan& b);

enum class Code {
    E_PARSE,
    E_DESUGAR,
    E_UNKNOWN_METHOD,
    E_UNBOUND,
    E_TYPE_MISMATCH,
    E_PATH_MISMATCH,
    E_NO_IMPLICIT,
    E_AMBIGUOUS_IMPLICIT,
    E_KILLED_USE,
    E_KILL_UNDECLARED,
    E_ESCAPE,
    E_SUBQUAL,
    E_SUBST_PATH,
    E_UNRESOLVED_TYPEPARAM,
    E_BOUND,
    E_TYPEFUN_STUCK,
};

std::string_view codeName(Code c);
std::optional<Code> codeFromName(std::string_view name);
const std::vector<Code>& allCodes();

struct RelatedNote {
    SourceSpan span;
    std::string note;
};

struct Diagnostic {
    Code code;
    SourceSpan span;
    std::string message;
    std::vector<RelatedNote> related;
};

/// Thrown by every phase; carries exactly one root-cause diagnostic.
class CompileError : public std::runtime_error {
public:
    explicit CompileError(Diagnostic d);
    const Diagnostic& diagnostic() const { return diag_; }

private:
    Diagnostic diag_;
};

[[noreturn]] void fail(Code code, const SourceSpan& span, std::string message,
                       std::vector<RelatedNote> related = {});

enum class RenderMode { Human, Json };

/// Source text per file name, used for the human-mode excerpt.
using SourceFiles = std::map<std::string, std::string>;

struct RenderOptions {
    RenderMode mode = RenderMode::Human;
    bool color = false;
    bool explain = false;  // print related notes as a witness chain
};

std::string render(const Diagnostic& d, const RenderOptions& opts, const SourceFiles* sources = nullptr);

void sortDiagnostics(std::vector<Diagnostic>& diags);

}  // namespace cap
