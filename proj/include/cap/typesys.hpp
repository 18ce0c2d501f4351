#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cap/diagnostics.hpp"
#include "cap/kernel.hpp"

namespace cap {

struct TypeParamSig {
    std::string name;
    std::string qualVar;  // `[T^q]`; empty when absent
    TypeRef bound;        // nullptr when unbounded
    int arity = 0;        // number of parameters of a higher-kinded member such as `Elems[T]`
    std::vector<TypeRef> paramBounds;
};

struct TypeMemberSig {
    std::string name;
    std::vector<TypeParamSig> params;
    bool opaque = true;
};

struct ClassSig {
    std::string name;
    bool isTrait = false;
    std::vector<TypeParamSig> typeParams;
    std::vector<std::string> parents;
    std::vector<TypeMemberSig> members;
    std::vector<std::string> nested;  // nested class names
    std::string owner;                // enclosing class for nested classes
    std::optional<std::string> externTag;
    SourceSpan span;
};

struct TypeFunCase {
    TypeRef pattern;  // constructor head applied to distinct pattern variables (TypeVar)
    TypeRef rhs;
    SourceSpan span;
};

struct TypeFunDef {
    std::string name;
    std::string param;
    TypeRef bound;
    std::vector<TypeFunCase> cases;
    SourceSpan span;
};

class ClassTable {
public:
    std::map<std::string, ClassSig> classes;
    std::map<std::string, TypeFunDef> typefuns;

    const ClassSig* find(const std::string& name) const;
    /// Type member lookup through parents.
    const TypeMemberSig* member(const std::string& cls, const std::string& name) const;
    /// Reflexive-transitive nominal subclassing.
    bool isSubclass(const std::string& sub, const std::string& super) const;
    /// Checks typefun declarations: constructor-headed, non-overlapping, structurally decreasing.
    void checkTypeFun(const TypeFunDef& def) const;
};

/// Qualifiers attached to every binding ever introduced; binding names are unique per definition so
/// entries are never removed (saturating an out-of-scope killed name still works).
struct QualEnv {
    std::unordered_map<std::string, Qualifier> quals;
    const Qualifier* find(const std::string& name) const {
        auto it = quals.find(name);
        return it == quals.end() ? nullptr : &it->second;
    }
};

enum class Origin { User, Anf };

struct Binding {
    std::string name;
    TypeRef type;
    Qualifier qual;  // binding qualifier: what the initializer reached
    bool implicit = false;
    Origin origin = Origin::User;
    int depth = 0;
    SourceSpan span;
    bool isParam = false;
    bool isLocalDef = false;
    std::vector<std::string> generics;  // type parameters of a local def
};

class TypingContext {
public:
    const ClassTable* classes = nullptr;
    QualEnv env;
    std::map<std::string, Path> aliases;  // singleton ascriptions: x ↦ canonical path

    int depth() const { return static_cast<int>(scopes_.size()); }
    void push() { scopes_.emplace_back(); }
    void popTo(int d) {
        while (depth() > d) scopes_.pop_back();
    }
    Binding& bind(Binding b);
    const Binding* lookup(const std::string& name) const;
    const std::vector<std::vector<Binding>>& scopes() const { return scopes_; }

    Path canonical(const Path& p) const;
    /// User-facing rendering of a canonical path (reverse alias lookup, `~N` suffixes dropped).
    std::string displayPath(const Path& p) const;
    PathNamer namer() const;

private:
    std::vector<std::vector<Binding>> scopes_;
};

/// Strips the `~N` alpha-renaming suffix.
std::string displayName(const std::string& name);
std::string typeText(const TypeRef& t, const TypingContext& ctx);

Qualifier saturate(const Qualifier& q, const QualEnv& env);
Qualifier saturate(const Qualifier& q, const TypingContext& ctx);
bool subqual(const Qualifier& q1, const Qualifier& q2, const QualEnv& env);
bool subqual(const Qualifier& q1, const Qualifier& q2, const TypingContext& ctx);

/// Substitutes the value binder by the qualifier `q` in qualifiers, kill sets and path prefixes.
/// Paths need a single variable: `q` with more than one variable yields E_SUBST_PATH.
TypeRef substQual(const TypeRef& t, const std::string& binder, const Qualifier& q, const SourceSpan& span,
                  const TypingContext* ctx = nullptr);

/// Canonical form: aliases resolved, type functions reduced, naturals in successor form.
/// Applications on type variables or metas stay unreduced.
/// Memo shared by several normalize calls: nodes known to be normal and type-function reductions
/// keyed by the (normal) argument node. Only valid while the context's aliases and classes are fixed.
struct NormalCache {
    struct PtrHash {
        size_t operator()(const TypeRef& t) const { return std::hash<const Type*>()(t.get()); }
    };
    std::unordered_set<TypeRef, PtrHash> normal;
    std::unordered_map<std::string, std::unordered_map<TypeRef, TypeRef, PtrHash>> reduced;
    size_t limit = 1 << 20;  // entries kept before the memo starts over

    size_t size() const;
    void clear() {
        normal.clear();
        reduced.clear();
    }
};

TypeRef normalize(const TypeRef& t, const TypingContext& ctx, const SourceSpan& span = {},
                  NormalCache* cache = nullptr);
TypeRef reduceTypeFun(const TypeFunDef& def, const TypeRef& arg, const ClassTable& classes, const SourceSpan& span);

bool typeEqual(const TypeRef& a, const TypeRef& b, const TypingContext& ctx);

/// typeEqual plus nominal subclassing, path classes conforming to projections, and kill ⊆.
bool conforms(const TypeRef& sub, const TypeRef& super, const TypingContext& ctx);

/// Class name of a value type: `File`, `Row` for `t.Row`/`Table#Row`; empty for non-class types.
std::string classOf(const TypeRef& t, const ClassTable& classes);

/// First-order unification of type and qualifier metas (names starting with '?').
class Unifier {
public:
    explicit Unifier(const TypingContext& ctx) : ctx_(ctx) {}

    TypeSubst subst;

    /// Unifies `actual` against `expected`; qualifiers are ignored except qualifier metas are solved
    /// when `solveQuals` is set.
    bool unify(const TypeRef& expected, const TypeRef& actual, bool solveQuals = true);
    bool unifyQual(const Qualifier& expected, const Qualifier& actual);
    TypeRef apply(const TypeRef& t) const;
    Qualifier apply(const Qualifier& q) const;
    bool solved(const std::string& meta) const;

    /// Set when a qualifier meta would capture one of these names (binders out of the meta's scope).
    std::vector<std::string> forbidden;
    bool checkKills = false;
    std::string captured;

private:
    const TypingContext& ctx_;
    bool unifyRec(const TypeRef& e, const TypeRef& a, bool solveQuals, std::map<std::string, std::string>& binders);
    bool bindQual(const std::string& meta, const Qualifier& q);
};

}  // namespace cap
