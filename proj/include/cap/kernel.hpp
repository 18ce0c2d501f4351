#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace cap {

/// A variable followed by zero or more field selections, e.g. `$sigma_0.a` or `f`.
struct Path {
    std::string root;
    std::vector<std::string> fields;

    std::string str() const;
    bool operator==(const Path&) const = default;
    auto operator<=>(const Path&) const = default;
};

/// Reachability qualifier: a set of variable names plus the freshness marker.
struct Qualifier {
    std::set<std::string> vars;
    bool fresh = false;

    static Qualifier freshOnly() { return Qualifier{{}, true}; }
    static Qualifier of(std::initializer_list<std::string> names) { return Qualifier{names, false}; }
    bool untracked() const { return vars.empty() && !fresh; }
    Qualifier join(const Qualifier& other) const;
    std::string str() const;
    bool operator==(const Qualifier&) const = default;
};

/// Latent kill effect. `funSelf` is the FUN self-reference marker.
struct KillSet {
    std::set<std::string> vars;
    bool funSelf = false;

    bool empty() const { return vars.empty() && !funSelf; }
    std::string str() const;
    bool operator==(const KillSet&) const = default;
};

enum class TypeKind {
    Base,        // class type or type-level constructor: Int, File, DIV :: TNil, S[Z]
    TypeVar,     // rigid type parameter, or a unification variable when the name starts with '?'
    PathMember,  // f.IsOpen, tree.Elems[L], table.Row
    Projection,  // Table#Row
    DepFun,      // (binder: param) => result, with implicitness and latent kill
    Sigma,       // dependent pair; B may mention the self binder as a path root
    Singleton,   // p.type
    Tuple,
    TypeFunApp,  // Dual[P] or an alias application before normalization
};

struct Type;
using TypeRef = std::shared_ptr<const Type>;

struct Type {
    TypeKind kind = TypeKind::Base;
    std::string name;
    std::string owner;
    Path path;
    std::vector<TypeRef> args;
    std::string binder;
    bool implicit = false;
    bool byName = false;
    KillSet kill;
    Qualifier qual;

    const TypeRef& param() const { return args[0]; }
    const TypeRef& result() const { return args[1]; }
    const TypeRef& sigmaA() const { return args[0]; }
    const TypeRef& sigmaB() const { return args[1]; }
    bool isMeta() const { return kind == TypeKind::TypeVar && !name.empty() && name[0] == '?'; }
};

TypeRef mkBase(std::string name, std::vector<TypeRef> args = {});
TypeRef mkTypeVar(std::string name);
TypeRef mkPathMember(Path path, std::string member, std::vector<TypeRef> args = {});
TypeRef mkProjection(std::string owner, std::string member);
TypeRef mkFun(std::string binder, TypeRef param, TypeRef result, bool implicit = false, KillSet kill = {});
TypeRef mkSigma(std::string self, TypeRef a, TypeRef b);
TypeRef mkSingleton(Path path);
TypeRef mkTuple(std::vector<TypeRef> elems);
TypeRef mkTypeFunApp(std::string name, std::vector<TypeRef> args);
TypeRef mkNat(int n);

TypeRef withQual(const TypeRef& t, Qualifier q);
TypeRef withKill(const TypeRef& t, KillSet k);
TypeRef withArgs(const TypeRef& t, std::vector<TypeRef> args);

TypeRef unitType();
TypeRef intType();
TypeRef boolType();
TypeRef stringType();
bool isBase(const TypeRef& t, const std::string& name);
bool isSigmaLike(const TypeRef& t);  // Σ, or a tuple containing a Σ

/// Renders the type; `pathName` can replace canonical paths with user-facing names.
using PathNamer = std::function<std::string(const Path&)>;
std::string typeToString(const TypeRef& t, const PathNamer& pathName = {});
std::string typeToStringNoQual(const TypeRef& t, const PathNamer& pathName = {});
int natValue(const TypeRef& t);  // -1 when not a closed successor numeral

/// Type-variable substitution (type parameters, metas). Qualifier names in `quals` are replaced too.
struct TypeSubst {
    std::map<std::string, TypeRef> types;
    std::map<std::string, Qualifier> quals;
    bool empty() const { return types.empty() && quals.empty(); }
};
TypeRef applySubst(const TypeRef& t, const TypeSubst& s);
Qualifier applySubst(const Qualifier& q, const TypeSubst& s);

/// Replaces the value variable `from` by the path `to` everywhere it occurs free:
/// path roots, qualifiers and kill sets. Binders that shadow `from` stop the replacement.
TypeRef renameValue(const TypeRef& t, const std::string& from, const Path& to);

/// Replaces value variable `from` inside qualifiers/kill sets by the qualifier `q`; paths rooted at
/// `from` are not touched (callers decide how paths are handled).
TypeRef substQualifierVar(const TypeRef& t, const std::string& from, const Qualifier& q);

void collectFreeValueNames(const TypeRef& t, std::set<std::string>& out);
bool mentionsPathRoot(const TypeRef& t, const std::string& name);
bool containsMeta(const TypeRef& t);
void collectTypeVars(const TypeRef& t, std::set<std::string>& out);

bool structurallyEqual(const TypeRef& a, const TypeRef& b, bool compareQuals = false);

}  // namespace cap
