#pragma once

#include <ucontext.h>

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cap/interp.hpp"

namespace cap::interp::detail {

struct Value;
using VPtr = std::shared_ptr<Value>;
struct Env;
using EnvPtr = std::shared_ptr<Env>;

struct Channel {
    std::deque<VPtr> inbox[2];  // inbox[side] holds what the other side sent
    int waiter[2] = {-1, -1};   // task blocked on inbox[side]
};

struct Resource {
    std::string classTag;
    int id = 0;
    std::string state;
    std::string name;  // file name; rows and tables use it for display
    std::vector<std::string> stack;  // DOM: open element tags
    std::string html;
    long long row = 0;
    std::shared_ptr<Channel> chan;
    int side = 0;

    std::string label() const { return classTag + "#" + std::to_string(id); }
};

enum class VKind { Unit, Bool, Int, Str, Closure, Prim, Resource, Sigma, Tuple, Object };

struct Value {
    VKind kind = VKind::Unit;
    bool b = false;
    long long i = 0;
    std::string s;  // Str payload, Object class, Prim key
    const elab::ENode* lambda = nullptr;
    EnvPtr env;
    int arity = 0;
    std::vector<VPtr> elems;  // Sigma {a, b}, Tuple elements, Prim arguments so far
    std::shared_ptr<Resource> res;
};

VPtr unitV();
VPtr boolV(bool b);
VPtr intV(long long i);
VPtr strV(std::string s);
VPtr sigmaV(VPtr a, VPtr b);
VPtr tupleV(std::vector<VPtr> elems);
VPtr resourceV(std::shared_ptr<Resource> r);
std::string showValue(const VPtr& v);

struct Env {
    std::map<std::string, VPtr> vars;
    EnvPtr parent;

    VPtr* find(const std::string& name);
};

/// Thrown inside a task; aborts the whole run.
struct Failure {
    RuntimeError error;
};

/// Cooperative tasks on private stacks; exactly one runs at a time.
class Scheduler {
public:
    Scheduler();
    ~Scheduler();
    Scheduler(const Scheduler&) = delete;
    Scheduler& operator=(const Scheduler&) = delete;

    int spawn(std::function<void()> body);
    /// Suspends the current task until wake() is called for it.
    void block(const SourceSpan& at);
    void wake(int task);
    int current() const { return current_; }

    /// Runs until every task finishes; `onSwitch` sees each change of running task.
    std::optional<RuntimeError> runAll(const std::function<void(int)>& onSwitch);

private:
    struct Task {
        int id = 0;
        ucontext_t ctx{};
        std::unique_ptr<char[]> stack;
        std::function<void()> body;
        bool done = false;
        bool blocked = false;
        SourceSpan blockedAt;
        std::optional<RuntimeError> error;
    };
    static void trampoline();

    std::vector<std::unique_ptr<Task>> tasks_;
    std::deque<int> ready_;
    ucontext_t main_{};
    int current_ = -1;
};

class Interp {
public:
    Interp(const elab::ElabProgram& prog, const Options& opts);
    RunResult run(const std::string& entry);

    VPtr eval(const elab::EPtr& e, const EnvPtr& env);
    VPtr call(const VPtr& fn, const VPtr& arg, const SourceSpan& span);

    // prims.cpp
    VPtr prim(const std::string& key, const std::vector<VPtr>& args, const SourceSpan& span);

    void emit(const std::string& event, const std::string& resource, const std::string& detail);
    [[noreturn]] void guardFail(const Resource& r, const std::string& expected, const std::string& actual,
                                const SourceSpan& span);
    void guardState(Resource& r, const std::string& expected, const SourceSpan& span);
    [[noreturn]] void raise(const std::string& code, const std::string& message, const SourceSpan& span);
    void tick(const SourceSpan& span);

private:
    VPtr global(const std::string& key, const SourceSpan& span);
    VPtr block(const elab::EPtr& e, const EnvPtr& env);
    void bindSite(const elab::ENode& site, const VPtr& v, const EnvPtr& env);
    std::shared_ptr<Resource> newResource(const std::string& classTag, const std::string& state);
    std::shared_ptr<Resource> resourceArg(const VPtr& v, const std::string& classTag, const SourceSpan& span);
    VPtr chanPair();

    const elab::ElabProgram& prog_;
    Options opts_;
    Scheduler sched_;
    std::vector<TraceEvent> trace_;
    std::map<std::string, VPtr> globals_;
    std::map<std::string, std::string> files_;
    size_t inputPos_ = 0;
    long steps_ = 0;
    int depth_ = 0;
    int nextResource_ = 1;
};

}  // namespace cap::interp::detail
