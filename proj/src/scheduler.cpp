#include "interp_internal.hpp"

namespace cap::interp::detail {

namespace {

constexpr size_t kStackSize = size_t{64} << 20;  // reserved, touched lazily

thread_local Scheduler* gActive = nullptr;

}  // namespace

Scheduler::Scheduler() = default;
Scheduler::~Scheduler() = default;

int Scheduler::spawn(std::function<void()> body) {
    auto t = std::make_unique<Task>();
    t->id = static_cast<int>(tasks_.size());
    t->body = std::move(body);
    t->stack.reset(new char[kStackSize]);
    getcontext(&t->ctx);
    t->ctx.uc_stack.ss_sp = t->stack.get();
    t->ctx.uc_stack.ss_size = kStackSize;
    t->ctx.uc_link = &main_;
    makecontext(&t->ctx, &Scheduler::trampoline, 0);
    ready_.push_back(t->id);
    tasks_.push_back(std::move(t));
    return tasks_.back()->id;
}

void Scheduler::trampoline() {
    Scheduler* s = gActive;
    Task& t = *s->tasks_[s->current_];
    try {
        t.body();
    } catch (const Failure& f) {
        t.error = f.error;
    } catch (const std::exception& e) {
        t.error = RuntimeError{"R_UNBOUND", e.what(), {}};
    }
    t.done = true;
    // returning resumes main_ through uc_link
}

void Scheduler::block(const SourceSpan& at) {
    Task& t = *tasks_[current_];
    t.blocked = true;
    t.blockedAt = at;
    swapcontext(&t.ctx, &main_);
}

void Scheduler::wake(int task) {
    Task& t = *tasks_[task];
    if (!t.blocked) return;
    t.blocked = false;
    ready_.push_back(task);
}

std::optional<RuntimeError> Scheduler::runAll(const std::function<void(int)>& onSwitch) {
    Scheduler* saved = gActive;
    int last = -1;
    std::optional<RuntimeError> result;
    while (true) {
        if (ready_.empty()) {
            for (const auto& t : tasks_)
                if (!t->done) {
                    result = RuntimeError{"R_DEADLOCK", "every remaining task is blocked", t->blockedAt};
                    break;
                }
            break;
        }
        int id = ready_.front();
        ready_.pop_front();
        if (last != -1 && id != last) onSwitch(id);
        last = id;
        current_ = id;
        gActive = this;
        swapcontext(&main_, &tasks_[id]->ctx);
        gActive = saved;
        Task& t = *tasks_[id];
        if (t.error) {
            result = t.error;
            break;
        }
        if (!t.done && !t.blocked) ready_.push_back(id);
    }
    current_ = -1;
    return result;
}

}  // namespace cap::interp::detail
