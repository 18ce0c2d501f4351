#include <functional>
#include <ostream>
#include <unordered_map>

#include "interp_internal.hpp"

namespace cap::interp::detail {

namespace {

using Args = std::vector<VPtr>;

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

VPtr token(const std::string& which) {
    auto v = std::make_shared<Value>();
    v->kind = VKind::Object;
    v->s = which;
    return v;
}

VPtr unitSigma() { return sigmaV(unitV(), unitV()); }

}  // namespace

std::shared_ptr<Resource> Interp::newResource(const std::string& classTag, const std::string& state) {
    auto r = std::make_shared<Resource>();
    r->classTag = classTag;
    r->id = nextResource_++;
    r->state = state;
    return r;
}

std::shared_ptr<Resource> Interp::resourceArg(const VPtr& v, const std::string& classTag, const SourceSpan& span) {
    if (v->kind != VKind::Resource || v->res->classTag != classTag)
        raise("R_UNBOUND", "expected a " + classTag + " resource, got " + showValue(v), span);
    return v->res;
}

VPtr Interp::chanPair() {
    auto ch = std::make_shared<Channel>();
    std::vector<VPtr> ends;
    for (int side = 0; side < 2; ++side) {
        auto r = newResource("Chan", "Open");
        r->chan = ch;
        r->side = side;
        ends.push_back(sigmaV(resourceV(r), unitV()));
    }
    return tupleV(std::move(ends));
}

VPtr Interp::prim(const std::string& key, const Args& a, const SourceSpan& span) {
    using Handler = std::function<VPtr(Interp&, const Args&, const SourceSpan&)>;

    auto file = [](Interp& in, const VPtr& v, const SourceSpan& sp) { return in.resourceArg(v, "File", sp); };
    auto newFile = [](Interp& in, const VPtr& name, const std::string& state) {
        auto r = in.newResource("File", state);
        r->name = name->s;
        in.files_.try_emplace(r->name);
        in.emit("call", r->label(), "new " + r->name);
        return r;
    };
    auto transition = [file](const std::string& op, const std::string& from, const std::string& to) {
        return [=](Interp& in, const Args& x, const SourceSpan& sp) {
            auto r = file(in, x[0], sp);
            in.guardState(*r, from, sp);
            r->state = to;
            in.emit("call", r->label(), op + " " + r->name);
            return x[0];
        };
    };
    auto readOp = [file](Interp& in, const VPtr& f, const SourceSpan& sp) {
        auto r = file(in, f, sp);
        in.guardState(*r, "Open", sp);
        in.emit("call", r->label(), "read " + r->name);
        return strV(in.files_[r->name]);
    };
    auto writeOp = [file](Interp& in, const VPtr& f, const VPtr& s, const SourceSpan& sp) {
        auto r = file(in, f, sp);
        in.guardState(*r, "Open", sp);
        in.files_[r->name] += s->s;
        in.emit("call", r->label(), "write " + s->s);
        return unitV();
    };
    auto capTransition = [transition](const std::string& op, const std::string& from, const std::string& to,
                                      bool sigma) {
        auto t = transition(op, from, to);
        return [=](Interp& in, const Args& x, const SourceSpan& sp) {
            t(in, x, sp);
            return sigma ? unitSigma() : unitV();
        };
    };
    auto lockOp = [](const std::string& tag, const std::string& op, const std::string& from, const std::string& to) {
        return [=](Interp& in, const Args& x, const SourceSpan& sp) {
            auto r = in.resourceArg(x[0], tag, sp);
            in.guardState(*r, from, sp);
            r->state = to;
            in.emit("call", r->label(), op);
            return unitSigma();
        };
    };
    auto elemTag = [](const VPtr& v) { return v->s; };
    auto chanOp = [](Interp& in, const VPtr& v, const SourceSpan& sp) {
        auto r = in.resourceArg(v, "Chan", sp);
        in.guardState(*r, "Open", sp);
        return r;
    };
    auto sendTo = [](Interp& in, Resource& r, VPtr x) {
        int peer = 1 - r.side;
        r.chan->inbox[peer].push_back(std::move(x));
        if (r.chan->waiter[peer] >= 0) in.sched_.wake(r.chan->waiter[peer]);
    };
    auto receive = [](Interp& in, Resource& r, const SourceSpan& sp) {
        auto& box = r.chan->inbox[r.side];
        while (box.empty()) {
            r.chan->waiter[r.side] = in.sched_.current();
            in.sched_.block(sp);
            r.chan->waiter[r.side] = -1;
        }
        VPtr v = box.front();
        box.pop_front();
        return v;
    };
    auto select = [chanOp, sendTo](const std::string& which) {
        return [=](Interp& in, const Args& x, const SourceSpan& sp) {
            auto r = chanOp(in, x[0], sp);
            sendTo(in, *r, token(which));
            in.emit("call", r->label(), "send " + which);
            return unitSigma();
        };
    };
    auto noop = [](Interp&, const Args&, const SourceSpan&) { return unitSigma(); };

    static const std::unordered_map<std::string, Handler> table{
            {"println",
             [](Interp& in, const Args& x, const SourceSpan&) {
                 in.emit("output", "", x[0]->s);
                 if (in.opts_.out) *in.opts_.out << x[0]->s << "\n";
                 return unitV();
             }},
            {"readLine",
             [](Interp& in, const Args&, const SourceSpan&) {
                 std::string line = in.inputPos_ < in.opts_.input.size() ? in.opts_.input[in.inputPos_++] : "";
                 in.emit("call", "", "readLine " + line);
                 return strV(line);
             }},
            {"intToString", [](Interp&, const Args& x, const SourceSpan&) { return strV(std::to_string(x[0]->i)); }},
            {"cFuture",
             [](Interp& in, const Args& x, const SourceSpan& sp) {
                 VPtr body = x[0];
                 int id = in.sched_.spawn([&in, body, sp] { in.call(body, unitV(), sp); });
                 in.emit("spawn", "", "task " + std::to_string(id));
                 return unitV();
             }},

            // state classes
            {"newFile", [newFile](Interp& in, const Args& x, const SourceSpan&) {
                 return resourceV(newFile(in, x[0], "Closed"));
             }},
            {"open:ClosedFile", transition("open", "Closed", "Open")},
            {"close:OpenFile", transition("close", "Open", "Closed")},
            {"naiveOpen", transition("open", "Closed", "Open")},
            {"naiveClose", transition("close", "Open", "Closed")},
            {"read", [readOp](Interp& in, const Args& x, const SourceSpan& sp) { return readOp(in, x[0], sp); }},
            {"write:OpenFile",
             [writeOp](Interp& in, const Args& x, const SourceSpan& sp) { return writeOp(in, x[0], x[1], sp); }},
            {"ensureClosed",
             [newFile](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = newFile(in, x[0], "Closed");
                 in.call(x[1], resourceV(r), sp);
                 in.guardState(*r, "Closed", sp);
                 return unitV();
             }},

            // path-dependent capabilities
            {"openDep", capTransition("open", "Closed", "Open", false)},
            {"closeDep", capTransition("close", "Open", "Closed", false)},
            {"readDep", [readOp](Interp& in, const Args& x, const SourceSpan& sp) { return readOp(in, x[0], sp); }},
            {"writeDep",
             [writeOp](Interp& in, const Args& x, const SourceSpan& sp) { return writeOp(in, x[0], x[1], sp); }},
            {"ensureClosedDep",
             [newFile](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = newFile(in, x[0], "Closed");
                 in.call(in.call(x[1], resourceV(r), sp), unitV(), sp);
                 in.guardState(*r, "Closed", sp);
                 return unitV();
             }},
            {"openImp", capTransition("open", "Closed", "Open", false)},
            {"closeImp", capTransition("close", "Open", "Closed", false)},
            {"readImp", [readOp](Interp& in, const Args& x, const SourceSpan& sp) { return readOp(in, x[0], sp); }},
            {"writeImp",
             [writeOp](Interp& in, const Args& x, const SourceSpan& sp) { return writeOp(in, x[0], x[1], sp); }},

            // Σ-returning operations
            {"newFileSigma",
             [newFile](Interp& in, const Args& x, const SourceSpan&) {
                 return sigmaV(resourceV(newFile(in, x[0], "Closed")), unitV());
             }},
            {"openSigma", capTransition("open", "Closed", "Open", true)},
            {"closeSigma", capTransition("close", "Open", "Closed", true)},
            {"readSigma", [readOp](Interp& in, const Args& x, const SourceSpan& sp) { return readOp(in, x[0], sp); }},
            {"writeSigma",
             [writeOp](Interp& in, const Args& x, const SourceSpan& sp) { return writeOp(in, x[0], x[1], sp); }},
            {"ensureClosedSigma",
             [newFile](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = newFile(in, x[0], "Closed");
                 VPtr res = in.call(in.call(x[1], resourceV(r), sp), unitV(), sp);
                 in.guardState(*r, "Closed", sp);
                 if (res->kind != VKind::Sigma) in.raise("R_UNBOUND", "expected a Σ result", sp);
                 return res->elems[0];
             }},

            // scoped access
            {"withFile",
             [newFile](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = newFile(in, x[0], "Open");
                 VPtr res = in.call(x[1], resourceV(r), sp);
                 in.guardState(*r, "Open", sp);
                 r->state = "Closed";
                 in.emit("call", r->label(), "close " + r->name);
                 return res;
             }},
            {"withFileImp",
             [newFile](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = newFile(in, x[0], "Open");
                 VPtr res = in.call(x[1], resourceV(r), sp);
                 in.guardState(*r, "Open", sp);
                 r->state = "Closed";
                 in.emit("call", r->label(), "close " + r->name);
                 return res;
             }},
            {"write:File",
             [writeOp](Interp& in, const Args& x, const SourceSpan& sp) { return writeOp(in, x[0], x[1], sp); }},

            // locks
            {"Table",
             [](Interp& in, const Args& x, const SourceSpan&) {
                 auto r = in.newResource("Table", "Released");
                 r->row = x[0]->i;
                 in.emit("call", r->label(), "new " + std::to_string(x[0]->i));
                 return sigmaV(resourceV(r), unitV());
             }},
            {"lock", lockOp("Table", "lock", "Released", "Held")},
            {"unlock:Table", lockOp("Table", "unlock", "Held", "Released")},
            {"unlock:Row", lockOp("Row", "unlock", "Held", "Released")},
            {"locateRow",
             [](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto t = in.resourceArg(x[0], "Table", sp);
                 in.guardState(*t, "Held", sp);
                 auto r = in.newResource("Row", "Released");
                 r->row = x[1]->i;
                 in.emit("call", t->label(), "locateRow " + std::to_string(r->row) + " " + r->label());
                 return sigmaV(resourceV(r), unitV());
             }},
            {"lockRow",
             [](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto t = in.resourceArg(x[0], "Table", sp);
                 auto r = in.resourceArg(x[1], "Row", sp);
                 in.guardState(*t, "Held", sp);
                 in.guardState(*r, "Released", sp);
                 r->state = "Held";
                 in.emit("call", r->label(), "lock");
                 return unitSigma();
             }},
            {"computeOnRow",
             [](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = in.resourceArg(x[0], "Row", sp);
                 in.guardState(*r, "Held", sp);
                 in.emit("call", r->label(), "compute");
                 return intV(r->row);
             }},

            // DOM
            {"makeDOM",
             [](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto t = in.newResource("DOM", "Open");
                 in.call(in.call(x[0], resourceV(t), sp), unitV(), sp);
                 if (!t->stack.empty()) in.guardFail(*t, "empty", t->stack.back(), sp);
                 in.emit("output", t->label(), t->html);
                 if (in.opts_.out) *in.opts_.out << t->html << "\n";
                 return unitV();
             }},
            {"open:DOM",
             [elemTag](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto t = in.resourceArg(x[0], "DOM", sp);
                 std::string tag = elemTag(x[1]);
                 t->stack.push_back(tag);
                 t->html += "<" + lower(tag) + ">";
                 in.emit("call", t->label(), "open " + tag);
                 return unitSigma();
             }},
            {"close:DOM",
             [elemTag](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto t = in.resourceArg(x[0], "DOM", sp);
                 std::string tag = elemTag(x[1]);
                 if (t->stack.empty()) in.guardFail(*t, tag, "empty", sp);
                 if (t->stack.back() != tag) in.guardFail(*t, tag, t->stack.back(), sp);
                 t->stack.pop_back();
                 t->html += "</" + lower(tag) + ">";
                 in.emit("call", t->label(), "close " + tag);
                 return unitSigma();
             }},
            {"addText",
             [elemTag](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto t = in.resourceArg(x[0], "DOM", sp);
                 std::string tag = elemTag(x[1]);
                 if (t->stack.empty()) in.guardFail(*t, tag, "empty", sp);
                 if (t->stack.back() != tag) in.guardFail(*t, tag, t->stack.back(), sp);
                 t->html += x[2]->s;
                 in.emit("call", t->label(), "addText " + x[2]->s);
                 return unitV();
             }},

            // channels
            {"Chan", [](Interp& in, const Args&, const SourceSpan&) { return in.chanPair(); }},
            {"send",
             [chanOp, sendTo](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = chanOp(in, x[0], sp);
                 sendTo(in, *r, x[1]);
                 in.emit("call", r->label(), "send " + showValue(x[1]));
                 return unitSigma();
             }},
            {"recv",
             [chanOp, receive](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = chanOp(in, x[0], sp);
                 VPtr v = receive(in, *r, sp);
                 if (v->kind == VKind::Object) in.guardFail(*r, "a value", "choice " + v->s, sp);
                 in.emit("call", r->label(), "recv " + showValue(v));
                 return sigmaV(v, unitV());
             }},
            {"close:Chan",
             [chanOp](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = chanOp(in, x[0], sp);
                 r->state = "Closed";
                 in.emit("call", r->label(), "close");
                 return unitV();
             }},
            {"left", select("left")},
            {"right", select("right")},
            {"branch",
             [chanOp, receive](Interp& in, const Args& x, const SourceSpan& sp) {
                 auto r = chanOp(in, x[0], sp);
                 VPtr v = receive(in, *r, sp);
                 if (v->kind != VKind::Object) in.guardFail(*r, "a choice", showValue(v), sp);
                 in.emit("call", r->label(), "recv " + v->s);
                 return in.call(v->s == "left" ? x[2] : x[3], unitV(), sp);
             }},
            {"recPush", noop},
            {"recTop", noop},
            {"recPop", noop},
    };
    auto it = table.find(key);
    if (it == table.end()) raise("R_UNBOUND", "no primitive for " + key, span);
    return it->second(*this, a, span);
}

}  // namespace cap::interp::detail
