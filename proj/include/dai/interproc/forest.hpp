#pragma once

// Context-sensitive interprocedural analysis over a forest of per-(procedure,
// call-string) engines, built lazily as calls are demanded.

#include <map>
#include <memory>
#include <set>
#include <tuple>

#include "dai/demand/engine.hpp"

namespace dai {

using Context = std::vector<Loc>;

inline std::string to_string(const Context& c) {
    std::string s = "[";
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i].id);
    return s + "]";
}

// Call string of a callee: the last `k` sites of the caller's string extended by `site`.
inline Context callee_context(int k, const Context& caller, Loc site) {
    if (k <= 0) return {};
    Context c = caller;
    c.push_back(site);
    if (c.size() > static_cast<std::size_t>(k)) c.erase(c.begin(), c.end() - k);
    return c;
}

namespace detail {

// True when replacing `proc`'s CFG by `cfg` makes the call graph cyclic, or a
// call names an unknown procedure.
inline bool cfg_has_call_cycle(const Program& p, const std::string& proc, const Cfg& cfg) {
    std::map<std::string, std::set<std::string>> calls;
    for (const auto& [name, pr] : p.procs) {
        const Cfg& g = name == proc ? cfg : pr.cfg;
        for (const auto& e : g.edges())
            if (e.stmt.is<Call>()) {
                const auto& callee = e.stmt.as<Call>().callee;
                if (!p.procs.count(callee)) return true;
                calls[name].insert(callee);
            }
    }
    std::map<std::string, int> color;
    std::function<bool(const std::string&)> visit = [&](const std::string& n) {
        color[n] = 1;
        for (const auto& m : calls[n]) {
            if (color[m] == 1) return true;
            if (color[m] == 0 && visit(m)) return true;
        }
        color[n] = 2;
        return false;
    };
    for (const auto& [name, pr] : p.procs)
        if (color[name] == 0 && visit(name)) return true;
    return false;
}

} // namespace detail

template <AbstractDomain D>
class DaigForest {
public:
    using State = typename D::State;
    using Key = std::pair<std::string, Context>;
    struct Dep {
        std::string proc;
        Context ctx;
        Name cell;
        friend bool operator<(const Dep& a, const Dep& b) {
            return std::tie(a.proc, a.ctx, a.cell_str) < std::tie(b.proc, b.ctx, b.cell_str);
        }
        std::string cell_str;
    };

    DaigForest(Program p, int k, D dom = D{}, EngineOptions opt = {}, bool share_memo = false)
        : m_prog(std::move(p)), m_k(k), m_dom(std::move(dom)), m_opt(opt) {
        if (share_memo) m_memo = std::make_shared<MemoTable<D>>();
    }

    const Program& program() const { return m_prog; }
    int policy() const { return m_k; }
    const D& domain() const { return m_dom; }

    // engines instantiated so far
    std::vector<Key> keys() const {
        std::vector<Key> r;
        for (const auto& [k, e] : m_engines) r.push_back(k);
        return r;
    }
    bool has_engine(const std::string& proc, const Context& ctx) const { return m_engines.count({proc, ctx}) > 0; }
    const std::map<Key, std::set<Dep>>& call_deps() const { return m_deps; }

    Engine<D>& engine(const std::string& proc, const Context& ctx = {}) {
        auto it = m_engines.find({proc, ctx});
        if (it != m_engines.end()) return *it->second;
        const Procedure& pr = m_prog.proc(proc);
        if (m_k == 0 && !ctx.empty()) throw ContractViolation("non-empty context under the insensitive policy");
        auto e = std::make_unique<Engine<D>>(pr.cfg, m_dom, m_opt, m_memo);
        Engine<D>& ref = *e;
        Context cctx = ctx;
        std::string caller = proc;
        ref.set_call_handler([this, caller, cctx](const Call& c, const State& pre, Loc site, const Name& ret) {
            return call(caller, cctx, c, pre, site, ret);
        });
        m_engines.emplace(Key{proc, ctx}, std::move(e));
        return ref;
    }

    State query(const std::string& proc, const Context& ctx, Loc l) { return engine(proc, ctx).query_loc(l); }
    State query(const std::string& proc, Loc l) { return query(proc, {}, l); }

    // Applies `edit` to every instantiated engine of `proc`, then dirties the
    // recorded return-site cells of all transitive callers.
    EditDelta edit(const std::string& proc, const ProgramEdit& edit) {
        Procedure& pr = m_prog.procs.at(proc);
        EditResult r = apply_edit(pr.cfg, edit);
        if (detail::cfg_has_call_cycle(m_prog, proc, r.cfg))
            throw ValidationError("edit introduces a recursive call");
        pr.cfg = r.cfg;
        std::vector<Key> work;
        for (auto& [k, e] : m_engines) {
            if (k.first != proc) continue;
            e->apply_program_edit(edit);
            work.push_back(k);
        }
        std::set<Key> seen(work.begin(), work.end());
        while (!work.empty()) {
            Key k = work.back();
            work.pop_back();
            auto it = m_deps.find(k);
            if (it == m_deps.end()) continue;
            for (const Dep& d : it->second) {
                Engine<D>& ce = *m_engines.at({d.proc, d.ctx});
                if (!ce.daig().has_cell(d.cell) || !ce.daig().comp_for(d.cell)) continue;
                if (ce.daig().cell(d.cell).filled()) ce.write_cell(d.cell, std::nullopt);
                Key up{d.proc, d.ctx};
                if (seen.insert(up).second) work.push_back(up);
            }
        }
        ++m_edits;
        return r.delta;
    }

    Metrics total_metrics() const {
        Metrics m;
        for (const auto& [k, e] : m_engines) m += e->metrics();
        return m;
    }

    std::vector<std::string> check_all() const {
        std::vector<std::string> errs;
        for (const auto& [k, e] : m_engines)
            for (auto& s : e->check_all()) errs.push_back(k.first + to_string(k.second) + ": " + s);
        return errs;
    }

private:
    State call(const std::string& caller, const Context& cctx, const Call& c, const State& pre, Loc site,
               const Name& ret) {
        const Procedure& callee = m_prog.proc(c.callee);
        Context ctx = callee_context(m_k, cctx, site);
        Engine<D>& ce = engine(c.callee, ctx);
        ce.set_entry_state(m_dom.call_entry(pre, callee.param, c.actual));
        State exit = ce.query_loc(ce.cfg().exit());
        m_deps[{c.callee, ctx}].insert(Dep{caller, cctx, ret, to_string(ret)});
        return m_dom.call_return(pre, c.lhs, exit);
    }

    Program m_prog;
    int m_k;
    D m_dom;
    EngineOptions m_opt;
    std::shared_ptr<MemoTable<D>> m_memo;
    std::map<Key, std::unique_ptr<Engine<D>>> m_engines;
    std::map<Key, std::set<Dep>> m_deps;
    std::uint64_t m_edits = 0;
};

} // namespace dai
